//! Quick invariant checks run by the `selftest` command.

use crate::cma::{CmaParams, CmaState};
use crate::numerics::Rng;
use crate::restart::{run_algorithm, Algorithm, AlgorithmSettings};
use crate::saacm::{adapt_nhat, SaAcmConfig, SaAcmState};
use crate::surrogate::rank_error_scores;
use crate::testbed::{Objective, Transformed};

#[derive(Clone, Debug, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(), String>) -> SelfCheck {
    match result {
        Ok(()) => SelfCheck {
            name,
            passed: true,
            detail: String::new(),
        },
        Err(detail) => SelfCheck {
            name,
            passed: false,
            detail,
        },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn saacm_state(dim: usize, cfg: SaAcmConfig, seed: u64) -> Result<(SaAcmState, Rng), String> {
    let mut rng = Rng::stream(seed, "init");
    let x0: Vec<f64> = (0..dim).map(|_| rng.uniform_in(-4.0, 4.0)).collect();
    let params = CmaParams::new(dim, None, true).map_err(|e| e.to_string())?;
    let cma = CmaState::new(&x0, 2.0, params).map_err(|e| e.to_string())?;
    let state = SaAcmState::new(cma, cfg).map_err(|e| e.to_string())?;
    Ok((state, Rng::stream(seed, "run")))
}

fn rank_error_endpoints() -> Result<(), String> {
    let f: Vec<f64> = (0..20).map(f64::from).collect();
    let rev: Vec<f64> = f.iter().rev().copied().collect();
    let same = rank_error_scores(&f, &f);
    let opposite = rank_error_scores(&f, &rev);
    ensure(same == 0.0 && opposite == 1.0, || {
        format!("got {same} and {opposite}")
    })
}

fn nhat_endpoints() -> Result<(), String> {
    let cfg = SaAcmConfig::default();
    let got = (
        adapt_nhat(0.0, &cfg),
        adapt_nhat(cfg.tau_err, &cfg),
        adapt_nhat(cfg.tau_err / 2.0, &cfg),
    );
    ensure(got == (cfg.nhat_max, 0, cfg.nhat_max / 2), || {
        format!("got {got:?}")
    })
}

fn counter_bookkeeping() -> Result<(), String> {
    let (mut s, mut rng) = saacm_state(4, SaAcmConfig::default(), 3)?;
    let mut obj = Objective::new(1, 1, 4).map_err(|e| e.to_string())?;
    for _ in 0..25 {
        let before = obj.evaluations();
        let r = s
            .saacm_cycle(&mut obj, &mut rng)
            .map_err(|e| e.to_string())?;
        let used = obj.evaluations() - before;
        ensure(
            used == s.cma().lambda() as u64 && r.true_evaluations == used,
            || format!("cycle {} used {used} evaluations", r.cycle),
        )?;
    }
    Ok(())
}

fn disabled_matches_plain() -> Result<(), String> {
    let (mut s, mut rng) = saacm_state(4, SaAcmConfig::disabled(), 7)?;
    let (p, mut prng) = saacm_state(4, SaAcmConfig::disabled(), 7)?;
    let mut plain = p.cma().clone();
    let mut a = Objective::new(8, 2, 4).map_err(|e| e.to_string())?;
    let mut b = Objective::new(8, 2, 4).map_err(|e| e.to_string())?;
    for _ in 0..40 {
        s.saacm_cycle(&mut a, &mut rng).map_err(|e| e.to_string())?;
        let mut pop = plain.ask(&mut prng);
        let f = pop
            .points
            .iter()
            .map(|x| b.evaluate(x))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        pop.set_fitness(f);
        plain.tell(&pop).map_err(|e| e.to_string())?;
    }
    ensure(s.cma() == &plain, || "trajectories differ".into())
}

fn monotone_invariance() -> Result<(), String> {
    let (mut a, mut ra) = saacm_state(3, SaAcmConfig::default(), 11)?;
    let (mut b, mut rb) = saacm_state(3, SaAcmConfig::default(), 11)?;
    let mut fa = Objective::new(1, 1, 3).map_err(|e| e.to_string())?;
    let mut fb = Transformed::new(
        Objective::new(1, 1, 3).map_err(|e| e.to_string())?,
        |f: f64| f.powi(3) + 7.0,
    );
    for _ in 0..20 {
        let x = a.saacm_cycle(&mut fa, &mut ra).map_err(|e| e.to_string())?;
        let y = b.saacm_cycle(&mut fb, &mut rb).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("cycle {} reports differ", x.cycle))?;
    }
    ensure(same_distribution(a.cma(), b.cma()), || {
        "final distributions differ".into()
    })
}

/// Equal search distributions; stored fitness values are not compared.
pub fn same_distribution(a: &CmaState, b: &CmaState) -> bool {
    a.mean() == b.mean()
        && a.sigma() == b.sigma()
        && a.cov() == b.cov()
        && a.p_sigma() == b.p_sigma()
        && a.p_c() == b.p_c()
        && a.generation() == b.generation()
}

fn optimum_values() -> Result<(), String> {
    for fid in 1..=24 {
        let obj = Objective::new(fid, 1, 5).map_err(|e| e.to_string())?;
        let f = obj.value(obj.x_opt()).map_err(|e| e.to_string())?;
        let delta = f - obj.f_opt();
        ensure(delta.abs() <= 1e-9 * obj.f_opt().abs().max(1.0), || {
            format!("f{fid}: f(x_opt) - f_opt = {delta:e}")
        })?;
    }
    Ok(())
}

fn restart_budget() -> Result<(), String> {
    for algorithm in Algorithm::ALL {
        let settings = AlgorithmSettings::new(algorithm);
        let budget = 600;
        let mut obj = Objective::new(8, 1, 2)
            .map_err(|e| e.to_string())?
            .with_budget(budget);
        let mut rng = Rng::new(5);
        let out =
            run_algorithm(&settings, &mut obj, budget, &mut rng).map_err(|e| e.to_string())?;
        let total = out.ledger.total_evaluations();
        ensure(total == obj.evaluations() && total <= budget, || {
            format!("{algorithm}: ledger {total}, counter {}", obj.evaluations())
        })?;
    }
    Ok(())
}

/// Runs every check; takes a few seconds.
pub fn selftest() -> Vec<SelfCheck> {
    vec![
        check("rank error endpoints", rank_error_endpoints()),
        check("n-hat mapping endpoints", nhat_endpoints()),
        check("true evaluations per cycle", counter_bookkeeping()),
        check(
            "disabled surrogate equals plain CMA-ES",
            disabled_matches_plain(),
        ),
        check(
            "rank-preserving transform invariance",
            monotone_invariance(),
        ),
        check("optimum values", optimum_values()),
        check("restart budget bookkeeping", restart_budget()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
