use proptest::prelude::*;

use saacm_core::cma::{CmaParams, CmaState};
use saacm_core::harness::{bootstrap_ecdf, ert_of, TrialRecord};
use saacm_core::numerics::{random_orthogonal, sym_eigen, Rng, SymMatrix};
use saacm_core::restart::{run_algorithm, Algorithm, AlgorithmSettings, Regime};
use saacm_core::saacm::{adapt_nhat, SaAcmConfig};
use saacm_core::surrogate::{
    rank_error_scores, train, KernelTransform, Sample, SurrogateHyperParams,
};
use saacm_core::testbed::{make_objective, TargetSet};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

fn spd(seed: u64, d: usize, log_cond: f64) -> SymMatrix {
    let mut rng = Rng::new(seed);
    let q = random_orthogonal(&mut rng, d);
    let eig: Vec<f64> = (0..d)
        .map(|i| 10f64.powf(log_cond * i as f64 / (d - 1).max(1) as f64))
        .collect();
    SymMatrix::from_eigen(&q, &eig)
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn state(x0: &[f64]) -> CmaState {
    let params = CmaParams::new(x0.len(), None, true).unwrap();
    CmaState::new(x0, 1.5, params).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), d in 2usize..16, log_cond in 0.0f64..12.0) {
        let c = spd(seed, d, log_cond);
        let e = sym_eigen(&c).unwrap();
        let r = e.reconstruct();
        let scale = c.as_matrix().frobenius();
        prop_assert!(r.as_matrix().max_abs_diff(c.as_matrix()) <= 1e-9 * scale);
    }

    #[test]
    fn rng_is_pure(seed in any::<u64>(), name in "[a-z]{1,8}") {
        let mut a = Rng::stream(seed, &name);
        let mut b = Rng::stream(seed, &name);
        for _ in 0..16 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn translation_invariance(seed in any::<u64>(), shift in prop::collection::vec(-3.0f64..3.0, 4)) {
        let x0 = vec![1.0, -2.0, 0.5, 3.0];
        let shifted: Vec<f64> = x0.iter().zip(&shift).map(|(x, a)| x + a).collect();
        let (mut s, mut t) = (state(&x0), state(&shifted));
        let (mut rs, mut rt) = (Rng::new(seed), Rng::new(seed));
        for _ in 0..15 {
            let mut ps = s.ask(&mut rs);
            let mut pt = t.ask(&mut rt);
            let fs: Vec<f64> = ps.points.iter().map(|x| sphere(x)).collect();
            let ft: Vec<f64> = pt
                .points
                .iter()
                .map(|x| sphere(&x.iter().zip(&shift).map(|(v, a)| v - a).collect::<Vec<_>>()))
                .collect();
            let rank = |f: &[f64]| {
                let mut i: Vec<usize> = (0..f.len()).collect();
                i.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
                i
            };
            prop_assert_eq!(rank(&fs), rank(&ft));
            for (a, b) in fs.iter().zip(&ft) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
            ps.set_fitness(fs);
            pt.set_fitness(ft);
            s.tell(&ps).unwrap();
            t.tell(&pt).unwrap();
        }
    }

    #[test]
    fn tell_depends_on_ranks_only(seed in any::<u64>(), k in 1u32..4, c in -50.0f64..50.0) {
        let x0 = vec![0.5; 5];
        let (mut a, mut b) = (state(&x0), state(&x0));
        let mut rng = Rng::new(seed);
        for _ in 0..10 {
            let pop = a.ask(&mut rng);
            let f: Vec<f64> = pop.points.iter().map(|x| sphere(x)).collect();
            let g: Vec<f64> = f.iter().map(|v| v.powi(2 * k as i32 + 1) + c).collect();
            let (mut pa, mut pb) = (pop.clone(), pop);
            pa.set_fitness(f);
            pb.set_fitness(g);
            a.tell(&pa).unwrap();
            b.tell(&pb).unwrap();
            prop_assert_eq!(a.mean(), b.mean());
            prop_assert_eq!(a.cov(), b.cov());
            prop_assert_eq!(a.sigma(), b.sigma());
        }
    }

    #[test]
    fn mean_in_hull_and_cov_positive(seed in any::<u64>(), d in 2usize..8) {
        let x0 = vec![1.0; d];
        let mut s = state(&x0);
        let mut rng = Rng::new(seed);
        let mu = s.params().mu;
        for _ in 0..20 {
            let mut pop = s.ask(&mut rng);
            let f: Vec<f64> = pop
                .points
                .iter()
                .map(|x| x.iter().enumerate().map(|(i, v)| 10f64.powi(i as i32) * v * v).sum())
                .collect();
            pop.set_fitness(f);
            let best: Vec<usize> = pop.ranking().unwrap()[..mu].to_vec();
            s.tell(&pop).unwrap();
            for j in 0..d {
                let lo = best.iter().map(|&i| pop.points[i][j]).fold(f64::INFINITY, f64::min);
                let hi = best.iter().map(|&i| pop.points[i][j]).fold(f64::NEG_INFINITY, f64::max);
                let m = s.mean()[j];
                let tol = 1e-12 * (lo.abs() + hi.abs()).max(1.0);
                prop_assert!(m >= lo - tol && m <= hi + tol);
            }
            let c = s.cov();
            for i in 0..d {
                for j in 0..d {
                    prop_assert_eq!(c.get(i, j), c.get(j, i));
                }
            }
            prop_assert!(s.eigen().d.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn rank_error_bounded_and_permutation_symmetric(
        f in prop::collection::vec(-10.0f64..10.0, 2..40),
        seed in any::<u64>(),
    ) {
        let mut rng = Rng::new(seed);
        let p: Vec<f64> = f.iter().map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let e = rank_error_scores(&f, &p);
        prop_assert!((0.0..=1.0).contains(&e));
        let perm = rng.permutation(f.len());
        let fp: Vec<f64> = perm.iter().map(|&i| f[i]).collect();
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        prop_assert_eq!(e, rank_error_scores(&fp, &pp));
    }

    #[test]
    fn training_sees_ranks_only(seed in any::<u64>(), c in -5.0f64..5.0) {
        let mut rng = Rng::new(seed);
        let xs: Vec<Vec<f64>> = (0..25).map(|_| rng.gaussian_vector(3)).collect();
        let f: Vec<f64> = xs.iter().map(|x| sphere(x) + x[0]).collect();
        let hp = SurrogateHyperParams {
            n_train: xs.len(),
            iter_factor: 50.0,
            c_base: 1e4,
            c_pow: 1.0,
            sigma_factor: 1.0,
        };
        let t = KernelTransform::build(&SymMatrix::identity(3), &xs, 1.0).unwrap();
        let a: Vec<Sample> = xs.iter().zip(&f).map(|(x, v)| Sample::new(x.clone(), *v)).collect();
        let b: Vec<Sample> = xs
            .iter()
            .zip(&f)
            .map(|(x, v)| Sample::new(x.clone(), v.exp() + c))
            .collect();
        let ma = train(&a, &hp, t.clone()).unwrap();
        let mb = train(&b, &hp, t).unwrap();
        prop_assert_eq!(ma.alpha(), mb.alpha());
    }

    #[test]
    fn nhat_non_increasing(a in 0.0f64..1.0, b in 0.0f64..1.0, nhat_max in 0usize..40) {
        let cfg = SaAcmConfig { nhat_max, ..SaAcmConfig::default() };
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(adapt_nhat(lo, &cfg) >= adapt_nhat(hi, &cfg));
        prop_assert!(adapt_nhat(lo, &cfg) <= nhat_max);
    }

    #[test]
    fn ert_bounds(hits in prop::collection::vec(prop::option::of(1u64..10_000), 1..12)) {
        let records: Vec<TrialRecord> = hits
            .iter()
            .map(|h| record(*h, h.unwrap_or(10_000)))
            .collect();
        let e = ert_of(records.iter(), 1e-8).unwrap();
        match hits.iter().flatten().min() {
            Some(&best) => prop_assert!(e.ert >= best as f64),
            None => prop_assert!(e.ert.is_infinite()),
        }
        if let [Some(h)] = hits.as_slice() {
            prop_assert_eq!(e.ert, *h as f64);
        }
    }

    #[test]
    fn ecdf_monotone_and_success_never_lowers(
        hits in prop::collection::vec(prop::option::of(10u64..5_000), 1..10),
        seed in any::<u64>(),
    ) {
        let targets = TargetSet::new(vec![1e-8]).unwrap();
        let records: Vec<TrialRecord> = hits.iter().map(|h| record(*h, 5_000)).collect();
        let mut better = records.clone();
        better.push(record(Some(10), 10));
        let base = curve(&records, &targets, seed);
        let more = curve(&better, &targets, seed ^ 1);
        for w in base.windows(2) {
            prop_assert!(w[0].1 <= w[1].1);
        }
        prop_assert!(base.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
        // Independent bootstrap draws: allow sampling noise.
        for &(x, p) in &base {
            if let Some(&(_, q)) = more.iter().find(|(y, _)| *y == x) {
                prop_assert!(q >= p - 0.08, "x {x}: {p} -> {q}");
            }
        }
    }
}

fn record(hit: Option<u64>, total: u64) -> TrialRecord {
    TrialRecord {
        algorithm: Algorithm::IpopACma,
        fid: 1,
        instance: 1,
        dim: 2,
        seed: 0,
        total_evals: hit.unwrap_or(total),
        final_delta_f: 1.0,
        targets: vec![1e-8],
        hits: vec![hit],
    }
}

fn curve(records: &[TrialRecord], targets: &TargetSet, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = Rng::new(seed);
    let curves = bootstrap_ecdf(records, targets, 2_000, &mut rng).unwrap();
    curves
        .into_iter()
        .find(|c| c.group == "all")
        .unwrap()
        .points
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn restart_bookkeeping(seed in any::<u64>(), fid in 1usize..25, budget in 200u64..3_000) {
        for algorithm in Algorithm::ALL {
            let settings = AlgorithmSettings::new(algorithm);
            let mut obj = make_objective(fid, 1, 2).unwrap().with_budget(budget);
            let out = run_algorithm(&settings, &mut obj, budget, &mut Rng::new(seed)).unwrap();
            let ledger = &out.ledger;
            prop_assert!(obj.evaluations() <= budget);
            prop_assert_eq!(ledger.total_evaluations(), obj.evaluations());
            let best = ledger.runs.iter().map(|r| r.best_f).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(out.best_f, best);
            let large: Vec<usize> = ledger
                .runs
                .iter()
                .filter(|r| r.regime != Regime::Small)
                .map(|r| r.lambda)
                .collect();
            for w in large.windows(2) {
                prop_assert_eq!(w[1], 2 * w[0]);
            }
        }
    }
}
