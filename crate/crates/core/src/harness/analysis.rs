//! ERT, bootstrapped runtime distributions, rank-sum tests and speedups.
//! All functions are pure in the trial records.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

use super::records::{group_records, TrialRecord};
use super::HarnessError;
use crate::numerics::Rng;
use crate::restart::Algorithm;
use crate::testbed::{FunctionGroup, TargetSet};

/// Expected running time for one target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ert {
    /// `+∞` when no trial reached the target.
    pub ert: f64,
    pub n_success: usize,
    pub n_trials: usize,
}

/// Evaluations spent before reaching `target`, summed over all trials and
/// divided by the number of successful trials.
pub fn ert_of<'a>(
    records: impl IntoIterator<Item = &'a TrialRecord>,
    target: f64,
) -> Result<Ert, HarnessError> {
    let (mut spent, mut n_success, mut n_trials) = (0u64, 0, 0);
    for r in records {
        let hit = r.hit(target)?;
        spent += hit.unwrap_or(r.total_evals);
        n_success += usize::from(hit.is_some());
        n_trials += 1;
    }
    if n_trials == 0 {
        return Err(HarnessError::InvalidSample("no trials".into()));
    }
    let ert = if n_success == 0 {
        f64::INFINITY
    } else {
        spent as f64 / n_success as f64
    };
    Ok(Ert {
        ert,
        n_success,
        n_trials,
    })
}

/// ERT of `algorithm` on (`fid`, `dim`) for `target`.
pub fn compute_ert(
    records: &[TrialRecord],
    fid: usize,
    dim: usize,
    algorithm: Algorithm,
    target: f64,
) -> Result<Ert, HarnessError> {
    ert_of(
        records
            .iter()
            .filter(|r| r.fid == fid && r.dim == dim && r.algorithm == algorithm),
        target,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErtRow {
    pub algorithm: Algorithm,
    pub fid: usize,
    pub dim: usize,
    pub delta_f: f64,
    pub ert: Ert,
}

/// One row per (algorithm, fid, D, target), sorted.
pub fn ert_table(records: &[TrialRecord], targets: &[f64]) -> Result<Vec<ErtRow>, HarnessError> {
    let mut rows = Vec::new();
    for ((algorithm, fid, dim), group) in group_records(records) {
        for &t in targets {
            rows.push(ErtRow {
                algorithm,
                fid,
                dim,
                delta_f: t,
                ert: ert_of(group.iter().copied(), t)?,
            });
        }
    }
    Ok(rows)
}

/// Empirical distribution of bootstrapped runtimes for one
/// (group, D, algorithm).
#[derive(Clone, Debug, PartialEq)]
pub struct EcdfCurve {
    pub group: String,
    pub dim: usize,
    pub algorithm: Algorithm,
    /// `(evaluations / D, proportion)`, increasing in the first component.
    pub points: Vec<(f64, f64)>,
}

/// Grid points per decade of evaluations / D.
pub const ECDF_GRID_PER_DECADE: usize = 20;

/// Simulated restart runtimes: draw trials with replacement until one
/// reaches `target`, summing the evaluations of all drawn trials. `+∞` when
/// no trial ever succeeds.
pub fn bootstrap_runtimes(
    trials: &[&TrialRecord],
    target: f64,
    n_boot: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>, HarnessError> {
    let hits = trials
        .iter()
        .map(|r| r.hit(target))
        .collect::<Result<Vec<_>, _>>()?;
    if hits.iter().all(Option::is_none) {
        return Ok(vec![f64::INFINITY; n_boot]);
    }
    let mut out = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let mut total = 0u64;
        loop {
            let k = rng.below(trials.len());
            match hits[k] {
                Some(e) => {
                    total += e;
                    break;
                }
                None => total += trials[k].total_evals,
            }
        }
        out.push(total as f64);
    }
    Ok(out)
}

fn ecdf_grid(lo: f64, hi: f64) -> Vec<f64> {
    let per = ECDF_GRID_PER_DECADE as f64;
    let start = (lo.log10() * per).floor() as i64;
    let end = (hi.log10() * per).ceil() as i64;
    let mut grid: Vec<f64> = (start..=end)
        .map(|k| 10f64.powf(k as f64 / per))
        .filter(|&x| x <= hi * (1.0 + 1e-12))
        .collect();
    if grid.last().is_none_or(|&x| x < hi) {
        grid.push(hi);
    }
    grid
}

/// Bootstrapped runtime ECDFs per (group, D, algorithm), with an extra
/// `all` group over every function. The curve at `x` is the fraction of
/// (function, target, bootstrap sample) runtimes `≤ x·D`; the grid runs up
/// to the largest single-trial evaluation count.
pub fn bootstrap_ecdf(
    records: &[TrialRecord],
    targets: &TargetSet,
    n_boot: usize,
    rng: &mut Rng,
) -> Result<Vec<EcdfCurve>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::InvalidSample("no trials".into()));
    }
    // (group, D, algorithm) -> runtimes / D
    let mut pools: BTreeMap<(String, usize, Algorithm), Vec<f64>> = BTreeMap::new();
    let mut max_x: BTreeMap<(usize, Algorithm), f64> = BTreeMap::new();
    for ((algorithm, fid, dim), group) in group_records(records) {
        let d = dim as f64;
        let mut runtimes = Vec::with_capacity(targets.len() * n_boot);
        for &t in targets.as_slice() {
            let sims = bootstrap_runtimes(&group, t, n_boot, rng)?;
            runtimes.extend(sims.into_iter().map(|e| e / d));
        }
        let top = group
            .iter()
            .map(|r| r.total_evals as f64 / d)
            .fold(0.0, f64::max);
        let entry = max_x.entry((dim, algorithm)).or_insert(0.0);
        *entry = entry.max(top);
        let name = FunctionGroup::of(fid)
            .map_or("unknown", |g| g.name())
            .to_string();
        for g in [name, "all".to_string()] {
            pools
                .entry((g, dim, algorithm))
                .or_default()
                .extend(&runtimes);
        }
    }
    let mut curves = Vec::new();
    for ((group, dim, algorithm), mut values) in pools {
        values.sort_by(f64::total_cmp);
        let hi = max_x[&(dim, algorithm)].max(1.0 / dim as f64);
        let lo = values
            .iter()
            .copied()
            .find(|v| *v > 0.0)
            .unwrap_or(hi)
            .min(hi);
        let n = values.len() as f64;
        let points = ecdf_grid(lo, hi)
            .into_iter()
            .map(|x| {
                let below = values.partition_point(|&v| v <= x * (1.0 + 1e-12));
                (x, below as f64 / n)
            })
            .collect();
        curves.push(EcdfCurve {
            group,
            dim,
            algorithm,
            points,
        });
    }
    Ok(curves)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSum {
    /// Mann–Whitney U of the first sample.
    pub u: f64,
    pub z: f64,
    /// Two-sided p-value from the normal approximation with tie correction.
    pub p_value: f64,
}

/// Two-sided Wilcoxon rank-sum test.
pub fn rank_sum_test(a: &[f64], b: &[f64]) -> Result<RankSum, HarnessError> {
    if a.is_empty() || b.is_empty() {
        return Err(HarnessError::InvalidSample("empty sample".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(HarnessError::InvalidSample("NaN in sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut all: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut rank_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_a += avg * all[i..=j].iter().filter(|e| e.1).count() as f64;
        i = j + 1;
    }
    let u = rank_a - na * (na + 1.0) / 2.0;
    let nf = n as f64;
    let var = na * nb / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)).max(1.0));
    let mean = na * nb / 2.0;
    if var <= 0.0 {
        return Ok(RankSum {
            u,
            z: 0.0,
            p_value: 1.0,
        });
    }
    let z = (u - mean) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
    Ok(RankSum { u, z, p_value })
}

/// Test samples for one target: successful trials give `−1/evaluations`,
/// the others their best Δf after as many evaluations as the shortest
/// unsuccessful trial of either sample.
pub fn rank_sum_samples(
    a: &[&TrialRecord],
    b: &[&TrialRecord],
    target: f64,
) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    let mut horizon = u64::MAX;
    for r in a.iter().chain(b) {
        if r.hit(target)?.is_none() {
            horizon = horizon.min(r.total_evals);
        }
    }
    let sample = |rs: &[&TrialRecord]| -> Result<Vec<f64>, HarnessError> {
        rs.iter()
            .map(|r| {
                Ok(match r.hit(target)? {
                    Some(e) => -1.0 / e as f64,
                    None => r.delta_f_at(horizon),
                })
            })
            .collect()
    };
    Ok((sample(a)?, sample(b)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Speedup {
    /// `ERT_b / ERT_a`.
    Ratio(f64),
    Incomparable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedupRow {
    pub fid: usize,
    pub dim: usize,
    pub delta_f: f64,
    pub ert_a: f64,
    pub ert_b: f64,
    pub speedup: Speedup,
}

/// Per (fid, D, target) present in both record sets: `ERT_b / ERT_a`, so
/// values above 1 mean `a` is faster.
pub fn speedup_table(
    records_a: &[TrialRecord],
    records_b: &[TrialRecord],
    targets: &[f64],
) -> Result<Vec<SpeedupRow>, HarnessError> {
    let index = |rs: &[TrialRecord]| {
        let mut m: BTreeMap<(usize, usize), Vec<TrialRecord>> = BTreeMap::new();
        for r in rs {
            m.entry((r.fid, r.dim)).or_default().push(r.clone());
        }
        m
    };
    let (ia, ib) = (index(records_a), index(records_b));
    let mut rows = Vec::new();
    for ((fid, dim), ra) in &ia {
        let Some(rb) = ib.get(&(*fid, *dim)) else {
            continue;
        };
        for &t in targets {
            let ea = ert_of(ra, t)?.ert;
            let eb = ert_of(rb, t)?.ert;
            let speedup = if ea.is_finite() && eb.is_finite() {
                Speedup::Ratio(eb / ea)
            } else {
                Speedup::Incomparable
            };
            rows.push(SpeedupRow {
                fid: *fid,
                dim: *dim,
                delta_f: t,
                ert_a: ea,
                ert_b: eb,
                speedup,
            });
        }
    }
    Ok(rows)
}
