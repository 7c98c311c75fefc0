use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use saacm_core::harness::{
    bootstrap_ecdf, ert_table, load_trials, loglog_slope, rank_sum_samples, rank_sum_test,
    run_experiment, sci, selftest as run_selftest, speedup_table, timing_experiment,
    training_scaling, write_ecdf, write_ert, write_speedup, write_timing, ExperimentConfig,
    TimingConfig, TrialRecord, TRIALS_FILE,
};
use saacm_core::numerics::Rng;
use saacm_core::restart::Algorithm;
use saacm_core::testbed::{TargetSet, FINAL_TARGET};

use crate::settings::{parse_list, parse_ranges, parse_value, Settings};
use crate::CliError;

const DEFAULT_OUT: &str = "results";

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn algorithm(s: &Settings, key: &str, default: Option<Algorithm>) -> Result<Algorithm, CliError> {
    let name = match default {
        Some(d) => s.or(key, d.name()),
        None => s.require(key)?,
    };
    name.parse().map_err(usage)
}

fn targets(s: &Settings, default: &[f64]) -> Result<Vec<f64>, CliError> {
    match s.get("target") {
        Some(v) => {
            let t: Vec<f64> = parse_list("target", &v)?;
            if t.is_empty() || t.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(usage(format!("invalid value for target: {v:?}")));
            }
            Ok(t)
        }
        None => Ok(default.to_vec()),
    }
}

fn out_dir(s: &Settings) -> PathBuf {
    PathBuf::from(s.or("out", DEFAULT_OUT))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn read_records(path: &Path) -> Result<Vec<TrialRecord>, CliError> {
    if !path.exists() {
        return Err(CliError::Failure(format!(
            "no trials file at {}",
            path.display()
        )));
    }
    Ok(load_trials(path)?)
}

fn write_echo(dir: &Path, command: &str, s: &Settings) -> Result<(), CliError> {
    fs::write(dir.join(format!("{command}.config.txt")), s.echo())?;
    Ok(())
}

pub fn experiment_config(s: &Settings) -> Result<ExperimentConfig, CliError> {
    let algo = algorithm(s, "algo", None)?;
    let mut cfg = ExperimentConfig::new(algo, out_dir(s));
    cfg.fids = parse_list("fid", &s.require("fid")?)?;
    cfg.dims = parse_list("dim", &s.require("dim")?)?;
    if let Some(v) = s.get("instances") {
        cfg.instances = parse_ranges("instances", &v)?;
    }
    cfg.budget_mult = s.parsed("budget-mult", cfg.budget_mult)?;
    cfg.seed = s.parsed("seed", cfg.seed)?;
    cfg.jobs = s.parsed("jobs", cfg.jobs)?;
    let sa = &mut cfg.settings.saacm;
    sa.g_start = s.parsed("g-start", sa.g_start)?;
    sa.nhat_max = s.parsed("nhat-max", sa.nhat_max)?;
    sa.lambda_hyp = s.parsed("lambda-hyp", sa.lambda_hyp)?;
    if let Some(v) = s.get("no-surrogate") {
        if parse_value::<bool>("no-surrogate", &v)? {
            sa.nhat_max = 0;
        }
    }
    if let Some(v) = s.get("active") {
        cfg.settings.active = Some(parse_value("active", &v)?);
    }
    if s.get("target").is_some() {
        let t = targets(s, &[])?;
        cfg.targets = TargetSet::new(t).ok_or_else(|| usage("invalid target list"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(s: &Settings) -> Result<(), CliError> {
    let cfg = experiment_config(s)?;
    let records = run_experiment(&cfg)?;
    let solved = records
        .iter()
        .filter(|r| r.final_delta_f <= FINAL_TARGET)
        .count();
    println!(
        "{} trials ({} reached {:e}) in {}",
        records.len(),
        solved,
        FINAL_TARGET,
        cfg.out_dir.join(TRIALS_FILE).display()
    );
    Ok(())
}

pub fn ert(s: &Settings) -> Result<(), CliError> {
    let dir = out_dir(s);
    let records = read_records(&dir.join(TRIALS_FILE))?;
    let t = targets(s, &[FINAL_TARGET])?;
    s.or(
        "target",
        &t.iter()
            .map(|x| format!("{x:e}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    let rows = ert_table(&records, &t)?;
    write_ert(create(&dir, "ert.csv")?, &rows)?;
    write_echo(&dir, "ert", s)?;
    println!("{} rows in {}", rows.len(), dir.join("ert.csv").display());
    Ok(())
}

pub fn ecdf(s: &Settings) -> Result<(), CliError> {
    let dir = out_dir(s);
    let records = read_records(&dir.join(TRIALS_FILE))?;
    let recorded = records
        .first()
        .map(|r| r.targets.clone())
        .unwrap_or_default();
    let t = TargetSet::new(targets(s, &recorded)?).ok_or_else(|| usage("empty target list"))?;
    let n_boot: usize = s.parsed("n-boot", 1000)?;
    if n_boot == 0 {
        return Err(usage("n-boot must be >= 1"));
    }
    let seed: u64 = s.parsed("seed", 1)?;
    let mut rng = Rng::stream(seed, "ecdf");
    let curves = bootstrap_ecdf(&records, &t, n_boot, &mut rng)?;
    write_ecdf(create(&dir, "ecdf.csv")?, &curves)?;
    write_echo(&dir, "ecdf", s)?;
    println!(
        "{} curves in {}",
        curves.len(),
        dir.join("ecdf.csv").display()
    );
    Ok(())
}

pub fn speedup(s: &Settings) -> Result<(), CliError> {
    let dir = out_dir(s);
    let mut records = Vec::new();
    let own = dir.join(TRIALS_FILE);
    if own.exists() {
        records.extend(load_trials(&own)?);
    }
    if let Some(v) = s.get("input") {
        for p in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            records.extend(read_records(Path::new(p))?);
        }
    }
    let a = algorithm(s, "algo", Some(Algorithm::IpopSaAcm))?;
    let b = algorithm(s, "baseline", Some(Algorithm::IpopACma))?;
    let t = targets(s, &[FINAL_TARGET])?;
    s.or(
        "target",
        &t.iter()
            .map(|x| format!("{x:e}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    let ra: Vec<TrialRecord> = records
        .iter()
        .filter(|r| r.algorithm == a)
        .cloned()
        .collect();
    let rb: Vec<TrialRecord> = records
        .iter()
        .filter(|r| r.algorithm == b)
        .cloned()
        .collect();
    if ra.is_empty() || rb.is_empty() {
        return Err(CliError::Failure(format!(
            "need trials of both {a} and {b}"
        )));
    }
    let rows = speedup_table(&ra, &rb, &t)?;
    write_speedup(create(&dir, "speedup.csv")?, &rows)?;

    let group = |rs: &[TrialRecord]| {
        let mut m: BTreeMap<(usize, usize), Vec<TrialRecord>> = BTreeMap::new();
        for r in rs {
            m.entry((r.fid, r.dim)).or_default().push(r.clone());
        }
        m
    };
    let (ga, gb) = (group(&ra), group(&rb));
    let mut w = create(&dir, "ranksum.csv")?;
    writeln!(w, "fid,D,delta_f,u,z,p_value")?;
    for ((fid, dim), xa) in &ga {
        let Some(xb) = gb.get(&(*fid, *dim)) else {
            continue;
        };
        let (pa, pb): (Vec<&TrialRecord>, Vec<&TrialRecord>) =
            (xa.iter().collect(), xb.iter().collect());
        for &target in &t {
            let (sa, sb) = rank_sum_samples(&pa, &pb, target)?;
            let r = rank_sum_test(&sa, &sb)?;
            writeln!(
                w,
                "{fid},{dim},{},{},{},{}",
                sci(target),
                sci(r.u),
                sci(r.z),
                sci(r.p_value)
            )?;
        }
    }
    w.flush()?;
    write_echo(&dir, "speedup", s)?;
    println!(
        "{} rows in {}",
        rows.len(),
        dir.join("speedup.csv").display()
    );
    Ok(())
}

pub fn timing(s: &Settings) -> Result<(), CliError> {
    let dir = out_dir(s);
    let mut cfg = TimingConfig::default();
    let join = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    cfg.fids = parse_list("fid", &s.or("fid", &join(&cfg.fids)))?;
    cfg.dims = parse_list("dim", &s.or("dim", &join(&cfg.dims)))?;
    cfg.evals_per_point = s.parsed("evals", cfg.evals_per_point)?;
    let wall: f64 = s.parsed("wallclock", cfg.wallclock_per_point.as_secs_f64())?;
    if !(wall > 0.0) || !wall.is_finite() {
        return Err(usage("wallclock must be positive"));
    }
    cfg.wallclock_per_point = Duration::from_secs_f64(wall);
    cfg.seed = s.parsed("seed", cfg.seed)?;
    if cfg.fids.iter().any(|f| !(1..=24).contains(f)) || cfg.dims.iter().any(|d| *d < 2) {
        return Err(usage("function ids must be in 1..24 and dimensions >= 2"));
    }
    let sizes: Vec<usize> = parse_list("n-training", &s.or("n-training", "100,200,400,800"))?;
    let scaling_dim: usize = s.parsed("scaling-dim", 10)?;
    let reps: usize = s.parsed("reps", 3)?;
    if sizes.iter().any(|n| *n < 2) || scaling_dim < 1 || reps < 1 {
        return Err(usage(
            "n-training >= 2, scaling-dim >= 1 and reps >= 1 required",
        ));
    }

    let report = timing_experiment(&cfg)?;
    write_timing(create(&dir, "timing.csv")?, &report.rows)?;
    let scaling = training_scaling(scaling_dim, &sizes, reps, cfg.seed)?;
    let mut w = create(&dir, "training_scaling.csv")?;
    writeln!(w, "D,n_training,seconds")?;
    for (n, t) in &scaling {
        writeln!(w, "{scaling_dim},{n},{}", sci(*t))?;
    }
    w.flush()?;
    write_echo(&dir, "timing", s)?;
    let pts: Vec<(f64, f64)> = scaling.iter().map(|(n, t)| (*n as f64, *t)).collect();
    let fmt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.2}"));
    println!(
        "log-log slope of time per evaluation vs D: {}",
        fmt(report.slope_vs_dim)
    );
    println!(
        "log-log slope of training time vs n_training: {}",
        fmt(loglog_slope(&pts))
    );
    Ok(())
}

pub fn selftest() -> Result<(), CliError> {
    let checks = run_selftest();
    let mut failed = 0;
    for c in &checks {
        if c.passed {
            println!("PASS {}", c.name);
        } else {
            failed += 1;
            println!("FAIL {}: {}", c.name, c.detail);
        }
    }
    if failed > 0 {
        return Err(CliError::Failure(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    Ok(())
}
