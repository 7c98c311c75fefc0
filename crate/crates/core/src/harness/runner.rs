//! Experiment grid execution with per-trial appends and a resume manifest.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use super::records::{
    read_trials, sort_records, target_column, write_trials, TrialKey, TrialRecord,
};
use super::{sci_short, HarnessError};
use crate::numerics::{hash_seed, Rng};
use crate::restart::{run_algorithm, Algorithm, AlgorithmSettings};
use crate::testbed::{Objective, TargetSet};

pub const TRIALS_FILE: &str = "trials.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub settings: AlgorithmSettings,
    pub fids: Vec<usize>,
    pub dims: Vec<usize>,
    pub instances: Vec<u64>,
    /// Evaluation budget per trial is `budget_mult × D`.
    pub budget_mult: u64,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub targets: TargetSet,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            settings: AlgorithmSettings::new(algorithm),
            fids: vec![1],
            dims: vec![2],
            instances: (1..=15).collect(),
            budget_mult: 10_000,
            seed: 1,
            jobs: 1,
            out_dir: out_dir.into(),
            targets: TargetSet::default(),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.settings.algorithm
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.budget_mult < 1 {
            return bad("budget multiplier must be >= 1".into());
        }
        if self.instances.is_empty() || self.fids.is_empty() || self.dims.is_empty() {
            return bad("functions, dimensions and instances must be non-empty".into());
        }
        if let Some(f) = self.fids.iter().find(|f| !(1..=24).contains(*f)) {
            return bad(format!("unknown function id {f}"));
        }
        if let Some(d) = self.dims.iter().find(|d| **d < 2) {
            return bad(format!("dimension must be >= 2, got {d}"));
        }
        self.settings
            .saacm
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))
    }

    pub fn keys(&self) -> Vec<TrialKey> {
        let mut keys = Vec::new();
        for &fid in &self.fids {
            for &dim in &self.dims {
                for &instance in &self.instances {
                    keys.push(TrialKey {
                        algorithm: self.algorithm(),
                        fid,
                        instance,
                        dim,
                    });
                }
            }
        }
        keys.sort();
        keys.dedup();
        keys
    }

    /// `key=value` lines accepted back by the command-line front-end.
    pub fn echo(&self) -> String {
        let list = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let s = &self.settings;
        let mut lines = vec![
            format!("algo={}", self.algorithm()),
            format!("fid={}", list(&self.fids)),
            format!("dim={}", list(&self.dims)),
            format!(
                "instances={}",
                self.instances
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            format!("budget-mult={}", self.budget_mult),
            format!("seed={}", self.seed),
            format!("jobs={}", self.jobs),
            format!("out={}", self.out_dir.display()),
            format!("g-start={}", s.saacm.g_start),
            format!("nhat-max={}", s.saacm.nhat_max),
            format!("lambda-hyp={}", s.saacm.lambda_hyp),
            format!("active={}", s.is_active()),
        ];
        if self.targets != TargetSet::default() {
            let t: Vec<String> = self
                .targets
                .as_slice()
                .iter()
                .map(|&t| sci_short(t))
                .collect();
            lines.push(format!("target={}", t.join(",")));
        }
        lines.join("\n") + "\n"
    }
}

/// Seed of one trial, a hash of the master seed and the trial identity.
pub fn trial_seed(master: u64, key: &TrialKey) -> u64 {
    let alg = Algorithm::ALL
        .iter()
        .position(|a| *a == key.algorithm)
        .expect("known algorithm") as u64;
    hash_seed(&[master, key.fid as u64, key.instance, key.dim as u64, alg])
}

/// Runs a single trial; pure in `(cfg, key)`.
pub fn run_trial(cfg: &ExperimentConfig, key: &TrialKey) -> Result<TrialRecord, HarnessError> {
    let seed = trial_seed(cfg.seed, key);
    let budget = cfg.budget_mult * key.dim as u64;
    let mut objective = Objective::new(key.fid, key.instance, key.dim)?
        .with_targets(cfg.targets.clone())
        .with_budget(budget);
    let mut rng = Rng::new(seed);
    run_algorithm(&cfg.settings, &mut objective, budget, &mut rng)?;
    Ok(TrialRecord::from_objective(key.algorithm, seed, &objective))
}

fn read_manifest(path: &Path) -> Result<HashSet<TrialKey>, HarnessError> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let mut keys = HashSet::new();
    for line in BufReader::new(File::open(path)?).lines() {
        if let Some(k) = TrialKey::parse(&line?) {
            keys.insert(k);
        }
    }
    Ok(keys)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Appends rows and manifest lines; one trial at a time.
struct Sink {
    trials: File,
    manifest: File,
}

impl Sink {
    fn append(&mut self, record: &TrialRecord) -> Result<(), HarnessError> {
        self.trials
            .write_all(format!("{}\n", record.csv_row()).as_bytes())?;
        self.trials.sync_data()?;
        self.manifest
            .write_all(format!("{}\n", record.key().manifest_line()).as_bytes())?;
        self.manifest.sync_data()?;
        Ok(())
    }
}

/// Runs every trial of the grid not yet listed in the output directory's
/// manifest, appending each finished trial to `trials.csv` and the
/// manifest. Rows without a manifest entry (from an interrupted append)
/// are dropped on resume. When all trials are done the file is rewritten in
/// canonical order, so reruns and resumed runs produce identical bytes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join(CONFIG_FILE), cfg.echo())?;
    let trials_path = cfg.out_dir.join(TRIALS_FILE);
    let manifest_path = cfg.out_dir.join(MANIFEST_FILE);

    let done = read_manifest(&manifest_path)?;
    let mut kept: Vec<TrialRecord> = Vec::new();
    if trials_path.exists() && !done.is_empty() {
        let existing = read_trials(BufReader::new(File::open(&trials_path)?))?;
        let mut seen = HashSet::new();
        for r in existing {
            if done.contains(&r.key()) && seen.insert(r.key()) {
                kept.push(r);
            }
        }
        let labels = |t: &[f64]| t.iter().map(|&x| target_column(x)).collect::<Vec<_>>();
        let wanted = labels(cfg.targets.as_slice());
        if kept.iter().any(|r| labels(&r.targets) != wanted) {
            return Err(HarnessError::InvalidConfig(
                "existing trials use a different target set".into(),
            ));
        }
    }
    let kept_keys: HashSet<TrialKey> = kept.iter().map(TrialRecord::key).collect();
    let mut buf = Vec::new();
    write_trials(&mut buf, &cfg.targets, &kept)?;
    write_atomic(&trials_path, &buf)?;
    let manifest: String = kept
        .iter()
        .map(|r| r.key().manifest_line() + "\n")
        .collect();
    write_atomic(&manifest_path, manifest.as_bytes())?;

    let todo: Vec<TrialKey> = cfg
        .keys()
        .into_iter()
        .filter(|k| !kept_keys.contains(k))
        .collect();
    let sink = Mutex::new(Sink {
        trials: OpenOptions::new().append(true).open(&trials_path)?,
        manifest: OpenOptions::new().append(true).open(&manifest_path)?,
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
    let fresh: Vec<TrialRecord> = pool.install(|| {
        todo.par_iter()
            .map(|key| {
                let record = run_trial(cfg, key)?;
                sink.lock().expect("sink lock").append(&record)?;
                Ok(record)
            })
            .collect::<Result<Vec<_>, HarnessError>>()
    })?;
    drop(sink);

    let mut all = kept;
    all.extend(fresh);
    sort_records(&mut all);
    let mut buf = Vec::new();
    write_trials(&mut buf, &cfg.targets, &all)?;
    write_atomic(&trials_path, &buf)?;
    let manifest: String = all.iter().map(|r| r.key().manifest_line() + "\n").collect();
    write_atomic(&manifest_path, manifest.as_bytes())?;
    Ok(all)
}

/// Reads a trials file written by [`run_experiment`].
pub fn load_trials(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    read_trials(BufReader::new(File::open(path)?))
}

/// Writes a trials file for `records` (which must share one target list).
pub fn save_trials(path: &Path, records: &[TrialRecord]) -> Result<(), HarnessError> {
    let targets = records
        .first()
        .and_then(|r| TargetSet::new(r.targets.clone()))
        .unwrap_or_default();
    let mut w = BufWriter::new(File::create(path)?);
    write_trials(&mut w, &targets, records)?;
    Ok(())
}
