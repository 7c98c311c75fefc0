//! Per-trial records and their CSV form.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{parse_f64, sci, sci_short, HarnessError};
use crate::restart::Algorithm;
use crate::testbed::{Objective, TargetSet};

/// Outcome of one (algorithm, function, instance, dimension) trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub fid: usize,
    pub instance: u64,
    pub dim: usize,
    pub seed: u64,
    pub total_evals: u64,
    pub final_delta_f: f64,
    /// Targets, strictly decreasing, shared by all records of a file.
    pub targets: Vec<f64>,
    /// Evaluation count at the first hit of each target.
    pub hits: Vec<Option<u64>>,
}

/// Identity of a trial in the resume manifest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrialKey {
    pub algorithm: Algorithm,
    pub fid: usize,
    pub instance: u64,
    pub dim: usize,
}

impl TrialKey {
    pub fn manifest_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.algorithm, self.fid, self.instance, self.dim
        )
    }

    pub fn parse(line: &str) -> Option<Self> {
        let mut it = line.trim().split(',');
        let key = Self {
            algorithm: it.next()?.parse().ok()?,
            fid: it.next()?.parse().ok()?,
            instance: it.next()?.parse().ok()?,
            dim: it.next()?.parse().ok()?,
        };
        it.next().is_none().then_some(key)
    }
}

/// The value a reader of the CSV file gets back.
fn as_written(x: f64, format: fn(f64) -> String) -> f64 {
    parse_f64(&format(x)).unwrap_or(x)
}

impl TrialRecord {
    /// Float fields are rounded to their CSV representation, so a record
    /// equals its reloaded copy.
    pub fn from_objective(algorithm: Algorithm, seed: u64, objective: &Objective) -> Self {
        Self {
            algorithm,
            fid: objective.fid(),
            instance: objective.instance(),
            dim: objective.dim(),
            seed,
            total_evals: objective.evaluations(),
            final_delta_f: as_written(objective.best_delta(), sci),
            targets: objective
                .targets()
                .as_slice()
                .iter()
                .map(|&t| as_written(t, sci_short))
                .collect(),
            hits: objective.hits().to_vec(),
        }
    }

    pub fn key(&self) -> TrialKey {
        TrialKey {
            algorithm: self.algorithm,
            fid: self.fid,
            instance: self.instance,
            dim: self.dim,
        }
    }

    /// Index of `target` in this record's target list.
    pub fn target_index(&self, target: f64) -> Option<usize> {
        self.targets
            .iter()
            .position(|&t| (t - target).abs() <= 1e-6 * target.abs())
    }

    /// Evaluations at the first hit of `target`; `Err` if the target is not
    /// logged.
    pub fn hit(&self, target: f64) -> Result<Option<u64>, HarnessError> {
        self.target_index(target)
            .map(|i| self.hits[i])
            .ok_or(HarnessError::UnknownTarget(target))
    }

    /// Evaluations spent while the target was not yet reached.
    pub fn runtime(&self, target: f64) -> Result<u64, HarnessError> {
        Ok(self.hit(target)?.unwrap_or(self.total_evals))
    }

    /// Upper bound on the best Δf after `evals` evaluations, read from the
    /// hit log: the smallest target hit by then, the final value if the
    /// trial ended by then, `+∞` otherwise.
    pub fn delta_f_at(&self, evals: u64) -> f64 {
        if self.total_evals <= evals {
            return self.final_delta_f;
        }
        self.targets
            .iter()
            .zip(&self.hits)
            .filter(|(_, h)| h.is_some_and(|e| e <= evals))
            .map(|(t, _)| *t)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{},{},{},{}",
            self.algorithm,
            self.fid,
            self.instance,
            self.dim,
            self.seed,
            self.total_evals,
            sci(self.final_delta_f)
        );
        for h in &self.hits {
            row.push(',');
            if let Some(e) = h {
                row.push_str(&e.to_string());
            }
        }
        row
    }
}

pub const TRIAL_COLUMNS: [&str; 7] = [
    "algorithm",
    "fid",
    "instance",
    "D",
    "seed",
    "total_evals",
    "final_delta_f",
];

pub fn target_column(t: f64) -> String {
    format!("hit_{}", sci_short(t))
}

pub fn trials_header(targets: &TargetSet) -> String {
    let mut cols: Vec<String> = TRIAL_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(targets.as_slice().iter().map(|&t| target_column(t)));
    cols.join(",")
}

/// Canonical order of rows in a finished file.
pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        (a.algorithm, a.fid, a.dim, a.instance).cmp(&(b.algorithm, b.fid, b.dim, b.instance))
    });
}

pub fn write_trials<W: Write>(
    mut w: W,
    targets: &TargetSet,
    records: &[TrialRecord],
) -> Result<(), HarnessError> {
    writeln!(w, "{}", trials_header(targets))?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a trials file. Rows that do not match the header are errors.
pub fn read_trials<R: BufRead>(r: R) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Ok(Vec::new()),
    };
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < TRIAL_COLUMNS.len() || cols[..TRIAL_COLUMNS.len()] != TRIAL_COLUMNS {
        return Err(HarnessError::Parse {
            line: 1,
            message: "unexpected trials header".into(),
        });
    }
    let targets = cols[TRIAL_COLUMNS.len()..]
        .iter()
        .map(|c| c.strip_prefix("hit_").and_then(parse_f64))
        .collect::<Option<Vec<f64>>>()
        .ok_or(HarnessError::Parse {
            line: 1,
            message: "bad target column".into(),
        })?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let bad = |m: &str| HarnessError::Parse {
            line: lineno,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != cols.len() {
            return Err(bad("wrong number of fields"));
        }
        let hits = f[TRIAL_COLUMNS.len()..]
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some)
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("bad hit count"))?;
        out.push(TrialRecord {
            algorithm: f[0].parse().map_err(|_| bad("unknown algorithm"))?,
            fid: f[1].parse().map_err(|_| bad("bad fid"))?,
            instance: f[2].parse().map_err(|_| bad("bad instance"))?,
            dim: f[3].parse().map_err(|_| bad("bad dimension"))?,
            seed: f[4].parse().map_err(|_| bad("bad seed"))?,
            total_evals: f[5].parse().map_err(|_| bad("bad total_evals"))?,
            final_delta_f: parse_f64(f[6]).ok_or_else(|| bad("bad final_delta_f"))?,
            targets: targets.clone(),
            hits,
        });
    }
    Ok(out)
}

/// Records grouped by (algorithm, fid, D), groups in sorted order.
pub fn group_records(
    records: &[TrialRecord],
) -> Vec<((Algorithm, usize, usize), Vec<&TrialRecord>)> {
    let mut map: HashMap<(Algorithm, usize, usize), Vec<&TrialRecord>> = HashMap::new();
    for r in records {
        map.entry((r.algorithm, r.fid, r.dim)).or_default().push(r);
    }
    let mut groups: Vec<_> = map.into_iter().collect();
    groups.sort_by_key(|(k, _)| *k);
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(hits: Vec<Option<u64>>, total: u64) -> TrialRecord {
        TrialRecord {
            algorithm: Algorithm::IpopSaAcm,
            fid: 1,
            instance: 1,
            dim: 2,
            seed: 7,
            total_evals: total,
            final_delta_f: 3.5e-9,
            targets: vec![1.0, 1e-8],
            hits,
        }
    }

    #[test]
    fn csv_round_trip() {
        let targets = TargetSet::new(vec![1.0, 1e-8]).unwrap();
        let recs = vec![
            record(vec![Some(5), Some(90)], 100),
            record(vec![Some(3), None], 400),
        ];
        let mut buf = Vec::new();
        write_trials(&mut buf, &targets, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "algorithm,fid,instance,D,seed,total_evals,final_delta_f,hit_1e+00,hit_1e-08\n"
        ));
        assert!(text.contains("ipop-saacm,1,1,2,7,400,3.50000000e-09,3,\n"));
        let back = read_trials(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn runtime_and_delta() {
        let r = record(vec![Some(5), None], 400);
        assert_eq!(r.runtime(1.0).unwrap(), 5);
        assert_eq!(r.runtime(1e-8).unwrap(), 400);
        assert!(r.runtime(1e-3).is_err());
        assert_eq!(r.delta_f_at(4), f64::INFINITY);
        assert_eq!(r.delta_f_at(10), 1.0);
        assert_eq!(r.delta_f_at(400), 3.5e-9);
    }

    #[test]
    fn manifest_keys() {
        let k = record(vec![None, None], 1).key();
        assert_eq!(k.manifest_line(), "ipop-saacm,1,1,2");
        assert_eq!(TrialKey::parse("ipop-saacm,1,1,2"), Some(k));
        assert_eq!(TrialKey::parse("ipop-saacm,1,1"), None);
    }
}
