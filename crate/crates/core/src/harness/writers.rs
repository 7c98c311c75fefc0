//! CSV writers for analysis outputs.

use std::io::Write;

use super::analysis::{EcdfCurve, ErtRow, Speedup, SpeedupRow};
use super::timing::TimingRow;
use super::{sci, HarnessError};

pub fn write_ert<W: Write>(mut w: W, rows: &[ErtRow]) -> Result<(), HarnessError> {
    writeln!(w, "algorithm,fid,D,delta_f,ert,n_success,n_trials")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            r.fid,
            r.dim,
            sci(r.delta_f),
            sci(r.ert.ert),
            r.ert.n_success,
            r.ert.n_trials
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ecdf<W: Write>(mut w: W, curves: &[EcdfCurve]) -> Result<(), HarnessError> {
    writeln!(w, "group,D,algorithm,fevals_per_D,proportion")?;
    for c in curves {
        for (x, p) in &c.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                c.group,
                c.dim,
                c.algorithm,
                sci(*x),
                sci(*p)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing<W: Write>(mut w: W, rows: &[TimingRow]) -> Result<(), HarnessError> {
    writeln!(w, "fid,D,n_training,cpu_seconds_per_eval")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.fid,
            r.dim,
            r.n_training,
            sci(r.cpu_seconds_per_eval)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `fid,D,delta_f,ert_a,ert_b,speedup`; incomparable entries carry
/// the tag `incomparable`.
pub fn write_speedup<W: Write>(mut w: W, rows: &[SpeedupRow]) -> Result<(), HarnessError> {
    writeln!(w, "fid,D,delta_f,ert_a,ert_b,speedup")?;
    for r in rows {
        let s = match r.speedup {
            Speedup::Ratio(x) => sci(x),
            Speedup::Incomparable => "incomparable".into(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.fid,
            r.dim,
            sci(r.delta_f),
            sci(r.ert_a),
            sci(r.ert_b),
            s
        )?;
    }
    w.flush()?;
    Ok(())
}
