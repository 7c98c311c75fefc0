use crate::testbed::{BlackBox, TestbedError};

/// Per-run view of an objective: caps the run's evaluations and remembers
/// its best point.
pub(super) struct Tracked<'a, B> {
    inner: &'a mut B,
    cap: u64,
    used: u64,
    best_f: f64,
    best_x: Option<Vec<f64>>,
}

impl<'a, B: BlackBox> Tracked<'a, B> {
    pub(super) fn new(inner: &'a mut B, cap: u64) -> Self {
        Self {
            inner,
            cap,
            used: 0,
            best_f: f64::INFINITY,
            best_x: None,
        }
    }

    pub(super) fn used(&self) -> u64 {
        self.used
    }

    pub(super) fn best_f(&self) -> f64 {
        self.best_f
    }

    pub(super) fn best_x(&self) -> Option<&[f64]> {
        self.best_x.as_deref()
    }
}

impl<B: BlackBox> BlackBox for Tracked<'_, B> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, TestbedError> {
        if self.used >= self.cap {
            return Err(TestbedError::BudgetExhausted(self.cap));
        }
        let f = self.inner.evaluate(x)?;
        self.used += 1;
        if f < self.best_f {
            self.best_f = f;
            self.best_x = Some(x.to_vec());
        }
        Ok(f)
    }

    fn evaluations(&self) -> u64 {
        self.used
    }

    fn remaining(&self) -> Option<u64> {
        let left = self.cap - self.used;
        Some(self.inner.remaining().map_or(left, |r| r.min(left)))
    }

    fn solved(&self) -> bool {
        self.inner.solved()
    }
}
