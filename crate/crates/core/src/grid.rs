#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Uniform time grid `start, start + dt, ..., end` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !start.is_finite() || !end.is_finite() || end <= start {
            return Err(Error::InvalidGrid);
        }
        Ok(Self { start, end, steps })
    }

    /// Smallest even number of intervals whose step does not exceed `max_step`.
    pub fn with_max_step(start: f64, end: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) || !max_step.is_finite() {
            return Err(Error::InvalidGrid);
        }
        let raw = ((end - start) / max_step - 1e-9).ceil().max(1.0) as usize;
        let steps = raw + raw % 2;
        Self::new(start, end, steps)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.end
        } else {
            self.start + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.time(k))
    }

    /// Same span with twice as many intervals.
    pub fn refined(&self) -> Self {
        Self {
            steps: self.steps * 2,
            ..*self
        }
    }

    /// Same start and step, truncated at node `k`.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.steps {
            return Err(Error::InvalidGrid);
        }
        Ok(Self {
            start: self.start,
            end: self.time(k),
            steps: k,
        })
    }

    /// Index of the node nearest to `t`, if `t` lies within half a step of one.
    pub fn node_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.start) / self.dt();
        let k = x.round();
        if k < 0.0 || k > self.steps as f64 || (x - k).abs() > 0.5 + 1e-9 {
            return None;
        }
        Some(k as usize)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn max_step_rounds_to_even() {
        let g = TimeGrid::with_max_step(0.0, 2.0 * PI, 1e-3).unwrap();
        assert_eq!(g.steps() % 2, 0);
        assert!(g.dt() <= 1e-3);
        assert_eq!(g.steps(), 6284);
        assert_eq!(g.time(g.steps()), 2.0 * PI);
    }

    #[test]
    fn exact_multiples_are_not_bumped() {
        let g = TimeGrid::with_max_step(0.0, 2.0 * PI, 2.0 * PI * 1e-3).unwrap();
        assert_eq!(g.steps(), 1000);
        assert_eq!(g.node_of(PI), Some(500));
    }

    #[test]
    fn rejects_bad_spans() {
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::with_max_step(0.0, 1.0, -0.1).is_err());
    }
}
