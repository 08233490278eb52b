//! Seeded, order-independent Monte Carlo accumulation.

use rayon::prelude::*;

use crate::error::Result;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    /// mean + k·stderr
    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }
}

/// Mean and standard error (sample std / √n), summed in input order.
pub fn summarize(samples: &[f64]) -> Estimate {
    let n = samples.len();
    if n == 0 {
        return Estimate { mean: f64::NAN, stderr: f64::NAN, trials: 0 };
    }
    if samples.iter().all(|x| x.to_bits() == samples[0].to_bits()) {
        // degenerate distribution: report it exactly
        return Estimate { mean: samples[0], stderr: 0.0, trials: n };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    Estimate { mean, stderr: (var / n as f64).sqrt(), trials: n }
}

/// Evaluates `f(trial)` for every trial in parallel and returns the results in trial order.
pub fn run_trials<T: Send>(trials: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..trials as u64).into_par_iter().map(&f).collect()
}

/// Componentwise estimates of vector-valued trials.
pub fn estimate_vectors(samples: &[Vec<f64>]) -> Vec<Estimate> {
    let Some(first) = samples.first() else { return Vec::new() };
    (0..first.len()).map(|j| summarize(&samples.iter().map(|s| s[j]).collect::<Vec<_>>())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_values() {
        let e = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let c = summarize(&[2.0; 10]);
        assert_eq!((c.mean, c.stderr), (2.0, 0.0));
        let d = summarize(&[0.1; 7]);
        assert_eq!((d.mean, d.stderr), (0.1, 0.0));
    }

    #[test]
    fn ordered_results() {
        let v = run_trials(1000, |t| Ok(t as f64)).unwrap();
        assert!(v.iter().enumerate().all(|(i, x)| *x == i as f64));
    }
}
