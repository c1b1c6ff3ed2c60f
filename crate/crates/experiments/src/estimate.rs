//! Monte Carlo estimates, replica fan-out and ladders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crossloop_core::error::{Error, Result};
use crossloop_core::models::pairwise_sum;

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Sample standard deviation divided by `√replicas`; zero for fewer
    /// than two replicas.
    pub stderr: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl Estimate {
    /// The estimate from per-replica values listed in replica order. Sums
    /// use a fixed pairwise tree, so the result depends only on the values.
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len();
        if n == 0 {
            return Estimate { value: 0.0, stderr: 0.0, replicas: 0, seed };
        }
        let mean = pairwise_sum(samples) / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        };
        Estimate { value: mean, stderr, replicas: n as u64, seed }
    }

    /// `√(se₁² + se₂²)`, the standard error of the difference of two
    /// independent estimates.
    pub fn joint_stderr(&self, other: &Estimate) -> f64 {
        (self.stderr * self.stderr + other.stderr * other.stderr).sqrt()
    }

    /// Whether `self` exceeds `other` by more than `z` joint standard errors.
    pub fn exceeds(&self, other: &Estimate, z: f64) -> bool {
        self.value - other.value > z * self.joint_stderr(other)
    }
}

/// Evaluates `f` on every replica id in `0..replicas` on the current rayon
/// pool and returns the values in replica order. Each replica must draw
/// only from its own streams, so the output does not depend on scheduling.
pub fn replicate<T, F>(replicas: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..replicas).into_par_iter().map(f).collect()
}

/// Splits per-replica vectors of `k` indicators into `k` estimates.
pub fn transpose_estimates(rows: &[Vec<f64>], k: usize, seed: u64) -> Vec<Estimate> {
    (0..k)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            Estimate::from_samples(&col, seed)
        })
        .collect()
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` means one per
/// available core).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// One rung of a ladder over a parameter such as the mesh size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub param: f64,
    pub estimate: Estimate,
}

/// A ladder of estimates expected to decrease along the rungs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub rungs: Vec<Rung>,
    /// Set when some rung exceeds an earlier one by more than two joint
    /// standard errors. The statements behind the ladders are asymptotic,
    /// so this is reported, never treated as a failure.
    pub non_monotone: bool,
}

impl Ladder {
    pub fn new(rungs: Vec<Rung>) -> Self {
        let non_monotone =
            rungs.iter().enumerate().any(|(j, b)| rungs[..j].iter().any(|a| b.estimate.exceeds(&a.estimate, 2.0)));
        Ladder { rungs, non_monotone }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant_samples_has_zero_error() {
        let e = Estimate::from_samples(&[1.0; 10], 3);
        assert_eq!((e.value, e.stderr, e.replicas, e.seed), (1.0, 0.0, 10, 3));
        let z = Estimate::from_samples(&[0.0; 10], 3);
        assert_eq!((z.value, z.stderr), (0.0, 0.0));
    }

    #[test]
    fn stderr_is_sample_sd_over_root_n() {
        let e = Estimate::from_samples(&[0.0, 1.0, 0.0, 1.0], 0);
        // Sample variance 1/3, so stderr = √(1/3)/2.
        assert!((e.value - 0.5).abs() < 1e-15);
        assert!((e.stderr - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn replicate_is_independent_of_the_pool_size() {
        let f = |r: u64| Ok((r as f64).sin());
        let a = with_threads(1, || replicate(1000, f)).unwrap().unwrap();
        let b = with_threads(4, || replicate(1000, f)).unwrap().unwrap();
        assert_eq!(a, b);
        assert_eq!(Estimate::from_samples(&a, 0), Estimate::from_samples(&b, 0));
    }

    #[test]
    fn ladder_flags_significant_increases_only() {
        let est = |v: f64| Estimate { value: v, stderr: 0.01, replicas: 100, seed: 0 };
        let rung = |p: f64, v: f64| Rung { param: p, estimate: est(v) };
        assert!(!Ladder::new(vec![rung(16.0, 0.3), rung(32.0, 0.29), rung(64.0, 0.31)]).non_monotone);
        assert!(Ladder::new(vec![rung(16.0, 0.3), rung(32.0, 0.29), rung(64.0, 0.4)]).non_monotone);
    }
}
