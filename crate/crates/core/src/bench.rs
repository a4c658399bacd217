//! Timing of the two velocity evaluators and their empirical scaling exponents.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::dynamics::{velocity_direct_slices, velocity_fast_slices};
use crate::error::{Error, Result};
use crate::kernel::KernelConstants;

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub n: usize,
    /// Minimum wall time over the repeats, in seconds.
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub fast: Vec<Timing>,
    pub direct: Vec<Timing>,
    pub fast_slope: f64,
    pub direct_slope: f64,
    /// Largest `|v_fast − v_direct|` over the sizes timed by both.
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub fast_sizes: Vec<usize>,
    pub direct_sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            fast_sizes: vec![1_000, 10_000, 100_000, 1_000_000],
            direct_sizes: vec![1_000, 2_000, 4_000, 10_000],
            repeats: 3,
            seed: 7,
        }
    }
}

/// Sorted random configuration with unit total mass on `[−20α, 20α]`.
///
/// The window is fixed rather than growing with `n`: far-apart pairs make
/// `exp` underflow through a cheaper path, which would flatten the direct
/// sum's timing curve.
pub fn random_configuration(n: usize, alpha: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    let half = 20.0 * alpha;
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-half..half)).collect();
    x.sort_by(f64::total_cmp);
    x.dedup();
    let mut w: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    (x, w)
}

/// Least-squares slope of `log t` against `log n`.
pub fn loglog_slope(points: &[Timing]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|p| ((p.n as f64).ln(), p.seconds.max(1e-12).ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    num / den
}

fn time_min<F: FnMut() -> Vec<f64>>(repeats: usize, mut f: F) -> (f64, Vec<f64>) {
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        out = f();
        best = best.min(t.elapsed().as_secs_f64());
    }
    (best, out)
}

pub fn run_bench(kc: &KernelConstants, opts: &BenchOptions) -> Result<BenchReport> {
    if opts.fast_sizes.len() < 2 || opts.direct_sizes.len() < 2 {
        return Err(Error::Parameter("benchmark needs at least two sizes per evaluator".into()));
    }
    let kernel = kc.kernel();
    let mut fast = Vec::new();
    let mut direct = Vec::new();
    let mut max_abs_diff = 0.0f64;
    for &n in &opts.fast_sizes {
        let (x, w) = random_configuration(n, kc.alpha, opts.seed);
        let (s, v) = time_min(opts.repeats, || velocity_fast_slices(&x, &w, kc.alpha).velocities);
        fast.push(Timing { n, seconds: s });
        if opts.direct_sizes.contains(&n) {
            let vd = velocity_direct_slices(&x, &w, &kernel).velocities;
            for (a, b) in v.iter().zip(&vd) {
                max_abs_diff = max_abs_diff.max((a - b).abs());
            }
        }
    }
    for &n in &opts.direct_sizes {
        let (x, w) = random_configuration(n, kc.alpha, opts.seed);
        let (s, _) = time_min(opts.repeats, || velocity_direct_slices(&x, &w, &kernel).velocities);
        direct.push(Timing { n, seconds: s });
    }
    Ok(BenchReport {
        fast_slope: loglog_slope(&fast),
        direct_slope: loglog_slope(&direct),
        fast,
        direct,
        max_abs_diff,
    })
}
