//! End-to-end experiments: weak-form residual of particle trajectories, the
//! splitting of a symmetric pair that converges to a Dirac mass, and the
//! convergence of grid discretizations of a diffuse initial measure.

use rayon::prelude::*;
use serde::Serialize;

use crate::bl::bl_distance;
use crate::dynamics::velocity_fast_slices;
use crate::error::{Error, Result};
use crate::integrator::{envelope_slack, simulate, simulate_with, SimOptions, Trajectory};
use crate::kernel::KernelConstants;
use crate::measure::{build_grid, discretize, DiscreteMeasure, InitialMeasure};
use crate::quadrature::GaussLegendre;
use crate::sum::Neumaier;

/// One-dimensional bump `exp(−1/(1 − u²))` and its first two derivatives.
fn bump(u: f64) -> (f64, f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - u * u;
    let b = (-1.0 / q).exp();
    let d1 = b * (-2.0 * u / (q * q));
    let d2 = b * (4.0 * u * u / (q * q * q * q) - 2.0 / (q * q) - 8.0 * u * u / (q * q * q));
    (b, d1, d2)
}

/// Tensor-product smooth bump `φ(x, t) = b((x − x₀)/r_x) · b((t − t₀)/r_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub center: (f64, f64),
    pub radii: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhiValues {
    pub phi: f64,
    pub phi_t: f64,
    pub phi_x: f64,
    pub phi_xx: f64,
}

impl TestFunction {
    pub fn new(center: (f64, f64), radii: (f64, f64)) -> Result<Self> {
        if !(radii.0 > 0.0 && radii.1 > 0.0 && radii.0.is_finite() && radii.1.is_finite()) {
            return Err(Error::Parameter("test function radii must be > 0".into()));
        }
        if !(center.0.is_finite() && center.1.is_finite()) {
            return Err(Error::Parameter("test function center must be finite".into()));
        }
        Ok(Self { center, radii })
    }

    pub fn eval(&self, x: f64, t: f64) -> PhiValues {
        let (rx, rt) = self.radii;
        let (bx, bx1, bx2) = bump((x - self.center.0) / rx);
        let (bt, bt1, _) = bump((t - self.center.1) / rt);
        PhiValues { phi: bx * bt, phi_t: bx * bt1 / rt, phi_x: bx1 * bt / rx, phi_xx: bx2 * bt / (rx * rx) }
    }

    pub fn time_support(&self) -> (f64, f64) {
        (self.center.1 - self.radii.1, self.center.1 + self.radii.1)
    }

    pub fn space_support(&self) -> (f64, f64) {
        (self.center.0 - self.radii.0, self.center.0 + self.radii.0)
    }
}

/// Time quadrature for the weak residual: Gauss–Legendre with `nodes` points
/// on each panel; every integrator step is cut into `panels_per_step` panels,
/// and no panel is wider than an eighth of the test function's time radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeQuadrature {
    pub nodes: usize,
    pub panels_per_step: usize,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        Self { nodes: 5, panels_per_step: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub total: f64,
}

/// `T₁ + T₂ + T₃` of the weak formulation for the particle measure of `traj`:
///
/// ```text
/// T₁ = Σ w_i φ(x_i⁰, 0)
/// T₂ = ∫ Σ w_i φ_t(x_i(t), t) dt
/// T₃ = ∫ Σ_i w_i h̄(x_i)² φ_x(x_i, t) Σ_{j≠i} w_j K'''(x_i − x_j) dt
/// ```
pub fn weak_residual(traj: &Trajectory, phi: &TestFunction, quad: TimeQuadrature) -> Result<WeakResidual> {
    let (t_lo, t_hi) = phi.time_support();
    if t_hi > traj.t_final {
        return Err(Error::Parameter(format!(
            "test function support ends at t = {t_hi}, after the trajectory ({})",
            traj.t_final
        )));
    }
    if quad.nodes == 0 || quad.panels_per_step == 0 {
        return Err(Error::Parameter("time quadrature needs nodes and panels >= 1".into()));
    }
    let w = traj.weights();
    let t_lo = t_lo.max(0.0);

    let mut t1 = Neumaier::new();
    for (x, wi) in traj.initial.positions().iter().zip(w) {
        t1.add(wi * phi.eval(*x, 0.0).phi);
    }

    let mut cuts: Vec<f64> = traj.node_times().into_iter().filter(|t| *t > t_lo && *t < t_hi).collect();
    cuts.push(t_lo);
    cuts.push(t_hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let max_width = phi.radii.1 / 8.0;
    let gl = GaussLegendre::new(quad.nodes);
    let (mut t2, mut t3) = (Neumaier::new(), Neumaier::new());
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let m = (((b - a) / max_width).ceil() as usize).max(1) * quad.panels_per_step;
        let h = (b - a) / m as f64;
        for p in 0..m {
            let (pa, pb) = (a + p as f64 * h, if p + 1 == m { b } else { a + (p + 1) as f64 * h });
            for (tau, wq) in gl.mapped(pa, pb) {
                let x = traj.positions_at(tau)?;
                let v = velocity_fast_slices(&x, w, traj.kc.alpha).velocities;
                for i in 0..x.len() {
                    let pv = phi.eval(x[i], tau);
                    t2.add(wq * w[i] * pv.phi_t);
                    t3.add(wq * w[i] * pv.phi_x * v[i]);
                }
            }
        }
    }
    let (t1, t2, t3) = (t1.value(), t2.value(), t3.value());
    let mut total = Neumaier::new();
    total.add(t1);
    total.add(t2);
    total.add(t3);
    Ok(WeakResidual { t1, t2, t3, total: total.value() })
}

/// Seeded bump test functions whose space support covers part of the
/// trajectory's path and whose time support lies inside `[0, t_final]`.
pub fn seeded_test_functions(seed: u64, count: usize, x_range: (f64, f64), t_final: f64) -> Vec<TestFunction> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (xl, xh) = x_range;
    let span = (xh - xl).max(1e-3);
    (0..count)
        .map(|_| {
            let x0 = rng.gen_range(xl..=xh);
            let rx = rng.gen_range(0.5..1.5) * span;
            let rt = rng.gen_range(0.2..0.45) * t_final;
            let t0 = rng.gen_range(rt..=(t_final - rt));
            TestFunction { center: (x0, t0), radii: (rx, rt) }
        })
        .collect()
}

/// Residuals below this are treated as converged in the refinement study.
pub const RESIDUAL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct RefinementLevel {
    pub level: u32,
    pub tol: f64,
    pub max_dt: f64,
    pub panels_per_step: usize,
    pub steps: usize,
    /// One residual per test function.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementStudy {
    pub levels: Vec<RefinementLevel>,
    /// Smallest `|r_ℓ| / |r_{ℓ+1}|` over levels where `r_ℓ` is above the
    /// floor and `r_{ℓ+1}` is not; infinite when every such step lands on the floor.
    pub min_ratio: f64,
}

impl RefinementStudy {
    pub fn pass(&self, factor: f64) -> bool {
        self.min_ratio >= factor
    }
}

/// Weak residuals of `mu`'s trajectory under successive refinement: each
/// level halves the tolerance and the step cap (starting at `t_final/8`)
/// and doubles the quadrature panels per step.
pub fn weak_residual_refinement(
    mu: &DiscreteMeasure,
    t_final: f64,
    kc: &KernelConstants,
    phis: &[TestFunction],
    tol0: f64,
    levels: u32,
) -> Result<RefinementStudy> {
    let out = (0..levels)
        .into_par_iter()
        .map(|level| {
            let scale = 0.5f64.powi(level as i32);
            let tol = tol0 * scale;
            let max_dt = t_final / 8.0 * scale;
            let opts = SimOptions { max_dt: Some(max_dt), ..SimOptions::default() };
            let traj = simulate_with(mu, t_final, tol, kc, &[], opts)?;
            let quad = TimeQuadrature { nodes: 5, panels_per_step: 1 << level };
            let residuals = phis
                .iter()
                .map(|p| weak_residual(&traj, p, quad).map(|r| r.total))
                .collect::<Result<Vec<_>>>()?;
            Ok(RefinementLevel {
                level,
                tol,
                max_dt,
                panels_per_step: quad.panels_per_step,
                steps: traj.accepted_steps(),
                residuals,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut min_ratio = f64::INFINITY;
    for pair in out.windows(2) {
        for (a, b) in pair[0].residuals.iter().zip(&pair[1].residuals) {
            if a.abs() > RESIDUAL_FLOOR && b.abs() > RESIDUAL_FLOOR {
                min_ratio = min_ratio.min(a.abs() / b.abs());
            }
        }
    }
    Ok(RefinementStudy { levels: out, min_ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingSample {
    pub t: f64,
    pub separation: f64,
    /// `(Λ/A)(1 − e^{−At})` with `Λ = ‖K‖∞²‖K'''‖∞ (½)³`.
    pub bound: f64,
    /// `‖K‖∞²‖K'''‖∞ (1 − e^{−At}) / (16A)`, the limit half-separation bound.
    pub beta_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingReport {
    pub n: u32,
    pub lambda_over_a: f64,
    pub max_antisymmetry: f64,
    /// `min_t (separation − bound + 10·tol·t)`.
    pub min_margin: f64,
    /// `min_t (separation/2 − beta_bound)`.
    pub min_beta_margin: f64,
    /// `bound / (2·beta_bound)`, identically 1: the per-run bound on the
    /// separation is twice the half-separation bound of the limit.
    pub bound_ratio: f64,
    pub samples: Vec<SplittingSample>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

impl SplittingReport {
    pub fn pass(&self) -> bool {
        self.max_antisymmetry <= 1e-12 && self.min_margin >= 0.0 && self.min_beta_margin >= -envelope_slack(self.trajectory.tol, self.trajectory.t_final)
    }
}

/// Two half masses at `±1/n`, evolved to `t_final`.
pub fn splitting_experiment(
    n: u32,
    t_final: f64,
    kc: &KernelConstants,
    tol: f64,
    samples: usize,
) -> Result<SplittingReport> {
    if n == 0 {
        return Err(Error::Parameter("splitting experiment needs n >= 1".into()));
    }
    let x = 1.0 / n as f64;
    let mu = DiscreteMeasure::new(vec![-x, x], vec![0.5, 0.5])?;
    let times: Vec<f64> = (0..=samples.max(1)).map(|k| t_final * k as f64 / samples.max(1) as f64).collect();
    let traj = simulate(&mu, t_final, tol, kc, &times)?;
    let a = kc.a_const;
    let lambda = kc.gamma_prefactor() * 0.125;
    let lambda_over_a = lambda / a;
    let mut max_antisymmetry = 0.0f64;
    for t in traj.node_times() {
        let p = traj.positions_at(t)?;
        max_antisymmetry = max_antisymmetry.max((p[0] + p[1]).abs());
    }
    let mut min_margin = f64::INFINITY;
    let mut min_beta_margin = f64::INFINITY;
    let mut out = Vec::with_capacity(traj.states.len());
    for s in &traj.states {
        max_antisymmetry = max_antisymmetry.max((s.positions[0] + s.positions[1]).abs());
        let sep = s.positions[1] - s.positions[0];
        let grow = 1.0 - (-a * s.time).exp();
        let bound = lambda_over_a * grow;
        let beta_bound = kc.gamma_prefactor() / (16.0 * a) * grow;
        min_margin = min_margin.min(sep - bound + envelope_slack(tol, s.time));
        min_beta_margin = min_beta_margin.min(0.5 * sep - beta_bound);
        out.push(SplittingSample { t: s.time, separation: sep, bound, beta_bound });
    }
    let bound_ratio = lambda_over_a / (2.0 * kc.gamma_prefactor() / (16.0 * a));
    Ok(SplittingReport {
        n,
        lambda_over_a,
        max_antisymmetry,
        min_margin,
        min_beta_margin,
        bound_ratio,
        samples: out,
        trajectory: traj,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchyRow {
    pub t: f64,
    /// `d(h_{n_k}(t), h_{n_{k+1}}(t))` for consecutive entries of the n list.
    pub distances: Vec<f64>,
    pub non_increasing: bool,
}

/// Splitting runs for several `n` and their bounded-Lipschitz Cauchy table.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingFamily {
    pub ns: Vec<u32>,
    pub runs: Vec<SplittingReport>,
    pub cauchy: Vec<CauchyRow>,
}

impl SplittingFamily {
    pub fn pass(&self) -> bool {
        self.runs.iter().all(SplittingReport::pass) && self.cauchy.iter().all(|r| r.non_increasing)
    }
}

/// Slack for monotonicity comparisons of distances.
pub const CAUCHY_SLACK: f64 = 1e-12;

fn cauchy_rows(trajs: &[&Trajectory], times: &[f64]) -> Result<Vec<CauchyRow>> {
    times
        .par_iter()
        .map(|&t| {
            let measures = trajs
                .iter()
                .map(|tr| tr.initial.with_positions(tr.positions_at(t)?))
                .collect::<Result<Vec<_>>>()?;
            let distances = measures
                .windows(2)
                .map(|p| bl_distance(&p[0], &p[1]))
                .collect::<Result<Vec<_>>>()?;
            let non_increasing = distances.windows(2).all(|d| d[1] <= d[0] + CAUCHY_SLACK);
            Ok(CauchyRow { t, distances, non_increasing })
        })
        .collect()
}

pub fn splitting_family(
    ns: &[u32],
    t_final: f64,
    kc: &KernelConstants,
    tol: f64,
    samples: usize,
) -> Result<SplittingFamily> {
    let runs = ns
        .par_iter()
        .map(|&n| splitting_experiment(n, t_final, kc, tol, samples))
        .collect::<Result<Vec<_>>>()?;
    let trajs: Vec<&Trajectory> = runs.iter().map(|r| &r.trajectory).collect();
    let times: Vec<f64> = runs[0].samples.iter().map(|s| s.t).collect();
    let cauchy = cauchy_rows(&trajs, &times)?;
    Ok(SplittingFamily { ns: ns.to_vec(), runs, cauchy })
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeLipschitz {
    pub n: u32,
    /// `max d(h_n(s), h_n(t)) / |s − t|` over sample pairs.
    pub max_ratio: f64,
    /// `max (d − C|s − t| − 10·tol·max(s, t))`; passes when ≤ 0.
    pub worst_excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub ns: Vec<u32>,
    pub times: Vec<f64>,
    pub particles: Vec<usize>,
    pub cauchy: Vec<CauchyRow>,
    /// `‖K‖∞²‖K'''‖∞`, the particle speed bound.
    pub speed_constant: f64,
    /// `‖K‖∞³`, the constant displayed in the d-Lipschitz estimate.
    pub displayed_constant: f64,
    /// The larger of the two, used for the check.
    pub lipschitz_constant: f64,
    pub binding: &'static str,
    pub time_lipschitz: Vec<TimeLipschitz>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

impl ConvergenceReport {
    pub fn cauchy_pass(&self) -> bool {
        self.cauchy.iter().all(|r| r.non_increasing)
    }

    pub fn lipschitz_pass(&self) -> bool {
        self.time_lipschitz.iter().all(|l| l.worst_excess <= 0.0)
    }
}

/// Discretize `μ` on the nested grids of every level in `ns`, evolve each
/// particle system, and tabulate consecutive bounded-Lipschitz distances at
/// the sample times together with the time-Lipschitz bound of each run.
pub fn convergence_study(
    mu: &InitialMeasure,
    window: (f64, f64),
    ns: &[u32],
    times: &[f64],
    kc: &KernelConstants,
    tol: f64,
) -> Result<ConvergenceReport> {
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("n list must be non-empty and increasing".into()));
    }
    let t_final = times.iter().copied().fold(0.0, f64::max);
    if !(t_final > 0.0) {
        return Err(Error::Parameter("convergence study needs a positive sample time".into()));
    }
    let trajectories = ns
        .par_iter()
        .map(|&n| {
            let grid = build_grid(mu, n, window)?;
            let m = discretize(mu, &grid)?;
            simulate(&m, t_final, tol, kc, times)
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Trajectory> = trajectories.iter().collect();
    let cauchy = cauchy_rows(&refs, times)?;

    let speed_constant = kc.speed_bound;
    let displayed_constant = kc.k_inf.powi(3);
    let (lipschitz_constant, binding) = if speed_constant >= displayed_constant {
        (speed_constant, "speed_bound")
    } else {
        (displayed_constant, "k_inf_cubed")
    };
    let time_lipschitz = ns
        .par_iter()
        .zip(trajectories.par_iter())
        .map(|(&n, tr)| {
            let mut max_ratio = 0.0f64;
            let mut worst_excess = f64::NEG_INFINITY;
            for (i, a) in tr.states.iter().enumerate() {
                let ma = tr.initial.with_positions(a.positions.clone())?;
                for b in &tr.states[i + 1..] {
                    let mb = tr.initial.with_positions(b.positions.clone())?;
                    let d = bl_distance(&ma, &mb)?;
                    let dt = (b.time - a.time).abs();
                    max_ratio = max_ratio.max(d / dt);
                    let slack = envelope_slack(tol, a.time.max(b.time));
                    worst_excess = worst_excess.max(d - lipschitz_constant * dt - slack);
                }
            }
            Ok(TimeLipschitz { n, max_ratio, worst_excess })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConvergenceReport {
        ns: ns.to_vec(),
        times: times.to_vec(),
        particles: trajectories.iter().map(Trajectory::num_particles).collect(),
        cauchy,
        speed_constant,
        displayed_constant,
        lipschitz_constant,
        binding,
        time_lipschitz,
        trajectories,
    })
}
