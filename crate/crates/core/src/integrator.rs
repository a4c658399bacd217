//! Adaptive time integration of the particle system.
//!
//! Dormand–Prince 5(4) with a PI step-size controller. Every stage state
//! must stay strictly ordered; a stage that leaves the ordered cone rejects
//! the step and halves `dt`, down to `dt_min = 2⁻⁴⁰ t_final`. The exact flow
//! never crosses, so a crossing is always a step-size problem and the
//! solver never merges or projects particles.

use std::io::{self, Write};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{velocity_direct_slices, velocity_fast_slices};
use crate::error::{Error, Result};
use crate::kernel::KernelConstants;
use crate::measure::{check_strictly_increasing, DiscreteMeasure};

pub const TOL_MIN: f64 = 1e-12;
pub const TOL_MAX: f64 = 1e-3;

/// Positions and weights of all particles at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub time: f64,
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ParticleState {
    pub fn from_measure(m: &DiscreteMeasure, time: f64) -> Self {
        Self { time, positions: m.positions().to_vec(), weights: m.weights().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Smallest gap between neighbours and the index of its left particle.
    pub fn min_gap(&self) -> (f64, usize) {
        min_gap(&self.positions)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn min_gap(x: &[f64]) -> (f64, usize) {
    x.windows(2)
        .enumerate()
        .map(|(i, w)| (w[1] - w[0], i))
        .fold((f64::INFINITY, 0), |acc, g| if g.0 < acc.0 { g } else { acc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rhs {
    #[default]
    Fast,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub rhs: Rhs,
    /// Upper bound on any step; `None` leaves it to the controller.
    pub max_dt: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { rhs: Rhs::Fast, max_dt: None }
    }
}

fn eval_rhs(rhs: Rhs, x: &[f64], w: &[f64], kc: &KernelConstants) -> Vec<f64> {
    match rhs {
        Rhs::Fast => velocity_fast_slices(x, w, kc.alpha).velocities,
        Rhs::Direct => velocity_direct_slices(x, w, &kc.kernel()).velocities,
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// continuous extension of order four
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct RawStep {
    x_new: Vec<f64>,
    v_new: Vec<f64>,
    err: Vec<f64>,
    dense: Vec<f64>,
}

fn dp_step(
    x: &[f64],
    w: &[f64],
    v0: &[f64],
    h: f64,
    kc: &KernelConstants,
    rhs: Rhs,
) -> Result<RawStep> {
    let n = x.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(v0.to_vec());
    let mut stage = vec![0.0; n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += A[s][j] * kj[i];
            }
            stage[i] = x[i] + h * acc;
        }
        if let Err(Error::Ordering { index, left, right }) = check_strictly_increasing(&stage) {
            return Err(Error::StepRejected(format!(
                "stage {s} (c = {}) crosses particles {index} and {} ({left} >= {right})",
                C[s],
                index + 1
            )));
        }
        k.push(eval_rhs(rhs, &stage, w, kc));
    }
    // stage 7 is evaluated at the fifth-order solution (FSAL)
    let x_new = stage;
    let err = (0..n)
        .map(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>())
        .collect();
    let dense = (0..n)
        .map(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>())
        .collect();
    let v_new = k.pop().unwrap();
    Ok(RawStep { x_new, v_new, err, dense })
}

/// Weighted max-norm with mixed absolute/relative scale `tol·(1 + |x|)`.
fn error_norm(err: &[f64], x: &[f64], x_new: &[f64], tol: f64) -> f64 {
    err.iter()
        .zip(x.iter().zip(x_new))
        .map(|(e, (a, b))| e.abs() / (tol * (1.0 + a.abs().max(b.abs()))))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: ParticleState,
    /// Max-norm of the embedded error estimate.
    pub err_est: f64,
    pub velocity_end: Vec<f64>,
}

/// One Dormand–Prince step of size `dt` with the fast right-hand side.
pub fn step(state: &ParticleState, dt: f64, kc: &KernelConstants) -> Result<StepOutcome> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be > 0, got {dt}")));
    }
    if state.positions.len() != state.weights.len() {
        return Err(Error::Parameter("positions and weights differ in length".into()));
    }
    check_strictly_increasing(&state.positions)?;
    let v0 = eval_rhs(Rhs::Fast, &state.positions, &state.weights, kc);
    let raw = dp_step(&state.positions, &state.weights, &v0, dt, kc, Rhs::Fast)?;
    let err_est = raw.err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(StepOutcome {
        state: ParticleState {
            time: state.time + dt,
            positions: raw.x_new,
            weights: state.weights.clone(),
        },
        err_est,
        velocity_end: raw.v_new,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Scaled error norm (accepted when ≤ 1); NaN when a stage left the ordered cone.
    pub err_est: f64,
    pub rejected: bool,
    pub min_gap: f64,
}

#[derive(Debug, Clone)]
struct Node {
    t: f64,
    x: Vec<f64>,
    v: Vec<f64>,
    /// Dense-output coefficient of the step ending here (empty at `t = 0`).
    d: Vec<f64>,
}

/// A solved particle trajectory with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kc: KernelConstants,
    pub initial: DiscreteMeasure,
    pub tol: f64,
    pub t_final: f64,
    /// States at the requested sample times (always including `t = 0`).
    pub states: Vec<ParticleState>,
    pub step_log: Vec<StepRecord>,
    nodes: Vec<Node>,
}

pub fn simulate(
    initial: &DiscreteMeasure,
    t_final: f64,
    tol: f64,
    kc: &KernelConstants,
    sample_times: &[f64],
) -> Result<Trajectory> {
    simulate_with(initial, t_final, tol, kc, sample_times, SimOptions::default())
}

pub fn simulate_with(
    initial: &DiscreteMeasure,
    t_final: f64,
    tol: f64,
    kc: &KernelConstants,
    sample_times: &[f64],
    opts: SimOptions,
) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Parameter(format!("t_final must be > 0, got {t_final}")));
    }
    if !(TOL_MIN..=TOL_MAX).contains(&tol) {
        return Err(Error::Parameter(format!("tol must lie in [{TOL_MIN:e}, {TOL_MAX:e}], got {tol:e}")));
    }
    if let Some(t) = sample_times.iter().find(|t| !(**t >= 0.0 && **t <= t_final)) {
        return Err(Error::Parameter(format!("sample time {t} outside [0, {t_final}]")));
    }
    let w = initial.weights().to_vec();
    let mut x = initial.positions().to_vec();
    let mut v = eval_rhs(opts.rhs, &x, &w, kc);
    let dt_min = t_final * 2f64.powi(-40);
    let mut t = 0.0;
    let mut nodes = vec![Node { t, x: x.clone(), v: v.clone(), d: Vec::new() }];
    let mut log = Vec::new();

    let mut h = initial_step(&x, &v, tol, t_final);
    if let Some(m) = opts.max_dt {
        h = h.min(m);
    }
    let mut err_prev = 1e-4f64;
    let (safety, fac_min, fac_max, beta) = (0.9, 0.2, 10.0, 0.04);
    let expo = 0.2 - 0.75 * beta;

    while t < t_final {
        let remaining = t_final - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < dt_min && !last {
            let (gap, i) = min_gap(&x);
            return Err(Error::IntegrationFailure {
                time: t,
                dt_min,
                min_gap: gap,
                gap_index: i,
                envelope: lower_envelope_for(initial, kc, i, i + 1, t),
            });
        }
        let step_no = log.len();
        match dp_step(&x, &w, &v, h, kc, opts.rhs) {
            Err(Error::StepRejected(_)) => {
                log.push(StepRecord { step: step_no, t, dt: h, err_est: f64::NAN, rejected: true, min_gap: min_gap(&x).0 });
                h *= 0.5;
            }
            Err(e) => return Err(e),
            Ok(raw) => {
                let err = error_norm(&raw.err, &x, &raw.x_new, tol);
                if err <= 1.0 {
                    let t_new = if last { t_final } else { t + h };
                    log.push(StepRecord {
                        step: step_no,
                        t,
                        dt: h,
                        err_est: err,
                        rejected: false,
                        min_gap: min_gap(&raw.x_new).0,
                    });
                    x = raw.x_new;
                    v = raw.v_new;
                    t = t_new;
                    nodes.push(Node { t, x: x.clone(), v: v.clone(), d: raw.dense });
                    let e = err.max(1e-10);
                    let fac = (safety * e.powf(-expo) * err_prev.powf(beta)).clamp(fac_min, fac_max);
                    err_prev = e;
                    h *= fac;
                } else {
                    log.push(StepRecord { step: step_no, t, dt: h, err_est: err, rejected: true, min_gap: min_gap(&x).0 });
                    h *= (safety * err.powf(-0.2)).clamp(fac_min, 1.0);
                }
                if let Some(m) = opts.max_dt {
                    h = h.min(m);
                }
            }
        }
    }

    let mut traj = Trajectory {
        kc: *kc,
        initial: initial.clone(),
        tol,
        t_final,
        states: Vec::new(),
        step_log: log,
        nodes,
    };
    let mut times: Vec<f64> = sample_times.to_vec();
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup();
    traj.states = times.iter().map(|&s| traj.state_at(s)).collect::<Result<_>>()?;
    Ok(traj)
}

fn initial_step(x: &[f64], v: &[f64], tol: f64, t_final: f64) -> f64 {
    let d0 = x.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1.0);
    let d1 = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if d1 <= 1e-12 * d0 {
        return t_final;
    }
    (0.01 * d0 / d1 * (tol / 1e-6).powf(0.2)).min(t_final)
}

fn lower_envelope_for(initial: &DiscreteMeasure, kc: &KernelConstants, i: usize, j: usize, t: f64) -> f64 {
    let x = initial.positions();
    let w = initial.weights();
    let lam = kc.gamma_prefactor() * w[i].max(w[j]).powi(3);
    let a = kc.a_const;
    (x[j] - x[i]) * (-a * t).exp() + lam / a * (1.0 - (-a * t).exp())
}

impl Trajectory {
    pub fn weights(&self) -> &[f64] {
        self.initial.weights()
    }

    pub fn num_particles(&self) -> usize {
        self.initial.len()
    }

    pub fn node_times(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.t).collect()
    }

    pub fn accepted_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn rejected_steps(&self) -> usize {
        self.step_log.iter().filter(|r| r.rejected).count()
    }

    fn bracket(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.t_final) {
            return Err(Error::Parameter(format!("time {t} outside [0, {}]", self.t_final)));
        }
        let k = self.nodes.partition_point(|n| n.t <= t);
        Ok(k.clamp(1, self.nodes.len().max(2) - 1))
    }

    /// Dense output of the Dormand–Prince continuous extension (order four).
    pub fn positions_at(&self, t: f64) -> Result<Vec<f64>> {
        if self.nodes.len() == 1 {
            return Ok(self.nodes[0].x.clone());
        }
        let k = self.bracket(t)?;
        let (a, b) = (&self.nodes[k - 1], &self.nodes[k]);
        if t == a.t {
            return Ok(a.x.clone());
        }
        if t == b.t {
            return Ok(b.x.clone());
        }
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let s1 = 1.0 - s;
        Ok((0..a.x.len())
            .map(|i| {
                let r2 = b.x[i] - a.x[i];
                let r3 = h * a.v[i] - r2;
                let r4 = r2 - h * b.v[i] - r3;
                a.x[i] + s * (r2 + s1 * (r3 + s * (r4 + s1 * b.d[i])))
            })
            .collect())
    }

    /// Time derivative of the dense output.
    pub fn dense_velocity_at(&self, t: f64) -> Result<Vec<f64>> {
        if self.nodes.len() == 1 {
            return Ok(self.nodes[0].v.clone());
        }
        let k = self.bracket(t)?;
        let (a, b) = (&self.nodes[k - 1], &self.nodes[k]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let s1 = 1.0 - s;
        Ok((0..a.x.len())
            .map(|i| {
                let r2 = b.x[i] - a.x[i];
                let r3 = h * a.v[i] - r2;
                let r4 = r2 - h * b.v[i] - r3;
                let q = r4 + s1 * b.d[i];
                let r = r3 + s * q;
                let dr = q - s * b.d[i];
                let ds = -r + s1 * dr;
                (r2 + s1 * r + s * ds) / h
            })
            .collect())
    }

    pub fn state_at(&self, t: f64) -> Result<ParticleState> {
        Ok(ParticleState { time: t, positions: self.positions_at(t)?, weights: self.weights().to_vec() })
    }

    /// Right-hand side evaluated at the initial state.
    pub fn initial_velocity(&self) -> &[f64] {
        &self.nodes[0].v
    }

    /// `max_k ‖x_{k+1} − x_k‖∞ / Δt_k` over accepted steps.
    pub fn max_step_speed(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|p| {
                let dt = p[1].t - p[0].t;
                p[0].x.iter().zip(&p[1].x).fold(0.0f64, |m, (a, b)| m.max((b - a).abs())) / dt
            })
            .fold(0.0, f64::max)
    }

    /// Smallest neighbour gap over all accepted steps.
    pub fn min_gap_over_steps(&self) -> f64 {
        self.nodes.iter().map(|n| min_gap(&n.x).0).fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,i,x,v")?;
        for s in &self.states {
            let v = velocity_fast_slices(&s.positions, &s.weights, self.kc.alpha).velocities;
            for (i, (x, vi)) in s.positions.iter().zip(&v).enumerate() {
                writeln!(out, "{:.16e},{i},{x:.16e},{vi:.16e}", s.time)?;
            }
        }
        Ok(())
    }

    pub fn write_step_log_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "step,t,dt,err_est,rejected,min_gap")?;
        for r in &self.step_log {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
                r.step, r.t, r.dt, r.err_est, r.rejected as u8, r.min_gap
            )?;
        }
        Ok(())
    }
}

/// Worst margins of the gap envelopes over the checked pairs and sample times.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub pairs_checked: usize,
    pub times_checked: usize,
    /// `min (gap − lower envelope)`.
    pub lower_margin: f64,
    /// `min (upper envelope − gap)`.
    pub upper_margin: f64,
    /// `min (margin + 10·tol·t)` over both sides; the check passes when ≥ 0.
    pub slack_margin: f64,
    pub worst_pair: (usize, usize),
    pub worst_time: f64,
    pub violations: usize,
}

impl EnvelopeReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Slack absorbing integration and interpolation error in every envelope check.
pub fn envelope_slack(tol: f64, t: f64) -> f64 {
    10.0 * tol * t
}

/// Checks the two-sided Grönwall gap envelopes against the trajectory's
/// driving measure: all pairs if `N² ≤ pair_budget`, otherwise every
/// adjacent pair plus random pairs drawn with `seed`.
pub fn envelope_check(traj: &Trajectory, pair_budget: usize, seed: u64) -> EnvelopeReport {
    let n = traj.num_particles();
    let x0 = traj.initial.positions();
    let w = traj.weights();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + w[i];
    }
    let pairs: Vec<(usize, usize)> = if n * n <= pair_budget {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        let mut p: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        let total = n * (n - 1) / 2;
        let extra = pair_budget.saturating_sub(p.len()).min(total);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for idx in sample(&mut rng, total, extra).into_iter() {
            // unrank idx into (i, j), i < j
            let mut i = 0;
            let mut rem = idx;
            while rem >= n - 1 - i {
                rem -= n - 1 - i;
                i += 1;
            }
            let j = i + 1 + rem;
            if j != i + 1 {
                p.push((i, j));
            }
        }
        p
    };

    let kc = &traj.kc;
    let a = kc.a_const;
    let pre = kc.gamma_prefactor();
    let mut rep = EnvelopeReport {
        pairs_checked: pairs.len(),
        times_checked: traj.states.len(),
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
        slack_margin: f64::INFINITY,
        worst_pair: (0, 0),
        worst_time: 0.0,
        violations: 0,
    };
    for s in &traj.states {
        let t = s.time;
        let (decay, grow) = ((-a * t).exp(), (a * t).exp());
        let slack = envelope_slack(traj.tol, t);
        for &(i, j) in &pairs {
            let gap0 = x0[j] - x0[i];
            // μ[x_i, x_j) + μ(x_i, x_j]
            let between = (prefix[j] - prefix[i]) + (prefix[j + 1] - prefix[i + 1]);
            let gamma = pre * between;
            let lambda = pre * w[i].max(w[j]).powi(3);
            let lower = gap0 * decay + lambda / a * (1.0 - decay);
            let upper = gap0 * grow + gamma / a * (grow - 1.0);
            let gap = s.positions[j] - s.positions[i];
            let (ml, mu) = (gap - lower, upper - gap);
            rep.lower_margin = rep.lower_margin.min(ml);
            rep.upper_margin = rep.upper_margin.min(mu);
            let m = ml.min(mu) + slack;
            if m < rep.slack_margin {
                rep.slack_margin = m;
                rep.worst_pair = (i, j);
                rep.worst_time = t;
            }
            if m < 0.0 {
                rep.violations += 1;
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constants;

    fn pair(n: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(vec![-1.0 / n, 1.0 / n], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn single_particle_does_not_move() {
        let kc = constants(1.0).unwrap();
        let s = ParticleState { time: 0.0, positions: vec![0.3], weights: vec![1.0] };
        let out = step(&s, 0.7, &kc).unwrap();
        assert_eq!(out.state.positions, vec![0.3]);
        let m = DiscreteMeasure::new(vec![0.3], vec![1.0]).unwrap();
        let traj = simulate(&m, 100.0, 1e-8, &kc, &[50.0, 100.0]).unwrap();
        assert!(traj.states.iter().all(|s| s.positions == vec![0.3]));
        assert_eq!(traj.states.len(), 3);
    }

    #[test]
    fn symmetric_pair_single_step() {
        let kc = constants(1.0).unwrap();
        let s = ParticleState { time: 0.0, positions: vec![-0.5, 0.5], weights: vec![0.5, 0.5] };
        let dt = 1e-3;
        let out = step(&s, dt, &kc).unwrap();
        let moved = out.state.positions[1] - 0.5;
        assert!((moved / dt - 0.002_164_8).abs() < 1e-6, "{}", moved / dt);
        assert_eq!(out.state.positions[0], -out.state.positions[1]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let kc = constants(1.0).unwrap();
        let m = pair(2.0);
        assert!(simulate(&m, 0.0, 1e-8, &kc, &[]).is_err());
        assert!(simulate(&m, 1.0, 1e-2, &kc, &[]).is_err());
        assert!(simulate(&m, 1.0, 1e-13, &kc, &[]).is_err());
        assert!(simulate(&m, 1.0, 1e-8, &kc, &[2.0]).is_err());
        let s = ParticleState { time: 0.0, positions: vec![0.0], weights: vec![1.0] };
        assert!(step(&s, 0.0, &kc).is_err());
    }

    #[test]
    fn envelopes_collapse_at_time_zero() {
        let kc = constants(1.0).unwrap();
        let traj = simulate(&pair(10.0), 1.0, 1e-8, &kc, &[]).unwrap();
        let rep = envelope_check(&traj, 100, 0);
        assert_eq!(rep.times_checked, 1);
        assert_eq!(rep.lower_margin, 0.0);
        assert_eq!(rep.upper_margin, 0.0);
        assert!(rep.pass());
    }

    #[test]
    fn dense_output_hits_nodes() {
        let kc = constants(1.0).unwrap();
        let traj = simulate(&pair(4.0), 5.0, 1e-9, &kc, &[]).unwrap();
        for (t, n) in traj.node_times().iter().zip(&traj.nodes) {
            assert_eq!(&traj.positions_at(*t).unwrap(), &n.x);
        }
        assert!(traj.positions_at(5.5).is_err());
    }
}
