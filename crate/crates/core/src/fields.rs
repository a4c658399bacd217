//! Smoothed height `h̄ = K * h` of a particle state and derived quantities.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::exp_moments;
use crate::error::{Error, Result};
use crate::integrator::{ParticleState, Trajectory};
use crate::kernel::KernelConstants;
use crate::quadrature::{panels, GaussLegendre};
use crate::sum::Neumaier;

/// `h̄` and its first three derivatives on a grid at one time.
///
/// At a grid point that coincides with a particle, `hbar_xxx` leaves out that
/// particle's own (undefined) contribution and `at_particle` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub time: f64,
    pub grid: Vec<f64>,
    pub hbar: Vec<f64>,
    pub hbar_x: Vec<f64>,
    pub hbar_xx: Vec<f64>,
    pub hbar_xxx: Vec<f64>,
    pub at_particle: Vec<bool>,
}

fn check_sorted(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("grid contains a non-finite point".into()));
    }
    match grid.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(Error::Parameter(format!("grid is not sorted at index {i}"))),
        None => Ok(()),
    }
}

/// Fields by one merged sweep over particles and grid points, `O(N + M)`.
pub fn sample_fields(state: &ParticleState, grid: &[f64], kc: &KernelConstants) -> Result<FieldSample> {
    check_sorted(grid)?;
    let alpha = kc.alpha;
    let mom = exp_moments(&state.positions, &state.weights, grid, alpha);
    Ok(FieldSample {
        time: state.time,
        grid: grid.to_vec(),
        hbar: mom.iter().map(|m| m.hbar(alpha)).collect(),
        hbar_x: mom.iter().map(|m| m.hbar_x(alpha)).collect(),
        hbar_xx: mom.iter().map(|m| m.hbar_xx(alpha)).collect(),
        hbar_xxx: mom.iter().map(|m| m.hbar_xxx(alpha)).collect(),
        at_particle: mom.iter().map(|m| m.coincident > 0.0).collect(),
    })
}

/// Reference `O(N·M)` evaluation with compensated sums.
pub fn sample_fields_direct(state: &ParticleState, grid: &[f64], kc: &KernelConstants) -> Result<FieldSample> {
    check_sorted(grid)?;
    let k = kc.kernel();
    let mut out = FieldSample {
        time: state.time,
        grid: grid.to_vec(),
        hbar: Vec::with_capacity(grid.len()),
        hbar_x: Vec::with_capacity(grid.len()),
        hbar_xx: Vec::with_capacity(grid.len()),
        hbar_xxx: Vec::with_capacity(grid.len()),
        at_particle: Vec::with_capacity(grid.len()),
    };
    for &g in grid {
        let mut s = [Neumaier::new(); 4];
        let mut hit = false;
        for (&x, &w) in state.positions.iter().zip(&state.weights) {
            let d = g - x;
            s[0].add(w * k.k(d));
            s[1].add(w * k.d1(d));
            s[2].add(w * k.d2(d));
            if d == 0.0 {
                hit |= w > 0.0;
            } else {
                s[3].add(w * k.d3(d));
            }
        }
        out.hbar.push(s[0].value());
        out.hbar_x.push(s[1].value());
        out.hbar_xx.push(s[2].value());
        out.hbar_xxx.push(s[3].value());
        out.at_particle.push(hit);
    }
    Ok(out)
}

/// `E = ½∫∂x h ∂x h̄ dx = −½ Σ_i Σ_j w_i w_j K''(x_i − x_j)` for a particle measure.
pub fn surface_energy(state: &ParticleState, kc: &KernelConstants) -> Result<f64> {
    let f = sample_fields(state, &state.positions, kc)?;
    let mut acc = Neumaier::new();
    for (w, hxx) in state.weights.iter().zip(&f.hbar_xx) {
        acc.add(w * hxx);
    }
    Ok(-0.5 * acc.value())
}

/// Breakpoints for integrals of `h̄` and its derivatives: the window
/// `[min x − 40α, max x + 40α]` plus every particle position of every state.
pub fn quad_breakpoints(states: &[&ParticleState], kc: &KernelConstants) -> Vec<f64> {
    let mut pts: Vec<f64> = states.iter().flat_map(|s| s.positions.iter().copied()).collect();
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 40.0 * kc.alpha;
    pts.push(lo - pad);
    pts.push(hi + pad);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Gauss–Legendre nodes and weights (16 per panel, panels ≤ α/4).
fn quad_nodes(breakpoints: &[f64], kc: &KernelConstants) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(16);
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for (a, b) in panels(breakpoints, 0.25 * kc.alpha) {
        for (x, w) in gl.mapped(a, b) {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}

fn check_breakpoints(state: &ParticleState, breakpoints: &[f64]) -> Result<()> {
    check_sorted(breakpoints)?;
    for &x in &state.positions {
        if breakpoints.binary_search_by(|b| b.total_cmp(&x)).is_err() {
            return Err(Error::Parameter(format!(
                "particle position {x} is missing from the quadrature breakpoints"
            )));
        }
    }
    Ok(())
}

/// `∫ h̄ dx` over the quadrature window.
pub fn mass_integral(state: &ParticleState, kc: &KernelConstants) -> Result<f64> {
    let bp = quad_breakpoints(&[state], kc);
    let (xs, ws) = quad_nodes(&bp, kc);
    let f = sample_fields(state, &xs, kc)?;
    let mut acc = Neumaier::new();
    for (w, h) in ws.iter().zip(&f.hbar) {
        acc.add(w * h);
    }
    Ok(acc.value())
}

/// `‖h̄_a − h̄_b‖_{H³}` by composite Gauss–Legendre between `breakpoints`,
/// which must contain every particle position of both states.
pub fn h3_norm_diff(
    a: &ParticleState,
    b: &ParticleState,
    breakpoints: &[f64],
    kc: &KernelConstants,
) -> Result<f64> {
    check_breakpoints(a, breakpoints)?;
    check_breakpoints(b, breakpoints)?;
    let (xs, ws) = quad_nodes(breakpoints, kc);
    let fa = sample_fields(a, &xs, kc)?;
    let fb = sample_fields(b, &xs, kc)?;
    let mut acc = Neumaier::new();
    for i in 0..xs.len() {
        let d = [
            fa.hbar[i] - fb.hbar[i],
            fa.hbar_x[i] - fb.hbar_x[i],
            fa.hbar_xx[i] - fb.hbar_xx[i],
            fa.hbar_xxx[i] - fb.hbar_xxx[i],
        ];
        acc.add(ws[i] * d.iter().map(|v| v * v).sum::<f64>());
    }
    Ok(acc.value().max(0.0).sqrt())
}

/// `‖h̄‖_{H³}` of a single state.
pub fn h3_norm(a: &ParticleState, kc: &KernelConstants) -> Result<f64> {
    let bp = quad_breakpoints(&[a], kc);
    let (xs, ws) = quad_nodes(&bp, kc);
    let f = sample_fields(a, &xs, kc)?;
    let mut acc = Neumaier::new();
    for i in 0..xs.len() {
        let v = [f.hbar[i], f.hbar_x[i], f.hbar_xx[i], f.hbar_xxx[i]];
        acc.add(ws[i] * v.iter().map(|v| v * v).sum::<f64>());
    }
    Ok(acc.value().sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub pairs: usize,
    /// `(p, max ‖h̄(s) − h̄(t)‖_{H³} / |s − t|^p)` for each requested exponent.
    pub quotients: Vec<(f64, f64)>,
    /// The `p = ½` entry.
    pub half_quotient: f64,
    /// `sup_t ‖h̄(t)‖_{H³}` over the stored sample times.
    pub sup_h3: f64,
}

#[derive(Debug, Clone)]
pub struct HolderOptions {
    pub pairs: usize,
    pub seed: u64,
    pub exponents: Vec<f64>,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self { pairs: 100, seed: 0, exponents: vec![0.25, 0.5, 0.75, 1.0] }
    }
}

/// Hölder quotients of `t ↦ h̄(t)` in `H³` over random time pairs from the
/// dense output, plus the supremum of the norm over the sample times.
pub fn holder_report(traj: &Trajectory, opts: &HolderOptions) -> Result<HolderReport> {
    if traj.states.len() < 3 {
        return Err(Error::Parameter("holder_report needs at least 3 sample times".into()));
    }
    let kc = &traj.kc;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut exps = opts.exponents.clone();
    if !exps.contains(&0.5) {
        exps.push(0.5);
    }
    let mut best = vec![0.0f64; exps.len()];
    for _ in 0..opts.pairs {
        let s = rng.gen_range(0.0..=traj.t_final);
        let t = rng.gen_range(0.0..=traj.t_final);
        if s == t {
            continue;
        }
        let (a, b) = (traj.state_at(s)?, traj.state_at(t)?);
        let bp = quad_breakpoints(&[&a, &b], kc);
        let d = h3_norm_diff(&a, &b, &bp, kc)?;
        for (q, p) in best.iter_mut().zip(&exps) {
            *q = q.max(d / (s - t).abs().powf(*p));
        }
    }
    let sup_h3 = traj
        .states
        .iter()
        .map(|s| h3_norm(s, kc))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let quotients: Vec<(f64, f64)> = exps.into_iter().zip(best).collect();
    let half_quotient = quotients.iter().find(|(p, _)| *p == 0.5).map(|q| q.1).unwrap_or(0.0);
    Ok(HolderReport { pairs: opts.pairs, quotients, half_quotient, sup_h3 })
}

pub fn write_fields_csv<W: Write>(samples: &[FieldSample], mut out: W) -> io::Result<()> {
    writeln!(out, "t,x,hbar,hbar_x,hbar_xx,hbar_xxx,at_particle_flag")?;
    for s in samples {
        for i in 0..s.grid.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                s.time,
                s.grid[i],
                s.hbar[i],
                s.hbar_x[i],
                s.hbar_xx[i],
                s.hbar_xxx[i],
                s.at_particle[i] as u8
            )?;
        }
    }
    Ok(())
}

pub fn write_energy_csv<W: Write>(series: &[(f64, f64)], mut out: W) -> io::Result<()> {
    writeln!(out, "t,E")?;
    for (t, e) in series {
        writeln!(out, "{t:.16e},{e:.16e}")?;
    }
    Ok(())
}

/// `(t, E(t))` at every stored sample time.
pub fn energy_series(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    traj.states
        .iter()
        .map(|s| Ok((s.time, surface_energy(s, &traj.kc)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constants;

    fn single() -> ParticleState {
        ParticleState { time: 0.0, positions: vec![0.0], weights: vec![1.0] }
    }

    #[test]
    fn single_particle_fields_at_origin() {
        let kc = constants(1.0).unwrap();
        let f = sample_fields(&single(), &[0.0], &kc).unwrap();
        assert_eq!(f.hbar, vec![0.25]);
        assert_eq!(f.hbar_x, vec![0.0]);
        assert_eq!(f.hbar_xx, vec![-0.25]);
        assert_eq!(f.hbar_xxx, vec![0.0]);
        assert_eq!(f.at_particle, vec![true]);
    }

    #[test]
    fn energy_examples() {
        let kc = constants(1.0).unwrap();
        assert_eq!(surface_energy(&single(), &kc).unwrap(), 0.125);
        let far = ParticleState { time: 0.0, positions: vec![0.0, 50.0], weights: vec![0.5, 0.5] };
        assert!((surface_energy(&far, &kc).unwrap() - 0.0625).abs() < 1e-15);
        let shifted = ParticleState { positions: vec![7.0, 57.0], ..far.clone() };
        assert_eq!(surface_energy(&far, &kc).unwrap(), surface_energy(&shifted, &kc).unwrap());
    }

    #[test]
    fn h3_norm_of_identical_states_is_zero() {
        let kc = constants(1.0).unwrap();
        let s = ParticleState { time: 0.0, positions: vec![-0.3, 0.4], weights: vec![0.5, 0.5] };
        let bp = quad_breakpoints(&[&s], &kc);
        assert_eq!(h3_norm_diff(&s, &s, &bp, &kc).unwrap(), 0.0);
        let bad = vec![-50.0, 50.0];
        assert!(h3_norm_diff(&s, &s, &bad, &kc).is_err());
    }

    #[test]
    fn mass_of_single_particle() {
        let kc = constants(0.5).unwrap();
        let m = mass_integral(&single(), &kc).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "{m}");
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        let kc = constants(1.0).unwrap();
        assert!(sample_fields(&single(), &[1.0, 0.0], &kc).is_err());
    }
}
