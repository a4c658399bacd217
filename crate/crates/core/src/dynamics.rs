//! Particle velocity field
//!
//! ```text
//! v_i = h̄(x_i)² Σ_{j≠i} w_j K'''(x_i − x_j),   h̄(x_i) = Σ_j w_j K(x_i − x_j)
//! ```
//!
//! in two forms: a compensated `O(N²)` direct sum that serves as the oracle,
//! and an `O(N)` sweep over the sorted positions.
//!
//! The sweep keeps, for every target point `x`, the one-sided moments
//!
//! ```text
//! A(x) = Σ_{x_j < x} w_j e^{−(x − x_j)/α},   B(x) = Σ_{x_j < x} w_j (x − x_j) e^{−(x − x_j)/α}
//! ```
//!
//! (and their mirror images from the right). Moving the anchor from `p` to
//! `q ≥ p` updates them by `A ← e^{−(q−p)/α} A`, `B ← e^{−(q−p)/α}(B + (q−p)A)`;
//! every factor is at most one, so the recurrence never amplifies rounding
//! and never overflows regardless of the particle span. `K`, `K'`, `K''` and
//! `K'''` sums are fixed linear combinations of the four moments.

use crate::error::{Error, Result};
use crate::integrator::ParticleState;
use crate::kernel::{Kernel, KernelConstants};
use crate::measure::check_strictly_increasing;
use crate::sum::Neumaier;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub left_a: f64,
    pub left_b: f64,
    pub right_a: f64,
    pub right_b: f64,
    /// Total source weight located exactly at the target.
    pub coincident: f64,
}

impl Moments {
    #[inline]
    pub fn hbar(&self, alpha: f64) -> f64 {
        (alpha * (self.left_a + self.right_a) + self.left_b + self.right_b) * 0.25 / (alpha * alpha)
            + self.coincident * 0.25 / alpha
    }

    #[inline]
    pub fn hbar_x(&self, alpha: f64) -> f64 {
        (self.right_b - self.left_b) * 0.25 / (alpha * alpha * alpha)
    }

    #[inline]
    pub fn hbar_xx(&self, alpha: f64) -> f64 {
        let a2 = alpha * alpha;
        ((self.left_b + self.right_b) / a2 - (self.left_a + self.right_a) / alpha) * 0.25 / a2
            - self.coincident * 0.25 / (a2 * alpha)
    }

    /// Third-derivative sum over sources away from the target (coincident excluded).
    #[inline]
    pub fn hbar_xxx(&self, alpha: f64) -> f64 {
        let a2 = alpha * alpha;
        (2.0 * (self.left_a - self.right_a) / a2 - (self.left_b - self.right_b) / (a2 * alpha))
            * 0.25
            / a2
    }
}

/// One-sided exponential moments of sorted `sources` evaluated at sorted `targets`.
pub(crate) fn exp_moments(src_x: &[f64], src_w: &[f64], targets: &[f64], alpha: f64) -> Vec<Moments> {
    let mut out = vec![Moments::default(); targets.len()];

    // left-to-right
    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut anchor = f64::NEG_INFINITY;
    let mut j = 0;
    for (t, m) in targets.iter().zip(out.iter_mut()) {
        while j < src_x.len() && src_x[j] < *t {
            advance(&mut a, &mut b, &mut anchor, src_x[j], alpha);
            a += src_w[j];
            j += 1;
        }
        advance(&mut a, &mut b, &mut anchor, *t, alpha);
        m.left_a = a;
        m.left_b = b;
        let mut k = j;
        while k < src_x.len() && src_x[k] == *t {
            m.coincident += src_w[k];
            k += 1;
        }
    }

    // right-to-left, on negated coordinates
    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut anchor = f64::NEG_INFINITY;
    let mut j = src_x.len();
    for (t, m) in targets.iter().zip(out.iter_mut()).rev() {
        while j > 0 && src_x[j - 1] > *t {
            advance(&mut a, &mut b, &mut anchor, -src_x[j - 1], alpha);
            a += src_w[j - 1];
            j -= 1;
        }
        advance(&mut a, &mut b, &mut anchor, -*t, alpha);
        m.right_a = a;
        m.right_b = b;
    }
    out
}

#[inline]
fn advance(a: &mut f64, b: &mut f64, anchor: &mut f64, to: f64, alpha: f64) {
    if *anchor == f64::NEG_INFINITY {
        *anchor = to;
        return;
    }
    let d = to - *anchor;
    if d > 0.0 {
        let e = (-d / alpha).exp();
        *b = e * (*b + d * *a);
        *a *= e;
        *anchor = to;
    }
}

/// Velocities together with the two sums they are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEval {
    pub velocities: Vec<f64>,
    /// `h̄(x_i)`, self term included.
    pub hbar_at: Vec<f64>,
    /// `Σ_{j≠i} w_j K'''(x_i − x_j)`.
    pub k3_sums: Vec<f64>,
}

impl VelocityEval {
    fn from_parts(hbar_at: Vec<f64>, k3_sums: Vec<f64>) -> Self {
        let velocities = hbar_at.iter().zip(&k3_sums).map(|(h, s)| h * h * s).collect();
        Self { velocities, hbar_at, k3_sums }
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn velocity_fast_slices(positions: &[f64], weights: &[f64], alpha: f64) -> VelocityEval {
    let mom = exp_moments(positions, weights, positions, alpha);
    let hbar = mom.iter().map(|m| m.hbar(alpha)).collect();
    let k3 = mom.iter().map(|m| m.hbar_xxx(alpha)).collect();
    VelocityEval::from_parts(hbar, k3)
}

pub(crate) fn velocity_direct_slices(positions: &[f64], weights: &[f64], kernel: &Kernel) -> VelocityEval {
    let n = positions.len();
    let mut hbar = Vec::with_capacity(n);
    let mut k3 = Vec::with_capacity(n);
    for i in 0..n {
        let xi = positions[i];
        let mut h = Neumaier::new();
        let mut s = Neumaier::new();
        for j in 0..n {
            let d = xi - positions[j];
            h.add(weights[j] * kernel.k(d));
            if j != i {
                s.add(weights[j] * kernel.d3(d));
            }
        }
        hbar.push(h.value());
        k3.push(s.value());
    }
    VelocityEval::from_parts(hbar, k3)
}

fn check_state(state: &ParticleState) -> Result<()> {
    if state.positions.len() != state.weights.len() {
        return Err(Error::Parameter("positions and weights differ in length".into()));
    }
    check_strictly_increasing(&state.positions)
}

/// `O(N²)` evaluation with compensated accumulation.
pub fn velocity_direct(state: &ParticleState, kc: &KernelConstants) -> Result<VelocityEval> {
    check_state(state)?;
    Ok(velocity_direct_slices(&state.positions, &state.weights, &kc.kernel()))
}

/// `O(N)` evaluation by the anchored exponential sweep.
pub fn velocity_fast(state: &ParticleState, kc: &KernelConstants) -> Result<VelocityEval> {
    check_state(state)?;
    Ok(velocity_fast_slices(&state.positions, &state.weights, kc.alpha))
}

/// `min_i (h̄(x_i) − ‖K‖∞ w_i)`; the self term alone contributes `‖K‖∞ w_i`,
/// so this is non-negative up to rounding.
pub fn hbar_min_bound_check(state: &ParticleState, kc: &KernelConstants) -> Result<f64> {
    let eval = velocity_fast(state, kc)?;
    Ok(eval
        .hbar_at
        .iter()
        .zip(&state.weights)
        .map(|(h, w)| h - kc.k_inf * w)
        .fold(f64::INFINITY, f64::min))
}

/// Per-particle magnitude scale `h̄_i² Σ_{j≠i} w_j |K'''|_maj(x_i − x_j)` where
/// `|K'''|_maj` is `K'''` with both terms of its closed form taken in absolute
/// value. Deviations between summation routes are judged against this scale,
/// the conditioning of the sum itself.
pub fn velocity_scale(state: &ParticleState, kc: &KernelConstants) -> Result<Vec<f64>> {
    check_state(state)?;
    let alpha = kc.alpha;
    let mom = exp_moments(&state.positions, &state.weights, &state.positions, alpha);
    let a2 = alpha * alpha;
    Ok(mom
        .iter()
        .map(|m| {
            let h = m.hbar(alpha);
            let maj = (2.0 * (m.left_a + m.right_a) / a2 + (m.left_b + m.right_b) / (a2 * alpha)) * 0.25 / a2;
            h * h * maj
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constants;

    fn state(x: Vec<f64>, w: Vec<f64>) -> ParticleState {
        ParticleState { time: 0.0, positions: x, weights: w }
    }

    #[test]
    fn single_particle_is_stationary() {
        let kc = constants(1.0).unwrap();
        let s = state(vec![0.0], vec![1.0]);
        for ev in [velocity_direct(&s, &kc).unwrap(), velocity_fast(&s, &kc).unwrap()] {
            assert_eq!(ev.velocities, vec![0.0]);
            assert_eq!(ev.hbar_at, vec![0.25]);
        }
        assert_eq!(hbar_min_bound_check(&s, &kc).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_pair_reference_values() {
        // h̄ = ½(K(0) + K(1)), K'''(1) = e⁻¹/4, v₂ = h̄² · ½K'''(1)
        let kc = constants(1.0).unwrap();
        let e = (-1.0f64).exp();
        let hbar = 0.5 * (0.25 + 0.5 * e);
        let v = hbar * hbar * 0.5 * 0.25 * e;
        assert!((hbar - 0.216_970).abs() < 1e-6);
        assert!((v - 0.002_164_8).abs() < 1e-7);
        let s = state(vec![-0.5, 0.5], vec![0.5, 0.5]);
        for ev in [velocity_direct(&s, &kc).unwrap(), velocity_fast(&s, &kc).unwrap()] {
            assert!((ev.hbar_at[1] - hbar).abs() < 1e-14);
            assert!((ev.velocities[1] - v).abs() < 1e-14);
            assert_eq!(ev.velocities[0], -ev.velocities[1]);
        }
        assert!(hbar_min_bound_check(&s, &kc).unwrap() > 0.0);
    }

    #[test]
    fn duplicate_positions_are_an_ordering_error() {
        let kc = constants(1.0).unwrap();
        let s = state(vec![0.0, 1.0, 1.0], vec![0.2, 0.2, 0.2]);
        assert!(matches!(velocity_fast(&s, &kc), Err(Error::Ordering { index: 1, .. })));
        assert!(matches!(velocity_direct(&s, &kc), Err(Error::Ordering { index: 1, .. })));
    }

    #[test]
    fn moments_with_coincident_targets() {
        let m = exp_moments(&[0.0, 1.0], &[0.25, 0.5], &[-1.0, 0.0, 0.5, 1.0, 2.0], 1.0);
        assert_eq!(m[1].coincident, 0.25);
        assert_eq!(m[3].coincident, 0.5);
        assert_eq!(m[0].left_a, 0.0);
        assert_eq!(m[4].right_a, 0.0);
        let e = (-1.0f64).exp();
        assert!((m[4].left_a - (0.25 * e * e + 0.5 * e)).abs() < 1e-15);
        assert!((m[4].left_b - (0.25 * 2.0 * e * e + 0.5 * e)).abs() < 1e-15);
    }
}
