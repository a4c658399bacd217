//! The bi-Helmholtz Green's function
//!
//! ```text
//! K(x) = (α + |x|) e^{-|x|/α} / (4α²)
//! ```
//!
//! and its derivatives, together with the norms and Lipschitz constants used
//! by the gap envelopes and speed bounds. `K` and `K''` are even and
//! continuous, `K'` is odd and continuous, `K'''` is odd with a jump of
//! `2·‖K'''‖∞` at the origin, and `K''''` (away from 0) is even.
//!
//! The fallible free functions validate their arguments. [`Kernel`] is the
//! validated handle the hot loops use.

use crate::error::{Error, Result};

/// Side of the origin for one-sided limits of `K'''`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// A smoothing length that has been checked to be finite and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    alpha: f64,
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("alpha must be finite and > 0, got {alpha}")))
    }
}

impl Kernel {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    fn pref(&self) -> f64 {
        0.25 / (self.alpha * self.alpha)
    }

    #[inline]
    pub fn k(&self, x: f64) -> f64 {
        let a = self.alpha;
        let r = x.abs();
        self.pref() * (a + r) * (-r / a).exp()
    }

    #[inline]
    pub fn d1(&self, x: f64) -> f64 {
        let a = self.alpha;
        -x * (-x.abs() / a).exp() * 0.25 / (a * a * a)
    }

    #[inline]
    pub fn d2(&self, x: f64) -> f64 {
        let a = self.alpha;
        let r = x.abs();
        self.pref() * (r / (a * a) - 1.0 / a) * (-r / a).exp()
    }

    /// `K'''` on the branch selected by `sign` (±1). For `x ≠ 0` the caller
    /// passes `x.signum()`; at `x = 0` this is the one-sided limit.
    #[inline]
    pub fn d3_branch(&self, x: f64, sign: f64) -> f64 {
        let a = self.alpha;
        let a2 = a * a;
        self.pref() * (2.0 * sign / a2 - x / (a2 * a)) * (-x.abs() / a).exp()
    }

    /// `K'''(x)` for `x ≠ 0`. The value at 0 is meaningless; callers exclude it.
    #[inline]
    pub fn d3(&self, x: f64) -> f64 {
        debug_assert!(x != 0.0, "K''' is undefined at the origin");
        self.d3_branch(x, x.signum())
    }

    /// `K''''(x)` for `x ≠ 0`; the same expression gives the (two-sided) limit at 0.
    #[inline]
    pub fn d4(&self, x: f64) -> f64 {
        let a = self.alpha;
        let r = x.abs();
        self.pref() * (-r / a).exp() * (r - 3.0 * a) / (a * a * a * a)
    }

    /// `((K''')²)'(x)` for `x ≠ 0`.
    #[inline]
    pub fn d3_squared_deriv(&self, x: f64) -> f64 {
        let a = self.alpha;
        let a4 = a * a * a * a;
        let s = x.signum();
        (1.0 / (16.0 * a4))
            * (-12.0 * s / (a4 * a) + 10.0 * x / (a4 * a * a) - 2.0 * x * x.abs() / (a4 * a * a * a))
            * (-2.0 * x.abs() / a).exp()
    }

    pub fn constants(&self) -> KernelConstants {
        let a = self.alpha;
        let k_inf = 0.25 / a;
        let k3_inf = 0.5 / a.powi(4);
        let lip_k = (-1.0f64).exp() / (4.0 * a * a);
        let lip_k3 = 0.75 / a.powi(5);
        KernelConstants {
            alpha: a,
            k_inf,
            k3_inf,
            lip_k,
            lip_k3,
            a_const: 2.0 * k_inf * (2.0 * lip_k * k3_inf + k_inf * lip_k3),
            speed_bound: k_inf * k_inf * k3_inf,
        }
    }
}

/// Closed-form norms and Lipschitz constants of `K` for a fixed `α`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelConstants {
    pub alpha: f64,
    /// `‖K‖∞ = K(0)`
    pub k_inf: f64,
    /// `‖K'''‖∞ = |K'''(0±)|`
    pub k3_inf: f64,
    /// `Lip(K) = sup|K'|`, attained at `|x| = α`
    pub lip_k: f64,
    /// Common Lipschitz constant of `K'''` on each half-line, `sup|K''''|`
    pub lip_k3: f64,
    /// Envelope rate `A = 2‖K‖∞(2 Lip(K)‖K'''‖∞ + ‖K‖∞ Lip(K'''))`
    pub a_const: f64,
    /// `‖K‖∞²‖K'''‖∞`, the bound on every particle speed
    pub speed_bound: f64,
}

impl KernelConstants {
    pub fn kernel(&self) -> Kernel {
        Kernel { alpha: self.alpha }
    }

    /// `‖K‖∞²‖K'''‖∞`, the common prefactor of Γ and Λ.
    #[inline]
    pub fn gamma_prefactor(&self) -> f64 {
        self.k_inf * self.k_inf * self.k3_inf
    }
}

pub fn eval_k(x: f64, alpha: f64) -> Result<f64> {
    Ok(Kernel::new(alpha)?.k(x))
}

/// Derivative of `K` of the given order (1 to 4). Orders 3 and 4 are
/// undefined at the origin; use [`eval_k3_signed`] for one-sided limits.
pub fn eval_k_deriv(x: f64, order: u8, alpha: f64) -> Result<f64> {
    let k = Kernel::new(alpha)?;
    match order {
        1 => Ok(k.d1(x)),
        2 => Ok(k.d2(x)),
        3 | 4 if x == 0.0 => Err(Error::Domain(format!(
            "K derivative of order {order} is not defined at x = 0"
        ))),
        3 => Ok(k.d3(x)),
        4 => Ok(k.d4(x)),
        _ => Err(Error::Parameter(format!("derivative order must be 1..=4, got {order}"))),
    }
}

/// `K'''` evaluated on the branch of `side`; at `x = 0` this is the one-sided limit `±1/(2α⁴)`.
pub fn eval_k3_signed(x: f64, side: Side, alpha: f64) -> Result<f64> {
    Ok(Kernel::new(alpha)?.d3_branch(x, side.sign()))
}

pub fn constants(alpha: f64) -> Result<KernelConstants> {
    Ok(Kernel::new(alpha)?.constants())
}

/// `K − 2α²K'' + α⁴K''''` at `x ≠ 0`. Vanishes identically; the bi-Helmholtz
/// operator applied to `K` is a point mass at the origin.
pub fn check_greens_identity(x: f64, alpha: f64) -> Result<f64> {
    let k = Kernel::new(alpha)?;
    if x == 0.0 {
        return Err(Error::Domain("Green's identity is only pointwise for x != 0".into()));
    }
    let a2 = alpha * alpha;
    Ok(k.k(x) - 2.0 * a2 * k.d2(x) + a2 * a2 * k.d4(x))
}

/// `K K''' − 2α²K''K''' + ½α⁴((K''')²)'` at `x ≠ 0`; vanishes identically.
pub fn check_lemma_identity(x: f64, alpha: f64) -> Result<f64> {
    let k = Kernel::new(alpha)?;
    if x == 0.0 {
        return Err(Error::Domain("K''' identity is only defined for x != 0".into()));
    }
    let a2 = alpha * alpha;
    let k3 = k.d3(x);
    Ok(k.k(x) * k3 - 2.0 * a2 * k.d2(x) * k3 + 0.5 * a2 * a2 * k.d3_squared_deriv(x))
}

/// Magnitude used to judge [`check_lemma_identity`] residuals: `α⁻⁵`, the
/// scale of each product term.
pub fn lemma_identity_scale(alpha: f64) -> f64 {
    alpha.powi(-5)
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_INV: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn kernel_values() {
        assert_eq!(eval_k(0.0, 1.0).unwrap(), 0.25);
        assert!((eval_k(1.0, 1.0).unwrap() - 0.5 * E_INV).abs() < 1e-15);
        assert_eq!(eval_k(-1.0, 1.0).unwrap(), eval_k(1.0, 1.0).unwrap());
        assert!(eval_k(1.0, 0.0).is_err());
        assert!(eval_k(1.0, -2.0).is_err());
        assert!(eval_k(1.0, f64::NAN).is_err());
    }

    #[test]
    fn derivative_values() {
        assert_eq!(eval_k_deriv(0.0, 2, 1.0).unwrap(), -0.25);
        assert!((eval_k_deriv(1.0, 3, 1.0).unwrap() - 0.25 * E_INV).abs() < 1e-15);
        assert_eq!(eval_k3_signed(0.0, Side::Plus, 1.0).unwrap(), 0.5);
        assert_eq!(eval_k3_signed(0.0, Side::Minus, 1.0).unwrap(), -0.5);
        assert_eq!(eval_k_deriv(0.0, 1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn origin_is_a_domain_error_for_orders_three_and_four() {
        assert!(matches!(eval_k_deriv(0.0, 3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eval_k_deriv(0.0, 4, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eval_k_deriv(0.5, 5, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(check_greens_identity(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(check_lemma_identity(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn constants_closed_forms() {
        let c = constants(1.0).unwrap();
        assert_eq!(c.k_inf, 0.25);
        assert_eq!(c.speed_bound, 0.03125);
        assert!((c.a_const - 0.139_734_9).abs() < 1e-6);
        assert_eq!(constants(2.0).unwrap().k_inf, 0.125);
        let c = constants(0.7).unwrap();
        assert_eq!(
            c.a_const,
            2.0 * c.k_inf * (2.0 * c.lip_k * c.k3_inf + c.k_inf * c.lip_k3)
        );
        assert_eq!(c.speed_bound, c.k_inf * c.k_inf * c.k3_inf);
    }

    #[test]
    fn identities_vanish_at_spec_points() {
        for (x, a) in [(1.0, 1.0), (-3.7, 0.5), (1e-9, 1.0)] {
            let r = check_greens_identity(x, a).unwrap();
            assert!(r.abs() <= 1e-12 * constants(a).unwrap().k_inf, "{x} {a} {r}");
        }
        for (x, a) in [(0.3, 1.0), (-2.0, 1.0), (5.0, 0.25)] {
            let r = check_lemma_identity(x, a).unwrap();
            assert!(r.abs() <= 1e-12 * lemma_identity_scale(a), "{x} {a} {r}");
        }
    }

    #[test]
    fn far_field_underflows_to_zero() {
        assert_eq!(eval_k(800.0, 1.0).unwrap(), 0.0);
        assert_eq!(eval_k_deriv(-800.0, 3, 1.0).unwrap(), 0.0);
    }
}
