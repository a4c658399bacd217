//! Bounded-Lipschitz (Dudley) distance between finite discrete measures,
//!
//! ```text
//! d(a, b) = sup { ∫ f d(a − b) : ‖f‖∞ + Lip(f) ≤ 1 }.
//! ```
//!
//! Restricting `f` to piecewise-linear functions with breakpoints at the
//! union of the supports loses nothing, which leaves a linear program in the
//! breakpoint values `f_k`, the bound `B` and the slope budget `ℓ`:
//!
//! ```text
//! max Σ ν_k f_k   s.t.  |f_k| ≤ B,  |f_{k+1} − f_k| ≤ ℓ Δ_k,  B + ℓ ≤ 1.
//! ```
//!
//! [`bl_distance_lp`] hands this program to the dense simplex. [`bl_distance`]
//! solves the same program exactly by parametric dynamic programming: for a
//! fixed `ℓ` the chain structure makes the optimal value a running max of
//! concave piecewise-linear functions, and the optimum over `ℓ` of that
//! (concave) value is found by golden-section search. The second route costs
//! `O(K²)` per evaluation and handles the grid sizes of the convergence study.

use crate::error::{Error, Result};
use crate::lp;
use crate::measure::DiscreteMeasure;

/// Merged support and signed point masses `(a − b)({p_k})`.
fn signed_masses(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Parameter("bl_distance needs non-empty supports".into()));
    }
    let (pa, wa) = (a.positions(), a.weights());
    let (pb, wb) = (b.positions(), b.weights());
    let mut pts = Vec::with_capacity(pa.len() + pb.len());
    let mut nu = Vec::with_capacity(pa.len() + pb.len());
    let (mut i, mut j) = (0, 0);
    while i < pa.len() || j < pb.len() {
        let take_a = j >= pb.len() || (i < pa.len() && pa[i] <= pb[j]);
        let take_b = i >= pa.len() || (j < pb.len() && pb[j] <= pa[i]);
        let x = if take_a { pa[i] } else { pb[j] };
        let mut v = 0.0;
        if take_a {
            v += wa[i];
            i += 1;
        }
        if take_b {
            v -= wb[j];
            j += 1;
        }
        pts.push(x);
        nu.push(v);
    }
    Ok((pts, nu))
}

/// Concave piecewise-linear function on `[lo, hi]`, stored as knots.
#[derive(Debug, Clone)]
struct Concave {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Concave {
    fn linear(bound: f64, slope: f64) -> Self {
        Self { xs: vec![-bound, bound], ys: vec![-slope * bound, slope * bound] }
    }

    fn add_linear(&mut self, slope: f64) {
        for (x, y) in self.xs.iter().zip(self.ys.iter_mut()) {
            *y += slope * x;
        }
    }

    fn argmax(&self) -> usize {
        let mut best = 0;
        for k in 1..self.ys.len() {
            if self.ys[k] > self.ys[best] {
                best = k;
            }
        }
        best
    }

    fn max(&self) -> f64 {
        self.ys[self.argmax()]
    }

    /// `g(f) = max_{|h − f| ≤ r} self(h)`, restricted back to `[-bound, bound]`.
    fn window_max(&self, r: f64, bound: f64) -> Self {
        let m = self.argmax();
        let mut xs = Vec::with_capacity(self.xs.len() + 1);
        let mut ys = Vec::with_capacity(self.xs.len() + 1);
        for k in 0..=m {
            xs.push(self.xs[k] - r);
            ys.push(self.ys[k]);
        }
        for k in m..self.xs.len() {
            let x = self.xs[k] + r;
            if x > *xs.last().unwrap() {
                xs.push(x);
                ys.push(self.ys[k]);
            }
        }
        clip(&xs, &ys, -bound, bound)
    }
}

fn interp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        return y0.max(y1);
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn clip(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Concave {
    let mut out_x = Vec::with_capacity(xs.len());
    let mut out_y = Vec::with_capacity(xs.len());
    // first knot index with x > lo
    let start = xs.partition_point(|&x| x <= lo);
    let y_lo = if start == 0 {
        ys[0]
    } else if start >= xs.len() {
        ys[xs.len() - 1]
    } else {
        interp(xs[start - 1], ys[start - 1], xs[start], ys[start], lo)
    };
    out_x.push(lo);
    out_y.push(y_lo);
    let mut k = start;
    while k < xs.len() && xs[k] < hi {
        out_x.push(xs[k]);
        out_y.push(ys[k]);
        k += 1;
    }
    let y_hi = if k == 0 {
        ys[0]
    } else if k >= xs.len() {
        ys[xs.len() - 1]
    } else {
        interp(xs[k - 1], ys[k - 1], xs[k], ys[k], hi)
    };
    out_x.push(hi);
    out_y.push(y_hi);
    Concave { xs: out_x, ys: out_y }
}

/// Optimal value of the program with the slope budget fixed to `ell`.
fn value_at_slope(pts: &[f64], nu: &[f64], ell: f64) -> f64 {
    let bound = 1.0 - ell;
    if bound <= 0.0 {
        return 0.0;
    }
    let mut v = Concave::linear(bound, nu[0]);
    for k in 1..pts.len() {
        let r = ell * (pts[k] - pts[k - 1]);
        v = v.window_max(r, bound);
        v.add_linear(nu[k]);
    }
    v.max()
}

/// Exact bounded-Lipschitz distance via parametric dynamic programming.
pub fn bl_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let (pts, nu) = signed_masses(a, b)?;
    if nu.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let g = |ell: f64| value_at_slope(&pts, &nu, ell);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    let mut best = g(0.0).max(f1).max(f2);
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
            best = best.max(f2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
            best = best.max(f1);
        }
    }
    Ok(best.max(g(0.5 * (lo + hi))).max(0.0))
}

/// The same distance from the explicit linear program and the dense simplex.
/// Intended for small supports (tens of points).
pub fn bl_distance_lp(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    let (pts, nu) = signed_masses(a, b)?;
    let k = pts.len();
    // variables: u_0..u_{k-1}, v_0..v_{k-1} (f = u − v), bound, ell
    let nvar = 2 * k + 2;
    let (ib, il) = (2 * k, 2 * k + 1);
    let mut c = vec![0.0; nvar];
    for i in 0..k {
        c[i] = nu[i];
        c[k + i] = -nu[i];
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; nvar];
            r[i] = s;
            r[k + i] = -s;
            r[ib] = -1.0;
            rows.push(r);
            rhs.push(0.0);
        }
    }
    for i in 0..k.saturating_sub(1) {
        let delta = pts[i + 1] - pts[i];
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; nvar];
            r[i + 1] = s;
            r[k + i + 1] = -s;
            r[i] = -s;
            r[k + i] = s;
            r[il] = -delta;
            rows.push(r);
            rhs.push(0.0);
        }
    }
    let mut r = vec![0.0; nvar];
    r[ib] = 1.0;
    r[il] = 1.0;
    rows.push(r);
    rhs.push(1.0);
    Ok(lp::maximize(&c, &rows, &rhs)?.objective.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(x: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(vec![x], vec![1.0]).unwrap()
    }

    #[test]
    fn identical_measures_are_at_distance_zero() {
        assert_eq!(bl_distance(&dirac(0.0), &dirac(0.0)).unwrap(), 0.0);
        assert!(bl_distance_lp(&dirac(0.0), &dirac(0.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_unit_diracs_match_closed_form() {
        for delta in [0.1, 1.0, 10.0] {
            let exact = 2.0 * delta / (2.0 + delta);
            let dp = bl_distance(&dirac(0.0), &dirac(delta)).unwrap();
            let lp = bl_distance_lp(&dirac(0.0), &dirac(delta)).unwrap();
            assert!((dp - exact).abs() < 1e-9, "dp {delta}: {dp} vs {exact}");
            assert!((lp - exact).abs() < 1e-9, "lp {delta}: {lp} vs {exact}");
        }
        assert!((bl_distance(&dirac(0.0), &dirac(1.0)).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mass_difference_only() {
        let a = DiscreteMeasure::new(vec![0.0], vec![0.5]).unwrap();
        assert!((bl_distance(&a, &dirac(0.0)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn window_max_flattens_around_the_peak() {
        let f = Concave { xs: vec![-1.0, 0.0, 1.0], ys: vec![-1.0, 1.0, 0.0] };
        let g = f.window_max(0.5, 1.0);
        assert_eq!(g.xs, vec![-1.0, -0.5, 0.5, 1.0]);
        assert_eq!(g.ys, vec![0.0, 1.0, 1.0, 0.5]);
    }
}
