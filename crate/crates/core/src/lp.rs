//! Dense tableau simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The slack basis is feasible from the start, so no phase one is needed.
//! Entering and leaving variables are chosen by Bland's rule, which rules
//! out cycling on the heavily degenerate problems the BL distance produces.

use crate::error::{Error, Result};

pub const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

/// `a` is row-major with `b.len()` rows and `c.len()` columns.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = b.len();
    let n = c.len();
    if a.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::Parameter("constraint matrix shape mismatch".into()));
    }
    if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Parameter("right-hand side must be finite and >= 0".into()));
    }
    // columns: n structural, m slack, then rhs
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    {
        let obj = &mut t[m * width..];
        for j in 0..n {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0usize;
    let max_pivots = 50 * (n + m).max(10) * (n + m).max(10);

    loop {
        let obj = &t[m * width..(m + 1) * width];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -LP_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[i * width + enter];
            if aij > LP_TOL {
                let ratio = t[i * width + width - 1] / aij;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - LP_TOL
                            || ((ratio - lr).abs() <= LP_TOL && basis[i] < basis[li])
                        {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Parameter("linear program is unbounded".into()));
        };
        pivot(&mut t, width, m, r, enter);
        basis[r] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Parameter("simplex pivot limit exceeded".into()));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i * width + width - 1];
        }
    }
    Ok(LpSolution { objective: t[m * width + width - 1], x, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, r: usize, col: usize) {
    let p = t[r * width + col];
    for v in &mut t[r * width..(r + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[r * width..(r + 1) * width].to_vec();
    for i in 0..=m {
        if i == r {
            continue;
        }
        let f = t[i * width + col];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[i * width..(i + 1) * width];
        for (v, &pv) in row.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        row[col] = 0.0;
    }
}
