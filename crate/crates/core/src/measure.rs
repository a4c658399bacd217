//! Positive initial measures and their finite Dirac discretizations.
//!
//! An [`InitialMeasure`] is a finite set of atoms plus a piecewise-cubic
//! density, which keeps every interval mass closed-form. [`discretize`] maps
//! it onto a grid with the left-anchored rule `ω(x) = μ[x, x')`, so grid
//! masses telescope to the total mass exactly (up to rounding).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelConstants;

/// Slack allowed on the unit total-mass cap for rounding in normalized inputs.
pub const MASS_CAP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Density `Σ_k coeffs[k]·x^k` on `[a, b]`, degree at most 3, in absolute `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl DensityPiece {
    pub fn density(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn antiderivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + c / (k as f64 + 1.0))
            * x
    }

    /// Integral of the density over `[lo, hi] ∩ [a, b]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(self.a);
        let hi = hi.min(self.b);
        if hi <= lo {
            return 0.0;
        }
        self.antiderivative(hi) - self.antiderivative(lo)
    }

    pub fn mass(&self) -> f64 {
        self.mass_between(self.a, self.b)
    }

    /// Candidate minimizers: endpoints, critical points, and a sampling lattice.
    fn min_density(&self) -> f64 {
        let mut pts = vec![self.a, self.b];
        let c = |k: usize| self.coeffs.get(k).copied().unwrap_or(0.0);
        // p'(x) = c1 + 2 c2 x + 3 c3 x²
        let (qa, qb, qc) = (3.0 * c(3), 2.0 * c(2), c(1));
        if qa != 0.0 {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let s = disc.sqrt();
                pts.push((-qb + s) / (2.0 * qa));
                pts.push((-qb - s) / (2.0 * qa));
            }
        } else if qb != 0.0 {
            pts.push(-qc / qb);
        }
        let samples = 64;
        for k in 1..samples {
            pts.push(self.a + (self.b - self.a) * k as f64 / samples as f64);
        }
        pts.into_iter()
            .filter(|x| *x >= self.a && *x <= self.b)
            .map(|x| self.density(x))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    density_pieces: Vec<DensityPiece>,
}

/// A positive Radon measure with total mass in `(0, 1]`: atoms plus a
/// piecewise-polynomial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct InitialMeasure {
    atoms: Vec<Atom>,
    density_pieces: Vec<DensityPiece>,
}

impl InitialMeasure {
    pub fn new(atoms: Vec<Atom>, density_pieces: Vec<DensityPiece>) -> Result<Self> {
        for (i, at) in atoms.iter().enumerate() {
            if !at.x.is_finite() {
                return Err(Error::Parameter(format!("atoms[{i}].x must be finite")));
            }
            if !(at.w.is_finite() && at.w >= 0.0) {
                return Err(Error::Parameter(format!("atoms[{i}].w must be finite and >= 0")));
            }
        }
        for (i, w) in atoms.windows(2).enumerate() {
            if w[1].x <= w[0].x {
                return Err(Error::Parameter(format!(
                    "atoms[{}].x must be strictly greater than atoms[{i}].x",
                    i + 1
                )));
            }
        }
        for (i, p) in density_pieces.iter().enumerate() {
            if !(p.a.is_finite() && p.b.is_finite() && p.a < p.b) {
                return Err(Error::Parameter(format!(
                    "density_pieces[{i}]: need finite a < b, got a = {}, b = {}",
                    p.a, p.b
                )));
            }
            if p.coeffs.is_empty() || p.coeffs.len() > 4 {
                return Err(Error::Parameter(format!(
                    "density_pieces[{i}].coeffs: expected 1 to 4 coefficients, got {}",
                    p.coeffs.len()
                )));
            }
            if p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Parameter(format!("density_pieces[{i}].coeffs must be finite")));
            }
            let m = p.min_density();
            if m < 0.0 {
                return Err(Error::Parameter(format!(
                    "density_pieces[{i}].coeffs: density is negative on [a, b] (min {m:e})"
                )));
            }
        }
        for (i, w) in density_pieces.windows(2).enumerate() {
            if w[1].a < w[0].b {
                return Err(Error::Parameter(format!(
                    "density_pieces[{}] overlaps or precedes density_pieces[{i}]",
                    i + 1
                )));
            }
        }
        let mu = Self { atoms, density_pieces };
        let total = mu.total_mass();
        if !(total > 0.0) {
            return Err(Error::Parameter("total mass must be positive".into()));
        }
        if total > 1.0 + MASS_CAP_SLACK {
            return Err(Error::Parameter(format!(
                "total mass {total} exceeds 1; measures are not rescaled"
            )));
        }
        Ok(mu)
    }

    pub fn atoms_only(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms, Vec::new())
    }

    /// Normalized droplet profile `max(0, H − B x²)` of unit mass on `[-radius, radius]`.
    pub fn droplet(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter("droplet radius must be > 0".into()));
        }
        // ∫(1 − x²/R²) over [−R, R] = 4R/3
        let h = 3.0 / (4.0 * radius);
        let piece = DensityPiece { a: -radius, b: radius, coeffs: vec![h, 0.0, -h / (radius * radius)] };
        Self::new(Vec::new(), vec![piece])
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("measure serializes")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density_pieces(&self) -> &[DensityPiece] {
        &self.density_pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum::<f64>()
            + self.density_pieces.iter().map(DensityPiece::mass).sum::<f64>()
    }

    /// `μ({x})`.
    pub fn atom_mass(&self, x: f64) -> f64 {
        match self.atoms.binary_search_by(|a| a.x.total_cmp(&x)) {
            Ok(i) => self.atoms[i].w,
            Err(_) => 0.0,
        }
    }

    /// Smallest and largest points of the support.
    pub fn support_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in self.atoms.iter().filter(|a| a.w > 0.0) {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        for p in self.density_pieces.iter().filter(|p| p.mass() > 0.0) {
            lo = lo.min(p.a);
            hi = hi.max(p.b);
        }
        (lo, hi)
    }

    /// Mass of the interval between `lo` and `hi` with the given endpoint inclusions.
    pub fn interval_mass(&self, lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<f64> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Parameter(format!("interval needs lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(self.interval_mass_unchecked(lo, hi, lo_closed, hi_closed))
    }

    fn interval_mass_unchecked(&self, lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| {
                let above = if lo_closed { a.x >= lo } else { a.x > lo };
                let below = if hi_closed { a.x <= hi } else { a.x < hi };
                above && below
            })
            .map(|a| a.w)
            .sum();
        let dens: f64 = self.density_pieces.iter().map(|p| p.mass_between(lo, hi)).sum();
        atoms + dens
    }

    /// `μ[x, ∞)`.
    pub fn mass_from(&self, x: f64) -> f64 {
        self.interval_mass_unchecked(x, f64::INFINITY, true, false)
    }
}

impl TryFrom<RawMeasure> for InitialMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        Self::new(raw.atoms, raw.density_pieces)
    }
}

/// A finite weighted sum of Dirac masses at strictly increasing positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

pub(crate) fn check_strictly_increasing(xs: &[f64]) -> Result<()> {
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("position {i} is not finite")));
    }
    match xs.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(Error::Ordering { index: i, left: xs[i], right: xs[i + 1] }),
        None => Ok(()),
    }
}

impl DiscreteMeasure {
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(Error::Parameter(format!(
                "{} positions but {} weights",
                positions.len(),
                weights.len()
            )));
        }
        if positions.is_empty() {
            return Err(Error::Parameter("discrete measure has empty support".into()));
        }
        check_strictly_increasing(&positions)?;
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Parameter(format!("weight {i} must be finite and >= 0")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Parameter("at least one weight must be positive".into()));
        }
        if total > 1.0 + MASS_CAP_SLACK {
            return Err(Error::Parameter(format!("total mass {total} exceeds 1")));
        }
        Ok(Self { positions, weights })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The same measure with the given positions (e.g. transported by a flow).
    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        Self::new(positions, self.weights.clone())
    }

    pub fn to_initial_measure(&self) -> Result<InitialMeasure> {
        let atoms = self
            .positions
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| Atom { x, w })
            .collect();
        InitialMeasure::atoms_only(atoms)
    }
}

/// `Γ_{x,y} = ‖K‖∞²‖K'''‖∞ (μ[x,y) + μ(x,y])`, symmetrized for `y < x`.
pub fn gamma(mu: &InitialMeasure, x: f64, y: f64, kc: &KernelConstants) -> f64 {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let m = mu.interval_mass_unchecked(x, y, true, false) + mu.interval_mass_unchecked(x, y, false, true);
    kc.gamma_prefactor() * m
}

/// `Λ_{x,y} = ‖K‖∞²‖K'''‖∞ max{μ({x})³, μ({y})³}`.
pub fn lambda(mu: &InitialMeasure, x: f64, y: f64, kc: &KernelConstants) -> f64 {
    let m = mu.atom_mass(x).max(mu.atom_mass(y));
    kc.gamma_prefactor() * m * m * m
}

/// Nested grid at level `n`: the dyadic points of `window` plus every atom of `μ`.
pub fn build_grid(mu: &InitialMeasure, n: u32, window: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if n == 0 {
        return Err(Error::Parameter("grid level n must be >= 1".into()));
    }
    if n > 40 {
        return Err(Error::Parameter(format!("grid level n = {n} is too fine")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Parameter(format!("window needs finite lo < hi, got ({lo}, {hi})")));
    }
    let (s_lo, s_hi) = mu.support_bounds();
    if s_lo < lo || s_hi > hi {
        return Err(Error::Parameter(format!(
            "window ({lo}, {hi}) does not cover the support [{s_lo}, {s_hi}]"
        )));
    }
    let cells = 1u64 << n;
    let denom = cells as f64;
    let mut grid: Vec<f64> = (0..=cells)
        .map(|k| lo + (hi - lo) * (k as f64 / denom))
        .collect();
    grid.extend(mu.atoms().iter().map(|a| a.x));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Left-anchored discretization: the weight at grid point `x` is `μ[x, x')`
/// with `x'` the next grid point, and `μ[x, ∞)` at the last one.
pub fn discretize(mu: &InitialMeasure, grid: &[f64]) -> Result<DiscreteMeasure> {
    if grid.is_empty() {
        return Err(Error::Parameter("grid is empty".into()));
    }
    check_strictly_increasing(grid).map_err(|e| match e {
        Error::Ordering { index, .. } => {
            Error::Parameter(format!("grid is not strictly increasing at index {index}"))
        }
        other => other,
    })?;
    let (s_lo, _) = mu.support_bounds();
    if grid[0] > s_lo {
        return Err(Error::Parameter(format!(
            "grid starts at {} but the support starts at {s_lo}",
            grid[0]
        )));
    }
    let mut weights: Vec<f64> = grid
        .windows(2)
        .map(|w| mu.interval_mass_unchecked(w[0], w[1], true, false))
        .collect();
    weights.push(mu.mass_from(*grid.last().unwrap()));
    for w in &mut weights {
        // antiderivative differences can round to -0 or a tiny negative
        *w = w.max(0.0);
    }
    DiscreteMeasure::new(grid.to_vec(), weights)
}
