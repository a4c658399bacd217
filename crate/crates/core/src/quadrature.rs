//! Gauss–Legendre rules and composite panel integration.

use crate::sum::Neumaier;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1], found by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut acc = Neumaier::new();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Splits each interval between consecutive breakpoints into equal panels no
/// wider than `max_width`. Breakpoints must be sorted; duplicates are dropped.
pub fn panels(breakpoints: &[f64], max_width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let m = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / m as f64;
        for k in 0..m {
            let lo = a + k as f64 * h;
            let hi = if k + 1 == m { b } else { a + (k + 1) as f64 * h };
            out.push((lo, hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}: {s}");
            let deg = 2 * n - 1;
            let exact = 1.0 / (deg as f64 + 1.0) * (3f64.powi(deg as i32 + 1) - 1.0);
            let got = gl.integrate(1.0, 3.0, |x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-11 * exact, "n={n}");
        }
    }

    #[test]
    fn five_point_nodes() {
        let gl = GaussLegendre::new(5);
        let xs: Vec<f64> = gl.mapped(-1.0, 1.0).map(|(x, _)| x).collect();
        assert!((xs[4] - 0.906_179_845_938_664).abs() < 1e-14);
        assert_eq!(xs[2], 0.0);
    }

    #[test]
    fn panels_respect_width_and_cover() {
        let p = panels(&[0.0, 1.0, 1.0, 1.1], 0.25);
        assert_eq!(p.len(), 5);
        assert_eq!(p[0].0, 0.0);
        assert_eq!(p.last().unwrap().1, 1.1);
        assert!(p.iter().all(|(a, b)| b - a <= 0.25 + 1e-15));
    }
}
