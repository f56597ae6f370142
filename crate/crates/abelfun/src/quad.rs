//! Gauss-Legendre quadrature with the endpoint substitutions used for
//! square-root branch-point singularities.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Nodes/weights for n-point Gauss-Legendre on [-1, 1], by Newton iteration
/// on the Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Controls for the period/Abel quadratures: `base_nodes` panel size, doubled
/// until the relative change is below `rel_tol`, at most `max_doublings` times.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub base_nodes: usize,
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            base_nodes: 64,
            rel_tol: 1e-12,
            max_doublings: 6,
        }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(base_nodes: usize) -> Self {
        QuadratureSpec {
            base_nodes: base_nodes.max(8),
            ..Default::default()
        }
    }
}

/// Integrate a vector-valued integrand along the straight segment [0, 1]
/// (caller parameterizes), with panel doubling until convergence.
/// Returns (values, achieved relative change).
pub fn integrate_refining<F>(
    spec: &QuadratureSpec,
    dim: usize,
    mut eval: F,
) -> (Vec<Complex64>, f64)
where
    F: FnMut(&[f64], &[f64]) -> Vec<Complex64>,
{
    let mut n = spec.base_nodes;
    let (tn, tw) = gauss_legendre(n);
    let mut prev = eval(&tn, &tw);
    let mut change = f64::MAX;
    for _ in 0..spec.max_doublings {
        n *= 2;
        let (tn, tw) = gauss_legendre(n);
        let cur = eval(&tn, &tw);
        let scale: f64 = cur.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        change = prev
            .iter()
            .zip(&cur)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        prev = cur;
        if change < spec.rel_tol {
            break;
        }
    }
    let _ = dim;
    (prev, change)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is exact for 8 nodes
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((int - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn refinement_reaches_tolerance() {
        let spec = QuadratureSpec::default();
        // int_0^1 exp(x) dx
        let (v, change) = integrate_refining(&spec, 1, |xs, ws| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &w) in xs.iter().zip(ws) {
                let t = 0.5 * (x + 1.0);
                acc += Complex64::new(0.5 * w * t.exp(), 0.0);
            }
            vec![acc]
        });
        assert!(change < 1e-12);
        assert!((v[0].re - (1f64.exp() - 1.0)).abs() < 1e-13);
    }
}
