//! Independent genus-1 oracle: Weierstrass wp, zeta and sigma by direct
//! lattice summation over the computed period lattice, with the classical
//! Eisenstein-series tail corrections (G_4 = g2/60, G_6 = g3/140 and the
//! quadratic recursion for the higher ones). No theta functions anywhere.

use num_complex::Complex64;

pub struct LatticeOracle {
    lattice: Vec<Complex64>,
    radius: f64,
    /// T_j = G_j - sum_{0<|w|<=R} w^{-j} for j = 4, 6, ..., relative tail sums
    tail: Vec<Complex64>,
}

impl LatticeOracle {
    pub fn new(g2: Complex64, g3: Complex64, w1: Complex64, w2: Complex64) -> Self {
        // full Eisenstein values by the classical recursion
        let kmax = 40usize; // G_4 .. G_{2k}
        let mut big_g = vec![Complex64::new(0.0, 0.0); kmax + 1]; // index k: G_{2k}
        big_g[2] = g2 / 60.0;
        big_g[3] = g3 / 140.0;
        for k in 4..=kmax {
            // (k-3)(2k+1)(2k-1) G_{2k} = 3 sum_{m=2}^{k-2} (2m-1)(2k-2m-1) G_{2m} G_{2k-2m}
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 2..=(k - 2) {
                acc += ((2 * m - 1) as f64)
                    * ((2 * (k - m) - 1) as f64)
                    * big_g[m]
                    * big_g[k - m];
            }
            big_g[k] = 3.0 * acc
                / (((k - 3) * (2 * k + 1) * (2 * k - 1)) as f64);
        }

        let radius = 14.0 * w1.norm().max(w2.norm());
        let mut lattice = Vec::new();
        let bound = (radius / w1.norm().min(w2.norm())).ceil() as i64 + 2;
        let mut partial = vec![Complex64::new(0.0, 0.0); kmax + 1];
        for m in -bound..=bound {
            for n in -bound..=bound {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = (m as f64) * w1 + (n as f64) * w2;
                if w.norm() <= radius {
                    lattice.push(w);
                    let winv2 = 1.0 / (w * w);
                    let mut p = winv2 * winv2; // w^{-4}
                    for k in 2..=kmax {
                        partial[k] += p;
                        p *= winv2;
                    }
                }
            }
        }
        let tail = (0..=kmax)
            .map(|k| if k >= 2 { big_g[k] - partial[k] } else { Complex64::new(0.0, 0.0) })
            .collect();
        LatticeOracle {
            lattice,
            radius,
            tail,
        }
    }

    fn check_domain(&self, u: Complex64) {
        assert!(
            u.norm() < 0.45 * self.radius,
            "oracle argument outside the guaranteed convergence region"
        );
    }

    /// wp(u) = u^-2 + sum'[(u-w)^-2 - w^-2] + sum_m (2m+1) u^{2m} T_{2m+2}.
    /// The correction series is truncated at its smallest term: beyond it the
    /// T-values are dominated by the cancellation noise of G - partial.
    pub fn wp(&self, u: Complex64) -> Complex64 {
        self.check_domain(u);
        let mut acc = 1.0 / (u * u);
        for &w in &self.lattice {
            let d = u - w;
            acc += 1.0 / (d * d) - 1.0 / (w * w);
        }
        let u2 = u * u;
        let mut up = u2;
        let mut last = f64::MAX;
        for m in 1..self.tail.len() - 1 {
            let k = m + 1; // tail index for T_{2m+2}
            let term = ((2 * m + 1) as f64) * up * self.tail[k];
            if term.norm() > last {
                break;
            }
            last = term.norm();
            acc += term;
            up *= u2;
        }
        acc
    }

    /// zeta(u) = 1/u + sum'[1/(u-w) + 1/w + u/w^2] - sum_{m>=2} u^{2m-1} T_{2m}.
    pub fn zeta(&self, u: Complex64) -> Complex64 {
        self.check_domain(u);
        let mut acc = 1.0 / u;
        for &w in &self.lattice {
            acc += 1.0 / (u - w) + 1.0 / w + u / (w * w);
        }
        let u2 = u * u;
        let mut up = u2 * u; // u^3 for m=2
        let mut last = f64::MAX;
        for m in 2..self.tail.len() {
            let term = up * self.tail[m];
            if term.norm() > last {
                break;
            }
            last = term.norm();
            acc -= term;
            up *= u2;
        }
        acc
    }

    /// sigma(u) = u prod'(1 - u/w) exp(u/w + u^2/(2w^2))
    ///   * exp(-sum_{m>=2} u^{2m} T_{2m}/(2m)).
    pub fn sigma(&self, u: Complex64) -> Complex64 {
        self.check_domain(u);
        // accumulate the logarithm for stability
        let mut log_acc = u.ln();
        for &w in &self.lattice {
            let z = u / w;
            log_acc += (1.0 - z).ln() + z + 0.5 * z * z;
        }
        let u2 = u * u;
        let mut up = u2 * u2; // u^4 for m=2
        let mut last = f64::MAX;
        for m in 2..self.tail.len() {
            let term = up * self.tail[m] / ((2 * m) as f64);
            if term.norm() > last {
                break;
            }
            last = term.norm();
            log_acc -= term;
            up *= u2;
        }
        log_acc.exp()
    }
}
