//! First and second period matrices by contour quadrature over the fixed
//! homology bases: a-cycles encircle the cuts [e_{2i-1}, e_{2i}], b-cycles
//! run from cut i through the last cut and close on the lower sheet.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::curve::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::quad::QuadratureSpec;

/// Half-period matrices of du and dr, tau, kappa and the winding vectors.
#[derive(Debug, Clone)]
pub struct PeriodData {
    pub omega: DMatrix<Complex64>,
    pub omega_prime: DMatrix<Complex64>,
    pub eta: DMatrix<Complex64>,
    pub eta_prime: DMatrix<Complex64>,
    pub tau: DMatrix<Complex64>,
    pub kappa: DMatrix<Complex64>,
    /// (2 omega)^(-1); its columns are the winding vectors U, V, (W).
    pub two_omega_inv: DMatrix<Complex64>,
    /// du integrals over the real segments [e_k, e_{k+1}], k = 1..2g,
    /// on the sheet continued from above the axis.
    pub seg_du: Vec<Vec<Complex64>>,
    /// du integral over [e_{2g+1}, infinity) on the same sheet.
    pub cut_to_inf_du: Vec<Complex64>,
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.omega.nrows()
    }

    /// Columns of (2 omega)^(-1).
    pub fn winding(&self, j: usize) -> Vec<Complex64> {
        (0..self.genus()).map(|i| self.two_omega_inv[(i, j)]).collect()
    }

    /// Max-entry residual of m J m^T + (i pi / 2) J with m = [[w, w'], [h, h']].
    pub fn legendre_residual(&self) -> f64 {
        legendre_residual_of(&self.omega, &self.omega_prime, &self.eta, &self.eta_prime)
    }

    /// Abel image of the finite branch point e_i (1-based), base point infinity.
    pub fn branch_point_image(&self, i: usize) -> Vec<Complex64> {
        let g = self.genus();
        let mut acc = self.cut_to_inf_du.clone();
        for k in (i - 1)..self.seg_du.len() {
            for l in 0..g {
                acc[l] += self.seg_du[k][l];
            }
        }
        // A_i = int_inf^{e_i} = -(int_{e_i}^{inf})
        acc.iter().map(|v| -v).collect()
    }

    /// The lattice vector 2 omega m + 2 omega' m'.
    pub fn lattice_vector(&self, m: &[f64], mp: &[f64]) -> Vec<Complex64> {
        let g = self.genus();
        (0..g)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..g {
                    acc += 2.0 * self.omega[(i, j)] * m[j] + 2.0 * self.omega_prime[(i, j)] * mp[j];
                }
                acc
            })
            .collect()
    }

    /// Coordinates (a, b) of u in the real basis (2w | 2w'), so that
    /// u = 2w a + 2w' b with real a, b.
    pub fn lattice_coordinates(&self, u: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let g = self.genus();
        let mut mat = DMatrix::<f64>::zeros(2 * g, 2 * g);
        let mut rhs = nalgebra::DVector::<f64>::zeros(2 * g);
        for i in 0..g {
            for j in 0..g {
                mat[(i, j)] = 2.0 * self.omega[(i, j)].re;
                mat[(i, j + g)] = 2.0 * self.omega_prime[(i, j)].re;
                mat[(i + g, j)] = 2.0 * self.omega[(i, j)].im;
                mat[(i + g, j + g)] = 2.0 * self.omega_prime[(i, j)].im;
            }
            rhs[i] = u[i].re;
            rhs[i + g] = u[i].im;
        }
        let sol = mat.lu().solve(&rhs).expect("period lattice is nondegenerate");
        let a = (0..g).map(|i| sol[i]).collect();
        let b = (0..g).map(|i| sol[i + g]).collect();
        (a, b)
    }

    /// Reduce u modulo the period lattice to coordinates in [-1/2, 1/2)^2g.
    pub fn reduce_mod_lattice(&self, u: &[Complex64]) -> Vec<Complex64> {
        let (a, b) = self.lattice_coordinates(u);
        let frac = |x: f64| x - (x + 0.5).floor();
        let a: Vec<f64> = a.into_iter().map(frac).collect();
        let b: Vec<f64> = b.into_iter().map(frac).collect();
        self.lattice_vector(&a, &b)
    }

    /// Distance of u from the lattice (max-norm of the reduced vector).
    pub fn lattice_distance(&self, u: &[Complex64]) -> f64 {
        self.reduce_mod_lattice(u)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// eta m + eta' m' (the zeta quasi-period vector E(m, m')).
    pub fn second_kind_shift(&self, m: &[f64], mp: &[f64]) -> Vec<Complex64> {
        let g = self.genus();
        (0..g)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..g {
                    acc += self.eta[(i, j)] * m[j] + self.eta_prime[(i, j)] * mp[j];
                }
                acc
            })
            .collect()
    }
}

pub fn legendre_residual_of(
    omega: &DMatrix<Complex64>,
    omega_prime: &DMatrix<Complex64>,
    eta: &DMatrix<Complex64>,
    eta_prime: &DMatrix<Complex64>,
) -> f64 {
    let g = omega.nrows();
    let mut m = DMatrix::<Complex64>::zeros(2 * g, 2 * g);
    for i in 0..g {
        for j in 0..g {
            m[(i, j)] = omega[(i, j)];
            m[(i, j + g)] = omega_prime[(i, j)];
            m[(i + g, j)] = eta[(i, j)];
            m[(i + g, j + g)] = eta_prime[(i, j)];
        }
    }
    let mut jmat = DMatrix::<Complex64>::zeros(2 * g, 2 * g);
    for i in 0..g {
        jmat[(i, i + g)] = Complex64::new(-1.0, 0.0);
        jmat[(i + g, i)] = Complex64::new(1.0, 0.0);
    }
    let resid = &m * &jmat * m.transpose() + jmat.map(|v| v * Complex64::new(0.0, PI / 2.0));
    resid.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Principal square root with the branch cut approached from above:
/// for negative reals returns +i sqrt(|x|).
fn sqrt_above(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// y continued from above the real axis: 2 prod_j sqrt(x - e_j),
/// each factor principal with +i0 on the cut side.
pub(crate) fn y_above(curve: &HyperellipticCurve, x: f64) -> Complex64 {
    let mut acc = Complex64::new(2.0, 0.0);
    for e in curve.branch_points() {
        acc *= sqrt_above(x - e.re);
    }
    let lead = curve.lambda(2 * curve.genus() + 1);
    // canonical/alpha have leading 4 = 2^2 folded in above; groupoid leading 1
    if (lead - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        acc /= 2.0;
    }
    acc
}

/// Which basis of integrands to integrate.
#[derive(Clone, Copy)]
pub(crate) enum Basis {
    /// du_l = x^{l-1} dx / y, l = 1..g
    First,
    /// dr_j = sum_{k=j}^{2g+1-j} (k+1-j) lambda_{k+1+j} x^k dx/(4y), j = 1..g
    Second,
}

fn numerators(curve: &HyperellipticCurve, basis: Basis) -> Vec<Vec<Complex64>> {
    let g = curve.genus();
    match basis {
        Basis::First => (1..=g)
            .map(|l| {
                let mut p = vec![Complex64::new(0.0, 0.0); l];
                p[l - 1] = Complex64::new(1.0, 0.0);
                p
            })
            .collect(),
        Basis::Second => (1..=g)
            .map(|j| {
                let deg = 2 * g + 1 - j;
                let mut p = vec![Complex64::new(0.0, 0.0); deg + 1];
                for k in j..=deg {
                    p[k] = curve.lambda(k + 1 + j) * ((k + 1 - j) as f64) / 4.0;
                }
                p
            })
            .collect(),
    }
}

fn eval_poly(p: &[Complex64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in p.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

/// prod_{j != skip} sqrt_above(x - e_j) for real x; skip < 0 keeps all factors.
fn product_skip(curve: &HyperellipticCurve, x: f64, skip: isize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (j, e) in curve.branch_points().iter().enumerate() {
        if j as isize != skip {
            acc *= sqrt_above(x - e.re);
        }
    }
    acc
}

/// Integrals of the chosen basis over the real interval [a, b] with the
/// above-axis sheet. `left_cap`/`right_cap` mark branch-point endpoints
/// (removed by the x = e + t^2 substitution).
pub(crate) fn integrate_real(
    curve: &HyperellipticCurve,
    a: f64,
    b: f64,
    left_cap: Option<usize>,
    right_cap: Option<usize>,
    basis: Basis,
    spec: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let g = curve.genus();
    let nums = numerators(curve, basis);
    let lead = curve.lambda(2 * g + 1);
    let halfscale = if (lead - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        0.5
    } else {
        1.0
    };
    // y = 2*halfscale^{-1}... folded: y_above already handles leading; here we
    // integrate P/(2 prod) so scale numerators by 1/(2*halfscale_adj).
    let yfac = 2.0 * halfscale; // y = yfac * prod_all

    let mut pieces: Vec<(f64, f64, Option<usize>, Option<usize>)> = Vec::new();
    match (left_cap, right_cap) {
        (Some(_), Some(_)) => {
            let m = 0.5 * (a + b);
            pieces.push((a, m, left_cap, None));
            pieces.push((m, b, None, right_cap));
        }
        _ => pieces.push((a, b, left_cap, right_cap)),
    }

    let mut total = vec![Complex64::new(0.0, 0.0); g];
    for (pa, pb, lc, rc) in pieces {
        let (vals, change) = crate::quad::integrate_refining(spec, g, |xs, ws| {
            let mut acc = vec![Complex64::new(0.0, 0.0); g];
            match (lc, rc) {
                (Some(idx), None) => {
                    // x = pa + t^2, t in [0, T]; dx = 2t dt cancels the sqrt
                    // factor t in y, leaving an overall 2.
                    let t_max = (pb - pa).sqrt();
                    for (&xi, &wi) in xs.iter().zip(ws) {
                        let t = 0.5 * t_max * (xi + 1.0);
                        let w = t_max * wi; // includes the factor 2
                        let x = pa + t * t;
                        let denom = yfac * product_skip(curve, x, idx as isize);
                        for l in 0..g {
                            acc[l] += w * eval_poly(&nums[l], Complex64::new(x, 0.0)) / denom;
                        }
                    }
                    acc
                }
                (None, Some(idx)) => {
                    // x = pb - s^2, s in [0, S]; dx = -2s ds and the reversed
                    // orientation give 2/(i) times the smooth rest.
                    let s_max = (pb - pa).sqrt();
                    for (&xi, &wi) in xs.iter().zip(ws) {
                        let s = 0.5 * s_max * (xi + 1.0);
                        let w = s_max * wi; // includes the factor 2
                        let x = pb - s * s;
                        // sqrt_above(x - e_idx) = sqrt_above(-s^2) = i s
                        let denom = yfac
                            * Complex64::new(0.0, 1.0)
                            * product_skip(curve, x, idx as isize);
                        for l in 0..g {
                            acc[l] += w * eval_poly(&nums[l], Complex64::new(x, 0.0)) / denom;
                        }
                    }
                    acc
                }
                (None, None) => {
                    for (&xi, &wi) in xs.iter().zip(ws) {
                        let x = 0.5 * (pa + pb) + 0.5 * (pb - pa) * xi;
                        let w = 0.5 * (pb - pa) * wi;
                        let denom = yfac * product_skip(curve, x, -1);
                        for l in 0..g {
                            acc[l] += w * eval_poly(&nums[l], Complex64::new(x, 0.0)) / denom;
                        }
                    }
                    acc
                }
                (Some(_), Some(_)) => unreachable!("double caps are split above"),
            }
        });
        if change > spec.rel_tol * 100.0 {
            return Err(Error::QuadratureDiverged(change));
        }
        for l in 0..g {
            total[l] += vals[l];
        }
    }
    Ok(total)
}

/// Series tail of the du integrals from x = m (real, beyond all branch
/// points) to infinity, using the expansion of 1/y in powers of 1/x.
pub(crate) fn tail_du(curve: &HyperellipticCurve, m: f64) -> Vec<Complex64> {
    let g = curve.genus();
    // 1/y = x^{-g-1/2}/2 * prod_j (1 - e_j/x)^{-1/2}; the product expands with
    // coefficients c_k, (1-z)^{-1/2} = sum C(2k,k)/4^k z^k.
    let kmax = 64usize;
    let mut c = vec![Complex64::new(0.0, 0.0); kmax + 1];
    c[0] = Complex64::new(1.0, 0.0);
    let mut binom = vec![0.0f64; kmax + 1];
    binom[0] = 1.0;
    for k in 1..=kmax {
        binom[k] = binom[k - 1] * (2.0 * k as f64 - 1.0) / (2.0 * k as f64);
    }
    for e in curve.branch_points() {
        let mut next = vec![Complex64::new(0.0, 0.0); kmax + 1];
        for i in 0..=kmax {
            if c[i].norm() == 0.0 {
                continue;
            }
            let mut epow = Complex64::new(1.0, 0.0);
            for k in 0..=(kmax - i) {
                next[i + k] += c[i] * binom[k] * epow;
                epow *= e;
            }
        }
        c = next;
    }
    let lead = curve.lambda(2 * g + 1);
    let yfac = if (lead - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        1.0
    } else {
        2.0
    };
    (1..=g)
        .map(|l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                // integrand term: c_k x^{l-1-g-1/2-k} / yfac
                let p1 = l as f64 - g as f64 - 0.5 - k as f64; // p + 1
                let term = ck * m.powf(p1) / (-p1) / yfac;
                acc += term;
                if k > 8 && term.norm() < 1e-18 * (1.0 + acc.norm()) {
                    break;
                }
            }
            acc
        })
        .collect()
}

/// Compute the period data of a canonical (or alpha) curve with real,
/// distinct branch points.
pub fn period_matrices(curve: &HyperellipticCurve, spec: &QuadratureSpec) -> Result<PeriodData> {
    let g = curve.genus();
    if !curve.has_real_branch_points() {
        return Err(Error::ComplexBranchPoints);
    }
    let e: Vec<f64> = curve.branch_points().iter().map(|c| c.re).collect();
    let n_seg = 2 * g; // finite segments between consecutive branch points

    let mut seg_du: Vec<Vec<Complex64>> = Vec::with_capacity(n_seg);
    let mut seg_dr: Vec<Vec<Complex64>> = Vec::with_capacity(n_seg);
    for k in 0..n_seg {
        seg_du.push(integrate_real(
            curve,
            e[k],
            e[k + 1],
            Some(k),
            Some(k + 1),
            Basis::First,
            spec,
        )?);
        seg_dr.push(integrate_real(
            curve,
            e[k],
            e[k + 1],
            Some(k),
            Some(k + 1),
            Basis::Second,
            spec,
        )?);
    }

    // a_i encircles cut i: 2 * I_{2i-1}. b_i runs from cut i to the last cut
    // and closes on the lower sheet: twice the sum of the gap segments
    // I_{2i}, I_{2i+2}, ...; the detours around intermediate cuts cancel
    // between the upper- and lower-sheet halves.
    let mut two_omega = DMatrix::<Complex64>::zeros(g, g);
    let mut two_omega_p = DMatrix::<Complex64>::zeros(g, g);
    let mut two_eta = DMatrix::<Complex64>::zeros(g, g);
    let mut two_eta_p = DMatrix::<Complex64>::zeros(g, g);
    for i in 0..g {
        for l in 0..g {
            two_omega[(l, i)] = 2.0 * seg_du[2 * i][l];
            two_eta[(l, i)] = -2.0 * seg_dr[2 * i][l];
            let mut su = Complex64::new(0.0, 0.0);
            let mut sr = Complex64::new(0.0, 0.0);
            for k in ((2 * i + 1)..n_seg).step_by(2) {
                su += seg_du[k][l];
                sr += seg_dr[k][l];
            }
            two_omega_p[(l, i)] = 2.0 * su;
            two_eta_p[(l, i)] = -2.0 * sr;
        }
    }

    let omega = two_omega.map(|v| v / 2.0);
    let omega_prime = two_omega_p.map(|v| v / 2.0);
    let eta = two_eta.map(|v| v / 2.0);
    let eta_prime = two_eta_p.map(|v| v / 2.0);

    let omega_inv = omega
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateCurve("singular omega".into()))?;
    let tau = &omega_inv * &omega_prime;

    // Validate Im(tau) > 0; the homology recipe above gives this directly for
    // ascending real branch points.
    let im_min = smallest_im_eigenvalue(&tau);
    if im_min <= 0.0 {
        return Err(Error::NonconvergentTau(im_min));
    }

    let two_omega_inv = omega_inv.map(|v| v / 2.0);
    let kappa = &eta * &two_omega_inv;

    // tail of du from the last branch point to infinity
    let scale = curve.scale();
    let x_far = (10.0 * scale).max(e[2 * g] + 1.0);
    let mut cut_to_inf = integrate_real(
        curve,
        e[2 * g],
        x_far,
        Some(2 * g),
        None,
        Basis::First,
        spec,
    )?;
    let tail = tail_du(curve, x_far);
    for l in 0..g {
        cut_to_inf[l] += tail[l];
    }

    Ok(PeriodData {
        omega,
        omega_prime,
        eta,
        eta_prime,
        tau,
        kappa,
        two_omega_inv,
        seg_du,
        cut_to_inf_du: cut_to_inf,
    })
}

/// Smallest eigenvalue of the symmetric real matrix Im(tau).
pub fn smallest_im_eigenvalue(tau: &DMatrix<Complex64>) -> f64 {
    let g = tau.nrows();
    let im = DMatrix::<f64>::from_fn(g, g, |i, j| 0.5 * (tau[(i, j)].im + tau[(j, i)].im));
    let eig = im.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min)
}

/// Max asymmetry |tau_ij - tau_ji|.
pub fn tau_asymmetry(tau: &DMatrix<Complex64>) -> f64 {
    let g = tau.nrows();
    let mut m = 0.0f64;
    for i in 0..g {
        for j in 0..i {
            m = m.max((tau[(i, j)] - tau[(j, i)]).norm());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Normalization;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lemniscatic() -> HyperellipticCurve {
        let lam = [c(0.0), c(-4.0), c(0.0), c(4.0), c(0.0)];
        HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical).unwrap()
    }

    #[test]
    fn lemniscatic_tau_is_i() {
        let cur = lemniscatic();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let tau = p.tau[(0, 0)];
        assert!((tau - Complex64::new(0.0, 1.0)).norm() < 1e-11, "tau = {tau}");
    }

    #[test]
    fn lemniscatic_omega_matches_real_integral() {
        // 2 omega (the full a-period) = 2 * int_{-1}^{0} dx/sqrt(4x^3-4x);
        // compare |omega| against the classical real integral
        // int_1^inf dx / sqrt(x^3 - x) = 2.622057554292119 (lemniscate constant
        // relation; this equals 2 K(1/sqrt2)/sqrt(2)... evaluated by oracle below).
        let cur = lemniscatic();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        // adaptive Simpson oracle on int_1^R dx/sqrt(x^3-x) with tail correction
        let f = |x: f64| 1.0 / (x * x * x - x).sqrt();
        let mut acc = 0.0;
        // substitution x = 1 + t^2 kills the endpoint singularity
        let tmax = (1e6f64 - 1.0).sqrt();
        let n = 4_000_000;
        // int_1^X f dx = int_0^T f(1+t^2) 2t dt
        let h = tmax / n as f64;
        for k in 0..n {
            let t0 = k as f64 * h;
            let t1 = t0 + h;
            let tm = 0.5 * (t0 + t1);
            let g = |t: f64| {
                if t == 0.0 {
                    // limit of 2t/sqrt((1+t^2)^3-(1+t^2)) = 2t/sqrt(2t^2+...) -> sqrt(2)
                    2.0 / (2.0f64).sqrt()
                } else {
                    let x = 1.0 + t * t;
                    f(x) * 2.0 * t
                }
            };
            acc += h / 6.0 * (g(t0) + 4.0 * g(tm) + g(t1));
        }
        // tail beyond x = 1e6: int x^{-3/2}(1+...) ~ 2/sqrt(X)
        acc += 2.0 / 1e3;
        let omega_abs = p.omega[(0, 0)].norm();
        // du = dx/y with y = 2 sqrt(x^3 - x): omega = a-period/2 = int over cut;
        // by symmetry |int_{-1}^0 dx/(2 sqrt(|f|))| = int_1^inf dx/(2 sqrt(x^3-x))
        assert!(
            (omega_abs - 0.5 * acc).abs() < 1e-6,
            "omega {omega_abs} vs oracle {}",
            0.5 * acc
        );
    }

    #[test]
    fn genus2_invariants_hold() {
        let e: Vec<Complex64> = [-2.1, -1.0, 0.3, 1.2, 2.5].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        assert!(p.legendre_residual() < 1e-10, "legendre {}", p.legendre_residual());
        assert!(tau_asymmetry(&p.tau) < 1e-10);
        assert!(smallest_im_eigenvalue(&p.tau) > 0.0);
        // kappa symmetric
        let k01 = p.kappa[(0, 1)];
        let k10 = p.kappa[(1, 0)];
        assert!((k01 - k10).norm() < 1e-10);
    }

    #[test]
    fn genus3_invariants_hold() {
        let e: Vec<Complex64> = [-3.0, -2.0, -0.7, 0.1, 1.1, 2.2, 3.5]
            .iter()
            .map(|&x| c(x))
            .collect();
        let cur = HyperellipticCurve::from_branch_points(3, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        assert!(p.legendre_residual() < 1e-10, "legendre {}", p.legendre_residual());
        assert!(tau_asymmetry(&p.tau) < 1e-10);
        assert!(smallest_im_eigenvalue(&p.tau) > 0.0);
    }

    #[test]
    fn legendre_broken_when_eta_prime_zeroed() {
        let e: Vec<Complex64> = [-2.1, -1.0, 0.3, 1.2, 2.5].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let zero = DMatrix::<Complex64>::zeros(2, 2);
        let r = legendre_residual_of(&p.omega, &p.omega_prime, &p.eta, &zero);
        assert!(r > 0.1, "residual should be O(1), got {r}");
    }

    #[test]
    fn legendre_invariant_under_symplectic_action() {
        // (a, b) -> (a + b, b) is symplectic; new omega = omega + omega', etc.
        let e: Vec<Complex64> = [-2.1, -1.0, 0.3, 1.2, 2.5].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let omega2 = &p.omega + &p.omega_prime;
        let eta2 = &p.eta + &p.eta_prime;
        let r = legendre_residual_of(&omega2, &p.omega_prime, &eta2, &p.eta_prime);
        assert!(r < 1e-10, "residual after Sp action {r}");
    }

    #[test]
    fn quadrature_doubling_convergence() {
        let e: Vec<Complex64> = [-2.1, -1.0, 0.3, 1.2, 2.5].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let coarse = period_matrices(&cur, &QuadratureSpec::with_nodes(16)).unwrap();
        let fine = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let d = (&coarse.omega - &fine.omega)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-10, "node refinement changed omega by {d}");
    }

    #[test]
    fn genus1_tau_derivative_matches_closed_form() {
        // d tau / d e_i = (i pi / 4 omega^2) / prod_{j != i} (e_i - e_j)
        let e0 = [-1.3, 0.2, 1.4];
        let spec = QuadratureSpec::default();
        let tau_of = |e: [f64; 3]| {
            let pts: Vec<Complex64> = e.iter().map(|&x| c(x)).collect();
            let cur = HyperellipticCurve::from_branch_points(1, &pts).unwrap();
            period_matrices(&cur, &spec).unwrap()
        };
        let p = tau_of(e0);
        let h = 1e-5;
        for i in 0..3 {
            let mut ep = e0;
            ep[i] += h;
            let mut em = e0;
            em[i] -= h;
            let fd = (tau_of(ep).tau[(0, 0)] - tau_of(em).tau[(0, 0)]) / (2.0 * h);
            let mut prod = 1.0;
            for j in 0..3 {
                if j != i {
                    prod *= e0[i] - e0[j];
                }
            }
            let omega = p.omega[(0, 0)];
            let closed = Complex64::new(0.0, PI) / (4.0 * omega * omega * prod);
            assert!(
                (fd - closed).norm() < 1e-5 * closed.norm().max(1.0),
                "i={i}: fd {fd} vs closed {closed}"
            );
        }
    }
}

/// kappa from theta-constants: for an even nonsingular half-period attached
/// to a g-element set I of finite branch points,
/// kappa = -P(A_I)/2 - (2w)^{-T} H (2w)^{-1} / 2, with P the matrix of wp
/// values at the half-period (polynomial in the branch points) and H the
/// theta Hessian over theta at the characteristic of I.
pub fn kappa_via_theta(
    curve: &crate::curve::HyperellipticCurve,
    periods: &PeriodData,
    branch_set: &[usize],
) -> crate::error::Result<DMatrix<Complex64>> {
    use crate::theta::{Characteristic, ThetaEngine};
    let g = curve.genus();
    assert_eq!(branch_set.len(), g, "need g branch indices");
    let ch = Characteristic::of_partition(g, branch_set);
    if !ch.is_even() {
        return Err(crate::error::Error::SingularCharacteristic(0.0));
    }
    let engine = ThetaEngine::new(periods.tau.clone())?;
    let zero = vec![Complex64::new(0.0, 0.0); g];
    let jet = engine.jet(&zero, &ch, 2)?;
    let th = jet.value();
    if th.norm() < 1e-8 {
        return Err(crate::error::Error::SingularCharacteristic(th.norm()));
    }
    let mut hess = DMatrix::<Complex64>::zeros(g, g);
    for a in 0..g {
        for b in 0..g {
            let mut beta = [0usize; 3];
            beta[a] += 1;
            beta[b] += 1;
            hess[(a, b)] = jet.get(beta) / th;
        }
    }
    let p = wp_at_half_period(curve, branch_set);
    let rho = &periods.two_omega_inv;
    Ok((p + rho.transpose() * hess * rho).map(|v| -0.5 * v))
}

/// wp values at the half-period attached to a branch set, as polynomials in
/// the branch points (the Jacobi-inversion values).
fn wp_at_half_period(
    curve: &crate::curve::HyperellipticCurve,
    set: &[usize],
) -> DMatrix<Complex64> {
    let g = curve.genus();
    let e = curve.branch_points();
    let els = |idx: &[usize], d: usize| -> Complex64 {
        // elementary symmetric of degree d over the listed 1-based points
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &i in idx {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k] += c;
                next[k + 1] += c * e[i - 1];
            }
            coeffs = next;
        }
        coeffs.get(d).copied().unwrap_or(Complex64::new(0.0, 0.0))
    };
    let comp: Vec<usize> = (1..=2 * g + 1).filter(|i| !set.contains(i)).collect();
    match g {
        1 => DMatrix::from_element(1, 1, e[set[0] - 1]),
        2 => {
            let s1 = els(set, 1);
            let s2 = els(set, 2);
            let c1 = els(&comp, 1);
            let c3 = els(&comp, 3);
            let mut m = DMatrix::zeros(2, 2);
            m[(0, 0)] = s2 * c1 + c3; // wp_11
            m[(0, 1)] = -s2; // wp_12
            m[(1, 0)] = -s2;
            m[(1, 1)] = s1; // wp_22
            m
        }
        3 => {
            let s1 = els(set, 1);
            let s2 = els(set, 2);
            let s3 = els(set, 3);
            let c1 = els(&comp, 1);
            let c2 = els(&comp, 2);
            let c3 = els(&comp, 3);
            let c4 = els(&comp, 4);
            let mut m = DMatrix::zeros(3, 3);
            m[(2, 2)] = s1;
            m[(1, 2)] = -s2;
            m[(2, 1)] = -s2;
            m[(0, 2)] = s3;
            m[(2, 0)] = s3;
            m[(0, 1)] = -s3 * c1 - c4;
            m[(1, 0)] = m[(0, 1)];
            m[(0, 0)] = s3 * c2 + s1 * c4;
            m[(1, 1)] = c3 + 2.0 * s3 + s2 * c1;
            m
        }
        _ => unreachable!(),
    }
}

/// The averaged genus-2 form: kappa from the lambda matrix and the sum of
/// Hessian/theta over all ten even characteristics.
pub fn kappa_via_theta_averaged(
    curve: &crate::curve::HyperellipticCurve,
    periods: &PeriodData,
) -> crate::error::Result<DMatrix<Complex64>> {
    use crate::theta::{Characteristic, ThetaEngine};
    assert_eq!(curve.genus(), 2);
    let engine = ThetaEngine::new(periods.tau.clone())?;
    let zero = vec![Complex64::new(0.0, 0.0); 2];
    let mut hsum = DMatrix::<Complex64>::zeros(2, 2);
    for bits in 0..16u8 {
        let ch = Characteristic::new(
            vec![bits & 1, (bits >> 1) & 1],
            vec![(bits >> 2) & 1, (bits >> 3) & 1],
        );
        if !ch.is_even() {
            continue;
        }
        let jet = engine.jet(&zero, &ch, 2)?;
        let th = jet.value();
        if th.norm() < 1e-10 {
            return Err(crate::error::Error::SingularCharacteristic(th.norm()));
        }
        for a in 0..2 {
            for b in 0..2 {
                let mut beta = [0usize; 3];
                beta[a] += 1;
                beta[b] += 1;
                hsum[(a, b)] += jet.get(beta) / th;
            }
        }
    }
    // averaging the per-pair formula gives sum wp_12 = -lambda_3/4, hence
    // the off-diagonal lambda_3/4 (not 3 lambda_3/4)
    let mut lam = DMatrix::<Complex64>::zeros(2, 2);
    lam[(0, 0)] = curve.lambda(2);
    lam[(0, 1)] = 0.25 * curve.lambda(3);
    lam[(1, 0)] = lam[(0, 1)];
    lam[(1, 1)] = curve.lambda(4);
    let rho = &periods.two_omega_inv;
    Ok((lam - rho.transpose() * hsum * rho).map(|v| v / 20.0))
}
