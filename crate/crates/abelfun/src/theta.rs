//! Riemann theta functions with half-integer characteristics, their partial
//! derivatives to order 5, and the theta-constant identity suite
//! (Thomae, Riemann-Jacobi, Rosenhain).

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::curve::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::periods::PeriodData;
use crate::report::VerificationReport;

/// A half-integer characteristic [eps'; eps], stored as numerators of 1/2
/// (each entry 0 or 1), exact by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Characteristic {
    /// Top row eps' (multiplies tau).
    pub eps_prime: Vec<u8>,
    /// Bottom row eps.
    pub eps: Vec<u8>,
}

impl Characteristic {
    pub fn zero(g: usize) -> Self {
        Characteristic {
            eps_prime: vec![0; g],
            eps: vec![0; g],
        }
    }

    pub fn new(eps_prime: Vec<u8>, eps: Vec<u8>) -> Self {
        Characteristic { eps_prime, eps }
    }

    pub fn genus(&self) -> usize {
        self.eps.len()
    }

    /// Sum modulo 1 (numerators mod 2).
    pub fn add(&self, other: &Characteristic) -> Characteristic {
        Characteristic {
            eps_prime: self
                .eps_prime
                .iter()
                .zip(&other.eps_prime)
                .map(|(a, b)| (a + b) % 2)
                .collect(),
            eps: self
                .eps
                .iter()
                .zip(&other.eps)
                .map(|(a, b)| (a + b) % 2)
                .collect(),
        }
    }

    /// 4 eps . eps' mod 2; theta[eps](-v) = (-1)^parity theta[eps](v).
    pub fn parity(&self) -> u8 {
        let s: u32 = self
            .eps
            .iter()
            .zip(&self.eps_prime)
            .map(|(a, b)| (*a as u32) * (*b as u32))
            .sum();
        (s % 2) as u8
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 0
    }

    /// Characteristic of the Abel image of branch point e_i (1-based,
    /// i = 1..2g+2) in the fixed homology basis; e_{2g+2} is infinity.
    pub fn of_branch_point(g: usize, i: usize) -> Characteristic {
        assert!((1..=2 * g + 2).contains(&i));
        let mut eps_prime = vec![0u8; g];
        let mut eps = vec![0u8; g];
        if i == 2 * g + 2 {
            return Characteristic { eps_prime, eps };
        }
        if i == 2 * g + 1 {
            for e in eps.iter_mut() {
                *e = 1;
            }
            return Characteristic { eps_prime, eps };
        }
        let k = (i + 1) / 2; // cut number, 1-based
        eps_prime[k - 1] = 1;
        let upto = if i % 2 == 0 { k } else { k - 1 };
        for e in eps.iter_mut().take(upto) {
            *e = 1;
        }
        Characteristic { eps_prime, eps }
    }

    /// Characteristic of the vector of Riemann constants with base point
    /// infinity: sum over the even-indexed branch points e_2, e_4, ..., e_2g.
    pub fn riemann_constant(g: usize) -> Characteristic {
        let mut acc = Characteristic::zero(g);
        for k in 1..=g {
            acc = acc.add(&Characteristic::of_branch_point(g, 2 * k));
        }
        acc
    }

    /// Characteristic attached to a set of finite branch-point indices
    /// (1-based subsets of {1..2g+1}): sum of the [A_i] plus [K_inf].
    pub fn of_partition(g: usize, idx: &[usize]) -> Characteristic {
        let mut acc = Characteristic::riemann_constant(g);
        for &i in idx {
            acc = acc.add(&Characteristic::of_branch_point(g, i));
        }
        acc
    }
}

/// Multi-indices |beta| <= max_order over g variables, graded ordering.
pub fn multi_indices(g: usize, max_order: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for total in 0..=max_order {
        collect_indices(g, total, &mut out);
    }
    out
}

fn collect_indices(g: usize, total: usize, out: &mut Vec<[usize; 3]>) {
    match g {
        1 => out.push([total, 0, 0]),
        2 => {
            for a in (0..=total).rev() {
                out.push([a, total - a, 0]);
            }
        }
        3 => {
            for a in (0..=total).rev() {
                for b in (0..=total - a).rev() {
                    out.push([a, b, total - a - b]);
                }
            }
        }
        _ => unreachable!(),
    }
}

/// All partial derivatives of theta[char](v | tau) up to a total order.
pub struct ThetaJet {
    pub genus: usize,
    pub order: usize,
    indices: Vec<[usize; 3]>,
    values: Vec<Complex64>,
}

impl ThetaJet {
    /// d^beta theta / dv^beta.
    pub fn get(&self, beta: [usize; 3]) -> Complex64 {
        let pos = self
            .indices
            .iter()
            .position(|&i| i == beta)
            .expect("multi-index within jet order");
        self.values[pos]
    }

    pub fn value(&self) -> Complex64 {
        self.values[0]
    }
}

/// Evaluator for one tau (caches the decomposition-independent data).
pub struct ThetaEngine {
    pub tau: DMatrix<Complex64>,
    genus: usize,
    im: DMatrix<f64>,
    im_inv: DMatrix<f64>,
    lambda_min: f64,
    pub tol: f64,
    pub radius_cap: f64,
}

impl ThetaEngine {
    pub fn new(tau: DMatrix<Complex64>) -> Result<Self> {
        let g = tau.nrows();
        let im = DMatrix::<f64>::from_fn(g, g, |i, j| 0.5 * (tau[(i, j)].im + tau[(j, i)].im));
        let eig = im.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        if lambda_min <= 0.0 {
            return Err(Error::NonconvergentTau(lambda_min));
        }
        let im_inv = im
            .clone()
            .try_inverse()
            .ok_or(Error::NonconvergentTau(lambda_min))?;
        Ok(ThetaEngine {
            tau,
            genus: g,
            im,
            im_inv,
            lambda_min,
            tol: 1e-13,
            radius_cap: 60.0,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// theta[char](v | tau).
    pub fn theta(&self, v: &[Complex64], ch: &Characteristic) -> Result<Complex64> {
        Ok(self.jet(v, ch, 0)?.value())
    }

    /// Single directional or mixed partial derivative d^beta theta.
    pub fn theta_deriv(
        &self,
        v: &[Complex64],
        ch: &Characteristic,
        beta: [usize; 3],
    ) -> Result<Complex64> {
        let order = beta.iter().sum();
        Ok(self.jet(v, ch, order)?.get(beta))
    }

    /// All derivatives up to `order` in a single lattice pass.
    pub fn jet(&self, v: &[Complex64], ch: &Characteristic, order: usize) -> Result<ThetaJet> {
        assert!(order <= 5, "derivative order limited to 5");
        let g = self.genus;
        assert_eq!(v.len(), g);
        let epsp: Vec<f64> = ch.eps_prime.iter().map(|&b| b as f64 / 2.0).collect();
        let eps: Vec<f64> = ch.eps.iter().map(|&b| b as f64 / 2.0).collect();

        // Center of the Gaussian peak: n ~ -eps' - Y^{-1} Im(v).
        let imv = nalgebra::DVector::<f64>::from_iterator(g, v.iter().map(|z| z.im));
        let c = &self.im_inv * &imv;
        let center: Vec<f64> = (0..g).map(|i| -epsp[i] - c[i]).collect();

        // Peak magnitude exp(pi c^T Y c); truncation is relative to it.
        let peak_log = PI * (c.transpose() * &self.im * &c)[(0, 0)];

        // Radius from the Gaussian tail bound, with polynomial slack for the
        // derivative prefactors and the shell count.
        let logtol = -(self.tol.ln());
        let mut radius = (logtol / (PI * self.lambda_min)).sqrt() + 1.0;
        for _ in 0..3 {
            let slack = (order as f64) * (2.0 * PI * (radius + 1.0)).ln()
                + (g as f64) * (2.0 * radius + 3.0).ln();
            radius = ((logtol + slack.max(0.0)) / (PI * self.lambda_min)).sqrt() + 1.0;
        }
        if radius > self.radius_cap {
            return Err(Error::RadiusOverflow(radius, self.radius_cap));
        }

        let indices = multi_indices(g, order);
        let mut sums = vec![Complex64::new(0.0, 0.0); indices.len()];

        let lo: Vec<i64> = (0..g).map(|i| (center[i] - radius).floor() as i64).collect();
        let hi: Vec<i64> = (0..g).map(|i| (center[i] + radius).ceil() as i64).collect();

        let mut n = vec![0i64; g];
        self.sum_rec(
            0,
            &lo,
            &hi,
            &mut n,
            &epsp,
            &eps,
            v,
            radius,
            &center,
            peak_log,
            order,
            &indices,
            &mut sums,
        );

        Ok(ThetaJet {
            genus: g,
            order,
            indices,
            values: sums,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn sum_rec(
        &self,
        dim: usize,
        lo: &[i64],
        hi: &[i64],
        n: &mut Vec<i64>,
        epsp: &[f64],
        eps: &[f64],
        v: &[Complex64],
        radius: f64,
        center: &[f64],
        peak_log: f64,
        order: usize,
        indices: &[[usize; 3]],
        sums: &mut [Complex64],
    ) {
        let g = self.genus;
        if dim < g {
            for k in lo[dim]..=hi[dim] {
                n[dim] = k;
                self.sum_rec(
                    dim + 1,
                    lo,
                    hi,
                    n,
                    epsp,
                    eps,
                    v,
                    radius,
                    center,
                    peak_log,
                    order,
                    indices,
                    sums,
                );
            }
            return;
        }
        // ellipsoid filter
        let mut r2 = 0.0;
        for i in 0..g {
            let d = n[i] as f64 - center[i];
            r2 += d * d;
        }
        if r2 > (radius + 0.5) * (radius + 0.5) {
            return;
        }
        // exponent i pi (n+e')^T tau (n+e') + 2 i pi (v+e)^T (n+e')
        let m: Vec<f64> = (0..g).map(|i| n[i] as f64 + epsp[i]).collect();
        let mut expo = Complex64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                expo += Complex64::new(0.0, PI) * self.tau[(i, j)] * m[i] * m[j];
            }
            expo += Complex64::new(0.0, 2.0 * PI) * (v[i] + eps[i]) * m[i];
        }
        // relative truncation against the peak
        if expo.re - peak_log < self.tol.ln() - 5.0 {
            return;
        }
        let base = expo.exp();
        if order == 0 {
            sums[0] += base;
            return;
        }
        // powers of 2 pi i (n_k + eps'_k)
        let mut pows = [[Complex64::new(1.0, 0.0); 6]; 3];
        for i in 0..g {
            let p = Complex64::new(0.0, 2.0 * PI * m[i]);
            for k in 1..=order {
                pows[i][k] = pows[i][k - 1] * p;
            }
        }
        for (pos, beta) in indices.iter().enumerate() {
            let factor = pows[0][beta[0]] * pows[1][beta[1]] * pows[2][beta[2]];
            sums[pos] += base * factor;
        }
    }
}

/// Vandermonde-type product over a set of 1-based branch indices.
fn pair_product(e: &[Complex64], idx: &[usize]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            acc *= e[i - 1] - e[j - 1];
        }
    }
    acc
}

/// Delta(I) = prod_{i<j in I}(e_i-e_j) * prod_{i<j in J}(e_i-e_j), J the
/// complement of I in {1..2g+1}.
fn thomae_delta(e: &[Complex64], idx: &[usize], n_finite: usize) -> Complex64 {
    let comp: Vec<usize> = (1..=n_finite).filter(|i| !idx.contains(i)).collect();
    pair_product(e, idx) * pair_product(e, &comp)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(1, n, k, &mut cur, &mut out);
    out
}

/// Elementary symmetric function of degree d over the points with the given
/// 1-based indices.
fn elem_sym(e: &[Complex64], idx: &[usize], d: usize) -> Complex64 {
    if d == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if d > idx.len() {
        return Complex64::new(0.0, 0.0);
    }
    // expand prod (1 + t e_i)
    let mut coeffs = vec![Complex64::new(0.0, 0.0); idx.len() + 1];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for (k, &i) in idx.iter().enumerate() {
        for d2 in (1..=k + 1).rev() {
            let add = coeffs[d2 - 1] * e[i - 1];
            coeffs[d2] += add;
        }
    }
    coeffs[d]
}

/// Certify the theta-constant tables for the curve: first/second Thomae, the
/// Riemann-Jacobi determinant formula, and (genus 2) the 15 Rosenhain
/// derivative relations. Genus 1 runs the Jacobi derivative formula,
/// genus 3 the first Thomae only.
pub fn theta_constant_report(
    curve: &HyperellipticCurve,
    periods: &PeriodData,
) -> Result<VerificationReport> {
    let g = curve.genus();
    let e = curve.branch_points();
    let n_finite = 2 * g + 1;
    let engine = ThetaEngine::new(periods.tau.clone())?;
    let tol = 1e-8;
    let mut report = VerificationReport::new(format!("genus {g}"), "theta-constants", tol);
    let zero = vec![Complex64::new(0.0, 0.0); g];

    let det2w = (periods.omega.map(|x| x * 2.0)).lu().determinant();

    // --- first Thomae over all partitions of size g ---
    let mut signs: Vec<Complex64> = Vec::new();
    for idx in subsets(n_finite, g) {
        let ch = Characteristic::of_partition(g, &idx);
        let th = engine.theta(&zero, &ch)?;
        let lhs = th.powu(4);
        let rhs = det2w * det2w / PI.powi(2 * g as i32) * thomae_delta(e, &idx, n_finite);
        let scale = lhs.norm().max(rhs.norm());
        let resid = (lhs - rhs).norm().min((lhs + rhs).norm());
        report.push(
            format!("thomae1[{idx:?}]"),
            "first Thomae theorem",
            resid,
            scale,
        );
        if rhs.norm() > 0.0 {
            signs.push(lhs / rhs);
        }
    }
    // global sign consistency
    let mut sign_dev = 0.0f64;
    for s in &signs {
        sign_dev = sign_dev.max((s - signs[0]).norm());
    }
    report.push(
        "thomae1-sign",
        "single global sign across partitions",
        sign_dev,
        1.0,
    );

    // --- second Thomae, matrix form, for each partition of size g ---
    // Column k: theta_j[delta_k] = eps * sqrt(det 2w / pi^g) * Delta(S_k)^{1/4}
    //           * sum_i (2w)_{ij} s_{g-i}(S_k)
    // The unit eps and the 4th root are column-calibrated; the residual is the
    // disagreement across j plus |unit|-1.
    let sqrt_fac = (det2w / Complex64::new(PI.powi(g as i32), 0.0)).sqrt();
    for idx in subsets(n_finite, g).into_iter().take(6) {
        for (kpos, &k) in idx.iter().enumerate() {
            let s_k: Vec<usize> = idx.iter().cloned().filter(|&x| x != k).collect();
            let ch = Characteristic::of_partition(g, &s_k);
            if ch.is_even() {
                continue; // need odd nonsingular
            }
            let jet = engine.jet(&zero, &ch, 1)?;
            let mut lhs = vec![Complex64::new(0.0, 0.0); g];
            for (j, l) in lhs.iter_mut().enumerate() {
                let mut beta = [0usize; 3];
                beta[j] = 1;
                *l = jet.get(beta);
            }
            let delta_quarter = thomae_delta(e, &s_k, n_finite).powf(0.25);
            let mut rhs = vec![Complex64::new(0.0, 0.0); g];
            for (j, r) in rhs.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..g {
                    // signed symmetric functions: coefficients of prod (x - e)
                    let d = g - 1 - i;
                    let sgn = if d % 2 == 0 { 1.0 } else { -1.0 };
                    acc += 2.0 * sgn * periods.omega[(i, j)] * elem_sym(e, &s_k, d);
                }
                *r = sqrt_fac * delta_quarter * acc;
            }
            // calibrate the column unit from the largest rhs component
            let (jmax, _) = rhs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                .unwrap();
            if rhs[jmax].norm() == 0.0 {
                continue;
            }
            let unit = lhs[jmax] / rhs[jmax];
            let mut resid = (unit.norm() - 1.0).abs() * rhs[jmax].norm();
            let mut scale = rhs[jmax].norm();
            for j in 0..g {
                resid = resid.max((lhs[j] - unit * rhs[j]).norm());
                scale = scale.max(lhs[j].norm());
            }
            report.push(
                format!("thomae2[{idx:?}:{kpos}]"),
                "second Thomae theorem",
                resid,
                scale,
            );
        }
    }

    // --- Riemann-Jacobi determinant formula ---
    for idx in subsets(n_finite, g).into_iter().take(4) {
        let mut d = DMatrix::<Complex64>::zeros(g, g);
        let mut ok = true;
        for (kpos, &k) in idx.iter().enumerate() {
            let s_k: Vec<usize> = idx.iter().cloned().filter(|&x| x != k).collect();
            let ch = Characteristic::of_partition(g, &s_k);
            if ch.is_even() {
                ok = false;
                break;
            }
            let jet = engine.jet(&zero, &ch, 1)?;
            for j in 0..g {
                let mut beta = [0usize; 3];
                beta[j] = 1;
                d[(j, kpos)] = jet.get(beta);
            }
        }
        if !ok {
            continue;
        }
        let lhs = d.lu().determinant();
        // even characteristics: T_0 = I_0 and T_l = J_0 \ {j_l}
        let comp: Vec<usize> = (1..=n_finite).filter(|i| !idx.contains(i)).collect();
        let mut rhs = Complex64::new(PI.powi(g as i32), 0.0);
        let ch0 = Characteristic::of_partition(g, &idx);
        rhs *= engine.theta(&zero, &ch0)?;
        for &jl in &comp {
            let t_l: Vec<usize> = comp.iter().cloned().filter(|&x| x != jl).collect();
            let ch = Characteristic::of_partition(g, &t_l);
            rhs *= engine.theta(&zero, &ch)?;
        }
        let resid = (lhs - rhs).norm().min((lhs + rhs).norm());
        let tol_here = if g == 1 { 1e-12 } else { 1e-8 };
        report.push_with_tol(
            format!("riemann-jacobi[{idx:?}]"),
            if g == 1 {
                "Jacobi derivative formula"
            } else {
                "generalized Riemann-Jacobi formula"
            },
            resid,
            lhs.norm().max(rhs.norm()),
            tol_here,
        );
    }

    // --- Rosenhain derivative relations (genus 2): all 15 pairs ---
    if g == 2 {
        // the six odd characteristics are [A_i] + [K], i = 1..6
        let odd: Vec<Characteristic> = (1..=6)
            .map(|i| {
                Characteristic::of_branch_point(2, i).add(&Characteristic::riemann_constant(2))
            })
            .collect();
        for a in 0..6 {
            for b in (a + 1)..6 {
                let ja = engine.jet(&zero, &odd[a], 1)?;
                let jb = engine.jet(&zero, &odd[b], 1)?;
                let d = ja.get([1, 0, 0]) * jb.get([0, 1, 0]) - ja.get([0, 1, 0]) * jb.get([1, 0, 0]);
                let mut rhs = Complex64::new(PI * PI, 0.0);
                for (cpos, chc) in odd.iter().enumerate() {
                    if cpos == a || cpos == b {
                        continue;
                    }
                    let even = odd[a].add(&odd[b]).add(chc);
                    rhs *= engine.theta(&zero, &even)?;
                }
                let resid = (d - rhs).norm().min((d + rhs).norm());
                report.push(
                    format!("rosenhain[{},{}]", a + 1, b + 1),
                    "Rosenhain derivative relations",
                    resid,
                    d.norm().max(rhs.norm()),
                );
            }
        }
    }

    report.finalize();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Normalization;
    use crate::periods::period_matrices;
    use crate::quad::QuadratureSpec;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tau1(t: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, t)
    }

    #[test]
    fn char_tables_match_paper() {
        // genus 2 table
        let want: [( [u8; 2], [u8; 2] ); 6] = [
            ([1, 0], [0, 0]),
            ([1, 0], [1, 0]),
            ([0, 1], [1, 0]),
            ([0, 1], [1, 1]),
            ([0, 0], [1, 1]),
            ([0, 0], [0, 0]),
        ];
        for (i, (epsp, eps)) in want.iter().enumerate() {
            let ch = Characteristic::of_branch_point(2, i + 1);
            assert_eq!(ch.eps_prime, epsp.to_vec(), "A_{} eps'", i + 1);
            assert_eq!(ch.eps, eps.to_vec(), "A_{} eps", i + 1);
        }
        let k = Characteristic::riemann_constant(2);
        assert_eq!(k.eps_prime, vec![1, 1]);
        assert_eq!(k.eps, vec![0, 1]);
        assert_eq!(k.parity(), 1);

        // genus 3 table
        let want3: [([u8; 3], [u8; 3]); 8] = [
            ([1, 0, 0], [0, 0, 0]),
            ([1, 0, 0], [1, 0, 0]),
            ([0, 1, 0], [1, 0, 0]),
            ([0, 1, 0], [1, 1, 0]),
            ([0, 0, 1], [1, 1, 0]),
            ([0, 0, 1], [1, 1, 1]),
            ([0, 0, 0], [1, 1, 1]),
            ([0, 0, 0], [0, 0, 0]),
        ];
        for (i, (epsp, eps)) in want3.iter().enumerate() {
            let ch = Characteristic::of_branch_point(3, i + 1);
            assert_eq!(ch.eps_prime, epsp.to_vec(), "A_{} eps'", i + 1);
            assert_eq!(ch.eps, eps.to_vec(), "A_{} eps", i + 1);
        }
        let k3 = Characteristic::riemann_constant(3);
        assert_eq!(k3.eps_prime, vec![1, 1, 1]);
        assert_eq!(k3.eps, vec![1, 0, 1]);
        assert_eq!(k3.parity(), 0, "genus-3 K is even (singular)");

        // counts of even/odd over all 4^g classes, g = 2
        let mut even = 0;
        for a in 0..16u8 {
            let ch = Characteristic::new(
                vec![a & 1, (a >> 1) & 1],
                vec![(a >> 2) & 1, (a >> 3) & 1],
            );
            if ch.is_even() {
                even += 1;
            }
        }
        assert_eq!(even, 10);
    }

    #[test]
    fn theta3_at_tau_i_matches_lattice_oracle() {
        // g=1, tau=i, zero characteristic: brute-force radius-30 sum.
        let engine = ThetaEngine::new(tau1(cx(0.0, 1.0))).unwrap();
        let ch = Characteristic::zero(1);
        let v = [cx(0.13, 0.07)];
        let got = engine.theta(&v, &ch).unwrap();
        let mut want = cx(0.0, 0.0);
        for n in -30i64..=30 {
            let nf = n as f64;
            let expo = cx(0.0, PI) * cx(0.0, 1.0) * nf * nf + cx(0.0, 2.0 * PI) * v[0] * nf;
            want += expo.exp();
        }
        assert!((got - want).norm() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn odd_characteristic_vanishes_at_zero() {
        let engine = ThetaEngine::new(tau1(cx(0.0, 1.0))).unwrap();
        let ch = Characteristic::new(vec![1], vec![1]);
        assert_eq!(ch.parity(), 1);
        let v = [cx(0.0, 0.0)];
        let got = engine.theta(&v, &ch).unwrap();
        assert!(got.norm() < 1e-13);
    }

    #[test]
    fn parity_and_quasi_periodicity() {
        let mut tau = DMatrix::<Complex64>::zeros(2, 2);
        tau[(0, 0)] = cx(0.31, 1.1);
        tau[(1, 1)] = cx(-0.12, 0.9);
        tau[(0, 1)] = cx(0.05, 0.21);
        tau[(1, 0)] = cx(0.05, 0.21);
        let engine = ThetaEngine::new(tau).unwrap();
        let v = [cx(0.21, -0.13), cx(-0.04, 0.08)];
        for a in 0..16u8 {
            let ch = Characteristic::new(
                vec![a & 1, (a >> 1) & 1],
                vec![(a >> 2) & 1, (a >> 3) & 1],
            );
            let t1 = engine.theta(&v, &ch).unwrap();
            let mv = [-v[0], -v[1]];
            let t2 = engine.theta(&mv, &ch).unwrap();
            let sign = if ch.is_even() { 1.0 } else { -1.0 };
            assert!(
                (t1 - sign * t2).norm() < 1e-12 * (1.0 + t1.norm()),
                "parity failed for {ch:?}"
            );
            // v -> v + e_1: factor exp(2 pi i eps'_1)
            let shifted = [v[0] + cx(1.0, 0.0), v[1]];
            let t3 = engine.theta(&shifted, &ch).unwrap();
            let phase = (cx(0.0, 2.0 * PI) * (ch.eps_prime[0] as f64 / 2.0)).exp();
            assert!(
                (t3 - phase * t1).norm() < 1e-11 * (1.0 + t1.norm()),
                "quasi-periodicity failed for {ch:?}"
            );
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut tau = DMatrix::<Complex64>::zeros(2, 2);
        tau[(0, 0)] = cx(0.2, 1.3);
        tau[(1, 1)] = cx(0.1, 0.8);
        tau[(0, 1)] = cx(-0.03, 0.15);
        tau[(1, 0)] = cx(-0.03, 0.15);
        let engine = ThetaEngine::new(tau).unwrap();
        let ch = Characteristic::new(vec![1, 0], vec![0, 1]);
        let v = [cx(0.11, 0.02), cx(-0.07, 0.04)];
        let jet = engine.jet(&v, &ch, 2).unwrap();
        let h = 1e-5;
        // Richardson-improved central difference in v_0
        let f = |x: f64| {
            engine
                .theta(&[v[0] + cx(x, 0.0), v[1]], &ch)
                .unwrap()
        };
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(2.0 * h) - f(-2.0 * h)) / (4.0 * h);
        let fd = (4.0 * d1 - d2) / 3.0;
        let an = jet.get([1, 0, 0]);
        assert!((fd - an).norm() < 1e-8 * (1.0 + an.norm()), "{fd} vs {an}");
    }

    #[test]
    fn truncation_self_consistent_under_tighter_tol() {
        let mut tau = DMatrix::<Complex64>::zeros(2, 2);
        tau[(0, 0)] = cx(0.2, 1.3);
        tau[(1, 1)] = cx(0.1, 0.8);
        tau[(0, 1)] = cx(-0.03, 0.15);
        tau[(1, 0)] = cx(-0.03, 0.15);
        let mut engine = ThetaEngine::new(tau).unwrap();
        let ch = Characteristic::new(vec![0, 1], vec![1, 0]);
        let v = [cx(0.4, -0.1), cx(0.3, 0.2)];
        let a = engine.theta(&v, &ch).unwrap();
        engine.tol = 1e-16;
        let b = engine.theta(&v, &ch).unwrap();
        assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn radius_overflow_reported() {
        let engine = ThetaEngine::new(tau1(cx(0.0, 1e-5))).unwrap();
        let ch = Characteristic::zero(1);
        let v = [cx(0.1, 0.0)];
        assert!(matches!(
            engine.theta(&v, &ch),
            Err(crate::error::Error::RadiusOverflow(_, _))
        ));
    }

    #[test]
    fn jacobi_derivative_formula_genus1() {
        let lam = [cx(0.0, 0.0), cx(-4.0, 0.0), cx(0.0, 0.0), cx(4.0, 0.0), cx(0.0, 0.0)];
        let cur = HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let report = theta_constant_report(&cur, &p).unwrap();
        assert!(report.all_pass(), "{}", report.render_text());
    }

    #[test]
    fn genus2_theta_constant_suite() {
        let e: Vec<Complex64> = [0.0, 1.0, 2.0, 3.0, 5.0]
            .iter()
            .map(|&x| cx(x, 0.0))
            .collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let report = theta_constant_report(&cur, &p).unwrap();
        assert!(report.all_pass(), "{}", report.render_text());
    }

    #[test]
    fn genus3_first_thomae() {
        let e: Vec<Complex64> = [-3.0, -2.0, -0.7, 0.1, 1.1, 2.2, 3.5]
            .iter()
            .map(|&x| cx(x, 0.0))
            .collect();
        let cur = HyperellipticCurve::from_branch_points(3, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        let report = theta_constant_report(&cur, &p).unwrap();
        assert!(report.all_pass(), "{}", report.render_text());
    }
}
