//! Hyperelliptic curve models of genus 1..3 and conversions between the
//! normalizations used in different parts of the theory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{poly_roots, sort_roots};

/// Normalization of the defining equation y^2 = f(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// lambda_{2g+2} = 0, lambda_{2g+1} = 4: y^2 = 4 x^{2g+1} + ...
    Canonical,
    /// monic with no x^{2g} term: y^2 = x^{2g+1} + lambda x^{2g-1} + ...
    Groupoid,
    /// genus-2 quintic written with alpha-coefficients, y^2 = 4x^5 + a4 x^4 + ... + a0
    Alpha,
}

/// Affine change of variables (x, y, u) -> (x, y_scale * y, u) relating two
/// normalizations. All three supported normalizations share x and u.
#[derive(Debug, Clone, Copy)]
pub struct CoordinateMap {
    pub y_scale: Complex64,
    pub lambda_scale: Complex64,
}

impl CoordinateMap {
    pub fn identity() -> Self {
        CoordinateMap {
            y_scale: Complex64::new(1.0, 0.0),
            lambda_scale: Complex64::new(1.0, 0.0),
        }
    }

    pub fn inverse(&self) -> Self {
        CoordinateMap {
            y_scale: 1.0 / self.y_scale,
            lambda_scale: 1.0 / self.lambda_scale,
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        CoordinateMap {
            y_scale: self.y_scale * other.y_scale,
            lambda_scale: self.lambda_scale * other.lambda_scale,
        }
    }

    pub fn map_point(&self, p: CurvePoint) -> CurvePoint {
        CurvePoint {
            x: p.x,
            y: self.y_scale * p.y,
        }
    }
}

/// An analytic point (x, y) with y^2 = f(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: Complex64,
    pub y: Complex64,
}

impl CurvePoint {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        CurvePoint { x, y }
    }

    /// Hyperelliptic involution (x, y) -> (x, -y).
    pub fn involute(&self) -> Self {
        CurvePoint {
            x: self.x,
            y: -self.y,
        }
    }
}

/// A hyperelliptic curve y^2 = sum lambda_i x^i of genus 1..3.
#[derive(Debug, Clone)]
pub struct HyperellipticCurve {
    genus: usize,
    /// Coefficients lambda_0 .. lambda_{2g+2}, ascending.
    lambdas: Vec<Complex64>,
    /// The finite roots of f, sorted by (re, im). 2g+1 of them when
    /// lambda_{2g+2} = 0.
    branch_points: Vec<Complex64>,
    normalization: Normalization,
}

impl HyperellipticCurve {
    /// Build from the coefficient vector. `lambdas` must have length 2g+3.
    pub fn from_lambdas(
        genus: usize,
        lambdas: &[Complex64],
        normalization: Normalization,
    ) -> Result<Self> {
        if !(1..=3).contains(&genus) {
            return Err(Error::BadNormalization(format!(
                "genus {genus} outside 1..3"
            )));
        }
        if lambdas.len() != 2 * genus + 3 {
            return Err(Error::BadNormalization(format!(
                "expected {} coefficients for genus {}, got {}",
                2 * genus + 3,
                genus,
                lambdas.len()
            )));
        }
        let top = lambdas[2 * genus + 2];
        let next = lambdas[2 * genus + 1];
        match normalization {
            Normalization::Canonical => {
                if top.norm() != 0.0 || (next - 4.0).norm() > 1e-12 * (1.0 + next.norm()) {
                    return Err(Error::BadNormalization(
                        "canonical form needs lambda_{2g+2}=0, lambda_{2g+1}=4".into(),
                    ));
                }
            }
            Normalization::Groupoid => {
                if top.norm() != 0.0
                    || (next - 1.0).norm() > 1e-12 * (1.0 + next.norm())
                    || lambdas[2 * genus].norm() > 1e-12
                {
                    return Err(Error::BadNormalization(
                        "groupoid form needs a monic odd-degree polynomial without x^{2g} term"
                            .into(),
                    ));
                }
            }
            Normalization::Alpha => {
                if genus != 2 {
                    return Err(Error::BadNormalization(
                        "alpha form is specific to genus 2".into(),
                    ));
                }
                if top.norm() != 0.0 || (next - 4.0).norm() > 1e-12 * (1.0 + next.norm()) {
                    return Err(Error::BadNormalization(
                        "alpha form needs y^2 = 4x^5 + alpha_4 x^4 + ...".into(),
                    ));
                }
            }
        }
        let mut roots = poly_roots(lambdas)?;
        sort_roots(&mut roots);
        let curve = HyperellipticCurve {
            genus,
            lambdas: lambdas.to_vec(),
            branch_points: roots,
            normalization,
        };
        curve.check_nondegenerate()?;
        Ok(curve)
    }

    /// Build the canonical curve y^2 = 4 prod (x - e_k) from 2g+1 finite
    /// branch points (the point at infinity is implied).
    pub fn from_branch_points(genus: usize, e: &[Complex64]) -> Result<Self> {
        if e.len() != 2 * genus + 1 {
            return Err(Error::BadNormalization(format!(
                "expected {} branch points for genus {}, got {}",
                2 * genus + 1,
                genus,
                e.len()
            )));
        }
        let mut coeffs = vec![Complex64::new(4.0, 0.0)];
        for &root in e {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * root;
            }
            coeffs = next;
        }
        coeffs.push(Complex64::new(0.0, 0.0)); // lambda_{2g+2} = 0
        let mut sorted = e.to_vec();
        sort_roots(&mut sorted);
        let curve = HyperellipticCurve {
            genus,
            lambdas: coeffs,
            branch_points: sorted,
            normalization: Normalization::Canonical,
        };
        curve.check_nondegenerate()?;
        Ok(curve)
    }

    fn check_nondegenerate(&self) -> Result<()> {
        let scale = self.scale();
        for i in 0..self.branch_points.len() {
            for j in 0..i {
                let d = (self.branch_points[i] - self.branch_points[j]).norm();
                if d < 1e-12 * scale {
                    return Err(Error::DegenerateCurve(format!(
                        "branch points {j} and {i} coincide within {d:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn lambda(&self, k: usize) -> Complex64 {
        self.lambdas
            .get(k)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// The size used by every "degenerate"-style threshold: max |e_k| + 1.
    pub fn scale(&self) -> f64 {
        self.branch_points
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
            + 1.0
    }

    /// True when every branch point is real (within 1e-10 * scale).
    pub fn has_real_branch_points(&self) -> bool {
        let s = self.scale();
        self.branch_points.iter().all(|e| e.im.abs() < 1e-10 * s)
    }

    /// f(x) = sum lambda_i x^i.
    pub fn f(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in self.lambdas.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    /// f'(x).
    pub fn f_prime(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in self.lambdas.iter().enumerate().skip(1).rev() {
            acc = acc * x + a * (i as f64);
        }
        acc
    }

    /// Square root of f(x) on the sheet closest to `seed`; principal branch
    /// when no seed is given. Errors at branch points.
    pub fn sheet_value(&self, x: Complex64, seed: Option<Complex64>) -> Result<Complex64> {
        let scale = self.scale();
        let near = self
            .branch_points
            .iter()
            .map(|e| (x - e).norm())
            .fold(f64::MAX, f64::min);
        if near <= 1e-12 * scale {
            return Err(Error::AtBranchPoint(self.f(x).norm()));
        }
        let y = self.f(x).sqrt();
        Ok(match seed {
            Some(s) if (y - s).norm() > (-y - s).norm() => -y,
            _ => y,
        })
    }

    /// Whether a point satisfies the curve equation to the stated tolerance.
    pub fn contains(&self, p: &CurvePoint) -> bool {
        let fx = self.f(p.x);
        (p.y * p.y - fx).norm() <= 1e-10 * (1.0 + fx.norm())
    }

    /// Convert to `target`, returning the new curve and the coordinate map
    /// that transports points: (x, y) on self -> (x, y_scale * y) on target.
    pub fn convert_normalization(
        &self,
        target: Normalization,
    ) -> Result<(HyperellipticCurve, CoordinateMap)> {
        use Normalization::*;
        let g = self.genus;
        if self.normalization == target {
            return Ok((self.clone(), CoordinateMap::identity()));
        }
        match (self.normalization, target) {
            (Canonical, Groupoid) | (Alpha, Groupoid) => {
                if self.lambdas[2 * g].norm() > 1e-12 {
                    return Err(Error::UnsupportedPair(
                        "groupoid form needs lambda_{2g} = 0; shift x first".into(),
                    ));
                }
                // y~ = y/2, lambda~_i = lambda_i / 4
                let lambdas: Vec<Complex64> = self.lambdas.iter().map(|a| a / 4.0).collect();
                let curve = HyperellipticCurve::from_lambdas(g, &lambdas, Groupoid)?;
                Ok((
                    curve,
                    CoordinateMap {
                        y_scale: Complex64::new(0.5, 0.0),
                        lambda_scale: Complex64::new(0.25, 0.0),
                    },
                ))
            }
            (Groupoid, Canonical) => {
                let lambdas: Vec<Complex64> = self.lambdas.iter().map(|a| a * 4.0).collect();
                let curve = HyperellipticCurve::from_lambdas(g, &lambdas, Canonical)?;
                Ok((
                    curve,
                    CoordinateMap {
                        y_scale: Complex64::new(2.0, 0.0),
                        lambda_scale: Complex64::new(4.0, 0.0),
                    },
                ))
            }
            (Canonical, Alpha) | (Alpha, Canonical) => {
                if g != 2 {
                    return Err(Error::UnsupportedPair(
                        "alpha form is specific to genus 2".into(),
                    ));
                }
                // Identical coefficient values; only the naming changes.
                let curve = HyperellipticCurve::from_lambdas(g, &self.lambdas, target)?;
                Ok((curve, CoordinateMap::identity()))
            }
            (a, b) => Err(Error::UnsupportedPair(format!("{a:?} -> {b:?}"))),
        }
    }

    /// Discriminant from the root-product formula,
    /// lc^{2d-2} prod_{i<j} (e_i - e_j)^2 over the finite roots.
    pub fn discriminant(&self) -> Complex64 {
        let d = self.branch_points.len();
        let lc = self.lambdas[d];
        let mut acc = lc.powu((2 * d - 2) as u32);
        for i in 0..d {
            for j in 0..i {
                let diff = self.branch_points[i] - self.branch_points[j];
                acc *= diff * diff;
            }
        }
        acc
    }

    /// Discriminant via the Sylvester resultant of f and f',
    /// disc = (-1)^{d(d-1)/2} Res(f, f') / lc. Used as the independent route.
    pub fn discriminant_resultant(&self) -> Complex64 {
        let d = self.branch_points.len();
        let f: Vec<Complex64> = self.lambdas[..=d].to_vec();
        let fp: Vec<Complex64> = (1..=d)
            .map(|i| f[i] * Complex64::new(i as f64, 0.0))
            .collect();
        let res = resultant(&f, &fp);
        let sign = if (d * (d - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        res * sign / f[d]
    }
}

/// Resultant of two complex polynomials (ascending coefficients) via the
/// Sylvester matrix determinant.
fn resultant(p: &[Complex64], q: &[Complex64]) -> Complex64 {
    let n = p.len() - 1;
    let m = q.len() - 1;
    let size = n + m;
    let mut mat = nalgebra::DMatrix::<Complex64>::zeros(size, size);
    for row in 0..m {
        for (k, &a) in p.iter().enumerate() {
            mat[(row, row + n - k)] = a;
        }
    }
    for row in 0..n {
        for (k, &b) in q.iter().enumerate() {
            mat[(m + row, row + m - k)] = b;
        }
    }
    mat.lu().determinant()
}

/// JSON curve description accepted by the CLI and file loaders.
#[derive(Debug, Serialize, Deserialize)]
pub struct CurveSpec {
    pub genus: usize,
    #[serde(default)]
    pub normalization: Option<Normalization>,
    #[serde(default)]
    pub lambdas: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub branch_points: Option<Vec<[f64; 2]>>,
}

impl CurveSpec {
    pub fn to_curve(&self) -> Result<HyperellipticCurve> {
        if let Some(ls) = &self.lambdas {
            let lambdas: Vec<Complex64> = ls.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            HyperellipticCurve::from_lambdas(
                self.genus,
                &lambdas,
                self.normalization.unwrap_or(Normalization::Canonical),
            )
        } else if let Some(es) = &self.branch_points {
            let e: Vec<Complex64> = es.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            HyperellipticCurve::from_branch_points(self.genus, &e)
        } else {
            Err(Error::Usage(
                "curve spec needs either \"lambdas\" or \"branch_points\"".into(),
            ))
        }
    }

    pub fn from_curve(curve: &HyperellipticCurve) -> Self {
        CurveSpec {
            genus: curve.genus(),
            normalization: Some(curve.normalization()),
            lambdas: Some(curve.lambdas().iter().map(|c| [c.re, c.im]).collect()),
            branch_points: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lemniscatic_branch_points() {
        // y^2 = 4x^3 - 4x => e = (-1, 0, 1)
        let lam = [c(0.0), c(-4.0), c(0.0), c(4.0), c(0.0)];
        let cur = HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical).unwrap();
        let e = cur.branch_points();
        assert!((e[0] - c(-1.0)).norm() < 1e-12);
        assert!(e[1].norm() < 1e-12);
        assert!((e[2] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn genus2_expand_product() {
        let e: Vec<Complex64> = [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        // 4 prod (x-e) has integer coefficients; check a few exactly.
        // prod(x-1..5) = x^5 -15x^4 +85x^3 -225x^2 +274x -120
        let want = [-480.0, 1096.0, -900.0, 340.0, -60.0, 4.0, 0.0];
        for (got, want) in cur.lambdas().iter().zip(want) {
            assert!((got - c(want)).norm() < 1e-9, "{got} vs {want}");
        }
        // round-trips with from_lambdas
        let cur2 =
            HyperellipticCurve::from_lambdas(2, cur.lambdas(), Normalization::Canonical).unwrap();
        for (a, b) in cur.branch_points().iter().zip(cur2.branch_points()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn genus2_root_at_zero() {
        let e: Vec<Complex64> = [0.0, 1.0, 2.0, 3.0, 4.0].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        assert!(cur.lambda(0).norm() < 1e-12);
    }

    #[test]
    fn genus3_constant_term() {
        let e: Vec<Complex64> = (1..=7).map(|k| c(k as f64)).collect();
        let cur = HyperellipticCurve::from_branch_points(3, &e).unwrap();
        // lambda_0 = 4 * (-1)^7 * 7! = -20160
        assert!((cur.lambda(0) - c(-20160.0)).norm() < 1e-7);
    }

    #[test]
    fn double_root_rejected() {
        let lam = [c(0.0), c(0.0), c(-4.0), c(4.0), c(0.0)]; // 4x^3-4x^2 = 4x^2(x-1)
        let err = HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical);
        assert!(matches!(err, Err(Error::DegenerateCurve(_))));
    }

    #[test]
    fn bad_leading_coefficient_rejected() {
        let lam = [c(0.0), c(-4.0), c(0.0), c(3.0), c(0.0)];
        let err = HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical);
        assert!(matches!(err, Err(Error::BadNormalization(_))));
    }

    #[test]
    fn sheet_value_seeds() {
        let lam = [c(0.0), c(-4.0), c(0.0), c(4.0), c(0.0)];
        let cur = HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical).unwrap();
        let y = cur.sheet_value(c(2.0), None).unwrap();
        assert!((y - c(24.0f64.sqrt())).norm() < 1e-12);
        let y2 = cur.sheet_value(c(2.0), Some(c(-1.0))).unwrap();
        assert!((y2 + c(24.0f64.sqrt())).norm() < 1e-12);
        assert!(matches!(
            cur.sheet_value(c(1.0), None),
            Err(Error::AtBranchPoint(_))
        ));
    }

    #[test]
    fn monodromy_flips_sign() {
        // continue y around a small loop encircling e = 1
        let lam = [c(0.0), c(-4.0), c(0.0), c(4.0), c(0.0)];
        let cur = HyperellipticCurve::from_lambdas(1, &lam, Normalization::Canonical).unwrap();
        let center = c(1.0);
        let r = 0.1;
        let mut y = cur
            .sheet_value(center + c(r), None)
            .unwrap();
        let y0 = y;
        let steps = 200;
        for k in 1..=steps {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
            let x = center + Complex64::new(r * ang.cos(), r * ang.sin());
            y = cur.sheet_value(x, Some(y)).unwrap();
        }
        assert!((y + y0).norm() < 1e-8, "loop should flip the sheet");
    }

    #[test]
    fn conversion_round_trip() {
        let e: Vec<Complex64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        assert!(cur.lambda(4).norm() < 1e-10, "centered e kills lambda_4");
        let (grp, map) = cur.convert_normalization(Normalization::Groupoid).unwrap();
        let (back, inv_map) = grp.convert_normalization(Normalization::Canonical).unwrap();
        for (a, b) in cur.lambdas().iter().zip(back.lambdas()) {
            assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
        }
        let round = map.compose(&inv_map);
        assert!((round.y_scale - c(1.0)).norm() < 1e-14);
        // a transported point satisfies the target curve
        let x = c(2.5);
        let p = CurvePoint::new(x, cur.sheet_value(x, None).unwrap());
        assert!(grp.contains(&map.map_point(p)));
    }

    #[test]
    fn alpha_normalization_is_genus2_canonical() {
        let e: Vec<Complex64> = [0.5, 1.25, 2.0, 3.5, 4.75].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let (alpha, map) = cur.convert_normalization(Normalization::Alpha).unwrap();
        assert_eq!(alpha.normalization(), Normalization::Alpha);
        for (a, b) in cur.lambdas().iter().zip(alpha.lambdas()) {
            assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
        }
        assert!((map.y_scale - c(1.0)).norm() < 1e-14);
        let (back, _) = alpha.convert_normalization(Normalization::Canonical).unwrap();
        for (a, b) in cur.lambdas().iter().zip(back.lambdas()) {
            assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
        }
        // genus-1 alpha is rejected
        let e1: Vec<Complex64> = [-1.0, 0.0, 1.0].iter().map(|&x| c(x)).collect();
        let g1 = HyperellipticCurve::from_branch_points(1, &e1).unwrap();
        assert!(matches!(
            g1.convert_normalization(Normalization::Alpha),
            Err(Error::UnsupportedPair(_))
        ));
    }

    #[test]
    fn discriminant_two_routes() {
        let e: Vec<Complex64> = [0.5, 1.25, 2.0, 3.5, 4.75].iter().map(|&x| c(x)).collect();
        let cur = HyperellipticCurve::from_branch_points(2, &e).unwrap();
        let a = cur.discriminant();
        let b = cur.discriminant_resultant();
        assert!((a - b).norm() < 1e-10 * a.norm(), "{a} vs {b}");
    }
}
