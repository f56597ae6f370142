//! The exact sigma power-series engine: graded multivariate polynomials in u
//! with rational coefficients polynomial in the curve moduli, the genus-1 and
//! genus-2 recursions, the genus-3 fixed expansion, and the heat/modular
//! operator residuals.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::curve::HyperellipticCurve;
use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Exact multivariate polynomial in u-variables and lambda-variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesPoly {
    pub nu: usize,
    pub nl: usize,
    pub terms: BTreeMap<(Vec<u8>, Vec<u8>), BigRational>,
}

impl SeriesPoly {
    pub fn zero(nu: usize, nl: usize) -> Self {
        SeriesPoly {
            nu,
            nl,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, ue: &[u8], le: &[u8], coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let key = (ue.to_vec(), le.to_vec());
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&(ue.to_vec(), le.to_vec()));
        }
    }

    pub fn coeff(&self, ue: &[u8], le: &[u8]) -> BigRational {
        self.terms
            .get(&(ue.to_vec(), le.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &SeriesPoly) -> SeriesPoly {
        let mut out = self.clone();
        for ((ue, le), c) in &other.terms {
            out.add_term(ue, le, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((ue, le), a) in &self.terms {
            out.add_term(ue, le, a * c);
        }
        out
    }

    /// Multiply by a monomial u^ue * lambda^le (with rational coefficient).
    pub fn mul_monomial(&self, ue: &[u8], le: &[u8], c: &BigRational) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((u0, l0), a) in &self.terms {
            let u1: Vec<u8> = u0.iter().zip(ue).map(|(a, b)| a + b).collect();
            let l1: Vec<u8> = l0.iter().zip(le).map(|(a, b)| a + b).collect();
            out.add_term(&u1, &l1, a * c);
        }
        out
    }

    /// Partial derivative with respect to u_i (0-based).
    pub fn du(&self, i: usize) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((ue, le), a) in &self.terms {
            if ue[i] == 0 {
                continue;
            }
            let mut u1 = ue.clone();
            u1[i] -= 1;
            out.add_term(&u1, le, a * rat_int(ue[i] as i64));
        }
        out
    }

    /// Partial derivative with respect to lambda_k (0-based slot).
    pub fn dl(&self, k: usize) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((ue, le), a) in &self.terms {
            if le[k] == 0 {
                continue;
            }
            let mut l1 = le.clone();
            l1[k] -= 1;
            out.add_term(ue, &l1, a * rat_int(le[k] as i64));
        }
        out
    }

    /// Keep only terms whose u-weight (with given per-variable weights) is
    /// at most `max_w`.
    pub fn truncate_u_weight(&self, weights: &[u32], max_w: u32) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((ue, le), a) in &self.terms {
            let w: u32 = ue.iter().zip(weights).map(|(e, w)| *e as u32 * w).sum();
            if w <= max_w {
                out.add_term(ue, le, a.clone());
            }
        }
        out
    }

    pub fn max_abs_den_bits(&self) -> usize {
        self.terms
            .values()
            .map(|c| c.denom().bits() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, u: &[Complex64], lam: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((ue, le), a) in &self.terms {
            let mut t = Complex64::new(a.to_f64().unwrap_or(0.0), 0.0);
            for (i, &e) in ue.iter().enumerate() {
                t *= u[i].powu(e as u32);
            }
            for (k, &e) in le.iter().enumerate() {
                t *= lam[k].powu(e as u32);
            }
            acc += t;
        }
        acc
    }
}

/// A sigma series with its grading data. Lambda slots are indexed by the
/// subscript of lambda (genus 2: lambda_0..lambda_3; genus 3:
/// lambda_0..lambda_6); genus 1 uses the invariants (g2, g3).
#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    pub genus: usize,
    /// weights of u_1..u_g: 2(g-i)+1
    pub u_weights: Vec<u32>,
    /// maximal u-weight kept (genus 3: maximal total degree)
    pub max_weight: u32,
    pub poly: SeriesPoly,
}

impl TruncatedSeries {
    pub fn u_weight_of(&self, ue: &[u8]) -> u32 {
        ue.iter()
            .zip(&self.u_weights)
            .map(|(e, w)| *e as u32 * w)
            .sum()
    }

    /// Evaluate at a complex point. `lam` uses the series' own slot layout.
    pub fn eval(&self, u: &[Complex64], lam: &[Complex64]) -> Complex64 {
        self.poly.eval(u, lam)
    }

    /// The lambda slot values of a canonical curve in this series' layout.
    /// Genus 1 requires lambda_2 ~ 0, genus 2 requires lambda_4 ~ 0.
    pub fn lambda_slots(&self, curve: &HyperellipticCurve) -> Result<Vec<Complex64>> {
        lambda_slots_for(self.genus, curve)
    }
}

pub fn lambda_slots_for(genus: usize, curve: &HyperellipticCurve) -> Result<Vec<Complex64>> {
    let tol = 1e-9 * curve.scale().powi(3);
    match genus {
        1 => {
            if curve.lambda(2).norm() > tol {
                return Err(Error::WeightUnavailable(
                    "genus-1 series needs lambda_2 = 0 (centered branch points)".into(),
                ));
            }
            Ok(vec![-curve.lambda(1), -curve.lambda(0)]) // (g2, g3)
        }
        2 => {
            if curve.lambda(4).norm() > tol {
                return Err(Error::WeightUnavailable(
                    "genus-2 recursion needs lambda_4 = 0 (centered branch points)".into(),
                ));
            }
            Ok((0..4).map(|k| curve.lambda(k)).collect())
        }
        3 => Ok((0..7).map(|k| curve.lambda(k)).collect()),
        _ => Err(Error::WeightUnavailable(format!("genus {genus}"))),
    }
}

/// Integer coefficients a_{i,j} of the genus-1 expansion through weight
/// 4i + 6j <= wmax.
pub fn genus1_coefficients(wmax: u32) -> HashMap<(u32, u32), BigRational> {
    let mut a: HashMap<(u32, u32), BigRational> = HashMap::new();
    a.insert((0, 0), BigRational::one());
    let get = |a: &HashMap<(u32, u32), BigRational>, i: i64, j: i64| -> BigRational {
        if i < 0 || j < 0 {
            BigRational::zero()
        } else {
            a.get(&(i as u32, j as u32)).cloned().unwrap_or_else(BigRational::zero)
        }
    };
    let mut w = 2;
    while w <= wmax {
        for i in 0..=(w / 4) {
            if (w - 4 * i) % 6 != 0 {
                continue;
            }
            let j = (w - 4 * i) / 6;
            let (i, j) = (i as i64, j as i64);
            let val = rat_int(3 * (i + 1)) * get(&a, i + 1, j - 1)
                + rat(16, 3) * rat_int(j + 1) * get(&a, i - 2, j + 1)
                - rat(1, 3) * rat_int((2 * i + 3 * j - 1) * (4 * i + 6 * j - 1)) * get(&a, i - 1, j);
            a.insert((i as u32, j as u32), val);
        }
        w += 2;
    }
    a
}

fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

fn sigma_series_genus1(max_weight: u32) -> TruncatedSeries {
    let a = genus1_coefficients(max_weight.saturating_sub(1));
    let mut poly = SeriesPoly::zero(1, 2);
    for ((i, j), aij) in &a {
        let k = 4 * i + 6 * j + 1;
        if k > max_weight {
            continue;
        }
        // coefficient of u^k g2^i g3^j: a_ij 2^{j-i} / k!
        let mut c = aij / BigRational::from(factorial(k as u64));
        let two = BigRational::from(BigInt::from(2));
        for _ in 0..*j {
            c *= &two;
        }
        for _ in 0..*i {
            c /= &two;
        }
        poly.add_term(&[k as u8], &[*i as u8, *j as u8], c);
    }
    TruncatedSeries {
        genus: 1,
        u_weights: vec![1],
        max_weight,
        poly,
    }
}

/// One monomial of a genus-2 recursion: index shifts and the coefficient as a
/// function of the base indices.
type Rec2Term = (
    [i64; 5],
    fn(l: i64, m: i64, n: i64, o: i64, p: i64) -> BigRational,
);

fn wsum(l: i64, m: i64, n: i64, o: i64, p: i64) -> i64 {
    3 * l - 4 * m - 6 * n - 8 * o - 10 * p
}

fn rec2_relation(which: usize) -> Vec<Rec2Term> {
    match which {
        1 => vec![
            ([-2, -2, 0, 0, 0], |_, _, _, _, _| rat_int(1)),
            ([-2, 0, 0, -1, 0], |_, _, _, _, _| rat_int(-15)),
            ([-1, -1, 0, 0, 0], |l, m, n, o, p| {
                rat_int(-8 * (wsum(l, m, n, o, p) - 2))
            }),
            ([0, -2, 1, 0, 0], |_, _, n, _, _| rat_int(-24 * (n + 1))),
            ([0, -1, -1, 1, 0], |_, _, _, o, _| rat_int(-16 * (o + 1))),
            ([0, -1, 0, -1, 1], |_, _, _, _, p| rat_int(-8 * (p + 1))),
            ([0, -1, 0, 0, 0], |_, _, _, _, _| rat_int(3)),
            ([0, 0, 0, 0, 0], |l, m, n, o, p| {
                let w = wsum(l, m, n, o, p);
                rat_int(-20 * (w - 3) * (w - 2))
            }),
            ([0, 0, 0, 1, -1], |_, _, _, o, _| rat_int(400 * (o + 1))),
            ([0, 0, 1, -1, 0], |_, _, n, _, _| rat_int(320 * (n + 1))),
            ([0, 1, -1, 0, 0], |_, m, _, _, _| rat_int(240 * (m + 1))),
            ([1, 0, 0, 0, 0], |l, _, _, _, _| rat_int(-40 * (l + 1))),
        ],
        2 => vec![
            ([-2, -1, -1, 0, 0], |_, _, _, _, _| rat_int(3)),
            ([-2, 0, 0, 0, -1], |_, _, _, _, _| rat_int(-60)),
            ([-1, 0, -1, 0, 0], |l, m, n, o, p| {
                rat_int(-24 * wsum(l, m, n, o, p))
            }),
            ([-1, 0, 0, -1, 0], |_, _, _, _, _| rat_int(-20)),
            ([0, -1, 0, 0, 0], |l, _, n, o, p| {
                rat_int(-4 * (5 * l + 8 * n - 20 * o - 30 * p - 5))
            }),
            ([0, 0, -2, 1, 0], |_, _, _, o, _| rat_int(-48 * (o + 1))),
            ([0, 0, -1, -1, 1], |_, _, _, _, p| rat_int(-24 * (p + 1))),
            ([0, 0, -1, 0, 0], |_, _, _, _, _| rat_int(4)),
            ([0, 0, 1, 0, -1], |_, _, n, _, _| rat_int(800 * (n + 1))),
            ([0, 1, 0, -1, 0], |_, m, _, _, _| rat_int(640 * (m + 1))),
            ([1, 0, 0, 0, 0], |l, m, n, o, p| {
                rat_int(80 * (l + 1) * wsum(l, m, n, o, p))
            }),
        ],
        3 => vec![
            ([-2, -1, 0, -1, 0], |_, _, _, _, _| rat_int(3)),
            ([-1, 0, 0, -1, 0], |l, m, n, o, p| {
                rat_int(-24 * (wsum(l, m, n, o, p) + 2))
            }),
            ([-1, 0, 0, 0, -1], |_, _, _, _, _| rat_int(-80)),
            ([0, -1, 0, 1, -1], |_, _, _, o, _| rat_int(240 * (o + 1))),
            ([0, -1, 1, -1, 0], |_, _, n, _, _| rat_int(-32 * (n + 1))),
            ([0, 0, -1, 0, 0], |_, _, _, o, p| rat_int(-4 * (12 * o - 40 * p - 5))),
            ([0, 0, 0, -2, 1], |_, _, _, _, p| rat_int(-64 * (p + 1))),
            ([0, 0, 0, -1, 0], |_, _, _, _, _| rat_int(4)),
            ([0, 1, 0, 0, -1], |_, m, _, _, _| rat_int(1600 * (m + 1))),
            ([2, 0, 0, 0, 0], |l, _, _, _, _| rat_int(-80 * (l + 1) * (l + 2))),
        ],
        _ => unreachable!(),
    }
}

type Coeffs2 = HashMap<(i64, i64, i64, i64, i64), BigRational>;

fn coeff2(a: &Coeffs2, idx: (i64, i64, i64, i64, i64)) -> BigRational {
    let (l, m, n, o, p) = idx;
    if l < 0 || m < 0 || n < 0 || o < 0 || p < 0 {
        return BigRational::zero();
    }
    // the u2 exponent must be nonnegative
    if 3 - 3 * l + 4 * m + 6 * n + 8 * o + 10 * p < 0 {
        return BigRational::zero();
    }
    a.get(&idx).cloned().unwrap_or_else(BigRational::zero)
}

/// Evaluate one recursion at the given base indices, treating the entry
/// `solve_for` as the unknown; returns the solved coefficient.
fn solve_rec2(
    which: usize,
    base: (i64, i64, i64, i64, i64),
    solve_for: (i64, i64, i64, i64, i64),
    a: &Coeffs2,
) -> BigRational {
    let (l, m, n, o, p) = base;
    let mut rhs = BigRational::zero();
    let mut unknown_coeff = BigRational::zero();
    for (shift, cf) in rec2_relation(which) {
        let idx = (
            l + shift[0],
            m + shift[1],
            n + shift[2],
            o + shift[3],
            p + shift[4],
        );
        let c = cf(l, m, n, o, p);
        if idx == solve_for {
            unknown_coeff += c;
        } else {
            rhs += c * coeff2(a, idx);
        }
    }
    assert!(!unknown_coeff.is_zero(), "recursion cannot be solved here");
    -rhs / unknown_coeff
}

fn rec2_residual(which: usize, base: (i64, i64, i64, i64, i64), a: &Coeffs2) -> BigRational {
    let (l, m, n, o, p) = base;
    let mut acc = BigRational::zero();
    for (shift, cf) in rec2_relation(which) {
        let idx = (
            l + shift[0],
            m + shift[1],
            n + shift[2],
            o + shift[3],
            p + shift[4],
        );
        acc += cf(l, m, n, o, p) * coeff2(a, idx);
    }
    acc
}

/// All lambda-degree tuples (m, n, o, p) with 4m+6n+8o+10p <= lmax, sorted
/// by weight.
fn lambda_tuples(lmax: i64) -> Vec<(i64, i64, i64, i64)> {
    let mut out = Vec::new();
    for m in 0..=(lmax / 4) {
        for n in 0..=((lmax - 4 * m) / 6) {
            for o in 0..=((lmax - 4 * m - 6 * n) / 8) {
                for p in 0..=((lmax - 4 * m - 6 * n - 8 * o) / 10) {
                    out.push((m, n, o, p));
                }
            }
        }
    }
    out.sort_by_key(|&(m, n, o, p)| 4 * m + 6 * n + 8 * o + 10 * p);
    out
}

/// Genus-2 coefficients a_{l,m,n,o,p} for all lambda-weights <= lmax.
pub fn genus2_coefficients(lmax: i64) -> Coeffs2 {
    let mut a: Coeffs2 = HashMap::new();
    a.insert((0, 0, 0, 0, 0), rat(-1, 3));
    a.insert((1, 0, 0, 0, 0), rat_int(1));
    for (m, n, o, p) in lambda_tuples(lmax) {
        let lw = 4 * m + 6 * n + 8 * o + 10 * p;
        if lw == 0 {
            continue;
        }
        let lmax_ell = (3 + lw) / 3;
        // a_{l} for l >= 2 from recursion 3 at base (l-2, ...)
        for lt in 2..=lmax_ell {
            let val = solve_rec2(3, (lt - 2, m, n, o, p), (lt, m, n, o, p), &a);
            a.insert((lt, m, n, o, p), val);
        }
        // a_1 then a_0 from recursion 1
        for lt in [1i64, 0].iter().copied() {
            let val = solve_rec2(1, (lt, m, n, o, p), (lt, m, n, o, p), &a);
            a.insert((lt, m, n, o, p), val);
        }
        // recursion 2 is an independent consistency statement
        for lt in 0..=lmax_ell {
            debug_assert!(
                rec2_residual(2, (lt, m, n, o, p), &a).is_zero(),
                "recursion 2 inconsistent at ({lt},{m},{n},{o},{p})"
            );
        }
    }
    a
}

fn sigma_series_genus2(max_weight: u32) -> TruncatedSeries {
    let lmax = max_weight as i64 - 3;
    let a = genus2_coefficients(lmax.max(0));
    let mut poly = SeriesPoly::zero(2, 4);
    for (&(l, m, n, o, p), c) in &a {
        let e2 = 3 - 3 * l + 4 * m + 6 * n + 8 * o + 10 * p;
        if e2 < 0 {
            continue;
        }
        let w = 3 * l + e2;
        if w as u32 > max_weight {
            continue;
        }
        // lambda slots [l0, l1, l2, l3] <- exponents (p, o, n, m)
        poly.add_term(
            &[l as u8, e2 as u8],
            &[p as u8, o as u8, n as u8, m as u8],
            c.clone(),
        );
    }
    TruncatedSeries {
        genus: 2,
        u_weights: vec![3, 1],
        max_weight,
        poly,
    }
}

/// One term of a genus-3 four-index relation: a rational coefficient, a
/// lambda monomial, and up to two wp factors given by index pairs.
struct Rel4Term {
    coeff: BigRational,
    lam: [u8; 7],
    wps: Vec<(usize, usize)>,
}

struct Rel4 {
    idx: [usize; 4],
    terms: Vec<Rel4Term>,
}

/// The complete genus-3 table of wp_{ijkl} as quadratics in wp_{mn}.
fn genus3_four_index_relations() -> Vec<Rel4> {
    let t = |n: i64, d: i64, lam: [u8; 7], wps: &[(usize, usize)]| Rel4Term {
        coeff: rat(n, d),
        lam,
        wps: wps.to_vec(),
    };
    let l = |k: usize| -> [u8; 7] {
        let mut a = [0u8; 7];
        a[k] = 1;
        a
    };
    let ll = |k1: usize, k2: usize| -> [u8; 7] {
        let mut a = [0u8; 7];
        a[k1] += 1;
        a[k2] += 1;
        a
    };
    let o = [0u8; 7];
    vec![
        Rel4 {
            idx: [3, 3, 3, 3],
            terms: vec![
                t(1, 2, l(5), &[]),
                t(4, 1, o, &[(2, 3)]),
                t(1, 1, l(6), &[(3, 3)]),
                t(6, 1, o, &[(3, 3), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [2, 3, 3, 3],
            terms: vec![
                t(6, 1, o, &[(1, 3)]),
                t(-2, 1, o, &[(2, 2)]),
                t(1, 1, l(6), &[(2, 3)]),
                t(6, 1, o, &[(2, 3), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 3, 3, 3],
            terms: vec![
                t(-2, 1, o, &[(1, 2)]),
                t(1, 1, l(6), &[(1, 3)]),
                t(6, 1, o, &[(1, 3), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [2, 2, 3, 3],
            terms: vec![
                t(-2, 1, o, &[(1, 2)]),
                t(1, 1, l(6), &[(1, 3)]),
                t(1, 2, l(5), &[(2, 3)]),
                t(4, 1, o, &[(2, 3), (2, 3)]),
                t(2, 1, o, &[(2, 2), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 2, 3, 3],
            terms: vec![
                t(1, 2, l(5), &[(1, 3)]),
                t(4, 1, o, &[(1, 3), (2, 3)]),
                t(2, 1, o, &[(1, 2), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 1, 3, 3],
            terms: vec![
                t(6, 1, o, &[(1, 3), (1, 3)]),
                t(-2, 1, o, &[(1, 3), (2, 2)]),
                t(2, 1, o, &[(1, 2), (2, 3)]),
            ],
        },
        Rel4 {
            idx: [2, 2, 2, 3],
            terms: vec![
                t(-1, 1, l(2), &[]),
                t(-6, 1, o, &[(1, 1)]),
                t(1, 1, l(5), &[(1, 3)]),
                t(1, 1, l(4), &[(2, 3)]),
                t(6, 1, o, &[(2, 2), (2, 3)]),
                t(-1, 2, l(3), &[(3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 2, 2, 3],
            terms: vec![
                t(-1, 2, l(1), &[]),
                t(1, 1, l(4), &[(1, 3)]),
                t(-2, 1, o, &[(1, 3), (1, 3)]),
                t(4, 1, o, &[(1, 3), (2, 2)]),
                t(2, 1, o, &[(1, 2), (2, 3)]),
                t(2, 1, o, &[(1, 1), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 1, 2, 3],
            terms: vec![
                t(-1, 1, l(0), &[]),
                t(1, 2, l(3), &[(1, 3)]),
                t(4, 1, o, &[(1, 2), (1, 3)]),
                t(2, 1, o, &[(1, 1), (2, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 1, 1, 3],
            terms: vec![
                t(1, 1, l(2), &[(1, 3)]),
                t(6, 1, o, &[(1, 1), (1, 3)]),
                t(-1, 2, l(1), &[(2, 3)]),
                t(1, 1, l(0), &[(3, 3)]),
            ],
        },
        Rel4 {
            idx: [2, 2, 2, 2],
            terms: vec![
                t(-3, 2, l(1), &[]),
                t(1, 8, ll(3, 5), &[]),
                t(-1, 2, ll(2, 6), &[]),
                t(-3, 1, l(6), &[(1, 1)]),
                t(1, 1, l(5), &[(1, 2)]),
                t(12, 1, o, &[(1, 3), (1, 3)]),
                t(1, 1, l(4), &[(2, 2)]),
                t(-12, 1, o, &[(1, 3), (2, 2)]),
                t(6, 1, o, &[(2, 2), (2, 2)]),
                t(1, 1, l(3), &[(2, 3)]),
                t(12, 1, o, &[(1, 2), (2, 3)]),
                t(-3, 1, l(2), &[(3, 3)]),
                t(-12, 1, o, &[(1, 1), (3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 2, 2, 2],
            terms: vec![
                t(-2, 1, l(0), &[]),
                t(-1, 4, ll(1, 6), &[]),
                t(-1, 2, l(5), &[(1, 1)]),
                t(1, 1, l(4), &[(1, 2)]),
                t(1, 1, l(3), &[(1, 3)]),
                t(6, 1, o, &[(1, 2), (2, 2)]),
                t(-3, 2, l(1), &[(3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 1, 2, 2],
            terms: vec![
                t(-1, 2, ll(0, 6), &[]),
                t(1, 2, l(3), &[(1, 2)]),
                t(4, 1, o, &[(1, 2), (1, 2)]),
                t(1, 1, l(2), &[(1, 3)]),
                t(2, 1, o, &[(1, 1), (2, 2)]),
                t(-1, 2, l(1), &[(2, 3)]),
                t(-2, 1, l(0), &[(3, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 1, 1, 2],
            terms: vec![
                t(-1, 4, ll(0, 5), &[]),
                t(1, 1, l(2), &[(1, 2)]),
                t(6, 1, o, &[(1, 1), (1, 2)]),
                t(3, 2, l(1), &[(1, 3)]),
                t(-1, 2, l(1), &[(2, 2)]),
                t(-2, 1, l(0), &[(2, 3)]),
            ],
        },
        Rel4 {
            idx: [1, 1, 1, 1],
            terms: vec![
                t(-1, 2, ll(0, 4), &[]),
                t(1, 8, ll(1, 3), &[]),
                t(-3, 1, l(0), &[(2, 2)]),
                t(1, 1, l(1), &[(1, 2)]),
                t(1, 1, l(2), &[(1, 1)]),
                t(4, 1, l(0), &[(1, 3)]),
                t(6, 1, o, &[(1, 1), (1, 1)]),
            ],
        },
    ]
}

/// sigma^4 * d^4 log sigma for the index multiset (i,j,k,l), as a polynomial
/// in sigma and its partials.
fn quartic_log_derivative(sig: &SeriesPoly, idx: [usize; 4], maxdeg: u32) -> SeriesPoly {
    let d = |f: &SeriesPoly, i: usize| f.du(i - 1);
    let d2 = |f: &SeriesPoly, i: usize, j: usize| f.du(i - 1).du(j - 1);
    let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
    let s = sig;
    let sij = d2(s, i, j);
    let sik = d2(s, i, k);
    let sil = d2(s, i, l);
    let sjk = d2(s, j, k);
    let sjl = d2(s, j, l);
    let skl = d2(s, k, l);
    let si = d(s, i);
    let sj = d(s, j);
    let sk = d(s, k);
    let sl = d(s, l);
    let sjkl = d2(s, j, k).du(l - 1);
    let sikl = d2(s, i, k).du(l - 1);
    let sijl = d2(s, i, j).du(l - 1);
    let sijk = d2(s, i, j).du(k - 1);
    let sijkl = d2(s, i, j).du(k - 1).du(l - 1);
    let m = maxdeg;
    let s2 = s.mul_t(s, m);
    let s3 = s2.mul_t(s, m);
    // f^4 (log f)'''' with all index placements
    let mut acc = s3.mul_t(&sijkl, m);
    let pair_sum = sij
        .mul_t(&skl, m)
        .add(&sik.mul_t(&sjl, m))
        .add(&sil.mul_t(&sjk, m));
    acc = acc.add(&s2.mul_t(&pair_sum, m).scale(&rat_int(-1)));
    let triple_sum = si
        .mul_t(&sjkl, m)
        .add(&sj.mul_t(&sikl, m))
        .add(&sk.mul_t(&sijl, m))
        .add(&sl.mul_t(&sijk, m));
    acc = acc.add(&s2.mul_t(&triple_sum, m).scale(&rat_int(-1)));
    let six_sum = si
        .mul_t(&sj, m)
        .mul_t(&skl, m)
        .add(&si.mul_t(&sk, m).mul_t(&sjl, m))
        .add(&si.mul_t(&sl, m).mul_t(&sjk, m))
        .add(&sj.mul_t(&sk, m).mul_t(&sil, m))
        .add(&sj.mul_t(&sl, m).mul_t(&sik, m))
        .add(&sk.mul_t(&sl, m).mul_t(&sij, m));
    acc = acc.add(&s.mul_t(&six_sum, m).scale(&rat_int(2)));
    acc = acc.add(
        &si.mul_t(&sj, m)
            .mul_t(&sk, m)
            .mul_t(&sl, m)
            .scale(&rat_int(-6)),
    );
    acc
}

impl SeriesPoly {
    /// Product truncated to total u-degree <= maxdeg (degrees only grow).
    fn mul_t(&self, other: &SeriesPoly, maxdeg: u32) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((ua, la), ca) in &self.terms {
            let da: u32 = ua.iter().map(|&e| e as u32).sum();
            if da > maxdeg {
                continue;
            }
            for ((ub, lb), cb) in &other.terms {
                let db: u32 = ub.iter().map(|&e| e as u32).sum();
                if da + db > maxdeg {
                    continue;
                }
                let u: Vec<u8> = ua.iter().zip(ub).map(|(x, y)| x + y).collect();
                let l: Vec<u8> = la.iter().zip(lb).map(|(x, y)| x + y).collect();
                out.add_term(&u, &l, ca * cb);
            }
        }
        out
    }

    fn truncate_u_degree(&self, max_deg: u32) -> SeriesPoly {
        let mut out = SeriesPoly::zero(self.nu, self.nl);
        for ((ue, le), a) in &self.terms {
            let d: u32 = ue.iter().map(|&e| e as u32).sum();
            if d <= max_deg {
                out.add_term(ue, le, a.clone());
            }
        }
        out
    }
}

/// The 15 defect polynomials sigma^4 (wp_{ijkl} - RHS) truncated to total
/// u-degree <= max_deg.
fn genus3_defects(sig: &SeriesPoly, max_deg: u32) -> Vec<SeriesPoly> {
    let rels = genus3_four_index_relations();
    let s2 = sig.mul_t(sig, max_deg);
    let s4 = s2.mul_t(&s2, max_deg);
    // Q_{ab} = s_a s_b - s s_{ab} = sigma^2 wp_{ab}
    let mut q = vec![vec![SeriesPoly::zero(3, 7); 4]; 4];
    for a in 1..=3usize {
        for b in a..=3 {
            let val = sig
                .du(a - 1)
                .mul_t(&sig.du(b - 1), max_deg)
                .add(&sig.mul_t(&sig.du(a - 1).du(b - 1), max_deg).scale(&rat_int(-1)));
            q[a][b] = val.clone();
            q[b][a] = val;
        }
    }
    let mut out = Vec::new();
    for rel in rels {
        // sigma^4 wp_{ijkl} = -quartic_log_derivative
        let lhs = quartic_log_derivative(sig, rel.idx, max_deg).scale(&rat_int(-1));
        let mut rhs = SeriesPoly::zero(3, 7);
        for term in &rel.terms {
            let base = match term.wps.len() {
                0 => s4.clone(),
                1 => {
                    let (a, b) = term.wps[0];
                    q[a][b].mul_t(&s2, max_deg)
                }
                2 => {
                    let (a, b) = term.wps[0];
                    let (c, d) = term.wps[1];
                    q[a][b].mul_t(&q[c][d], max_deg)
                }
                _ => unreachable!(),
            };
            rhs = rhs.add(&base.mul_monomial(&[0, 0, 0], &term.lam, &term.coeff));
        }
        out.push(
            lhs.add(&rhs.scale(&rat_int(-1)))
                .truncate_u_degree(max_deg),
        );
    }
    out
}

const G3_U_WEIGHTS: [u32; 3] = [5, 3, 1];
const G3_L_WEIGHTS: [u32; 7] = [14, 12, 10, 8, 6, 4, 2];

/// All weight-6 homogeneous monomials of a given total u-degree with
/// lambda-degree at most 2 (the support class of the expansion layers).
fn genus3_basis(degree: u32) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut out = Vec::new();
    let d = degree as u8;
    for a in 0..=d {
        for b in 0..=(d - a) {
            let c = d - a - b;
            let uw = a as i64 * G3_U_WEIGHTS[0] as i64
                + b as i64 * G3_U_WEIGHTS[1] as i64
                + c as i64 * G3_U_WEIGHTS[2] as i64;
            let lw = uw - 6;
            if lw < 0 {
                continue;
            }
            if lw == 0 {
                out.push((vec![a, b, c], vec![0u8; 7]));
                continue;
            }
            for k1 in 0..7usize {
                if G3_L_WEIGHTS[k1] as i64 == lw {
                    let mut e = vec![0u8; 7];
                    e[k1] = 1;
                    out.push((vec![a, b, c], e));
                }
                for k2 in k1..7usize {
                    if (G3_L_WEIGHTS[k1] + G3_L_WEIGHTS[k2]) as i64 == lw {
                        let mut e = vec![0u8; 7];
                        e[k1] += 1;
                        e[k2] += 1;
                        out.push((vec![a, b, c], e));
                    }
                }
            }
        }
    }
    out
}

/// Solve the dense exact linear system rows * x = rhs (consistent,
/// possibly overdetermined). Returns None if rank-deficient for some x.
fn solve_exact(
    mut rows: Vec<Vec<BigRational>>,
    mut rhs: Vec<BigRational>,
    ncols: usize,
) -> Option<Vec<BigRational>> {
    let nrows = rows.len();
    let mut pivot_rows = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        let mut pr = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if !row[c].is_zero() {
                pr = Some(i);
                break;
            }
        }
        let Some(pr) = pr else {
            return None; // undetermined column
        };
        rows.swap(r, pr);
        rhs.swap(r, pr);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        rhs[r] *= &inv;
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for cc in c..ncols {
                    let sub = &rows[r][cc] * &f;
                    rows[i][cc] -= sub;
                }
                let sub = &rhs[r] * &f;
                rhs[i] -= sub;
            }
        }
        pivot_rows.push(r);
        r += 1;
        if r == nrows {
            break;
        }
    }
    if r < ncols {
        return None;
    }
    // consistency of the remaining rows
    for i in r..nrows {
        if !rhs[i].is_zero() {
            return None;
        }
    }
    Some(rhs[..ncols].to_vec())
}

/// Derive the degree-`deg` homogeneous part of the genus-3 sigma expansion
/// from the four-index relations, given the lower-degree part `known`.
fn genus3_solve_layer(known: &SeriesPoly, deg: u32) -> SeriesPoly {
    let basis = genus3_basis(deg);
    let target_deg = deg + 2; // defect degree where this layer enters linearly
    let base_defects = genus3_defects(known, target_deg);
    // collect keys of degree target_deg
    let mut keymap: std::collections::BTreeMap<(Vec<u8>, Vec<u8>), usize> = Default::default();
    let keyed = |polys: &[SeriesPoly], keymap: &mut std::collections::BTreeMap<(Vec<u8>, Vec<u8>), usize>| {
        for p in polys {
            for ((ue, le), _) in &p.terms {
                let d: u32 = ue.iter().map(|&e| e as u32).sum();
                if d == target_deg {
                    let n = keymap.len();
                    keymap.entry((ue.clone(), le.clone())).or_insert(n);
                }
            }
        }
    };
    keyed(&base_defects, &mut keymap);

    let mut columns: Vec<Vec<SeriesPoly>> = Vec::new();
    for (ue, le) in &basis {
        let mut probe = known.clone();
        probe.add_term(ue, le, BigRational::one());
        let defects = genus3_defects(&probe, target_deg);
        keyed(&defects, &mut keymap);
        let diff: Vec<SeriesPoly> = defects
            .iter()
            .zip(&base_defects)
            .map(|(d, b)| d.add(&b.scale(&rat_int(-1))))
            .collect();
        columns.push(diff);
    }

    // assemble rows: one equation per (relation, key)
    let nkeys = keymap.len();
    let nrel = base_defects.len();
    let ncols = basis.len();
    let mut rows = vec![vec![BigRational::zero(); ncols]; nkeys * nrel];
    let mut rhs = vec![BigRational::zero(); nkeys * nrel];
    for (ri, p) in base_defects.iter().enumerate() {
        for ((ue, le), c) in &p.terms {
            let d: u32 = ue.iter().map(|&e| e as u32).sum();
            if d == target_deg {
                let k = keymap[&(ue.clone(), le.clone())];
                rhs[ri * nkeys + k] = -c.clone();
            }
        }
    }
    for (t, col) in columns.iter().enumerate() {
        for (ri, p) in col.iter().enumerate() {
            for ((ue, le), c) in &p.terms {
                let d: u32 = ue.iter().map(|&e| e as u32).sum();
                if d == target_deg {
                    let k = keymap[&(ue.clone(), le.clone())];
                    rows[ri * nkeys + k][t] = c.clone();
                }
            }
        }
    }
    let sol = solve_exact(rows, rhs, ncols)
        .expect("the four-index relations determine the expansion layer");
    let mut out = SeriesPoly::zero(3, 7);
    for ((ue, le), x) in basis.iter().zip(sol) {
        out.add_term(ue, le, x);
    }
    out
}

/// Derive the genus-3 expansion layers from the four-index relation table
/// (exact linear algebra); used by a consistency test and the table
/// generator. Slow in debug builds.
pub fn derive_genus3_expansion() -> SeriesPoly {
    let mut s2 = SeriesPoly::zero(3, 7);
    s2.add_term(&[1, 0, 1], &[0; 7], BigRational::one());
    s2.add_term(&[0, 2, 0], &[0; 7], -BigRational::one());
    let s4 = genus3_solve_layer(&s2, 4);
    let known = s2.add(&s4);
    let s6 = genus3_solve_layer(&known, 6);
    known.add(&s6)
}

/// The genus-3 expansion sigma = (u1 u3 - u2^2) + s4 + s6 derived exactly
/// from the four-index relation table; `max_weight` counts the total
/// u-degree here (2, 4 or 6).
fn sigma_series_genus3(max_degree: u32) -> Result<TruncatedSeries> {
    if max_degree > 6 {
        return Err(Error::WeightUnavailable(
            "genus-3 expansion is available through degree 6 only".into(),
        ));
    }
    let mut poly = SeriesPoly::zero(3, 7);
    let mut t = |c: i64, den: i64, ue: [u8; 3], le: [u8; 7]| {
        poly.add_term(&ue, &le, rat(c, den));
    };
    // degree 2: u1 u3 - u2^2
    t(1, 1, [1, 0, 1], [0; 7]);
    t(-1, 1, [0, 2, 0], [0; 7]);
    if max_degree >= 4 {
        // 24 s4, derived exactly from the four-index relation table
        let d = 24;
        t(-8, d, [0, 1, 3], [0, 0, 0, 0, 0, 0, 0]);
        t(-3, d, [0, 2, 2], [0, 0, 0, 0, 0, 0, 1]);
        t(-2, d, [0, 3, 1], [0, 0, 0, 0, 0, 1, 0]);
        t(-2, d, [0, 4, 0], [0, 0, 0, 0, 1, 0, 0]);
        t(1, d, [1, 0, 3], [0, 0, 0, 0, 0, 0, 1]);
        t(-2, d, [1, 3, 0], [0, 0, 0, 1, 0, 0, 0]);
        t(-3, d, [2, 2, 0], [0, 0, 1, 0, 0, 0, 0]);
        t(1, d, [3, 0, 1], [0, 0, 1, 0, 0, 0, 0]);
        t(-2, d, [3, 1, 0], [0, 1, 0, 0, 0, 0, 0]);
        t(-2, d, [4, 0, 0], [1, 0, 0, 0, 0, 0, 0]);
    }
    if max_degree >= 6 {
        // 5760 s6, derived exactly from the four-index relation table
        let d = 5760;
        t(128, d, [0, 0, 6], [0, 0, 0, 0, 0, 0, 0]);
        t(-48, d, [0, 1, 5], [0, 0, 0, 0, 0, 0, 1]);
        t(-15, d, [0, 2, 4], [0, 0, 0, 0, 0, 0, 2]);
        t(-120, d, [0, 2, 4], [0, 0, 0, 0, 0, 1, 0]);
        t(-20, d, [0, 3, 3], [0, 0, 0, 0, 0, 1, 1]);
        t(-320, d, [0, 3, 3], [0, 0, 0, 0, 1, 0, 0]);
        t(-60, d, [0, 4, 2], [0, 0, 0, 0, 1, 0, 1]);
        t(-240, d, [0, 4, 2], [0, 0, 0, 1, 0, 0, 0]);
        t(-24, d, [0, 5, 1], [0, 0, 0, 0, 1, 1, 0]);
        t(-24, d, [0, 5, 1], [0, 0, 0, 1, 0, 0, 1]);
        t(-96, d, [0, 5, 1], [0, 0, 1, 0, 0, 0, 0]);
        t(-16, d, [0, 6, 0], [0, 0, 0, 0, 2, 0, 0]);
        t(-2, d, [0, 6, 0], [0, 0, 0, 1, 0, 1, 0]);
        t(-12, d, [0, 6, 0], [0, 0, 1, 0, 0, 0, 1]);
        t(72, d, [0, 6, 0], [0, 1, 0, 0, 0, 0, 0]);
        t(3, d, [1, 0, 5], [0, 0, 0, 0, 0, 0, 2]);
        t(24, d, [1, 0, 5], [0, 0, 0, 0, 0, 1, 0]);
        t(-240, d, [1, 2, 3], [0, 0, 0, 1, 0, 0, 0]);
        t(-60, d, [1, 3, 2], [0, 0, 0, 1, 0, 0, 1]);
        t(-480, d, [1, 3, 2], [0, 0, 1, 0, 0, 0, 0]);
        t(-30, d, [1, 4, 1], [0, 0, 0, 1, 0, 1, 0]);
        t(-60, d, [1, 4, 1], [0, 0, 1, 0, 0, 0, 1]);
        t(-360, d, [1, 4, 1], [0, 1, 0, 0, 0, 0, 0]);
        t(-24, d, [1, 5, 0], [0, 0, 0, 1, 1, 0, 0]);
        t(-24, d, [1, 5, 0], [0, 0, 1, 0, 0, 1, 0]);
        t(-24, d, [1, 5, 0], [0, 1, 0, 0, 0, 0, 1]);
        t(384, d, [1, 5, 0], [1, 0, 0, 0, 0, 0, 0]);
        t(-240, d, [2, 1, 3], [0, 0, 1, 0, 0, 0, 0]);
        t(-90, d, [2, 2, 2], [0, 0, 1, 0, 0, 0, 1]);
        t(-720, d, [2, 2, 2], [0, 1, 0, 0, 0, 0, 0]);
        t(-60, d, [2, 3, 1], [0, 0, 1, 0, 0, 1, 0]);
        t(-120, d, [2, 3, 1], [0, 1, 0, 0, 0, 0, 1]);
        t(-960, d, [2, 3, 1], [1, 0, 0, 0, 0, 0, 0]);
        t(-60, d, [2, 4, 0], [0, 0, 1, 0, 1, 0, 0]);
        t(-60, d, [2, 4, 0], [0, 1, 0, 0, 0, 1, 0]);
        t(10, d, [3, 0, 3], [0, 0, 1, 0, 0, 0, 1]);
        t(-80, d, [3, 0, 3], [0, 1, 0, 0, 0, 0, 0]);
        t(-60, d, [3, 1, 2], [0, 1, 0, 0, 0, 0, 1]);
        t(-960, d, [3, 1, 2], [1, 0, 0, 0, 0, 0, 0]);
        t(-60, d, [3, 2, 1], [0, 1, 0, 0, 0, 1, 0]);
        t(-240, d, [3, 2, 1], [1, 0, 0, 0, 0, 0, 1]);
        t(-20, d, [3, 3, 0], [0, 0, 1, 1, 0, 0, 0]);
        t(-80, d, [3, 3, 0], [0, 1, 0, 0, 1, 0, 0]);
        t(-80, d, [3, 3, 0], [1, 0, 0, 0, 0, 1, 0]);
        t(-60, d, [4, 0, 2], [1, 0, 0, 0, 0, 0, 1]);
        t(-120, d, [4, 1, 1], [1, 0, 0, 0, 0, 1, 0]);
        t(-15, d, [4, 2, 0], [0, 0, 2, 0, 0, 0, 0]);
        t(-30, d, [4, 2, 0], [0, 1, 0, 1, 0, 0, 0]);
        t(-120, d, [4, 2, 0], [1, 0, 0, 0, 1, 0, 0]);
        t(3, d, [5, 0, 1], [0, 0, 2, 0, 0, 0, 0]);
        t(6, d, [5, 0, 1], [0, 1, 0, 1, 0, 0, 0]);
        t(-24, d, [5, 0, 1], [1, 0, 0, 0, 1, 0, 0]);
        t(-12, d, [5, 1, 0], [0, 1, 1, 0, 0, 0, 0]);
        t(-72, d, [5, 1, 0], [1, 0, 0, 1, 0, 0, 0]);
        t(8, d, [6, 0, 0], [0, 2, 0, 0, 0, 0, 0]);
        t(-44, d, [6, 0, 0], [1, 0, 1, 0, 0, 0, 0]);
    }
    Ok(TruncatedSeries {
        genus: 3,
        u_weights: vec![5, 3, 1],
        max_weight: max_degree,
        poly,
    })
}

/// The exact sigma expansion: genus-1 and genus-2 by recursion to the given
/// u-weight, genus 3 the printed expansion (degree <= 6).
pub fn sigma_series(genus: usize, max_weight: u32) -> Result<TruncatedSeries> {
    match genus {
        1 => Ok(sigma_series_genus1(max_weight)),
        2 => Ok(sigma_series_genus2(max_weight)),
        3 => sigma_series_genus3(max_weight),
        _ => Err(Error::WeightUnavailable(format!("genus {genus}"))),
    }
}

/// Residuals of the defining linear systems, after removing the terms that
/// truncation cannot determine. Identically zero series <-> all residual
/// polynomials empty.
pub fn heat_residual(series: &TruncatedSeries) -> Result<Vec<SeriesPoly>> {
    match series.genus {
        1 => Ok(heat_residual_genus1(series)),
        2 => Ok(heat_residual_genus2(series)),
        _ => Err(Error::WeightUnavailable(
            "heat operators are implemented for genus 1 and 2".into(),
        )),
    }
}

fn heat_residual_genus1(series: &TruncatedSeries) -> Vec<SeriesPoly> {
    let s = &series.poly;
    // Q0 = -u d_u + 4 g2 d_{g2} + 6 g3 d_{g3} + 1
    let q0 = s
        .du(0)
        .mul_monomial(&[1], &[0, 0], &rat_int(-1))
        .add(&s.dl(0).mul_monomial(&[0], &[1, 0], &rat_int(4)))
        .add(&s.dl(1).mul_monomial(&[0], &[0, 1], &rat_int(6)))
        .add(s);
    // Q2 = -1/2 d_u^2 - 1/24 g2 u^2 + 6 g3 d_{g2} + 1/3 g2^2 d_{g3}
    let q2 = s
        .du(0)
        .du(0)
        .scale(&rat(-1, 2))
        .add(&s.mul_monomial(&[2], &[1, 0], &rat(-1, 24)))
        .add(&s.dl(0).mul_monomial(&[0], &[0, 1], &rat_int(6)))
        .add(&s.dl(1).mul_monomial(&[0], &[2, 0], &rat(1, 3)));
    // truncation leaves q2 undetermined above weight max_weight - 2
    let keep = series.max_weight.saturating_sub(2);
    vec![q0, q2.truncate_u_weight(&series.u_weights, keep)]
}

fn heat_residual_genus2(series: &TruncatedSeries) -> Vec<SeriesPoly> {
    let s = &series.poly;
    let s1 = s.du(0);
    let s2 = s.du(1);
    let s11 = s1.du(0);
    let s12 = s1.du(1);
    let s22 = s2.du(1);
    let la: Vec<SeriesPoly> = (0..4).map(|k| s.dl(k)).collect();
    let mono = |ue: [u8; 2], le: [u8; 4], c: BigRational| (ue, le, c);

    // xi components; monomial lists multiply the specified derivative
    let combine = |pieces: Vec<(&SeriesPoly, Vec<([u8; 2], [u8; 4], BigRational)>)>| {
        let mut acc = SeriesPoly::zero(2, 4);
        for (f, monos) in pieces {
            for (ue, le, c) in monos {
                acc = acc.add(&f.mul_monomial(&ue, &le, &c));
            }
        }
        acc
    };

    let xi1 = combine(vec![
        (s, vec![mono([0, 0], [0, 0, 0, 0], rat_int(-1))]),
        (&s2, vec![mono([0, 1], [0, 0, 0, 0], rat(1, 3))]),
        (&s1, vec![mono([1, 0], [0, 0, 0, 0], rat_int(1))]),
    ]);
    let xi2 = combine(vec![
        (
            s,
            vec![
                mono([2, 0], [0, 1, 0, 0], rat(3, 8)),
                mono([2, 0], [0, 0, 0, 2], rat(-1, 40)),
                mono([0, 2], [0, 0, 0, 1], rat(-3, 40)),
            ],
        ),
        (&s2, vec![mono([1, 0], [0, 0, 0, 1], rat(-1, 5))]),
        (&s1, vec![mono([0, 1], [0, 0, 0, 0], rat_int(1))]),
        (&s22, vec![mono([0, 0], [0, 0, 0, 0], rat(1, 2))]),
    ]);
    let xi3 = combine(vec![
        (
            s,
            vec![
                mono([1, 1], [1, 0, 0, 0], rat_int(2)),
                mono([0, 2], [0, 1, 0, 0], rat(-1, 10)),
                mono([0, 0], [0, 0, 1, 0], rat(-1, 2)),
                mono([2, 0], [0, 1, 0, 1], rat(-3, 40)),
            ],
        ),
        (&s2, vec![mono([1, 0], [0, 1, 0, 0], rat(-3, 5))]),
        (&s11, vec![mono([0, 0], [0, 0, 0, 0], rat_int(2))]),
    ]);
    let xi4 = combine(vec![
        (
            s,
            vec![
                mono([2, 0], [1, 0, 0, 0], rat(3, 4)),
                mono([1, 1], [0, 1, 0, 0], rat(1, 4)),
                mono([0, 2], [0, 0, 1, 0], rat(-1, 20)),
                mono([2, 0], [0, 0, 1, 1], rat(-3, 80)),
            ],
        ),
        (
            &s2,
            vec![
                mono([1, 0], [0, 0, 1, 0], rat(-3, 10)),
                mono([0, 1], [0, 0, 0, 1], rat(-1, 12)),
            ],
        ),
        (&s12, vec![mono([0, 0], [0, 0, 0, 0], rat_int(1))]),
    ]);

    // m matrix rows applied to Lambda = (d/d l0, d/d l1, d/d l2, d/d l3) sigma
    let mrow = |entries: Vec<Vec<([u8; 4], BigRational)>>| -> SeriesPoly {
        let mut acc = SeriesPoly::zero(2, 4);
        for (j, monos) in entries.into_iter().enumerate() {
            for (le, c) in monos {
                acc = acc.add(&la[j].mul_monomial(&[0, 0], &le, &c));
            }
        }
        acc
    };
    // Lambda entry order: (d l0, d l1, d l2, d l3)
    let m1 = mrow(vec![
        vec![([1, 0, 0, 0], rat(-10, 3))],
        vec![([0, 1, 0, 0], rat(-8, 3))],
        vec![([0, 0, 1, 0], rat_int(-2))],
        vec![([0, 0, 0, 1], rat(-4, 3))],
    ]);
    let m2 = mrow(vec![
        vec![([0, 1, 0, 1], rat(1, 5))],
        vec![([1, 0, 0, 0], rat_int(-10)), ([0, 0, 1, 1], rat(2, 5))],
        vec![([0, 1, 0, 0], rat_int(-8)), ([0, 0, 0, 2], rat(3, 5))],
        vec![([0, 0, 1, 0], rat_int(-6))],
    ]);
    let m3 = mrow(vec![
        vec![([0, 2, 0, 0], rat(8, 5)), ([1, 0, 1, 0], rat_int(-4))],
        vec![([0, 1, 1, 0], rat(6, 5)), ([1, 0, 0, 1], rat_int(-6))],
        vec![([0, 1, 0, 1], rat(4, 5))],
        vec![([1, 0, 0, 0], rat_int(-40))],
    ]);
    let m4 = mrow(vec![
        vec![([0, 1, 1, 0], rat(3, 10)), ([1, 0, 0, 1], rat(-2, 3))],
        vec![([0, 0, 2, 0], rat(3, 5)), ([0, 1, 0, 1], rat(-1, 3))],
        vec![([1, 0, 0, 0], rat_int(-10)), ([0, 0, 1, 1], rat(9, 10))],
        vec![([0, 1, 0, 0], rat_int(-8)), ([0, 0, 0, 2], rat(1, 3))],
    ]);

    let keep = series.max_weight.saturating_sub(6);
    vec![
        xi1.add(&m1).truncate_u_weight(&series.u_weights, keep),
        xi2.add(&m2).truncate_u_weight(&series.u_weights, keep),
        xi3.add(&m3).truncate_u_weight(&series.u_weights, keep),
        xi4.add(&m4).truncate_u_weight(&series.u_weights, keep),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genus1_first_coefficients() {
        let a = genus1_coefficients(40);
        assert_eq!(a[&(1, 0)], rat_int(-1));
        assert_eq!(a[&(0, 1)], rat_int(-3));
        assert_eq!(a[&(2, 0)], rat_int(-9));
        // all integers through weight 40
        for ((i, j), v) in &a {
            assert!(
                v.denom().is_one(),
                "a_({i},{j}) = {v} is not an integer"
            );
        }
    }

    #[test]
    fn genus1_series_is_classical() {
        // sigma = u - g2 u^5/240 - g3 u^7/840 - g2^2 u^9/161280 + ...
        let s = sigma_series(1, 9).unwrap();
        assert_eq!(s.poly.coeff(&[1], &[0, 0]), rat_int(1));
        assert_eq!(s.poly.coeff(&[5], &[1, 0]), rat(-1, 240));
        assert_eq!(s.poly.coeff(&[7], &[0, 1]), rat(-1, 840));
        assert_eq!(s.poly.coeff(&[9], &[2, 0]), rat(-1, 161280));
    }

    #[test]
    fn genus2_printed_block_reproduced() {
        let s = sigma_series(2, 13).unwrap();
        let p = &s.poly;
        // lambda slots [l0,l1,l2,l3]
        assert_eq!(p.coeff(&[1, 0], &[0, 0, 0, 0]), rat_int(1));
        assert_eq!(p.coeff(&[0, 3], &[0, 0, 0, 0]), rat(-1, 3));
        assert_eq!(p.coeff(&[1, 4], &[0, 0, 0, 1]), rat(-1, 48));
        assert_eq!(p.coeff(&[0, 7], &[0, 0, 0, 1]), rat(-1, 5040));
        assert_eq!(p.coeff(&[3, 0], &[0, 0, 1, 0]), rat(1, 24));
        assert_eq!(p.coeff(&[2, 3], &[0, 0, 1, 0]), rat(-1, 24));
        assert_eq!(p.coeff(&[1, 6], &[0, 0, 1, 0]), rat(-1, 360));
        assert_eq!(p.coeff(&[0, 9], &[0, 0, 1, 0]), rat(1, 22680));
        assert_eq!(p.coeff(&[3, 2], &[0, 1, 0, 0]), rat(-1, 24));
        assert_eq!(p.coeff(&[2, 5], &[0, 1, 0, 0]), rat(-1, 120));
        assert_eq!(p.coeff(&[1, 8], &[0, 1, 0, 0]), rat(-1, 5040));
        assert_eq!(p.coeff(&[0, 11], &[0, 1, 0, 0]), rat(1, 99792));
        assert_eq!(p.coeff(&[4, 1], &[1, 0, 0, 0]), rat(-1, 12));
        assert_eq!(p.coeff(&[3, 4], &[1, 0, 0, 0]), rat(-1, 72));
        assert_eq!(p.coeff(&[2, 7], &[1, 0, 0, 0]), rat(-1, 504));
        assert_eq!(p.coeff(&[1, 10], &[1, 0, 0, 0]), rat(1, 22680));
        assert_eq!(p.coeff(&[0, 13], &[1, 0, 0, 0]), rat(1, 1389960));
    }

    #[test]
    fn genus1_heat_operators_annihilate() {
        let s = sigma_series(1, 25).unwrap();
        let res = heat_residual(&s).unwrap();
        assert!(res[0].is_zero(), "Q0 residual: {:?}", res[0].terms.keys().next());
        assert!(res[1].is_zero(), "Q2 residual: {:?}", res[1].terms.keys().next());
    }

    #[test]
    fn genus2_modular_system_annihilates() {
        let s = sigma_series(2, 21).unwrap();
        let res = heat_residual(&s).unwrap();
        for (i, r) in res.iter().enumerate() {
            assert!(
                r.is_zero(),
                "component {} residual nonzero, e.g. {:?}",
                i + 1,
                r.terms.iter().next()
            );
        }
    }

    #[test]
    fn perturbed_series_fails_heat() {
        let mut s = sigma_series(1, 15).unwrap();
        s.poly.add_term(&[5], &[1, 0], rat_int(1));
        let res = heat_residual(&s).unwrap();
        assert!(!res[1].is_zero(), "perturbation must break Q2");
    }

    #[test]
    fn genus3_expansion_matches_printed_samples() {
        let s = sigma_series(3, 6).unwrap();
        let p = &s.poly;
        assert_eq!(p.coeff(&[1, 0, 1], &[0; 7]), rat_int(1));
        assert_eq!(p.coeff(&[0, 2, 0], &[0; 7]), rat_int(-1));
        // 24 s4 contains -8 u2 u3^3 (sign from the relation-table
        // derivation; see the rederivation test) and -2 l0 u1^4
        assert_eq!(p.coeff(&[0, 1, 3], &[0; 7]), rat(-8, 24));
        assert_eq!(p.coeff(&[4, 0, 0], &[1, 0, 0, 0, 0, 0, 0]), rat(-2, 24));
        // 5760 s6 contains 128 u3^6
        assert_eq!(p.coeff(&[0, 0, 6], &[0; 7]), rat(128, 5760));
        assert!(matches!(
            sigma_series(3, 8),
            Err(crate::error::Error::WeightUnavailable(_))
        ));
    }

    #[test]
    #[ignore = "exact rederivation is slow in debug builds; run with --ignored"]
    fn genus3_expansion_rederives_from_relations() {
        let derived = derive_genus3_expansion();
        let stored = sigma_series(3, 6).unwrap();
        assert_eq!(derived, stored.poly);
    }

    #[test]
    fn hankel_leading_terms() {
        // leading term u1 for g=1,2 and u1 u3 - u2^2 for g=3, exactly
        let s1 = sigma_series(1, 5).unwrap();
        assert_eq!(s1.poly.coeff(&[1], &[0, 0]), rat_int(1));
        let s2 = sigma_series(2, 7).unwrap();
        assert_eq!(s2.poly.coeff(&[1, 0], &[0, 0, 0, 0]), rat_int(1));
        let s3 = sigma_series(3, 2).unwrap();
        assert_eq!(s3.poly.coeff(&[1, 0, 1], &[0; 7]), rat_int(1));
        assert_eq!(s3.poly.coeff(&[0, 2, 0], &[0; 7]), rat_int(-1));
    }
}
