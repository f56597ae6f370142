//! The Abel map by quadrature and the Jacobi inversion problem via the
//! wp-coefficient polynomial, plus the branch-point and sigma-divisor checks.

use num_complex::Complex64;

use crate::curve::{CurvePoint, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::kleinian::SigmaContext;
use crate::periods::{integrate_real, tail_du, Basis, PeriodData};
use crate::quad::QuadratureSpec;
use crate::report::VerificationReport;
use crate::roots::poly_roots;

/// A degree-g effective divisor of curve points.
#[derive(Debug, Clone)]
pub struct Divisor {
    pub points: Vec<CurvePoint>,
}

impl Divisor {
    pub fn new(points: Vec<CurvePoint>) -> Self {
        Divisor { points }
    }

    /// Whether some pair is related by the hyperelliptic involution
    /// (the Abel map degenerates there).
    pub fn special_pair(&self, scale: f64) -> Option<(usize, usize)> {
        for i in 0..self.points.len() {
            for j in 0..i {
                let a = &self.points[i];
                let b = &self.points[j];
                if (a.x - b.x).norm() < 1e-8 * scale && (a.y + b.y).norm() < 1e-8 * scale {
                    return Some((j, i));
                }
            }
        }
        None
    }

    /// Unordered distance between two divisors (greedy matching).
    pub fn distance(&self, other: &Divisor) -> f64 {
        let mut used = vec![false; other.points.len()];
        let mut worst = 0.0f64;
        for p in &self.points {
            let mut best = f64::MAX;
            let mut bi = usize::MAX;
            for (i, q) in other.points.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let d = (p.x - q.x).norm() + (p.y - q.y).norm();
                if d < best {
                    best = d;
                    bi = i;
                }
            }
            used[bi] = true;
            worst = worst.max(best);
        }
        worst
    }
}

/// Abel map with base point infinity: u_i = sum_k int_inf^{P_k} x^{i-1}dx/y.
///
/// Each integral runs down the analytic tail from infinity to
/// X_far = 10 max|e|, then to the target: along the real axis (with
/// singular caps at branch points) for real targets, or by a two-leg
/// complex path with per-factor sheet tracking otherwise.
pub fn abel_map(
    curve: &HyperellipticCurve,
    divisor: &Divisor,
    spec: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let g = curve.genus();
    let scale = curve.scale();
    if let Some((i, j)) = divisor.special_pair(scale) {
        return Err(Error::SpecialDivisor(i, j));
    }
    let mut u = vec![Complex64::new(0.0, 0.0); g];
    for p in &divisor.points {
        let contrib = abel_single(curve, p, spec)?;
        for i in 0..g {
            u[i] += contrib[i];
        }
    }
    Ok(u)
}

/// int_inf^P du for a single point.
pub fn abel_single(
    curve: &HyperellipticCurve,
    p: &CurvePoint,
    spec: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let g = curve.genus();
    let e: Vec<f64> = curve.branch_points().iter().map(|c| c.re).collect();
    let scale = curve.scale();
    let x_far = (10.0 * scale).max(e[2 * g] + 1.0);

    // tail from infinity to x_far (on the sheet with y ~ +2 x^{g+1/2})
    let tail = tail_du(curve, x_far);

    let is_real = p.x.im.abs() < 1e-12 * scale;
    let (mut integral, y_end) = if is_real {
        real_axis_path(curve, p.x.re, x_far, spec)?
    } else {
        complex_path(curve, p.x, x_far, spec)?
    };
    for i in 0..g {
        // int_inf^x = -(int_x^{x_far} + int_{x_far}^inf)
        integral[i] -= tail[i];
    }
    // The path computed int_inf^{(x, y_end)}; flip via the involution when
    // the divisor point lives on the other sheet.
    let on_sheet = (p.y - y_end).norm() <= (p.y + y_end).norm();
    if !on_sheet {
        for v in integral.iter_mut() {
            *v = -*v;
        }
    }
    Ok(integral)
}

/// Integrate du from x_far down to a real target along the real axis on the
/// above-axis sheet. Returns the integrals (oriented inf -> target) and the
/// endpoint y value.
fn real_axis_path(
    curve: &HyperellipticCurve,
    x: f64,
    x_far: f64,
    spec: &QuadratureSpec,
) -> Result<(Vec<Complex64>, Complex64)> {
    let g = curve.genus();
    let e: Vec<f64> = curve.branch_points().iter().map(|c| c.re).collect();
    let scale = curve.scale();
    let at_branch = e.iter().position(|&ek| (x - ek).abs() <= 1e-9 * scale);

    // accumulate int_{x}^{x_far} along the axis, then negate
    let mut acc = vec![Complex64::new(0.0, 0.0); g];
    // segment pieces from x upward to x_far
    let mut lo = x;
    let mut lo_cap = at_branch;
    for (k, &ek) in e.iter().enumerate() {
        if ek > lo + 1e-9 * scale && ek < x_far {
            let piece = integrate_real(curve, lo, ek, lo_cap, Some(k), Basis::First, spec)?;
            for i in 0..g {
                acc[i] += piece[i];
            }
            lo = ek;
            lo_cap = Some(k);
        }
    }
    let piece = integrate_real(curve, lo, x_far, lo_cap, None, Basis::First, spec)?;
    for i in 0..g {
        acc[i] += piece[i];
    }
    let integral: Vec<Complex64> = acc.iter().map(|v| -v).collect();
    let y_end = if at_branch.is_some() {
        Complex64::new(0.0, 0.0)
    } else {
        y_above_checked(curve, x)
    };
    Ok((integral, y_end))
}

fn y_above_checked(curve: &HyperellipticCurve, x: f64) -> Complex64 {
    crate::periods::y_above(curve, x)
}

/// Two-leg complex path x_far -> x_far + iH -> target, with per-factor
/// square-root continuation.
fn complex_path(
    curve: &HyperellipticCurve,
    target: Complex64,
    x_far: f64,
    spec: &QuadratureSpec,
) -> Result<(Vec<Complex64>, Complex64)> {
    let g = curve.genus();
    let scale = curve.scale();
    let h = scale * target.im.signum();
    let mid = Complex64::new(x_far, h);
    let start = Complex64::new(x_far, 0.0);

    // minimal distance of the second leg to any branch point
    for e in curve.branch_points() {
        let d = dist_point_segment(*e, mid, target);
        if d < 1e-8 * scale {
            return Err(Error::PathThroughBranchPoint(d));
        }
    }

    let mut tracker = SheetTracker::start(curve, start);
    let mut total = vec![Complex64::new(0.0, 0.0); g];
    for (z0, z1) in [(start, mid), (mid, target)] {
        let (vals, t) = integrate_leg(curve, z0, z1, tracker, spec)?;
        tracker = t;
        for i in 0..g {
            total[i] += vals[i];
        }
    }
    Ok((total, tracker.y()))
}

fn dist_point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / ab.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// Tracks each factor sqrt(x - e_j) along a path by nearest continuation.
#[derive(Clone)]
struct SheetTracker {
    factors: Vec<Complex64>,
    lead_half: f64,
}

impl SheetTracker {
    fn start(curve: &HyperellipticCurve, x0: Complex64) -> Self {
        let factors = curve
            .branch_points()
            .iter()
            .map(|e| (x0 - e).sqrt())
            .collect();
        let lead = curve.lambda(2 * curve.genus() + 1);
        let lead_half = if (lead - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
            1.0
        } else {
            2.0
        };
        SheetTracker { factors, lead_half }
    }

    fn advance(&mut self, curve: &HyperellipticCurve, x: Complex64) {
        for (f, e) in self.factors.iter_mut().zip(curve.branch_points()) {
            let p = (x - e).sqrt();
            *f = if (p - *f).norm() <= (p + *f).norm() { p } else { -p };
        }
    }

    fn y(&self) -> Complex64 {
        let mut acc = Complex64::new(self.lead_half, 0.0);
        for f in &self.factors {
            acc *= f;
        }
        acc
    }
}

fn integrate_leg(
    curve: &HyperellipticCurve,
    z0: Complex64,
    z1: Complex64,
    tracker: SheetTracker,
    spec: &QuadratureSpec,
) -> Result<(Vec<Complex64>, SheetTracker)> {
    let g = curve.genus();
    let (nodes, weights) = crate::quad::gauss_legendre(spec.base_nodes.max(32));
    let panels = 16usize;
    let mut refinement = 1usize;
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let mut t = tracker.clone();
        let mut acc = vec![Complex64::new(0.0, 0.0); g];
        let np = panels * refinement;
        for p in 0..np {
            let a = z0 + (z1 - z0) * (p as f64 / np as f64);
            let b = z0 + (z1 - z0) * ((p + 1) as f64 / np as f64);
            for (&xi, &wi) in nodes.iter().zip(&weights) {
                let x = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                t.advance(curve, x);
                let y = t.y();
                let w = 0.5 * (b - a) * wi;
                let mut pw = Complex64::new(1.0, 0.0);
                for item in acc.iter_mut().take(g) {
                    *item += w * pw / y;
                    pw *= x;
                }
            }
        }
        if let Some(prev) = &prev {
            let change = prev
                .iter()
                .zip(&acc)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let scale = acc.iter().map(|c| c.norm()).fold(1e-30, f64::max);
            if change < spec.rel_tol * 10.0 * scale || refinement >= 64 {
                if change > 1e-6 * scale {
                    return Err(Error::QuadratureDiverged(change / scale));
                }
                let mut t = tracker.clone();
                // final tracker state along the fine walk
                let steps = 64 * refinement;
                for s in 1..=steps {
                    t.advance(curve, z0 + (z1 - z0) * (s as f64 / steps as f64));
                }
                return Ok((acc, t));
            }
        }
        prev = Some(acc);
        refinement *= 2;
    }
}

/// Roots of the wp-coefficient polynomial
/// P(x; u) = x^g - wp_{g,g} x^{g-1} - ... - wp_{g,1}, with
/// y_k = sum_j wp_{g,g,j}(u) x_k^{j-1}.
pub fn jacobi_invert(ctx: &SigmaContext, u: &[Complex64]) -> Result<Divisor> {
    let g = ctx.curve.genus();
    let lj = ctx.wp_jet(u, 3)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); g + 1];
    coeffs[g] = Complex64::new(1.0, 0.0);
    for j in 1..=g {
        let mut idx = vec![g, j];
        idx.sort_unstable();
        coeffs[j - 1] = -crate::kleinian::wp_from_log_jet(&lj, &idx);
    }
    let xs = poly_roots(&coeffs)?;
    let mut points = Vec::with_capacity(g);
    for x in xs {
        let mut y = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        for j in 1..=g {
            let mut idx = vec![g, g, j];
            idx.sort_unstable();
            y += crate::kleinian::wp_from_log_jet(&lj, &idx) * pw;
            pw *= x;
        }
        points.push(CurvePoint::new(x, y));
    }
    Ok(Divisor::new(points))
}

/// Bolza-type branch point recovery: for genus 2,
/// e_i = -sigma_1(A_i)/sigma_2(A_i); for genus 3 the pairwise forms
/// e_i + e_j = -sigma_2(O_ij)/sigma_3(O_ij), e_i e_j = sigma_1/sigma_3.
pub fn bolza_branch_points(ctx: &SigmaContext) -> Result<VerificationReport> {
    let g = ctx.curve.genus();
    let mut report = VerificationReport::new(format!("genus {g}"), "bolza", 1e-8);
    let e = ctx.curve.branch_points();
    match g {
        2 => {
            for i in 1..=5usize {
                let a_i = ctx.periods.branch_point_image(i);
                let jet = ctx.sigma_jet(&a_i, 1)?;
                let s1 = jet.deriv([1, 0, 0]);
                let s2 = jet.deriv([0, 1, 0]);
                if s2.norm() < 1e-10 * ctx.sigma_scale {
                    return Err(Error::OnThetaDivisor(s2.norm()));
                }
                let resid = (e[i - 1] + s1 / s2).norm();
                report.push(
                    format!("bolza[e{i}]"),
                    "e_i = -sigma_1/sigma_2 at the branch image",
                    resid,
                    e[i - 1].norm(),
                );
            }
        }
        3 => {
            for i in 1..=7usize {
                for j in (i + 1)..=7 {
                    let ai = ctx.periods.branch_point_image(i);
                    let aj = ctx.periods.branch_point_image(j);
                    let om: Vec<Complex64> = ai.iter().zip(&aj).map(|(a, b)| a + b).collect();
                    let jet = ctx.sigma_jet(&om, 1)?;
                    let s1 = jet.deriv([1, 0, 0]);
                    let s2 = jet.deriv([0, 1, 0]);
                    let s3 = jet.deriv([0, 0, 1]);
                    if s3.norm() < 1e-10 * ctx.sigma_scale {
                        return Err(Error::OnThetaDivisor(s3.norm()));
                    }
                    let sum = e[i - 1] + e[j - 1];
                    let prod = e[i - 1] * e[j - 1];
                    report.push(
                        format!("bolza-sum[{i},{j}]"),
                        "e_i+e_j = -sigma_2/sigma_3 at the pair image",
                        (sum + s2 / s3).norm(),
                        sum.norm(),
                    );
                    report.push(
                        format!("bolza-prod[{i},{j}]"),
                        "e_i e_j = sigma_1/sigma_3 at the pair image",
                        (prod - s1 / s3).norm(),
                        prod.norm(),
                    );
                }
            }
        }
        _ => {
            return Err(Error::WeightUnavailable(
                "bolza check applies to genus 2 and 3".into(),
            ))
        }
    }
    report.finalize();
    Ok(report)
}

/// Genus-2 sigma-divisor parametrization at a single curve point P = (Z, W):
/// u = int_inf^P du lies on (sigma); returns |sigma(u)|,
/// |Z + sigma_1/sigma_2|, and the disagreement of the two W-formulas.
pub struct StratumResidual {
    pub sigma_abs: f64,
    pub x_residual: f64,
    pub w_residual: f64,
    pub w_forms_disagree: f64,
}

pub fn stratum_check(
    ctx: &SigmaContext,
    p: &CurvePoint,
    spec: &QuadratureSpec,
) -> Result<StratumResidual> {
    assert_eq!(ctx.curve.genus(), 2);
    let u = abel_single(&ctx.curve, p, spec)?;
    let jet = ctx.sigma_jet(&u, 2)?;
    let sigma_abs = jet.deriv([0, 0, 0]).norm() / ctx.sigma_scale;
    let s1 = jet.deriv([1, 0, 0]);
    let s2 = jet.deriv([0, 1, 0]);
    let x_residual = (p.x + s1 / s2).norm();
    // w = -(s11 + 2 Z s12 + Z^2 s22)/s2 and w = sigma(2u)/sigma_2^4
    // (in the canonical leading-4 normalization)
    let s11 = jet.deriv([2, 0, 0]);
    let s12 = jet.deriv([1, 1, 0]);
    let s22 = jet.deriv([0, 2, 0]);
    let w_a = -(s11 + 2.0 * p.x * s12 + p.x * p.x * s22) / s2;
    let u2: Vec<Complex64> = u.iter().map(|v| 2.0 * v).collect();
    let w_b = ctx.sigma(&u2) / s2.powu(4);
    Ok(StratumResidual {
        sigma_abs,
        x_residual: x_residual / (1.0 + p.x.norm()),
        w_residual: (p.y - w_a).norm() / (1.0 + p.y.norm()),
        w_forms_disagree: (w_a - w_b).norm() / (1.0 + w_a.norm()),
    })
}

/// All 4^g half-periods as u-vectors (sums of branch-point images over
/// subsets of even size representatives; here: subsets of {1..2g+1} of size
/// <= g paired with the empty set).
pub fn half_period(periods: &PeriodData, idx: &[usize]) -> Vec<Complex64> {
    let g = periods.genus();
    let mut u = vec![Complex64::new(0.0, 0.0); g];
    for &i in idx {
        let a = periods.branch_point_image(i);
        for k in 0..g {
            u[k] += a[k];
        }
    }
    u
}
