//! The algebraic addition law on C^{3g} fibered over the curve moduli
//! (explicit for genus 1 and 2) and its consistency with wp-addition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kleinian::SigmaContext;

/// A point of the groupoid space C^{3g}: Viete data of g curve points plus
/// the free moduli slot Z. Components are stored by descending weight,
/// P_even = (p_{2g}, ..., p_2), P_odd = (p_{2g+1}, ..., p_3),
/// Z = (z_{2g+2}, ..., z_4).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidElement {
    pub genus: usize,
    pub p_even: Vec<Complex64>,
    pub p_odd: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl GroupoidElement {
    pub fn new(
        genus: usize,
        p_even: Vec<Complex64>,
        p_odd: Vec<Complex64>,
        z: Vec<Complex64>,
    ) -> Self {
        assert!(genus == 1 || genus == 2);
        assert_eq!(p_even.len(), genus);
        assert_eq!(p_odd.len(), genus);
        assert_eq!(z.len(), genus);
        GroupoidElement {
            genus,
            p_even,
            p_odd,
            z,
        }
    }

    /// Inverse: flips the sign of P_odd.
    pub fn neg(&self) -> Self {
        GroupoidElement {
            genus: self.genus,
            p_even: self.p_even.clone(),
            p_odd: self.p_odd.iter().map(|c| -c).collect(),
            z: self.z.clone(),
        }
    }
}

/// The fibering map to the moduli space C^{2g}: (Lambda_1, Lambda_2) with
/// Lambda_2 = Z and Lambda_1 = (sum_i p_{2i+1} C^{g-i}) P_odd
///   - C^g (C P_even + Z) in the companion-matrix calculus.
pub fn project(a: &GroupoidElement) -> Vec<Complex64> {
    match a.genus {
        1 => {
            let p2 = a.p_even[0];
            let p3 = a.p_odd[0];
            let z4 = a.z[0];
            // (lambda_6, lambda_4)
            vec![p3 * p3 - p2 * (p2 * p2 + z4), z4]
        }
        2 => {
            let (p4, p2) = (a.p_even[0], a.p_even[1]);
            let (p5, p3) = (a.p_odd[0], a.p_odd[1]);
            let (z6, z4) = (a.z[0], a.z[1]);
            // (lambda_10, lambda_8, lambda_6, lambda_4)
            let l10 = p5 * p5 + p3 * p3 * p4
                - p2 * p4 * (p2 * p2 + p4 + z4)
                - p4 * (p2 * p4 + z6);
            let l8 = 2.0 * p3 * p5 + p2 * p3 * p3
                - (p2 * p2 + p4) * (p2 * p2 + p4 + z4)
                - p2 * (p2 * p4 + z6);
            vec![l10, l8, z6, z4]
        }
        _ => unreachable!(),
    }
}

/// Natural magnitude of the projection-formula terms; the same-fiber test
/// is relative to this (float inputs carry wp-roundoff amplified by the
/// cubic lambda formulas).
fn projection_scale(a: &GroupoidElement) -> f64 {
    let pmax = a
        .p_even
        .iter()
        .chain(a.p_odd.iter())
        .chain(a.z.iter())
        .map(|c| c.norm())
        .fold(1.0, f64::max);
    pmax.powi(3)
}

fn project_distance(a: &[Complex64], b: &[Complex64], scale: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / scale)
        .fold(0.0, f64::max)
}

/// Weights of the groupoid coordinates: deg p_k = k, deg z_k = k.
fn slot_weights(genus: usize) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
    let even: Vec<u32> = (0..genus).map(|i| (2 * genus - 2 * i) as u32).collect();
    let odd: Vec<u32> = (0..genus).map(|i| (2 * genus + 1 - 2 * i) as u32).collect();
    let z: Vec<u32> = (0..genus).map(|i| (2 * genus + 2 - 2 * i) as u32).collect();
    (even, odd, z)
}

fn rescale(a: &GroupoidElement, c: f64) -> GroupoidElement {
    let (we, wo, wz) = slot_weights(a.genus);
    GroupoidElement {
        genus: a.genus,
        p_even: a
            .p_even
            .iter()
            .zip(&we)
            .map(|(v, &w)| v * c.powi(w as i32))
            .collect(),
        p_odd: a
            .p_odd
            .iter()
            .zip(&wo)
            .map(|(v, &w)| v * c.powi(w as i32))
            .collect(),
        z: a
            .z
            .iter()
            .zip(&wz)
            .map(|(v, &w)| v * c.powi(w as i32))
            .collect(),
    }
}

/// The addition law A1 * A2 for genus 1 and 2. Operands must lie in the same
/// fiber (relative to the rescaled coordinate size); for float inputs the
/// shared moduli are re-averaged before composing. The computation runs in
/// weight-rescaled coordinates (p_k -> c^k p_k) so the interpolation stays
/// well conditioned for large wp values.
pub fn add(a1: &GroupoidElement, a2: &GroupoidElement) -> Result<GroupoidElement> {
    assert_eq!(a1.genus, a2.genus);
    let (we, wo, wz) = slot_weights(a1.genus);
    let mut size = 1.0f64;
    for a in [a1, a2] {
        for (v, &w) in a
            .p_even
            .iter()
            .zip(&we)
            .chain(a.p_odd.iter().zip(&wo))
            .chain(a.z.iter().zip(&wz))
        {
            size = size.max(v.norm().powf(1.0 / w as f64));
        }
    }
    let c = 1.0 / size;
    let out = add_unscaled(&rescale(a1, c), &rescale(a2, c))?;
    Ok(rescale(&out, size))
}

fn add_unscaled(a1: &GroupoidElement, a2: &GroupoidElement) -> Result<GroupoidElement> {
    let l1 = project(a1);
    let l2 = project(a2);
    let scale = projection_scale(a1).max(projection_scale(a2));
    let mismatch = project_distance(&l1, &l2, scale);
    if mismatch > 1e-9 {
        return Err(Error::ProjectionMismatch(mismatch));
    }
    // lambda-averaging for float inputs: compose over the shared fiber
    let l_avg: Vec<Complex64> = l1
        .iter()
        .zip(&l2)
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    match a1.genus {
        1 => {
            let (u2, u3) = (a1.p_even[0], a1.p_odd[0]);
            let (v2, v3) = (a2.p_even[0], a2.p_odd[0]);
            let den = v2 - u2;
            let scale = 1.0 + u2.norm().max(v2.norm());
            if den.norm() < 1e-10 * scale {
                return Err(Error::SingularConfiguration(
                    "coinciding even parts (use a doubling step instead)".into(),
                ));
            }
            let h = (v3 - u3) / den;
            let w2 = -(u2 + v2) + h * h;
            let w3 = -0.5 * (u3 + v3) + 1.5 * (u2 + v2) * h - h.powu(3);
            Ok(GroupoidElement::new(1, vec![w2], vec![w3], a1.z.clone()))
        }
        2 => {
            let (u4, u2) = (a1.p_even[0], a1.p_even[1]);
            let (u5, u3) = (a1.p_odd[0], a1.p_odd[1]);
            let (v4, v2) = (a2.p_even[0], a2.p_even[1]);
            let (v5, v3) = (a2.p_odd[0], a2.p_odd[1]);
            let den = (v4 - u4) * (v3 - u3) - (v2 - u2) * (v5 - u5);
            let scale = 1.0 + u4.norm().max(v4.norm()) + u3.norm().max(v3.norm());
            if den.norm() < 1e-10 * scale {
                return Err(Error::SingularConfiguration(
                    "singular interpolation data".into(),
                ));
            }
            let _ = den;
            let _ = (u5, v5); // the sheet data enters via the interpolation below
            // Interpolating function R(x, y) = h1 y + x^3 + h2 x^2 + h4 x + h6
            // through the four inverted operand points; this is the explicit
            // genus-2 law in division form.
            let quad = |p2: Complex64,
                        p4: Complex64,
                        p3: Complex64,
                        p5: Complex64|
             -> ([Complex64; 2], [Complex64; 2]) {
                // x^2 - p2 x - p4 roots and y = p3 x + p5 at the roots
                let disc = (p2 * p2 + 4.0 * p4).sqrt();
                let x1 = 0.5 * (p2 + disc);
                let x2 = 0.5 * (p2 - disc);
                ([x1, x2], [p3 * x1 + p5, p3 * x2 + p5])
            };
            let (x_a, y_a) = quad(u2, u4, u3, u5);
            let (x_b, y_b) = quad(v2, v4, v3, v5);
            // solve for (h1, h2, h4, h6): x^3 + h2 x^2 + h4 x + h6 + h1 (-y) = 0
            let mut mat = nalgebra::DMatrix::<Complex64>::zeros(4, 4);
            let mut rhs = nalgebra::DVector::<Complex64>::zeros(4);
            for (row, (x, y)) in x_a
                .iter()
                .zip(&y_a)
                .chain(x_b.iter().zip(&y_b))
                .enumerate()
            {
                mat[(row, 0)] = -y; // h1 times (inverted point: -y)
                mat[(row, 1)] = x * x;
                mat[(row, 2)] = *x;
                mat[(row, 3)] = Complex64::new(1.0, 0.0);
                rhs[row] = -x.powu(3);
            }
            let sol = mat
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::SingularConfiguration("interpolation degenerated".into()))?;
            let (h1, h2, h4, h6) = (sol[0], sol[1], sol[2], sol[3]);
            // Phi(x) = x^5 + z4 x^3 + z6 x^2 + l8 x + l10 - (h1-part)^2 ...:
            // on the curve y^2 = x^5 + z4 x^3 + z6 x^2 + l8 x + l10; R * R~ =
            // (x^3+h2x^2+h4x+h6)^2 - h1^2 y^2; divide by the two quadratics.
            let (l10, l8, z6, z4) = (l_avg[0], l_avg[1], l_avg[2], l_avg[3]);
            // numerator polynomial coefficients (degree 6):
            // (x^3+h2x^2+h4x+h6)^2 - h1^2 (x^5+z4x^3+z6x^2+l8x+l10)
            let mut num = vec![Complex64::new(0.0, 0.0); 7];
            let cubic = [h6, h4, h2, Complex64::new(1.0, 0.0)];
            for (i, a) in cubic.iter().enumerate() {
                for (j, b) in cubic.iter().enumerate() {
                    num[i + j] += a * b;
                }
            }
            let quintic = [l10, l8, z6, z4, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
            for (i, c) in quintic.iter().enumerate() {
                num[i] -= h1 * h1 * c;
            }
            // divide by (x^2 - u2 x - u4)(x^2 - v2 x - v4)
            let div1 = [-u4, -u2, Complex64::new(1.0, 0.0)];
            let div2 = [-v4, -v2, Complex64::new(1.0, 0.0)];
            let q1 = poly_div_exact(&num, &div1)?;
            let q2 = poly_div_exact(&q1, &div2)?;
            // q2 = x^2 - w2 x - w4 (degree 2, monic up to the h1^2 leading...)
            let lead = q2[2];
            let w2 = -q2[1] / lead;
            let w4 = -q2[0] / lead;
            // P_odd^(3): y = -(h1)^{-1}(x^3 + h2 x^2 + h4 x + h6) reduced mod
            // x^2 - w2 x - w4 gives w3 x + w5.
            // reduce the cubic mod x^2 = w2 x + w4:
            // x^3 = (w2^2 + w4) x + w2 w4
            let rem = [h6, h4, h2, Complex64::new(1.0, 0.0)];
            let x3_lin = (w2 * w2 + w4, w2 * w4); // (coef x, const)
            let x2_lin = (w2, w4);
            let cx = rem[1] + rem[2] * x2_lin.0 + rem[3] * x3_lin.0;
            let c0 = rem[0] + rem[2] * x2_lin.1 + rem[3] * x3_lin.1;
            let w3 = -cx / h1;
            let w5 = -c0 / h1;
            Ok(GroupoidElement::new(
                2,
                vec![w4, w2],
                vec![w5, w3],
                a1.z.clone(),
            ))
        }
        _ => unreachable!(),
    }
}

/// Exact polynomial division (ascending coefficients), error if the
/// remainder is not negligible.
fn poly_div_exact(num: &[Complex64], div: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut r = num.to_vec();
    let dn = div.len() - 1;
    let lead = div[dn];
    let qn = r.len() - 1 - dn;
    let mut q = vec![Complex64::new(0.0, 0.0); qn + 1];
    for k in (0..=qn).rev() {
        let c = r[k + dn] / lead;
        q[k] = c;
        for (j, d) in div.iter().enumerate() {
            r[k + j] -= c * d;
        }
    }
    let scale = num.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let rem = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if rem > 1e-7 * scale {
        return Err(Error::SingularConfiguration(format!(
            "nonzero remainder {rem:.3e} in the addition division step"
        )));
    }
    Ok(q)
}

/// Embed a Jacobian point into the groupoid:
/// (wp_{g,.}(u), wp_{g,g,.}(u)/2, Lambda_2). The curve must be in the
/// centered canonical normalization (lambda_{2g} = 0); the groupoid moduli
/// are the monic ones, lambda/4.
pub fn wp_embed(ctx: &SigmaContext, u: &[Complex64]) -> Result<GroupoidElement> {
    let g = ctx.curve.genus();
    assert!(g == 1 || g == 2);
    let w = crate::identities::WpCache::new(ctx, u, 3)?;
    // descending weight: p_{2g} = wp_{g,1}, ..., p_2 = wp_{g,g}
    let p_even: Vec<Complex64> = (1..=g).map(|j| w.wp(&[g, j])).collect();
    let p_odd: Vec<Complex64> = (1..=g).map(|j| w.wp(&[g, g, j]) / 2.0).collect();
    // Lambda_2 = (lambda-monic of weight 2(g+1)..4) = canonical lambda/4 at
    // subscripts 2g-1 ... g+... : weight 2(2g+1-k): slot i=1..g holds
    // lambda_{2(g-i+2)} monic = canonical lambda_{2g+1 - (2(g-i+2))/1...}
    let z: Vec<Complex64> = (1..=g)
        .map(|i| {
            // monic weight w = 2(g - i + 2); canonical subscript k with
            // 2(2g + 1 - k) = w
            let k = 2 * g + 1 - (g - i + 2);
            ctx.curve.lambda(k) / 4.0
        })
        .collect();
    Ok(GroupoidElement::new(g, p_even, p_odd, z))
}

/// Max-norm distance between pi(u + v) and pi(u) * pi(v).
pub fn consistency_residual(
    ctx: &SigmaContext,
    u: &[Complex64],
    v: &[Complex64],
) -> Result<f64> {
    let upv: Vec<Complex64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    let pu = wp_embed(ctx, u)?;
    let pv = wp_embed(ctx, v)?;
    let want = wp_embed(ctx, &upv)?;
    let got = add(&pu, &pv)?;
    let mut worst = 0.0f64;
    for (a, b) in want
        .p_even
        .iter()
        .chain(want.p_odd.iter())
        .zip(got.p_even.iter().chain(got.p_odd.iter()))
    {
        worst = worst.max((a - b).norm() / (1.0 + a.norm()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::HyperellipticCurve;
    use crate::periods::period_matrices;
    use crate::quad::QuadratureSpec;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn centered(vals: &[f64]) -> Vec<Complex64> {
        let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|&v| c(v - mean)).collect()
    }

    fn ctx_genus(g: usize) -> SigmaContext {
        let e = match g {
            1 => centered(&[-1.2, 0.1, 1.3]),
            _ => centered(&[-2.0, -0.9, 0.2, 1.0, 2.1]),
        };
        let cur = HyperellipticCurve::from_branch_points(g, &e).unwrap();
        let p = period_matrices(&cur, &QuadratureSpec::default()).unwrap();
        SigmaContext::new(&cur, &p).unwrap()
    }

    #[test]
    fn genus1_projection_closed_form() {
        let a = GroupoidElement::new(1, vec![c(2.0)], vec![c(3.0)], vec![c(-1.0)]);
        let l = project(&a);
        // lambda_6 = p3^2 - p2(p2^2 + z4) = 9 - 2*(4 - 1) = 3
        assert!((l[0] - c(3.0)).norm() < 1e-14);
        assert!((l[1] - c(-1.0)).norm() < 1e-14);
        // projection is even in P_odd
        let l2 = project(&a.neg());
        assert!((l[0] - l2[0]).norm() < 1e-14);
    }

    #[test]
    fn neg_is_involution() {
        let a = GroupoidElement::new(
            2,
            vec![c(0.3), c(1.2)],
            vec![c(-0.7), c(0.4)],
            vec![c(0.1), c(0.2)],
        );
        assert_eq!(a.neg().neg(), a);
    }

    #[test]
    fn embedded_element_projects_to_curve_moduli() {
        for g in [1usize, 2] {
            let ctx = ctx_genus(g);
            let mut rng = ChaCha12Rng::seed_from_u64(3 + g as u64);
            let u = ctx.sample_off_divisor(&mut rng);
            let a = wp_embed(&ctx, &u).unwrap();
            let l = project(&a);
            // expected: monic lambdas of the curve by descending weight
            let want: Vec<Complex64> = (0..2 * g)
                .map(|i| {
                    // weight w = 2(g + 1 - ...): slots are
                    // lambda_{4g+2-2i-2}? simplest: genus-specific
                    if g == 1 {
                        [ctx.curve.lambda(0) / 4.0, ctx.curve.lambda(1) / 4.0][i]
                    } else {
                        [
                            ctx.curve.lambda(0) / 4.0,
                            ctx.curve.lambda(1) / 4.0,
                            ctx.curve.lambda(2) / 4.0,
                            ctx.curve.lambda(3) / 4.0,
                        ][i]
                    }
                })
                .collect();
            for (got, want) in l.iter().zip(&want) {
                assert!(
                    (got - want).norm() < 1e-7 * (1.0 + want.norm()),
                    "genus {g}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn addition_consistent_with_jacobian_flow() {
        for g in [1usize, 2] {
            let ctx = ctx_genus(g);
            let mut rng = ChaCha12Rng::seed_from_u64(13 + g as u64);
            for _ in 0..3 {
                let u = ctx.sample_off_divisor(&mut rng);
                let v = ctx.sample_off_divisor(&mut rng);
                let r = consistency_residual(&ctx, &u, &v).unwrap();
                let tol = if g == 1 { 1e-9 } else { 1e-8 };
                assert!(r < tol, "genus {g}: groupoid consistency {r}");
            }
        }
    }

    #[test]
    fn embedding_respects_parity() {
        let ctx = ctx_genus(2);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let u = ctx.sample_off_divisor(&mut rng);
        let mu: Vec<Complex64> = u.iter().map(|x| -x).collect();
        let a = wp_embed(&ctx, &u).unwrap();
        let b = wp_embed(&ctx, &mu).unwrap();
        let neg = a.neg();
        for (x, y) in neg
            .p_even
            .iter()
            .chain(neg.p_odd.iter())
            .zip(b.p_even.iter().chain(b.p_odd.iter()))
        {
            assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn associativity_and_weak_inverse() {
        let ctx = ctx_genus(2);
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let u = ctx.sample_off_divisor(&mut rng);
        let v = ctx.sample_off_divisor(&mut rng);
        let t = ctx.sample_off_divisor(&mut rng);
        let a = wp_embed(&ctx, &u).unwrap();
        let b = wp_embed(&ctx, &v).unwrap();
        let cc = wp_embed(&ctx, &t).unwrap();
        let ab_c = add(&add(&a, &b).unwrap(), &cc).unwrap();
        let a_bc = add(&a, &add(&b, &cc).unwrap()).unwrap();
        for (x, y) in ab_c
            .p_even
            .iter()
            .chain(ab_c.p_odd.iter())
            .zip(a_bc.p_even.iter().chain(a_bc.p_odd.iter()))
        {
            assert!((x - y).norm() < 1e-8 * (1.0 + x.norm()), "associativity");
        }
        let ab_negb = add(&add(&a, &b).unwrap(), &b.neg()).unwrap();
        for (x, y) in ab_negb
            .p_even
            .iter()
            .chain(ab_negb.p_odd.iter())
            .zip(a.p_even.iter().chain(a.p_odd.iter()))
        {
            assert!((x - y).norm() < 1e-8 * (1.0 + x.norm()), "weak inverse");
        }
    }

    #[test]
    fn genus1_closed_form_law_matches_interpolation() {
        // the closed-form h-law for g=1 against a wp-oracle triple
        let ctx = ctx_genus(1);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let u = ctx.sample_off_divisor(&mut rng);
        let v = ctx.sample_off_divisor(&mut rng);
        let a = wp_embed(&ctx, &u).unwrap();
        let b = wp_embed(&ctx, &v).unwrap();
        let s = add(&a, &b).unwrap();
        let upv = vec![u[0] + v[0]];
        let want = wp_embed(&ctx, &upv).unwrap();
        assert!((s.p_even[0] - want.p_even[0]).norm() < 1e-9 * (1.0 + want.p_even[0].norm()));
        assert!((s.p_odd[0] - want.p_odd[0]).norm() < 1e-9 * (1.0 + want.p_odd[0].norm()));
    }

    #[test]
    fn mismatched_fibers_rejected() {
        let a = GroupoidElement::new(1, vec![c(2.0)], vec![c(3.0)], vec![c(-1.0)]);
        let b = GroupoidElement::new(1, vec![c(1.0)], vec![c(1.0)], vec![c(-1.0)]);
        assert!(matches!(add(&a, &b), Err(Error::ProjectionMismatch(_))));
        let d = GroupoidElement::new(1, vec![c(2.0)], vec![c(3.0)], vec![c(-0.5)]);
        assert!(matches!(add(&a, &d), Err(Error::ProjectionMismatch(_))));
    }
}
