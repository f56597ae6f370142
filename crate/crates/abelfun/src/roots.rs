use num_complex::Complex64;

use crate::error::{Error, Result};

/// Durand-Kerner simultaneous iteration for all roots of a complex polynomial.
///
/// `coeffs` are ascending (c[0] + c[1] x + ...). The leading coefficient must
/// be nonzero. Target accuracy 1e-14 relative to the root scale, 500-iteration cap.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() == 0.0 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|a| a / lead).collect();

    // Cauchy-style bound on the root modulus.
    let bound = 1.0
        + monic[..n]
            .iter()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max);

    let rot = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| bound * rot.powu(k as u32 + 1)).collect();

    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in monic.iter().rev() {
            acc = acc * x + a;
        }
        acc
    };

    let tol = 1e-14 * bound;
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // collided guesses: nudge and retry next sweep
                z[i] += Complex64::new(1e-6 * bound, 1e-6 * bound);
                max_step = f64::MAX;
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < tol {
            // one polishing sweep of Newton per root
            for zi in z.iter_mut() {
                let mut d = Complex64::new(0.0, 0.0);
                let mut v = Complex64::new(0.0, 0.0);
                for a in monic.iter().rev() {
                    d = d * *zi + v;
                    v = v * *zi + a;
                }
                if d.norm() > 0.0 {
                    *zi -= v / d;
                }
            }
            sort_roots(&mut z);
            return Ok(z);
        }
    }
    Err(Error::RootFindFailure)
}

/// Sort by (real part, imaginary part); the deterministic order used everywhere.
pub fn sort_roots(z: &mut [Complex64]) {
    z.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_known_roots() {
        // 4x^3 - 4x = 4(x+1)x(x-1)
        let c = [
            Complex64::new(0.0, 0.0),
            Complex64::new(-4.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(4.0, 0.0),
        ];
        let r = poly_roots(&c).unwrap();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn septic_integer_roots() {
        // 4 * prod (x - k), k = 1..7
        let mut c = vec![Complex64::new(4.0, 0.0)];
        for k in 1..=7 {
            let e = Complex64::new(k as f64, 0.0);
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * e;
            }
            c = next;
        }
        let r = poly_roots(&c).unwrap();
        for (got, want) in r.iter().zip(1..=7) {
            assert!((got - Complex64::new(want as f64, 0.0)).norm() < 1e-9);
        }
    }
}
