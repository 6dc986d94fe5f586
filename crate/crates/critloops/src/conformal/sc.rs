//! Schwarz–Christoffel map of the unit disk onto the square [−1,1]², kept as
//! an independent oracle for checking the general mapping engine.
//!
//! With prevertices at the four roots of z⁴ = −1 the product over corner
//! factors collapses to (1 + t⁴)^{1/2}, so the map is
//!
//!   f(z) = √2 / K · ∫₀^z (1 + t⁴)^{−1/2} dt,   K = ∫₀^1 (1 − r⁴)^{−1/2} dr,
//!
//! sending 0 ↦ 0 with f′(0) = √2/K > 0 and e^{iπ/4}·i^k to the corners.

use std::sync::OnceLock;

use num_complex::Complex64;

fn simpson_step(a: f64, fa: Complex64, b: f64, fb: Complex64, fm: Complex64) -> Complex64 {
    (fa + 4.0 * fm + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fb: Complex64,
    fm: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_step(a, fa, m, fm, flm);
    let right = simpson_step(m, fm, b, fb, frm);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of a complex-valued integrand on [a, b].
pub(crate) fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson_step(a, fa, b, fb, fm);
    adaptive(&f, a, b, fa, fb, fm, whole, tol, 40)
}

/// K = ∫₀¹ (1 − r⁴)^{−1/2} dr, computed with the substitution r = 1 − u²
/// which removes the endpoint singularity.
fn quarter_period() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| {
        integrate(
            |u| {
                let r = 1.0 - u * u;
                let den = (1.0 - r * r * r * r).sqrt();
                if den == 0.0 {
                    // u = 0 limit: 1 − r⁴ ≈ 4u², so 2u/√(1−r⁴) → 1
                    return Complex64::new(1.0, 0.0);
                }
                Complex64::new(2.0 * u / den, 0.0)
            },
            0.0,
            1.0,
            1e-13,
        )
        .re
    })
}

/// Disk → square [−1,1]², normalized with f(0) = 0 and f′(0) > 0.
/// Defined for |z| < 1.
pub(crate) fn square_map(z: Complex64) -> Complex64 {
    let scale = std::f64::consts::SQRT_2 / quarter_period();
    let path = integrate(
        |t| {
            let w = t * z;
            let w4 = w * w * w * w;
            z / (Complex64::new(1.0, 0.0) + w4).sqrt()
        },
        0.0,
        1.0,
        1e-12,
    );
    scale * path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_map_to_corners() {
        // Approach the prevertex radially; the image tends to the corner 1+i.
        let corner = Complex64::new(1.0, 1.0);
        let z = Complex64::from_polar(1.0 - 1e-9, std::f64::consts::FRAC_PI_4);
        let img = square_map(z);
        assert!(
            (img - corner).norm() < 2e-4,
            "image {img} vs corner {corner}"
        );
    }

    #[test]
    fn quarter_rotation_symmetry() {
        for &z in &[
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.5, 0.45),
            Complex64::new(0.05, -0.8),
        ] {
            let a = square_map(z * Complex64::i());
            let b = square_map(z) * Complex64::i();
            assert!((a - b).norm() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_at_the_origin_is_real_positive() {
        let h = 1e-6;
        let d = (square_map(Complex64::new(h, 0.0)) - square_map(Complex64::new(-h, 0.0)))
            / Complex64::new(2.0 * h, 0.0);
        assert!(d.im.abs() < 1e-9);
        assert!(d.re > 1.0, "f'(0) = √2/K ≈ 1.078");
        assert!((d.re - std::f64::consts::SQRT_2 / quarter_period()).abs() < 1e-8);
    }

    #[test]
    fn images_stay_inside_the_square() {
        for k in 0..60 {
            let th = k as f64 * 0.21;
            let z = Complex64::from_polar(0.93, th);
            let w = square_map(z);
            assert!(w.re.abs() <= 1.0 + 1e-9 && w.im.abs() <= 1.0 + 1e-9, "{w}");
        }
    }
}
