//! Möbius transformations and the half-plane/disk frame change used when
//! restating half-plane quantities on the unit circle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// z ↦ (a z + b)/(c z + d) with ad − bc ≠ 0. Composition and inversion act
/// on the coefficients exactly; only `apply` does floating-point division.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusTransform {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = MobiusTransform { a, b, c, d };
        if m.det().norm() == 0.0 {
            return Err(Error::GeometryInvalid(
                "Möbius coefficients are singular (ad − bc = 0)".into(),
            ));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        MobiusTransform {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// (self ∘ rhs)(z) = self(rhs(z)); the coefficient matrices multiply.
    pub fn compose(&self, rhs: &Self) -> Self {
        MobiusTransform {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn inverse(&self) -> Self {
        MobiusTransform {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }
}

/// Change of frame from the upper half-plane to the unit disk adapted to a
/// base point z_j with |1 − z_j| = 1, Im z_j > 0:
///
///   w = e^{iθ} (z + 1 − z_j) / ((z + 1) − conj(z_j)).
///
/// The real line maps onto the unit circle (numerator and denominator are
/// conjugate there) and z_j − 1 ∈ ℍ maps to 0, so the upper half-plane maps
/// onto the open disk. Returns the transform together with its exact inverse.
pub fn halfplane_disk(z_j: Complex64, theta: f64) -> Result<(MobiusTransform, MobiusTransform)> {
    if z_j.im.is_nan() || z_j.im <= 0.0 {
        return Err(Error::InvalidParameter(
            "base point must lie in the open upper half-plane".into(),
        ));
    }
    if ((Complex64::new(1.0, 0.0) - z_j).norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "base point must satisfy |1 − z_j| = 1".into(),
        ));
    }
    let rot = Complex64::from_polar(1.0, theta);
    let one = Complex64::new(1.0, 0.0);
    let fwd = MobiusTransform::new(rot, rot * (one - z_j), one, one - z_j.conj())?;
    let inv = fwd.inverse();
    Ok((fwd, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base_point(phi: f64) -> Complex64 {
        // |1 − z| = 1 parametrized as z = 1 − e^{iφ}, upper half for φ ∈ (π, 2π).
        Complex64::new(1.0 - phi.cos(), -phi.sin())
    }

    #[test]
    fn real_axis_lands_on_the_unit_circle() {
        let zj = base_point(4.0);
        let (fwd, _) = halfplane_disk(zj, 0.7).unwrap();
        for k in -50..=50 {
            let x = Complex64::new(k as f64 * 0.8, 0.0);
            let w = fwd.apply(x);
            assert!((w.norm() - 1.0).abs() < 1e-12, "|w| = {}", w.norm());
        }
    }

    #[test]
    fn inverse_after_forward_is_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let zj = base_point(3.5);
        let (fwd, inv) = halfplane_disk(zj, -1.3).unwrap();
        for _ in 0..1000 {
            let z = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(1e-3..5.0));
            let back = inv.apply(fwd.apply(z));
            assert!((back - z).norm() < 1e-12);
        }
    }

    #[test]
    fn image_of_i_matches_the_direct_formula() {
        let zj = base_point(4.4);
        let theta = 0.25;
        let (fwd, _) = halfplane_disk(zj, theta).unwrap();
        let z = Complex64::i();
        let direct = Complex64::from_polar(1.0, theta) * (z + Complex64::new(1.0, 0.0) - zj)
            / (z + Complex64::new(1.0, 0.0) - zj.conj());
        assert!((fwd.apply(z) - direct).norm() < 1e-15);
        assert!(direct.norm() < 1.0, "interior point must map inside the disk");
    }

    #[test]
    fn composition_and_inversion_are_exact_on_coefficients() {
        let m = MobiusTransform::new(
            Complex64::new(2.0, 1.0),
            Complex64::new(0.5, -3.0),
            Complex64::new(1.0, 0.25),
            Complex64::new(-1.0, 2.0),
        )
        .unwrap();
        let id = m.compose(&m.inverse());
        // m ∘ m⁻¹ is det(m)·identity on coefficients.
        let det = m.det();
        assert_eq!(id.a, det);
        assert_eq!(id.d, det);
        assert_eq!(id.b, Complex64::new(0.0, 0.0));
        assert_eq!(id.c, Complex64::new(0.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            assert!((id.apply(z) - z).norm() < 1e-13);
        }
    }

    #[test]
    fn degenerate_coefficients_are_rejected() {
        let two = Complex64::new(2.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        assert!(MobiusTransform::new(two, two, one, one).is_err());
        assert!(halfplane_disk(Complex64::new(0.3, -0.1), 0.0).is_err());
        assert!(halfplane_disk(Complex64::new(5.0, 2.0), 0.0).is_err());
    }
}
