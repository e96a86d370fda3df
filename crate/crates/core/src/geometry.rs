//! Möbius maps, the pseudo-hyperbolic and Bergman metrics, and Bergman disks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points at or beyond this modulus are rejected.
pub const MAX_MODULUS: f64 = 1.0 - 1e-15;

/// Pseudo-hyperbolic distances above this saturate the Bergman metric to `+inf`.
pub const RHO_SATURATION: f64 = 1.0 - 1e-15;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        let modulus = z.norm();
        if !(modulus < MAX_MODULUS) {
            return Err(Error::OutsideDisk {
                re: z.re,
                im: z.im,
                modulus,
            });
        }
        Ok(DiskPoint(z))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(x, 0.0)
    }

    pub fn polar(radius: f64, angle: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar(radius, angle))
    }

    /// Wraps a value already known to be interior (e.g. the image of an
    /// interior point under a disk automorphism).
    pub(crate) fn interior(z: Complex64) -> Self {
        debug_assert!(z.norm() < 1.0, "{z} is not interior");
        DiskPoint(z)
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.0.norm()
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        DiskPoint::from_complex(z)
    }
}

/// A Euclidean disk contained in the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl EuclideanDisk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::param("radius", radius, "must be positive"));
        }
        if center.norm() + radius > 1.0 + 1e-12 {
            return Err(Error::param("radius", radius, "disk must lie in the closed unit disk"));
        }
        Ok(EuclideanDisk { center, radius })
    }

    pub fn contains(&self, w: Complex64) -> bool {
        (w - self.center).norm() < self.radius
    }
}

/// `φ_z(w) = (z - w) / (1 - z̄ w)` on raw complex values.
#[inline]
pub fn mobius_c(z: Complex64, w: Complex64) -> Complex64 {
    (z - w) / (Complex64::new(1.0, 0.0) - z.conj() * w)
}

/// The involutive disk automorphism exchanging `0` and `z`.
pub fn mobius(z: DiskPoint, w: DiskPoint) -> DiskPoint {
    DiskPoint::interior(mobius_c(z.0, w.0))
}

/// `1 - |φ_z(w)|^2`, computed without cancellation.
#[inline]
pub fn one_minus_rho_sq(z: Complex64, w: Complex64) -> f64 {
    let d = (Complex64::new(1.0, 0.0) - z.conj() * w).norm_sqr();
    (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()) / d
}

pub fn pseudo_hyperbolic(z: DiskPoint, w: DiskPoint) -> f64 {
    pseudo_hyperbolic_c(z.0, w.0)
}

#[inline]
pub(crate) fn pseudo_hyperbolic_c(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm() / (Complex64::new(1.0, 0.0) - z * w.conj()).norm()
}

/// Bergman metric `½ log((1+ρ)/(1-ρ))`; saturates to `+inf` as `ρ → 1`.
pub fn bergman_metric(z: DiskPoint, w: DiskPoint) -> f64 {
    bergman_metric_c(z.0, w.0)
}

#[inline]
pub(crate) fn bergman_metric_c(z: Complex64, w: Complex64) -> f64 {
    let rho = pseudo_hyperbolic_c(z, w);
    if rho > RHO_SATURATION {
        return f64::INFINITY;
    }
    // (1+ρ)/(1-ρ) = (1+ρ)^2 / (1-ρ^2)
    let q = one_minus_rho_sq(z, w);
    if q <= 0.0 {
        return f64::INFINITY;
    }
    0.5 * ((1.0 + rho) * (1.0 + rho) / q).ln()
}

/// Bergman distance from the origin, `atanh |w|`.
#[inline]
pub(crate) fn hyperbolic_radius(modulus: f64) -> f64 {
    modulus.atanh()
}

/// The Bergman disk `D(a, r)` as a Euclidean disk.
pub fn bergman_disk(a: DiskPoint, r: f64) -> Result<EuclideanDisk> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param("r", r, "must be positive and finite"));
    }
    let s = r.tanh();
    let a2 = a.norm_sqr();
    let denom = 1.0 - s * s * a2;
    let center = a.0 * ((1.0 - s * s) / denom);
    let radius = (1.0 - a2) / denom * s;
    Ok(EuclideanDisk { center, radius })
}

/// `(s + x) / (1 + s x)`, the outer Euclidean reach `|c₀| + r₀` of `D(a, r)` with `|a| = x`.
pub fn disk_reach(s: f64, x: f64) -> f64 {
    (s + x) / (1.0 + s * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn construction_rejects_boundary() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.0, -1.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
        assert!(DiskPoint::new(0.999_999, 0.0).is_ok());
    }

    #[test]
    fn mobius_examples() {
        assert_abs_diff_eq!(mobius(p(0.5, 0.0), p(0.0, 0.0)).value().re, 0.5);
        assert_abs_diff_eq!(mobius(p(0.5, 0.0), p(0.5, 0.0)).modulus(), 0.0);
        let v = mobius(p(0.5, 0.0), p(0.25, 0.0)).value();
        assert_abs_diff_eq!(v.re, 0.25 / 0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(v.re, 0.285_714_285_714_285_7, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0);
    }

    #[test]
    fn pseudo_hyperbolic_examples() {
        assert_abs_diff_eq!(pseudo_hyperbolic(p(0.0, 0.0), p(0.6, 0.0)), 0.6);
        assert_abs_diff_eq!(pseudo_hyperbolic(p(0.3, 0.2), p(0.3, 0.2)), 0.0);
        let expected = 0.559_016_994_374_947_4 / 1.007_782_218_537_318_7;
        assert_abs_diff_eq!(pseudo_hyperbolic(p(0.5, 0.0), p(0.0, 0.25)), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.554_700, epsilon = 1e-6);
    }

    #[test]
    fn bergman_metric_examples() {
        assert_abs_diff_eq!(
            bergman_metric(p(0.0, 0.0), p(0.6, 0.0)),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        assert_eq!(bergman_metric(p(0.1, -0.7), p(0.1, -0.7)), 0.0);
    }

    #[test]
    fn bergman_metric_saturates() {
        let a = p(1.0 - 2e-15, 0.0);
        let b = p(-(1.0 - 2e-15), 0.0);
        assert_eq!(bergman_metric(a, b), f64::INFINITY);
    }

    #[test]
    fn bergman_disk_examples() {
        let d = bergman_disk(DiskPoint::ORIGIN, 0.7).unwrap();
        assert_abs_diff_eq!(d.center.norm(), 0.0);
        assert_abs_diff_eq!(d.radius, 0.7f64.tanh(), epsilon = 1e-15);

        let d = bergman_disk(p(0.5, 0.0), 0.5).unwrap();
        assert_abs_diff_eq!(d.center.re, 0.415_402, epsilon = 1e-6);
        assert_abs_diff_eq!(d.radius, 0.366_135, epsilon = 1e-6);

        let s = 0.5f64.tanh();
        let d = bergman_disk(p(0.9, 0.0), 0.5).unwrap();
        assert_abs_diff_eq!(d.center.norm() + d.radius, disk_reach(s, 0.9), epsilon = 1e-15);
        assert!(d.center.norm() + d.radius < 1.0);
        assert!(bergman_disk(p(0.9, 0.0), 0.0).is_err());
    }

    #[test]
    fn reach_is_increasing() {
        for si in 1..100 {
            let s = si as f64 / 100.0;
            let mut prev = disk_reach(s, 0.0);
            for xi in 1..1000 {
                let cur = disk_reach(s, xi as f64 / 1000.0);
                assert!(cur > prev, "s = {s}, x = {}", xi as f64 / 1000.0);
                prev = cur;
            }
        }
    }

    fn disk_point() -> impl Strategy<Value = DiskPoint> {
        (0.0..0.995f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| DiskPoint::polar(r, t).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn mobius_is_involution(z in disk_point(), w in disk_point()) {
            let back = mobius(z, mobius(z, w));
            prop_assert!((back.value() - w.value()).norm() < 1e-12);
        }

        #[test]
        fn modulus_identity(z in disk_point(), w in disk_point()) {
            let lhs = 1.0 - mobius(z, w).norm_sqr();
            let rhs = one_minus_rho_sq(z.value(), w.value());
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn metric_is_symmetric(z in disk_point(), w in disk_point()) {
            prop_assert_eq!(pseudo_hyperbolic(z, w), pseudo_hyperbolic(w, z));
            let (a, b) = (bergman_metric(z, w), bergman_metric(w, z));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            prop_assert!((pseudo_hyperbolic(z, w) - mobius(z, w).modulus()).abs() < 1e-12);
        }

        #[test]
        fn metric_is_mobius_invariant(a in disk_point(), z in disk_point(), w in disk_point()) {
            prop_assume!(a.modulus() < 0.9 && z.modulus() < 0.9 && w.modulus() < 0.9);
            let before = bergman_metric(z, w);
            let after = bergman_metric(mobius(a, z), mobius(a, w));
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn ball_descriptions_agree(a in disk_point(), w in disk_point(), r in 0.05..2.0f64) {
            let disk = bergman_disk(a, r).unwrap();
            let beta = bergman_metric(a, w);
            // skip samples numerically on the boundary circle
            prop_assume!((beta - r).abs() > 1e-9);
            prop_assert_eq!(beta < r, disk.contains(w.value()));
        }
    }
}
