use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest argument accepted by [`gamma`].
pub const GAMMA_MAX_ARG: f64 = 60.0;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `0 < x <= 60`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::param("x", x, "gamma is defined here for x > 0 only"));
    }
    if !(x <= GAMMA_MAX_ARG) {
        return Err(Error::param("x", x, "gamma argument above 60"));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    // exact for small integers
    if x == x.trunc() && x <= 23.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let y = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(y + 0.5) * (-t).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn integer_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(2.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        let mut fact = 1.0f64;
        for n in 1..60 {
            // Γ(n+1) = n!
            fact *= n as f64;
            assert_relative_eq!(gamma(n as f64 + 1.0).unwrap(), fact, max_relative = 1e-12);
        }
    }

    #[test]
    fn half_integer_values() {
        let sqrt_pi = PI.sqrt();
        assert_relative_eq!(gamma(0.5).unwrap(), sqrt_pi, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5).unwrap(), sqrt_pi / 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5).unwrap(), 0.886_226_925_452_758, max_relative = 1e-14);
        // Γ(n + 1/2) = (2n)! / (4^n n!) √π
        let mut v = sqrt_pi;
        for n in 1..55 {
            v *= n as f64 - 0.5;
            assert_relative_eq!(gamma(n as f64 + 0.5).unwrap(), v, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(gamma(60.5).is_err());
        assert!(gamma(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn recursion(x in 0.1..50.0f64) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs());
        }

        #[test]
        fn reflection(x in 0.01..0.99f64) {
            let prod = gamma(x).unwrap() * gamma(1.0 - x).unwrap();
            prop_assert!((prod * (PI * x).sin() / PI - 1.0).abs() < 1e-13);
        }
    }
}
