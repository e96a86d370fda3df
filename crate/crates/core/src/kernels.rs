//! Reproducing kernels `K_z(w) = (1 - z̄w)^{-(2+α)}`, their normalizations and norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::quadrature::{check_alpha, gamma, QuadratureGrid};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `d^{-s}` on the principal branch.
///
/// Callers pass `d = 1 - z̄w` with `|z̄w| < 1`, so `Re d > 0` and the
/// logarithm never meets its branch cut.
#[inline]
pub(crate) fn pow_neg(d: Complex64, s: f64) -> Complex64 {
    debug_assert!(d.re > 0.0, "1 - z̄w left the right half-plane: {d}");
    if s == s.trunc() && s.abs() <= 32.0 {
        d.inv().powi(s as i32)
    } else {
        (-s * d.ln()).exp()
    }
}

/// `K_z(w)` on raw values.
#[inline]
pub fn kernel_c(z: Complex64, w: Complex64, alpha: f64) -> Complex64 {
    pow_neg(ONE - z.conj() * w, 2.0 + alpha)
}

/// `(1 - |z|²)^{(2+α)/2}`, the factor turning `K_z` into `k_z`.
#[inline]
pub fn normalizer(z: Complex64, alpha: f64) -> f64 {
    (1.0 - z.norm_sqr()).powf(0.5 * (2.0 + alpha))
}

/// `k_z(w)` on raw values.
#[inline]
pub fn normalized_kernel_c(z: Complex64, w: Complex64, alpha: f64) -> Complex64 {
    kernel_c(z, w, alpha) * normalizer(z, alpha)
}

/// `K_z(w) = (1 - z̄w)^{-(2+α)}`.
pub fn kernel(z: DiskPoint, w: DiskPoint, alpha: f64) -> Complex64 {
    kernel_c(z.value(), w.value(), alpha)
}

/// `k_z(w) = (1 - |z|²)^{(2+α)/2} K_z(w)`, of unit norm in `L²_a(dA_α)`.
pub fn normalized_kernel(z: DiskPoint, w: DiskPoint, alpha: f64) -> Complex64 {
    normalized_kernel_c(z.value(), w.value(), alpha)
}

/// A kernel `K_z` for a fixed weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub z: DiskPoint,
    pub alpha: f64,
}

impl KernelPoint {
    pub fn new(z: DiskPoint, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(KernelPoint { z, alpha })
    }

    pub fn eval(&self, w: DiskPoint) -> Complex64 {
        kernel(self.z, w, self.alpha)
    }

    pub fn eval_normalized(&self, w: DiskPoint) -> Complex64 {
        normalized_kernel(self.z, w, self.alpha)
    }
}

/// `‖K_z‖_{p,α}` by quadrature on `grid`.
///
/// For `|z|` near 1 the integrand peaks sharply at `z/|z|`; use
/// [`QuadratureGrid::focused`] there.
pub fn kernel_norm(z: DiskPoint, p: f64, alpha: f64, grid: &QuadratureGrid) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::param("p", p, "must be positive"));
    }
    check_grid_alpha(grid, alpha)?;
    let zc = z.value();
    let e = -0.5 * p * (2.0 + alpha);
    let v = grid.integrate_real_values(
        &grid
            .nodes()
            .map(|w| (ONE - zc.conj() * w).norm_sqr().powf(e))
            .collect::<Vec<_>>(),
    )?;
    Ok(v.powf(1.0 / p))
}

pub(crate) fn check_grid_alpha(grid: &QuadratureGrid, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if grid.alpha() != alpha {
        return Err(Error::param("alpha", alpha, "does not match the grid weight"));
    }
    Ok(())
}

/// Two-sided bounds on `‖K_z‖_{p,α}` for `p > 1`:
/// `(1-|z|²)^{-(p-1)(2+α)/p}` below and
/// `[Γ(2+α)Γ(c) / Γ((2+α+c)/2)² · (1-|z|²)^{-c}]^{1/p}` above, `c = (p-1)(2+α)`.
pub fn kernel_norm_bounds(z: DiskPoint, p: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::param("p", p, "kernel norm bounds need p > 1"));
    }
    let c = (p - 1.0) * (2.0 + alpha);
    let one_minus = 1.0 - z.norm_sqr();
    let lower = one_minus.powf(-c / p);
    let constant = gamma(2.0 + alpha)? * gamma(c)? / gamma(0.5 * (2.0 + alpha + c))?.powi(2);
    let upper = (constant * one_minus.powf(-c)).powf(1.0 / p);
    Ok((lower, upper))
}

/// `γ_n = ‖wⁿ‖²_{2,α} = Γ(n+1)Γ(α+2)/Γ(n+α+2)`.
pub fn monomial_norm_sq(n: usize, alpha: f64) -> f64 {
    // product form avoids Γ overflow for large n
    (1..=n).fold(1.0, |acc, j| acc * j as f64 / (j as f64 + alpha + 1.0))
}

/// `[γ_0, …, γ_{n-1}]`.
pub fn monomial_norms_sq(n: usize, alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut g = 1.0;
    for j in 0..n {
        if j > 0 {
            g *= j as f64 / (j as f64 + alpha + 1.0);
        }
        out.push(g);
    }
    out
}
