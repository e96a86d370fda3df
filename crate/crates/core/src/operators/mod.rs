//! Concrete operators `S` described well enough to evaluate `(S K_z)(w)`, the
//! conjugations `S_z = U_z S U_z`, `S_z 1`, its norms, and the Berezin transform.

mod polar;
mod spec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mobius_c, DiskPoint};
use crate::kernels::{check_grid_alpha, kernel_c, normalized_kernel_c, normalizer};
use crate::quadrature::QuadratureGrid;

pub use polar::kernel_image_on_grid;
pub use spec::{
    diagonal_tail_bound, AnalyticFn, KernelFn, NamedFn, OperatorSpec, Sequence, SequenceFn, Symbol, SymbolFn,
    Truncation, DEFAULT_DIAGONAL_TRUNCATION, DIAGONAL_RESTRICTED_MODULUS,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(S K_z)(w)`.
///
/// Toeplitz and integral-kernel operators integrate on `grid`, which should
/// resolve kernels at both `z` and `w` (see [`QuadratureGrid::focused`]).
pub fn apply_to_kernel(
    s: &OperatorSpec,
    z: DiskPoint,
    w: DiskPoint,
    alpha: f64,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    check_grid_alpha(grid, alpha)?;
    apply_to_kernel_c(s, z.value(), w.value(), alpha, grid)
}

pub(crate) fn apply_to_kernel_c(
    s: &OperatorSpec,
    z: Complex64,
    w: Complex64,
    alpha: f64,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    match s {
        OperatorSpec::Identity => Ok(kernel_c(z, w, alpha)),
        OperatorSpec::Toeplitz(phi) => {
            // ⟨φ K_z, K_w⟩
            let vals: Vec<Complex64> = grid
                .nodes()
                .map(|u| phi.eval(u) * kernel_c(z, u, alpha) * kernel_c(w, u, alpha).conj())
                .collect();
            grid.integrate_values(&vals)
        }
        OperatorSpec::Diagonal { lambda, truncation } => {
            let x = z.norm() * w.norm();
            let n = truncation.resolve(lambda, x, z.norm(), w.norm(), alpha)?;
            let zw = z.conj() * w;
            let mut power = ONE;
            let mut g = 1.0;
            let mut total = Complex64::new(0.0, 0.0);
            for k in 0..=n {
                if k > 0 {
                    g *= k as f64 / (k as f64 + alpha + 1.0);
                    power *= zw;
                }
                total += power * (lambda.checked(k)? / g);
            }
            Ok(total)
        }
        OperatorSpec::FiniteRank(terms) => Ok(terms.iter().map(|(g, h)| g.eval(z).conj() * h.eval(w)).sum()),
        OperatorSpec::IntegralKernel { h, .. } => {
            let vals: Vec<Complex64> = grid.nodes().map(|u| h(w, u) * kernel_c(z, u, alpha)).collect();
            grid.integrate_values(&vals)
        }
        OperatorSpec::Combination(parts) => {
            let mut total = Complex64::new(0.0, 0.0);
            for (c, part) in parts {
                total += c * apply_to_kernel_c(part, z, w, alpha, grid)?;
            }
            Ok(total)
        }
    }
}

/// `(U_z f)(w) = f(φ_z(w)) k_z(w)`.
pub fn u_z_apply<F>(z: DiskPoint, f: F, w: DiskPoint, alpha: f64) -> Complex64
where
    F: Fn(DiskPoint) -> Complex64,
{
    let (zc, wc) = (z.value(), w.value());
    f(DiskPoint::interior(mobius_c(zc, wc))) * normalized_kernel_c(zc, wc, alpha)
}

/// `S_z = U_z S U_z` for a fixed `z`.
#[derive(Debug, Clone)]
pub struct ConjugatedOperator {
    pub base: OperatorSpec,
    pub z: DiskPoint,
}

impl ConjugatedOperator {
    pub fn new(base: OperatorSpec, z: DiskPoint) -> Self {
        ConjugatedOperator { base, z }
    }

    /// `(S_z 1)(w)`.
    pub fn apply_to_one(&self, w: DiskPoint, alpha: f64, grid: &QuadratureGrid) -> Result<Complex64> {
        s_z_one(&self.base, self.z, w, alpha, grid)
    }
}

/// `(S_z 1)(w) = (S k_z)(φ_z(w)) k_z(w)`.
pub fn s_z_one(s: &OperatorSpec, z: DiskPoint, w: DiskPoint, alpha: f64, grid: &QuadratureGrid) -> Result<Complex64> {
    check_grid_alpha(grid, alpha)?;
    let (zc, wc) = (z.value(), w.value());
    let v = mobius_c(zc, wc);
    let sk = normalizer(zc, alpha) * apply_to_kernel_c(s, zc, v, alpha, grid)?;
    Ok(sk * normalized_kernel_c(zc, wc, alpha))
}

/// `S K_z` sampled at every node of a grid, with the functionals built from it.
#[derive(Debug, Clone)]
pub struct KernelImage {
    z: DiskPoint,
    alpha: f64,
    grid: QuadratureGrid,
    values: Vec<Complex64>,
}

impl KernelImage {
    pub fn compute(s: &OperatorSpec, z: DiskPoint, alpha: f64, grid: &QuadratureGrid) -> Result<Self> {
        let values = kernel_image_on_grid(s, z, alpha, grid)?;
        Ok(KernelImage {
            z,
            alpha,
            grid: grid.clone(),
            values,
        })
    }

    pub fn z(&self) -> DiskPoint {
        self.z
    }

    /// `(S K_z)` at the grid nodes, in node order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `⟨S k_z, k_z⟩ = ∫ (S k_z) conj(k_z) dA_α`.
    pub fn berezin(&self) -> Result<Complex64> {
        let z = self.z.value();
        let c = normalizer(z, self.alpha);
        let vals: Vec<Complex64> = self
            .grid
            .nodes()
            .zip(&self.values)
            .map(|(v, sk)| c * sk * normalized_kernel_c(z, v, self.alpha).conj())
            .collect();
        self.grid.integrate_values(&vals)
    }

    /// `‖S_z 1‖_{m,α}`, via `∫|S_z1|^m dA_α = ∫ |S k_z|^m |k_z|^{2-m} dA_α`
    /// (substitute `w = φ_z(v)` and use `k_z(φ_z(v)) k_z(v) = 1`).
    pub fn s_z_one_norm(&self, m: f64) -> Result<f64> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::param("m", m, "must be positive"));
        }
        let z = self.z.value();
        let c = normalizer(z, self.alpha);
        let vals: Vec<f64> = self
            .grid
            .nodes()
            .zip(&self.values)
            .map(|(v, sk)| {
                let sk = c * sk.norm();
                if sk == 0.0 {
                    return 0.0;
                }
                let k = normalized_kernel_c(z, v, self.alpha).norm();
                sk.powf(m) * k.powf(2.0 - m)
            })
            .collect();
        Ok(self.grid.integrate_real_values(&vals)?.powf(1.0 / m))
    }

    /// Berezin value and `‖S_z 1‖_{t,α}` for each `t` in one pass over the grid.
    pub fn berezin_and_norms(&self, ts: &[f64]) -> Result<(Complex64, Vec<f64>)> {
        if let Some(&t) = ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::param("m", t, "must be positive"));
        }
        let z = self.z.value();
        let c = normalizer(z, self.alpha);
        let n = self.grid.len();
        let mut ber = Vec::with_capacity(n);
        let mut pows: Vec<Vec<f64>> = vec![Vec::with_capacity(n); ts.len()];
        for (v, sk) in self.grid.nodes().zip(&self.values) {
            let kz = normalized_kernel_c(z, v, self.alpha);
            let sk = c * sk;
            ber.push(sk * kz.conj());
            let a = sk.norm();
            let (ls, lk) = (a.ln(), kz.norm().ln());
            for (t, out) in ts.iter().zip(pows.iter_mut()) {
                out.push(if a == 0.0 { 0.0 } else { (t * ls + (2.0 - t) * lk).exp() });
            }
        }
        let b = self.grid.integrate_values(&ber)?;
        let norms = ts
            .iter()
            .zip(&pows)
            .map(|(t, vals)| Ok(self.grid.integrate_real_values(vals)?.powf(1.0 / t)))
            .collect::<Result<Vec<f64>>>()?;
        Ok((b, norms))
    }
}

/// `‖S_z 1‖_{m,α}` on `grid`.
pub fn s_z_one_norm(s: &OperatorSpec, z: DiskPoint, m: f64, alpha: f64, grid: &QuadratureGrid) -> Result<f64> {
    KernelImage::compute(s, z, alpha, grid)?.s_z_one_norm(m)
}

/// `S̃(z) = ⟨S k_z, k_z⟩` on `grid`.
pub fn berezin(s: &OperatorSpec, z: DiskPoint, alpha: f64, grid: &QuadratureGrid) -> Result<Complex64> {
    KernelImage::compute(s, z, alpha, grid)?.berezin()
}

/// Closed-form Berezin transform where one exists: `(1-|z|²)^{2+α} Σ λ_n |z|^{2n}/γ_n`
/// for diagonal operators, `(1-|z|²)^{2+α} Σ conj(g_i(z)) h_i(z)` for finite rank,
/// and 1 for the identity.
pub fn berezin_closed_form(s: &OperatorSpec, z: DiskPoint, alpha: f64) -> Result<Option<Complex64>> {
    let zc = z.value();
    let scale = (1.0 - z.norm_sqr()).powf(2.0 + alpha);
    Ok(match s {
        OperatorSpec::Identity => Some(ONE),
        OperatorSpec::Diagonal { .. } | OperatorSpec::FiniteRank(_) => {
            Some(scale * apply_to_kernel_c(s, zc, zc, alpha, &QuadratureGrid::new(alpha, 1, 8)?)?)
        }
        OperatorSpec::Combination(parts) => {
            let mut total = Complex64::new(0.0, 0.0);
            for (c, part) in parts {
                match berezin_closed_form(part, z, alpha)? {
                    Some(b) => total += c * b,
                    None => return Ok(None),
                }
            }
            Some(total)
        }
        OperatorSpec::Toeplitz(_) | OperatorSpec::IntegralKernel { .. } => None,
    })
}

/// Toeplitz Berezin transform as `∫ φ |k_z|² dA_α`, independent of the projection.
pub fn toeplitz_berezin_direct(phi: &Symbol, z: DiskPoint, alpha: f64, grid: &QuadratureGrid) -> Result<Complex64> {
    check_grid_alpha(grid, alpha)?;
    let zc = z.value();
    let vals: Vec<Complex64> = grid
        .nodes()
        .map(|u| phi.eval(u) * normalized_kernel_c(zc, u, alpha).norm_sqr())
        .collect();
    grid.integrate_values(&vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBound {
    pub lhs: f64,
    pub rhs: f64,
    pub s_z_one_norm: f64,
    pub pass: bool,
}

/// Compares `|S K_z(w)|` with
/// `‖S_z1‖_{m,α} (1-|z|²)^{-(2+α)/m} (1-|w|²)^{-(2+α)/m} / |1-z̄w|^{(1-2/m)(2+α)}`.
pub fn kernel_pointwise_bound_check(
    s: &OperatorSpec,
    z: DiskPoint,
    w: DiskPoint,
    m: f64,
    alpha: f64,
    grid: &QuadratureGrid,
) -> Result<PointwiseBound> {
    let lhs = apply_to_kernel(s, z, w, alpha, grid)?.norm();
    let norm = s_z_one_norm(s, z, m, alpha, grid)?;
    let e = (2.0 + alpha) / m;
    let d = (ONE - z.value().conj() * w.value()).norm();
    let rhs =
        norm * (1.0 - z.norm_sqr()).powf(-e) * (1.0 - w.norm_sqr()).powf(-e) / d.powf((1.0 - 2.0 / m) * (2.0 + alpha));
    Ok(PointwiseBound {
        lhs,
        rhs,
        s_z_one_norm: norm,
        pass: lhs <= rhs * (1.0 + 1e-4),
    })
}
