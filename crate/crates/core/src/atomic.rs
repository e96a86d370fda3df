//! Atomic decomposition over a truncated lattice.
//!
//! The sampling operator `T f = Σ_k A_k f(a_k) K_{a_k}`, `A_k = A_α(D_k)`, is
//! inverted by collocation at the lattice centers. In the unknowns
//! `h_k = √A_k g(a_k)` the system is Hermitian: `H h = b` with
//! `H_jk = √A_j K(a_j, a_k) √A_k` and `b_j = √A_j f(a_j)`. Its spectrum
//! follows that of `T` (near 1 on sampled analytic functions, near 0 on the
//! redundant directions of the lattice), and the ridge acts on it.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::kernels::{kernel_c, kernel_norm, pow_neg};
use crate::lattice::{CellMeasures, Lattice};
use crate::quadrature::{check_alpha, QuadratureGrid};

pub const DEFAULT_RIDGE: f64 = 1e-10;
/// Relative collocation residual above which a solve is flagged ill-conditioned.
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;
/// Reconstruction is checked on `|w| <= ROUND_TRIP_RADIUS`.
pub const ROUND_TRIP_RADIUS: f64 = 0.8;
pub const ROUND_TRIP_TOL: f64 = 1e-2;
const EXPORT_HEADER: &str = "# bergman-lab expansion v1";
const CHECK_RADII: usize = 16;
const CHECK_ANGLES: usize = 64;

/// Infimum of admissible atom exponents: `b > max{1, 1/p} + (α+1)/p`.
pub fn min_atom_exponent(p: f64, alpha: f64) -> f64 {
    1f64.max(1.0 / p) + (alpha + 1.0) / p
}

fn check_atom_params(b: f64, p: f64, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::param("p", p, "must be positive"));
    }
    let lo = min_atom_exponent(p, alpha);
    if !(b > lo) || !b.is_finite() {
        return Err(Error::param("b", b, "atoms need b > max(1, 1/p) + (alpha+1)/p"));
    }
    Ok(())
}

#[inline]
fn atom_c(a: Complex64, b: f64, p: f64, alpha: f64, w: Complex64) -> Complex64 {
    let e = (p * b - 2.0 - alpha) / p;
    (1.0 - a.norm_sqr()).powf(e) * pow_neg(Complex64::new(1.0, 0.0) - w * a.conj(), b)
}

/// `f_k(w) = (1-|a_k|²)^{(pb-2-α)/p} / (1 - w ā_k)^b`.
pub fn atom(lat: &Lattice, k: usize, b: f64, p: f64, alpha: f64, w: DiskPoint) -> Result<Complex64> {
    check_atom_params(b, p, alpha)?;
    let a = lat
        .centers()
        .get(k)
        .ok_or(Error::CellIndex {
            index: k,
            count: lat.len(),
        })?
        .value();
    Ok(atom_c(a, b, p, alpha, w.value()))
}

/// `(T f)(z) = Σ_k A_α(D_k) f(a_k) K_{a_k}(z)`, summed in lattice order.
pub fn sampling_apply<F>(lat: &Lattice, cells: &CellMeasures, f: F, z: DiskPoint) -> Result<Complex64>
where
    F: Fn(DiskPoint) -> Complex64,
{
    check_cells(lat, cells)?;
    let mut total = Complex64::new(0.0, 0.0);
    for (a, m) in lat.centers().iter().zip(&cells.values) {
        total += *m * f(*a) * kernel_c(a.value(), z.value(), cells.alpha);
    }
    Ok(total)
}

fn check_cells(lat: &Lattice, cells: &CellMeasures) -> Result<()> {
    check_alpha(cells.alpha)?;
    if cells.values.len() != lat.len() {
        return Err(Error::param(
            "cells",
            cells.values.len() as f64,
            "cell count does not match the lattice",
        ));
    }
    if let Some(m) = cells.values.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(Error::param("cells", *m, "cell measures must be positive"));
    }
    Ok(())
}

/// Spectral factorization of the collocation system for one lattice and weight.
#[derive(Debug, Clone)]
pub struct SamplingSolver {
    alpha: f64,
    reg: f64,
    centers: Vec<Complex64>,
    /// `√A_k`
    scale: Vec<f64>,
    gram: DMatrix<Complex64>,
    eigen: SymmetricEigen<Complex64, nalgebra::Dyn>,
}

/// Solution of the weighted system.
#[derive(Debug, Clone)]
pub struct WeightedSolution {
    /// `h_k = √A_k g(a_k)`.
    pub h: Vec<Complex64>,
    pub relative_residual: f64,
    pub ill_conditioned: bool,
}

impl SamplingSolver {
    pub fn new(lat: &Lattice, cells: &CellMeasures, reg: f64) -> Result<Self> {
        check_cells(lat, cells)?;
        let alpha = cells.alpha;
        if !(reg >= 0.0) || !reg.is_finite() {
            return Err(Error::param("reg", reg, "ridge parameter must be nonnegative"));
        }
        let centers: Vec<Complex64> = lat.centers().iter().map(|a| a.value()).collect();
        let n = centers.len();
        let scale: Vec<f64> = cells.values.iter().map(|m| m.sqrt()).collect();
        let gram = DMatrix::from_fn(n, n, |j, k| {
            let v = kernel_c(centers[k], centers[j], alpha) * (scale[j] * scale[k]);
            if j == k {
                Complex64::new(v.re, 0.0)
            } else {
                v
            }
        });
        let eigen = SymmetricEigen::new(gram.clone());
        Ok(SamplingSolver {
            alpha,
            reg,
            centers,
            scale,
            gram,
            eigen,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Eigenvalues of `H`, unordered.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen.eigenvalues.iter().copied().collect()
    }

    /// Ridge solve of `H h = b`: `min ‖H h - b‖² + reg ‖h‖²`.
    pub fn solve<F>(&self, f: F) -> Result<WeightedSolution>
    where
        F: Fn(DiskPoint) -> Complex64,
    {
        let b = DVector::from_iterator(
            self.len(),
            self.centers
                .iter()
                .zip(&self.scale)
                .map(|(a, s)| f(DiskPoint::interior(*a)) * *s),
        );
        if let Some(j) = b.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            let a = self.centers[j];
            return Err(Error::NonFiniteIntegrand {
                node: j,
                re: a.re,
                im: a.im,
            });
        }
        let v = &self.eigen.eigenvectors;
        let mut proj = v.ad_mul(&b);
        for (c, &lam) in proj.iter_mut().zip(self.eigen.eigenvalues.iter()) {
            let lam = lam.max(0.0);
            let d = lam * lam + self.reg;
            *c *= if d > 0.0 { lam / d } else { 0.0 };
        }
        let h = v * proj;
        let b_norm = b.norm();
        let relative_residual = if b_norm == 0.0 {
            0.0
        } else {
            (&self.gram * &h - &b).norm() / b_norm
        };
        Ok(WeightedSolution {
            h: h.iter().copied().collect(),
            relative_residual,
            ill_conditioned: relative_residual > RESIDUAL_THRESHOLD,
        })
    }
}

/// Sampled values `g(a_k)` of `g = T^{-1} f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledValues {
    pub values: Vec<Complex64>,
    pub relative_residual: f64,
    pub ill_conditioned: bool,
}

/// Solves `[T g](a_j) = f(a_j)` for `g(a_k)` by ridge-regularized collocation.
pub fn invert_sampling<F>(lat: &Lattice, cells: &CellMeasures, f: F, reg: f64) -> Result<SampledValues>
where
    F: Fn(DiskPoint) -> Complex64,
{
    let solver = SamplingSolver::new(lat, cells, reg)?;
    let sol = solver.solve(f)?;
    let values = sol.h.iter().zip(&solver.scale).map(|(h, s)| h / *s).collect();
    Ok(SampledValues {
        values,
        relative_residual: sol.relative_residual,
        ill_conditioned: sol.ill_conditioned,
    })
}

/// `f = Σ_k c_k f_k` with atoms at lattice centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicExpansion {
    pub r: f64,
    pub r_max: f64,
    pub centers: Vec<Complex64>,
    pub b: f64,
    pub p: f64,
    pub alpha: f64,
    pub coeffs: Vec<Complex64>,
    pub relative_residual: f64,
}

impl AtomicExpansion {
    /// The zero function on `lat`.
    pub fn zero(lat: &Lattice, p: f64, alpha: f64) -> Result<Self> {
        let b = 2.0 + alpha;
        check_atom_params(b, p, alpha)?;
        Ok(AtomicExpansion {
            r: lat.r(),
            r_max: lat.r_max(),
            centers: lat.centers().iter().map(|a| a.value()).collect(),
            b,
            p,
            alpha,
            coeffs: vec![Complex64::new(0.0, 0.0); lat.len()],
            relative_residual: 0.0,
        })
    }

    /// `(Σ |c_k|^p)^{1/p}`.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm().powf(self.p))
            .sum::<f64>()
            .powf(1.0 / self.p)
    }

    /// `Σ_{|a_k| <= radius} |c_k|^p`.
    pub fn truncated_coeff_sum(&self, radius: f64) -> f64 {
        self.centers
            .iter()
            .zip(&self.coeffs)
            .filter(|(a, _)| a.norm() <= radius)
            .map(|(_, c)| c.norm().powf(self.p))
            .sum()
    }

    /// Versioned text record: header, `p α b`, the lattice reference, then `k re im`.
    pub fn export(&self, lattice_ref: &str) -> String {
        let mut s = String::new();
        writeln!(s, "{EXPORT_HEADER}").unwrap();
        writeln!(s, "{:.16e} {:.16e} {:.16e}", self.p, self.alpha, self.b).unwrap();
        writeln!(s, "lattice {lattice_ref}").unwrap();
        for (k, c) in self.coeffs.iter().enumerate() {
            writeln!(s, "{k} {:.16e} {:.16e}", c.re, c.im).unwrap();
        }
        s
    }
}

/// Reusable decomposition for a fixed lattice, weight and ridge parameter.
#[derive(Debug, Clone)]
pub struct Decomposer {
    r: f64,
    r_max: f64,
    solver: SamplingSolver,
}

impl Decomposer {
    /// Computes cell measures on [`Lattice::measure_grid`] and factors the system.
    pub fn new(lat: &Lattice, alpha: f64, reg: f64) -> Result<Self> {
        let cells = lat.cell_measures(alpha, &lat.measure_grid(alpha)?)?;
        Self::with_cells(lat, &cells, reg)
    }

    pub fn with_cells(lat: &Lattice, cells: &CellMeasures, reg: f64) -> Result<Self> {
        Ok(Decomposer {
            r: lat.r(),
            r_max: lat.r_max(),
            solver: SamplingSolver::new(lat, cells, reg)?,
        })
    }

    pub fn solver(&self) -> &SamplingSolver {
        &self.solver
    }

    /// Expansion in atoms with `b = 2+α`; requires `p > 1`.
    pub fn decompose<F>(&self, f: F, p: f64) -> Result<AtomicExpansion>
    where
        F: Fn(DiskPoint) -> Complex64,
    {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::param("p", p, "decomposition needs p > 1"));
        }
        let alpha = self.solver.alpha;
        let sol = self.solver.solve(f)?;
        if sol.ill_conditioned {
            return Err(Error::IllConditioned {
                relative_residual: sol.relative_residual,
                threshold: RESIDUAL_THRESHOLD,
            });
        }
        // c_k = A_k g(a_k) / (1-|a_k|²)^{(p-1)(2+α)/p}
        let e = (p - 1.0) * (2.0 + alpha) / p;
        let coeffs = sol
            .h
            .iter()
            .zip(&self.solver.scale)
            .zip(&self.solver.centers)
            .map(|((h, s), a)| h * *s / (1.0 - a.norm_sqr()).powf(e))
            .collect();
        Ok(AtomicExpansion {
            r: self.r,
            r_max: self.r_max,
            centers: self.solver.centers.clone(),
            b: 2.0 + alpha,
            p,
            alpha,
            coeffs,
            relative_residual: sol.relative_residual,
        })
    }
}

/// One-off [`Decomposer::decompose`] with the default ridge.
pub fn decompose<F>(lat: &Lattice, f: F, p: f64, alpha: f64) -> Result<AtomicExpansion>
where
    F: Fn(DiskPoint) -> Complex64,
{
    Decomposer::new(lat, alpha, DEFAULT_RIDGE)?.decompose(f, p)
}

/// `Σ_k c_k f_k(w)` in lattice order.
pub fn reconstruct(exp: &AtomicExpansion, w: DiskPoint) -> Complex64 {
    let w = w.value();
    exp.centers
        .iter()
        .zip(&exp.coeffs)
        .map(|(a, c)| c * atom_c(*a, exp.b, exp.p, exp.alpha, w))
        .sum()
}

/// Polar check points filling `|w| <= radius`.
pub fn check_points(radius: f64) -> Vec<DiskPoint> {
    let mut pts = vec![DiskPoint::ORIGIN];
    for i in 1..=CHECK_RADII {
        let rho = radius * i as f64 / CHECK_RADII as f64;
        for j in 0..CHECK_ANGLES {
            // offset by half a step on alternate rings
            let t = TAU * (j as f64 + 0.5 * (i % 2) as f64) / CHECK_ANGLES as f64;
            pts.push(DiskPoint::interior(Complex64::from_polar(rho, t)));
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub radius: f64,
    pub max_abs_error: f64,
    pub max_abs_f: f64,
    /// `max |f - Σ c_k f_k| / max |f|` over [`check_points`].
    pub relative_error: f64,
    pub relative_residual: f64,
    pub coeff_norm: f64,
    pub pass: bool,
}

/// Compares an expansion with `f` off the lattice, on `|w| <= radius`.
pub fn round_trip<F>(exp: &AtomicExpansion, f: F, radius: f64) -> RoundTrip
where
    F: Fn(DiskPoint) -> Complex64,
{
    let mut max_err: f64 = 0.0;
    let mut max_f: f64 = 0.0;
    for w in check_points(radius) {
        let fw = f(w);
        max_f = max_f.max(fw.norm());
        max_err = max_err.max((reconstruct(exp, w) - fw).norm());
    }
    let relative_error = if max_f > 0.0 { max_err / max_f } else { max_err };
    RoundTrip {
        radius,
        max_abs_error: max_err,
        max_abs_f: max_f,
        relative_error,
        relative_residual: exp.relative_residual,
        coeff_norm: exp.coeff_norm(),
        pass: relative_error <= ROUND_TRIP_TOL && exp.relative_residual <= RESIDUAL_THRESHOLD,
    }
}

/// `S_n = Σ_{|a_k| <= R} |c_{k,n}|^p` for `f_n = K_{z_n} / ‖K_{z_n}‖_{p,α}`.
pub fn weak_null_coeff_decay(lat: &Lattice, p: f64, alpha: f64, z_seq: &[DiskPoint], radius: f64) -> Result<Vec<f64>> {
    let dec = Decomposer::new(lat, alpha, DEFAULT_RIDGE)?;
    z_seq
        .iter()
        .map(|&z| {
            let norm = kernel_norm(z, p, alpha, &QuadratureGrid::focused(alpha, z.modulus())?)?;
            let zc = z.value();
            let exp = dec.decompose(|w| kernel_c(zc, w.value(), alpha) / norm, p)?;
            Ok(exp.truncated_coeff_sum(radius))
        })
        .collect()
}
