//! Deterministic integration over the unit disk against
//! `dA_α(w) = (α+1)(1-|w|²)^α dA(w)`.
//!
//! With `u = |w|²` the measure factors as `(α+1)(1-u)^α du · dθ/2π`. The
//! radial part is a Gauss-Jacobi rule on `(0, 1)` that absorbs `(1-u)^α`;
//! the angular part is the uniform trapezoid rule. Summation runs in node
//! order (radius outer, angle inner) so results are bit-reproducible.

mod gamma;
mod jacobi;

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;

pub use gamma::{gamma, GAMMA_MAX_ARG};
pub use jacobi::{cached_gauss_jacobi, gauss_jacobi, JacobiRule};

pub const DEFAULT_N_RAD: usize = 256;
pub const DEFAULT_N_ANG: usize = 512;
pub const ADAPTIVE_RAD_CAP: usize = 8192;
const ADAPTIVE_ANG_CAP: usize = 16384;
const ADAPTIVE_START: (usize, usize) = (32, 64);
/// Upper limit for grids chosen by [`QuadratureGrid::focused`].
pub const FOCUSED_ANG_CAP: usize = 16384;

/// Weight, integrability exponent and optional test exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub alpha: f64,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<f64>,
}

impl SpaceParams {
    pub fn new(alpha: f64, p: f64, m: Option<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::param("p", p, "must be positive"));
        }
        if let Some(m) = m {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::param("m", m, "must be positive"));
            }
        }
        Ok(SpaceParams { alpha, p, m })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", alpha, "must exceed -1"));
    }
    if alpha + 2.0 > GAMMA_MAX_ARG {
        return Err(Error::param("alpha", alpha, "too large"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    /// `u = |w|²`.
    pub u: f64,
    /// `1 - u`, kept separately for precision near the boundary.
    pub one_minus_u: f64,
    /// `|w|`.
    pub radius: f64,
    /// Weight of the rule for `(1-u)^α du`.
    pub weight: f64,
}

/// Tensor-product polar rule for `∫_𝔻 · dA_α`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    alpha: f64,
    radial: Arc<[RadialNode]>,
    unit_circle: Arc<[Complex64]>,
    r_max: Option<f64>,
}

impl QuadratureGrid {
    /// Gauss-Jacobi in `u = |w|²` times an `n_ang`-point trapezoid in angle.
    pub fn new(alpha: f64, n_rad: usize, n_ang: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_sizes(n_rad, n_ang)?;
        let rule = cached_gauss_jacobi(n_rad, alpha, 0.0)?;
        // x in [-1, 1] -> u = (1 + x) / 2; (1-u)^α = 2^{-α}(1-x)^α, du = dx/2
        let scale = 2f64.powf(-alpha - 1.0);
        let radial = rule
            .nodes
            .iter()
            .zip(&rule.one_minus)
            .zip(&rule.weights)
            .map(|((&x, &om), &w)| {
                let u = 0.5 * (1.0 + x);
                RadialNode {
                    u,
                    one_minus_u: 0.5 * om,
                    radius: u.sqrt(),
                    weight: w * scale,
                }
            })
            .collect();
        Ok(QuadratureGrid {
            alpha,
            radial,
            unit_circle: unit_circle(n_ang),
            r_max: None,
        })
    }

    pub fn default_for(alpha: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_N_RAD, DEFAULT_N_ANG)
    }

    /// Grid sized to resolve integrands that concentrate near a point of
    /// modulus `focus` (kernels `K_z`, `k_z` and their images): the angular
    /// count grows like `1/(1 - focus)`.
    pub fn focused(alpha: f64, focus: f64) -> Result<Self> {
        let (n_rad, n_ang) = focused_sizes(focus);
        Self::new(alpha, n_rad, n_ang)
    }

    /// Rule for `∫_{|w| <= r_max} · dA_α`: Gauss-Legendre in `u ∈ (0, r_max²)`
    /// with the (smooth, since `r_max < 1`) weight `(1-u)^α` folded into the weights.
    pub fn truncated(alpha: f64, r_max: f64, n_rad: usize, n_ang: usize) -> Result<Self> {
        check_alpha(alpha)?;
        check_sizes(n_rad, n_ang)?;
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::param("r_max", r_max, "must lie in (0, 1)"));
        }
        let rule = cached_gauss_jacobi(n_rad, 0.0, 0.0)?;
        let top = r_max * r_max;
        let radial = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| {
                let u = 0.5 * top * (1.0 + x);
                let one_minus_u = 1.0 - u;
                RadialNode {
                    u,
                    one_minus_u,
                    radius: u.sqrt(),
                    weight: 0.5 * top * w * one_minus_u.powf(alpha),
                }
            })
            .collect();
        Ok(QuadratureGrid {
            alpha,
            radial,
            unit_circle: unit_circle(n_ang),
            r_max: Some(r_max),
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn n_rad(&self) -> usize {
        self.radial.len()
    }

    #[inline]
    pub fn n_ang(&self) -> usize {
        self.unit_circle.len()
    }

    pub fn len(&self) -> usize {
        self.n_rad() * self.n_ang()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn r_max(&self) -> Option<f64> {
        self.r_max
    }

    pub fn radial(&self) -> &[RadialNode] {
        &self.radial
    }

    /// `e^{iθ_j}`, `θ_j = 2πj / n_ang`.
    pub fn unit_circle(&self) -> &[Complex64] {
        &self.unit_circle
    }

    /// Node `index = i * n_ang + j`.
    #[inline]
    pub fn node(&self, index: usize) -> Complex64 {
        let n = self.n_ang();
        self.radial[index / n].radius * self.unit_circle[index % n]
    }

    /// Quadrature weight of a single node (all node weights sum to the mass).
    #[inline]
    pub fn node_weight(&self, index: usize) -> f64 {
        (self.alpha + 1.0) * self.radial[index / self.n_ang()].weight / self.n_ang() as f64
    }

    /// All nodes in summation order.
    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.radial
            .iter()
            .flat_map(move |r| self.unit_circle.iter().map(move |e| r.radius * e))
    }

    /// `Σ_k Γ(j+1)Γ(α+2)/Γ(j+α+2)`-normalized total mass, i.e. `∫ 1 dA_α`
    /// over the grid's domain.
    pub fn mass(&self) -> f64 {
        (self.alpha + 1.0) * self.radial.iter().map(|r| r.weight).sum::<f64>()
    }

    /// Integrates precomputed node values (in [`Self::nodes`] order).
    pub fn integrate_values(&self, values: &[Complex64]) -> Result<Complex64> {
        assert_eq!(values.len(), self.len(), "value count must match grid size");
        let n = self.n_ang();
        let mut total = Complex64::new(0.0, 0.0);
        for (i, r) in self.radial.iter().enumerate() {
            let row = &values[i * n..(i + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in row.iter().enumerate() {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(self.non_finite(i * n + j));
                }
                acc += v;
            }
            total += acc * r.weight;
        }
        Ok(total * ((self.alpha + 1.0) / n as f64))
    }

    /// Real-valued variant of [`Self::integrate_values`].
    pub fn integrate_real_values(&self, values: &[f64]) -> Result<f64> {
        assert_eq!(values.len(), self.len(), "value count must match grid size");
        let n = self.n_ang();
        let mut total = 0.0;
        for (i, r) in self.radial.iter().enumerate() {
            let row = &values[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(self.non_finite(i * n + j));
                }
                acc += v;
            }
            total += acc * r.weight;
        }
        Ok(total * ((self.alpha + 1.0) / n as f64))
    }

    fn non_finite(&self, node: usize) -> Error {
        let w = self.node(node);
        Error::NonFiniteIntegrand {
            node,
            re: w.re,
            im: w.im,
        }
    }
}

fn check_sizes(n_rad: usize, n_ang: usize) -> Result<()> {
    if n_rad == 0 {
        return Err(Error::param("n_rad", n_rad as f64, "must be positive"));
    }
    if n_ang < 8 {
        return Err(Error::param("n_ang", n_ang as f64, "need at least 8 angles"));
    }
    Ok(())
}

fn unit_circle(n: usize) -> Arc<[Complex64]> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
        .collect()
}

/// `(n_rad, n_ang)` for integrands concentrated at modulus `focus`.
pub fn focused_sizes(focus: f64) -> (usize, usize) {
    let gap = (1.0 - focus.abs()).max(1e-6);
    let n_ang = ((64.0 / gap).ceil() as usize)
        .next_power_of_two()
        .clamp(DEFAULT_N_ANG, FOCUSED_ANG_CAP);
    let n_rad = if gap >= 0.05 { DEFAULT_N_RAD } else { 2 * DEFAULT_N_RAD };
    (n_rad, n_ang)
}

/// `∫ f dA_α` over the grid; fixed node order, bit-reproducible.
pub fn integrate<F>(f: F, grid: &QuadratureGrid) -> Result<Complex64>
where
    F: Fn(DiskPoint) -> Complex64,
{
    integrate_c(|w| f(DiskPoint::interior(w)), grid)
}

/// As [`integrate`] but on raw complex nodes.
pub fn integrate_c<F>(f: F, grid: &QuadratureGrid) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let n = grid.n_ang();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, r) in grid.radial.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, e) in grid.unit_circle.iter().enumerate() {
            let v = f(r.radius * e);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(grid.non_finite(i * n + j));
            }
            acc += v;
        }
        total += acc * r.weight;
    }
    Ok(total * ((grid.alpha + 1.0) / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveResult {
    pub value: Complex64,
    /// `|I_last - I_previous|`.
    pub err_est: f64,
    pub converged: bool,
    pub n_rad: usize,
    pub n_ang: usize,
}

/// Doubles both resolutions until successive values differ by less than
/// `tol` or the radial count would exceed [`ADAPTIVE_RAD_CAP`].
pub fn integrate_adaptive<F>(f: F, alpha: f64, tol: f64) -> Result<AdaptiveResult>
where
    F: Fn(Complex64) -> Complex64,
{
    integrate_adaptive_from(f, alpha, tol, ADAPTIVE_START)
}

/// [`integrate_adaptive`] starting from a given resolution.
pub fn integrate_adaptive_from<F>(f: F, alpha: f64, tol: f64, start: (usize, usize)) -> Result<AdaptiveResult>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(Error::param("tol", tol, "must be positive"));
    }
    let (mut n_rad, mut n_ang) = start;
    let mut prev = integrate_c(&f, &QuadratureGrid::new(alpha, n_rad, n_ang)?)?;
    loop {
        let next_rad = n_rad * 2;
        if next_rad > ADAPTIVE_RAD_CAP {
            // the caller sees the last difference it could afford
            return Ok(AdaptiveResult {
                value: prev,
                err_est: f64::INFINITY,
                converged: false,
                n_rad,
                n_ang,
            });
        }
        n_rad = next_rad;
        n_ang = (n_ang * 2).min(ADAPTIVE_ANG_CAP);
        let cur = integrate_c(&f, &QuadratureGrid::new(alpha, n_rad, n_ang)?)?;
        let diff = (cur - prev).norm();
        if diff < tol {
            return Ok(AdaptiveResult {
                value: cur,
                err_est: diff,
                converged: true,
                n_rad,
                n_ang,
            });
        }
        if n_rad * 2 > ADAPTIVE_RAD_CAP {
            return Ok(AdaptiveResult {
                value: cur,
                err_est: diff,
                converged: false,
                n_rad,
                n_ang,
            });
        }
        prev = cur;
    }
}
