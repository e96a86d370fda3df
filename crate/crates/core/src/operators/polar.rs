//! Whole-grid evaluation of `S K_z`, using the rotational structure of the
//! polar grid: each radius is a uniform circle, so Fourier modes separate.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::spec::OperatorSpec;
use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::kernels::{check_grid_alpha, kernel_c};
use crate::quadrature::QuadratureGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(S K_z)(v)` at every node `v` of `grid`, in node order.
///
/// Toeplitz operators are evaluated as `P(φ K_z)` with the projection computed
/// mode by mode on the grid itself (modes `n < n_ang/2`).
pub fn kernel_image_on_grid(
    s: &OperatorSpec,
    z: DiskPoint,
    alpha: f64,
    grid: &QuadratureGrid,
) -> Result<Vec<Complex64>> {
    check_grid_alpha(grid, alpha)?;
    image(s, z.value(), alpha, grid)
}

fn image(s: &OperatorSpec, z: Complex64, alpha: f64, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
    match s {
        OperatorSpec::Identity => Ok(grid.nodes().map(|v| kernel_c(z, v, alpha)).collect()),
        OperatorSpec::FiniteRank(terms) => {
            let coeffs: Vec<Complex64> = terms.iter().map(|(g, _)| g.eval(z).conj()).collect();
            Ok(grid
                .nodes()
                .map(|v| terms.iter().zip(&coeffs).map(|((_, h), c)| c * h.eval(v)).sum())
                .collect())
        }
        OperatorSpec::Diagonal { lambda, truncation } => {
            let n_ang = grid.n_ang();
            let fft = FftPlanner::new().plan_fft_inverse(n_ang);
            let zc = z.conj();
            let mut out = Vec::with_capacity(grid.len());
            for node in grid.radial() {
                let r = node.radius;
                let n = truncation.resolve(lambda, z.norm() * r, z.norm(), r, alpha)?;
                // slot k collects Σ_{n ≡ k} λ_n (z̄ r)ⁿ / γ_n
                let mut row = vec![ZERO; n_ang];
                let step = zc * r;
                let mut power = Complex64::new(1.0, 0.0);
                let mut g = 1.0;
                for k in 0..=n {
                    if k > 0 {
                        g *= k as f64 / (k as f64 + alpha + 1.0);
                        power *= step;
                    }
                    row[k % n_ang] += power * (lambda.checked(k)? / g);
                }
                fft.process(&mut row);
                out.extend_from_slice(&row);
            }
            Ok(out)
        }
        OperatorSpec::Toeplitz(phi) => {
            let g: Vec<Complex64> = grid.nodes().map(|u| phi.eval(u) * kernel_c(z, u, alpha)).collect();
            bergman_projection(&g, alpha, grid)
        }
        OperatorSpec::IntegralKernel { h, inner, .. } => {
            let inner = QuadratureGrid::new(alpha, inner.0, inner.1)?;
            let kz: Vec<Complex64> = inner.nodes().map(|u| kernel_c(z, u, alpha)).collect();
            let outer: Vec<Complex64> = grid.nodes().collect();
            outer
                .par_iter()
                .map(|&v| {
                    let vals: Vec<Complex64> = inner.nodes().zip(&kz).map(|(u, k)| h(v, u) * k).collect();
                    inner.integrate_values(&vals)
                })
                .collect()
        }
        OperatorSpec::Combination(parts) => {
            let mut total = vec![ZERO; grid.len()];
            for (c, part) in parts {
                for (t, v) in total.iter_mut().zip(image(part, z, alpha, grid)?) {
                    *t += c * v;
                }
            }
            Ok(total)
        }
    }
}

/// `P g` at the grid nodes, where `g` is given at the grid nodes.
fn bergman_projection(g: &[Complex64], alpha: f64, grid: &QuadratureGrid) -> Result<Vec<Complex64>> {
    if let Some(j) = g.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        let w = grid.node(j);
        return Err(Error::NonFiniteIntegrand {
            node: j,
            re: w.re,
            im: w.im,
        });
    }
    let n_ang = grid.n_ang();
    let modes = n_ang / 2;
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n_ang);
    let inverse = planner.plan_fft_inverse(n_ang);
    let radial = grid.radial();

    // μ_n = ⟨g, wⁿ⟩
    let mut mu = vec![ZERO; modes];
    let mut row = vec![ZERO; n_ang];
    for (i, node) in radial.iter().enumerate() {
        row.copy_from_slice(&g[i * n_ang..(i + 1) * n_ang]);
        forward.process(&mut row);
        let scale = (alpha + 1.0) * node.weight / n_ang as f64;
        let mut rn = 1.0;
        for (n, m) in mu.iter_mut().enumerate() {
            *m += row[n] * (scale * rn);
            rn *= node.radius;
        }
    }
    // c_n = μ_n / γ_n
    let mut inv_gamma = 1.0;
    for (n, m) in mu.iter_mut().enumerate() {
        if n > 0 {
            inv_gamma *= (n as f64 + alpha + 1.0) / n as f64;
        }
        *m *= inv_gamma;
    }

    let mut out = Vec::with_capacity(grid.len());
    for node in radial {
        let mut rn = 1.0;
        for (slot, m) in row.iter_mut().zip(mu.iter().chain(std::iter::repeat(&ZERO))) {
            *slot = m * rn;
            rn *= node.radius;
        }
        inverse.process(&mut row);
        out.extend_from_slice(&row);
    }
    Ok(out)
}
