use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {re} + {im}i is not inside the unit disk (|z| = {modulus})")]
    OutsideDisk { re: f64, im: f64, modulus: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("integrand is not finite at node {node} (w = {re} + {im}i)")]
    NonFiniteIntegrand { node: usize, re: f64, im: f64 },

    #[error("quadrature did not converge: last difference {err_est:e} > tolerance {tol:e} at {n_rad} radial nodes")]
    NotConverged { err_est: f64, tol: f64, n_rad: usize },

    #[error("Gauss-Jacobi node computation failed for n = {n}, alpha = {alpha}")]
    NodeComputation { n: usize, alpha: f64 },

    #[error("lattice would exceed {cap} centers; use a larger r or a smaller R_max")]
    LatticeTooLarge { cap: usize },

    #[error("point with |w| = {modulus} lies outside the lattice domain |w| <= {r_max}")]
    OutOfDomain { modulus: f64, r_max: f64 },

    #[error("cell index {index} out of range (lattice has {count} centers)")]
    CellIndex { index: usize, count: usize },

    #[error("sampling system is ill-conditioned: relative residual {relative_residual:e} exceeds {threshold:e}")]
    IllConditioned { relative_residual: f64, threshold: f64 },

    #[error("Gamma-function constant undefined: {0}")]
    UndefinedConstant(String),

    #[error("diagonal series truncated at N = {n} is too short for |z| = {z_mod}, |w| = {w_mod}; raise N")]
    TruncationTooShort { n: usize, z_mod: f64, w_mod: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }
}
