use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::monomial_norm_sq;

pub type SymbolFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
pub type AnalyticFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
pub type SequenceFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
/// `H(w, u)` of an integral operator `(Sf)(w) = ∫ H(w, u) f(u) dA_α(u)`.
pub type KernelFn = Arc<dyn Fn(Complex64, Complex64) -> Complex64 + Send + Sync>;

pub const DEFAULT_DIAGONAL_TRUNCATION: usize = 200;
/// A fixed diagonal truncation refuses points with `|z|` and `|w|` both above this.
pub const DIAGONAL_RESTRICTED_MODULUS: f64 = 0.97;
pub const DEFAULT_INNER_GRID: (usize, usize) = (64, 256);
const AUTO_RTOL: f64 = 1e-15;
const AUTO_MAX_TERMS: usize = 2_000_000;

/// A bounded Toeplitz symbol.
#[derive(Clone)]
pub struct Symbol {
    name: String,
    f: SymbolFn,
}

impl Symbol {
    pub fn new(name: impl Into<String>, f: SymbolFn) -> Self {
        Symbol { name: name.into(), f }
    }

    /// `φ ≡ 1`.
    pub fn one() -> Self {
        Self::new("one", Arc::new(|_| Complex64::new(1.0, 0.0)))
    }

    /// `φ(u) = 1 - |u|²`.
    pub fn one_minus_r2() -> Self {
        Self::new(
            "oneminusr2",
            Arc::new(|u: Complex64| Complex64::new(1.0 - u.norm_sqr(), 0.0)),
        )
    }

    /// Indicator of `Re u > 0`.
    pub fn half_disk() -> Self {
        Self::new(
            "halfdisk",
            Arc::new(|u: Complex64| Complex64::new(if u.re > 0.0 { 1.0 } else { 0.0 }, 0.0)),
        )
    }

    /// `φ(u) = (1 - |u|²)^k`, `k >= 0`.
    pub fn radial_pow(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::param("k", k, "radialpow exponent must be nonnegative"));
        }
        Ok(Self::new(
            format!("radialpow:{k}"),
            Arc::new(move |u: Complex64| Complex64::new((1.0 - u.norm_sqr()).powf(k), 0.0)),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: Complex64) -> Complex64 {
        (self.f)(u)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.name)
    }
}

/// Diagonal entries `λ_n` with a declared bound `sup |λ_n|`.
#[derive(Clone)]
pub struct Sequence {
    name: String,
    f: SequenceFn,
    sup: f64,
}

impl Sequence {
    pub fn new(name: impl Into<String>, f: SequenceFn, sup: f64) -> Result<Self> {
        if !(sup >= 0.0) || !sup.is_finite() {
            return Err(Error::param("sup", sup, "bound must be finite and nonnegative"));
        }
        Ok(Sequence {
            name: name.into(),
            f,
            sup,
        })
    }

    /// `λ_n = 1/(n+1)`.
    pub fn inv_n() -> Self {
        Sequence {
            name: "inv_n".into(),
            f: Arc::new(|n| 1.0 / (n as f64 + 1.0)),
            sup: 1.0,
        }
    }

    /// `λ_n = c`.
    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::param("c", c, "must be finite"));
        }
        Self::new(format!("const:{c}"), Arc::new(move |_| c), c.abs())
    }

    /// `λ_n = qⁿ`, `|q| <= 1`.
    pub fn geometric(q: f64) -> Result<Self> {
        if !(q.abs() <= 1.0) {
            return Err(Error::param("q", q, "geometric ratio must satisfy |q| <= 1"));
        }
        Self::new(format!("geom:{q}"), Arc::new(move |n| q.powi(n as i32)), 1.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn get(&self, n: usize) -> f64 {
        (self.f)(n)
    }

    /// `λ_n`, checked against the declared bound.
    pub(crate) fn checked(&self, n: usize) -> Result<f64> {
        let v = (self.f)(n);
        if !v.is_finite() || v.abs() > self.sup * (1.0 + 1e-12) {
            return Err(Error::param("lambda", v, "entry exceeds the declared bound"));
        }
        Ok(v)
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({}, sup = {})", self.name, self.sup)
    }
}

/// An analytic function with a display name.
#[derive(Clone)]
pub struct NamedFn {
    name: String,
    f: AnalyticFn,
}

impl NamedFn {
    pub fn new(name: impl Into<String>, f: AnalyticFn) -> Self {
        NamedFn { name: name.into(), f }
    }

    pub fn one() -> Self {
        Self::new("1", Arc::new(|_| Complex64::new(1.0, 0.0)))
    }

    pub fn monomial(n: u32) -> Self {
        Self::new(format!("w^{n}"), Arc::new(move |w: Complex64| w.powu(n)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, w: Complex64) -> Complex64 {
        (self.f)(w)
    }
}

impl fmt::Debug for NamedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Number of diagonal terms kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Exactly `N + 1` terms; points with `|z|`, `|w|` both above 0.97 are refused.
    Fixed(usize),
    /// Enough terms that the tail bound is below `1e-15` of the series scale.
    Auto,
}

impl Truncation {
    /// Last index kept for `x = |z||w|`.
    pub(crate) fn resolve(self, lambda: &Sequence, x: f64, z_mod: f64, w_mod: f64, alpha: f64) -> Result<usize> {
        match self {
            Truncation::Fixed(n) => {
                if z_mod > DIAGONAL_RESTRICTED_MODULUS && w_mod > DIAGONAL_RESTRICTED_MODULUS {
                    return Err(Error::TruncationTooShort { n, z_mod, w_mod });
                }
                Ok(n)
            }
            Truncation::Auto => auto_terms(lambda.sup(), x, alpha).ok_or(Error::TruncationTooShort {
                n: AUTO_MAX_TERMS,
                z_mod,
                w_mod,
            }),
        }
    }
}

/// Bound on `Σ_{n>N} |λ_n| xⁿ/γ_n` given `|λ_n| <= sup`: the terms after `N`
/// shrink at least by `ρ = x(N+α+3)/(N+2)`, so the tail is at most
/// `sup x^{N+1}/γ_{N+1} / (1-ρ)` (infinite when `ρ >= 1`).
pub fn diagonal_tail_bound(sup: f64, n: usize, x: f64, alpha: f64) -> f64 {
    let nf = n as f64;
    let rho = x * (nf + alpha + 3.0) / (nf + 2.0);
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    let first = sup * x.powi(n as i32 + 1) / monomial_norm_sq(n + 1, alpha);
    first / (1.0 - rho)
}

fn auto_terms(sup: f64, x: f64, alpha: f64) -> Option<usize> {
    if sup == 0.0 || x == 0.0 {
        return Some(0);
    }
    // Σ xⁿ/γ_n = (1-x)^{-(2+α)}
    let scale = sup * (1.0 - x).powf(-(2.0 + alpha));
    let mut term = sup; // sup xⁿ/γ_n, updated in place
    let mut n = 0usize;
    while n < AUTO_MAX_TERMS {
        let nf = n as f64;
        let rho = x * (nf + alpha + 3.0) / (nf + 2.0);
        let next = term * x * (nf + alpha + 2.0) / (nf + 1.0);
        if rho < 1.0 && next / (1.0 - rho) <= AUTO_RTOL * scale {
            return Some(n.max(8));
        }
        term = next;
        n += 1;
    }
    None
}

/// A concrete operator on `L^p_a(dA_α)`.
#[derive(Clone)]
pub enum OperatorSpec {
    Identity,
    /// `T_φ f = P(φ f)`.
    Toeplitz(Symbol),
    /// `λ_n` on the orthonormal basis `wⁿ/√γ_n`.
    Diagonal {
        lambda: Sequence,
        truncation: Truncation,
    },
    /// `f ↦ Σ ⟨f, g_i⟩ h_i` with analytic `g_i`, `h_i`.
    FiniteRank(Vec<(NamedFn, NamedFn)>),
    /// `(Sf)(w) = ∫ H(w, u) f(u) dA_α(u)`. Pointwise evaluation integrates on the
    /// caller's grid; whole-grid evaluation uses an inner `(n_rad, n_ang)` grid per node.
    IntegralKernel {
        name: String,
        h: KernelFn,
        inner: (usize, usize),
    },
    /// `Σ c_i S_i`.
    Combination(Vec<(Complex64, OperatorSpec)>),
}

impl OperatorSpec {
    pub fn toeplitz(symbol: Symbol) -> Self {
        OperatorSpec::Toeplitz(symbol)
    }

    /// Diagonal operator with the default truncation `N = 200`.
    pub fn diagonal(lambda: Sequence) -> Self {
        OperatorSpec::Diagonal {
            lambda,
            truncation: Truncation::Fixed(DEFAULT_DIAGONAL_TRUNCATION),
        }
    }

    /// `f ↦ ⟨f, 1⟩ 1`.
    pub fn projection_onto_constants() -> Self {
        OperatorSpec::FiniteRank(vec![(NamedFn::one(), NamedFn::one())])
    }

    pub fn integral_kernel(name: impl Into<String>, h: KernelFn) -> Self {
        OperatorSpec::IntegralKernel {
            name: name.into(),
            h,
            inner: DEFAULT_INNER_GRID,
        }
    }

    pub fn zero() -> Self {
        OperatorSpec::FiniteRank(Vec::new())
    }

    /// Replaces the truncation of a diagonal operator; other variants are unchanged.
    pub fn with_truncation(self, t: Truncation) -> Self {
        match self {
            OperatorSpec::Diagonal { lambda, .. } => OperatorSpec::Diagonal { lambda, truncation: t },
            other => other,
        }
    }

    /// Selector name, e.g. `toeplitz:oneminusr2`.
    pub fn name(&self) -> String {
        match self {
            OperatorSpec::Identity => "identity".into(),
            OperatorSpec::Toeplitz(s) => format!("toeplitz:{}", s.name()),
            OperatorSpec::Diagonal { lambda, .. } => format!("diagonal:{}", lambda.name()),
            OperatorSpec::FiniteRank(terms) if terms.is_empty() => "zero".into(),
            OperatorSpec::FiniteRank(terms)
                if terms.len() == 1 && terms[0].0.name() == "1" && terms[0].1.name() == "1" =>
            {
                "finiterank:proj".into()
            }
            OperatorSpec::FiniteRank(terms) => {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|(g, h)| format!("<.,{}>{}", g.name(), h.name()))
                    .collect();
                format!("finiterank:{}", parts.join("+"))
            }
            OperatorSpec::IntegralKernel { name, .. } => format!("integral:{name}"),
            OperatorSpec::Combination(parts) => {
                let p: Vec<String> = parts.iter().map(|(c, s)| format!("({c})*{}", s.name())).collect();
                p.join("+")
            }
        }
    }
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Diagonal { truncation, .. } => write!(f, "{} ({truncation:?})", self.name()),
            _ => write!(f, "{}", self.name()),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    /// `identity`, `zero`, `toeplitz:{one|oneminusr2|halfdisk|radialpow:k}`,
    /// `diagonal:{inv_n|const:c|geom:q}`, `finiterank:proj`.
    /// Parsed diagonal operators use [`Truncation::Auto`].
    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: &str| Error::Parse {
            line: 0,
            message: format!("operator selector '{s}': {message}"),
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad("expected a number"));
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        match (family, rest) {
            ("identity", "") => Ok(OperatorSpec::Identity),
            ("zero", "") => Ok(OperatorSpec::zero()),
            ("toeplitz", sym) => {
                let symbol = match sym.split_once(':').unwrap_or((sym, "")) {
                    ("one", "") => Symbol::one(),
                    ("oneminusr2", "") => Symbol::one_minus_r2(),
                    ("halfdisk", "") => Symbol::half_disk(),
                    ("radialpow", k) => Symbol::radial_pow(num(k)?)?,
                    _ => return Err(bad("unknown symbol")),
                };
                Ok(OperatorSpec::Toeplitz(symbol))
            }
            ("diagonal", seq) => {
                let lambda = match seq.split_once(':').unwrap_or((seq, "")) {
                    ("inv_n", "") => Sequence::inv_n(),
                    ("const", c) => Sequence::constant(num(c)?)?,
                    ("geom", q) => Sequence::geometric(num(q)?)?,
                    _ => return Err(bad("unknown sequence")),
                };
                Ok(OperatorSpec::Diagonal {
                    lambda,
                    truncation: Truncation::Auto,
                })
            }
            ("finiterank", "proj") => Ok(OperatorSpec::projection_onto_constants()),
            _ => Err(bad("unknown operator family")),
        }
    }
}
