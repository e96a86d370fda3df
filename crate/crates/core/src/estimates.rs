//! The integrals `I_{c,t}(z)` with their Γ-constant brackets, and lattice sums
//! `L(w) = Σ_k (1-|a_k|²)^{t1} / |1 - ā_k w|^{t2}` with their growth envelopes.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::lattice::Lattice;
use crate::quadrature::{check_alpha, focused_sizes, gamma, integrate_adaptive_from};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateRegime {
    NegativeC,
    PositiveC,
    ZeroC,
}

/// Parameters `(c, t)` of `I_{c,t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCase {
    pub c: f64,
    pub t: f64,
    pub regime: EstimateRegime,
}

impl EstimateCase {
    pub fn new(c: f64, t: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::param("c", c, "must be finite"));
        }
        check_alpha(t).map_err(|_| Error::param("t", t, "must exceed -1"))?;
        let regime = if c < 0.0 {
            EstimateRegime::NegativeC
        } else if c > 0.0 {
            EstimateRegime::PositiveC
        } else {
            EstimateRegime::ZeroC
        };
        Ok(EstimateCase { c, t, regime })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IctValue {
    pub value: f64,
    pub err_est: f64,
    pub converged: bool,
    pub n_rad: usize,
    pub n_ang: usize,
}

/// `I_{c,t}(z) = ∫ (1-|w|²)^t / |1 - z w̄|^{2+t+c} dA(w)` with normalized area `dA`.
///
/// Evaluated as `(t+1)^{-1} ∫ |1 - z̄w|^{-(2+t+c)} dA_t(w)` by doubling
/// quadrature started from a grid sized for `|z|`.
pub fn i_ct(z: DiskPoint, c: f64, t: f64, tol: f64) -> Result<IctValue> {
    let case = EstimateCase::new(c, t)?;
    let zc = z.value();
    let e = -0.5 * (2.0 + case.t + case.c);
    let (n_rad, n_ang) = focused_sizes(z.modulus());
    let r = integrate_adaptive_from(
        |w| Complex64::new((ONE - zc.conj() * w).norm_sqr().powf(e), 0.0),
        t,
        tol * (t + 1.0),
        (n_rad / 2, n_ang / 2),
    )?;
    Ok(IctValue {
        value: r.value.re / (t + 1.0),
        err_est: r.err_est / (t + 1.0),
        converged: r.converged,
        n_rad: r.n_rad,
        n_ang: r.n_ang,
    })
}

/// Bracket on `I_{c,t}(z)`.
///
/// `factor · I` is bounded by the constants `const_lower`, `const_upper`
/// (`factor` is 1, `(1-|z|²)^c`, or `|z|²/log(1/(1-|z|²))` by regime, the last
/// taken as its limit 1 at `z = 0`); `lower`, `upper` are the same bounds
/// divided by `factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IctBounds {
    pub case: EstimateCase,
    pub factor: f64,
    pub const_lower: f64,
    pub const_upper: f64,
    pub lower: f64,
    pub upper: f64,
    /// `const_lower <= const_upper`; false for the printed zero-`c` constants when `t != 0`.
    pub ordered: bool,
}

impl IctBounds {
    /// Whether `value` lies in the bracket, compared on the normalized scale
    /// with absolute slack `slack`.
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        let v = self.factor * value;
        v >= self.const_lower - slack && v <= self.const_upper + slack
    }
}

pub fn i_ct_bounds(z: DiskPoint, c: f64, t: f64) -> Result<IctBounds> {
    let case = EstimateCase::new(c, t)?;
    let g = |x: f64| -> Result<f64> {
        if x <= 0.0 {
            return Err(Error::UndefinedConstant(format!("Γ({x}) with c = {c}, t = {t}")));
        }
        gamma(x)
    };
    let x = z.norm_sqr();
    let (factor, lo, hi) = match case.regime {
        EstimateRegime::NegativeC => (
            1.0,
            g(1.0 + t)? / g(2.0 + t)?,
            // Γ(-c) has a positive argument here
            g(1.0 + t)? * g(-c)? / g(0.5 * (2.0 + t - c))?.powi(2),
        ),
        EstimateRegime::PositiveC => (
            (1.0 - x).powf(c),
            g(1.0 + t)? / g(2.0 + t)?,
            g(1.0 + t)? * g(c)? / g(0.5 * (2.0 + t + c))?.powi(2),
        ),
        EstimateRegime::ZeroC => (log_normalizer(x), g(1.0 + t)? / g(1.0 + 0.5 * t)?, 1.0 / (1.0 + t)),
    };
    Ok(IctBounds {
        case,
        factor,
        const_lower: lo,
        const_upper: hi,
        lower: lo / factor,
        upper: hi / factor,
        ordered: lo <= hi,
    })
}

/// `x / log(1/(1-x))`, continuous at 0.
fn log_normalizer(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x / -(-x).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumRegime {
    /// `t2 > t1`: growth `(1-|w|²)^{t1-t2}`.
    Above,
    /// `t2 = t1`: growth `log 1/(1-|w|²)`.
    Equal,
    /// `t2 < t1`: bounded.
    Below,
}

impl SumRegime {
    pub fn name(self) -> &'static str {
        match self {
            SumRegime::Above => "t2>t1",
            SumRegime::Equal => "t2=t1",
            SumRegime::Below => "t2<t1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumParams {
    pub t1: f64,
    pub t2: f64,
    pub regime: SumRegime,
}

impl LatticeSumParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 1.0) || !t1.is_finite() {
            return Err(Error::param("t1", t1, "must exceed 1"));
        }
        if !t2.is_finite() {
            return Err(Error::param("t2", t2, "must be finite"));
        }
        let regime = if t2 > t1 {
            SumRegime::Above
        } else if t2 == t1 {
            SumRegime::Equal
        } else {
            SumRegime::Below
        };
        Ok(LatticeSumParams { t1, t2, regime })
    }

    /// The growth profile of `L(w)` for this regime.
    pub fn envelope(&self, w_modulus: f64) -> f64 {
        let x = w_modulus * w_modulus;
        match self.regime {
            SumRegime::Above => (1.0 - x).powf(self.t1 - self.t2),
            SumRegime::Equal => -(-x).ln_1p(),
            SumRegime::Below => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSum {
    pub value: f64,
    /// Density estimate of the omitted terms with `|a_k| > R_max`.
    pub tail_estimate: f64,
}

/// `L(w)` over the truncated lattice, summed in center order.
pub fn lattice_sum(lat: &Lattice, t1: f64, t2: f64, w: DiskPoint) -> Result<LatticeSum> {
    LatticeSumParams::new(t1, t2)?;
    let wc = w.value();
    let value = lat
        .centers()
        .iter()
        .map(|a| {
            let a = a.value();
            (1.0 - a.norm_sqr()).powf(t1) * (ONE - a.conj() * wc).norm_sqr().powf(-0.5 * t2)
        })
        .sum();
    Ok(LatticeSum {
        value,
        tail_estimate: tail_estimate(lat, t1, t2, w.modulus()),
    })
}

/// Centers have roughly constant invariant area `ā`, so the terms beyond
/// `R` sum to about `ā⁻¹ ∫_{|u|>R} (1-|u|²)^{t1-2} |1-ūw|^{-t2} dA(u)`;
/// the kernel factor is bounded by its worst value over the annulus.
fn tail_estimate(lat: &Lattice, t1: f64, t2: f64, w_mod: f64) -> f64 {
    let r2 = lat.r_max() * lat.r_max();
    let invariant_area = r2 / (1.0 - r2);
    let per_center = invariant_area / lat.len() as f64;
    let radial = (1.0 - r2).powf(t1 - 1.0) / (t1 - 1.0);
    let kernel = if t2 >= 0.0 {
        (1.0 - w_mod).powf(-t2)
    } else {
        (1.0 + w_mod).powf(-t2)
    };
    radial * kernel / per_center
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub radius: f64,
    /// Largest `L(w)` over the sampled angles.
    pub l: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub tail_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub t1: f64,
    pub t2: f64,
    pub regime: SumRegime,
    pub rows: Vec<EnvelopeRow>,
    /// Empirical constant: sup of the ratio over the sweep.
    pub constant: f64,
    /// Ratio at the outermost radius is within 20% of the one before it.
    pub stable: bool,
    pub pass: bool,
}

/// Angles sampled on every radius of an envelope sweep.
pub const ENVELOPE_ANGLES: usize = 8;

/// Sweeps `L(w) / envelope(|w|)` over the given radii (sorted ascending).
/// In the equal-exponent regime radii below 0.1 are skipped, since the
/// logarithmic envelope vanishes at the origin.
pub fn lattice_sum_envelope_check(lat: &Lattice, t1: f64, t2: f64, radii: &[f64]) -> Result<EnvelopeReport> {
    let params = LatticeSumParams::new(t1, t2)?;
    let mut radii: Vec<f64> = radii
        .iter()
        .copied()
        .filter(|&r| !(params.regime == SumRegime::Equal && r < 0.1))
        .collect();
    radii.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in &radii {
        let mut l = 0.0f64;
        let mut tail = 0.0f64;
        for j in 0..ENVELOPE_ANGLES {
            let theta = std::f64::consts::TAU * j as f64 / ENVELOPE_ANGLES as f64;
            let s = lattice_sum(lat, t1, t2, DiskPoint::polar(radius, theta)?)?;
            l = l.max(s.value);
            tail = tail.max(s.tail_estimate);
        }
        let envelope = params.envelope(radius);
        rows.push(EnvelopeRow {
            radius,
            l,
            envelope,
            ratio: l / envelope,
            tail_estimate: tail,
        });
    }
    let constant = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let stable = match rows.as_slice() {
        [.., a, b] => b.ratio <= 1.2 * a.ratio,
        _ => true,
    };
    Ok(EnvelopeReport {
        t1,
        t2,
        regime: params.regime,
        rows,
        constant,
        stable,
        pass: constant.is_finite() && stable,
    })
}

impl EnvelopeReport {
    pub const CSV_HEADER: &'static str = "regime,t1,t2,radius,L,envelope,ratio";

    /// Rows without the header.
    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            writeln!(
                s,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.regime.name(),
                self.t1,
                self.t2,
                r.radius,
                r.l,
                r.envelope,
                r.ratio
            )
            .unwrap();
        }
        s
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows())
    }
}
