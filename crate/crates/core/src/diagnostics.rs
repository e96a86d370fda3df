//! Threshold arithmetic for the boundedness criteria and Berezin-based
//! boundedness/compactness scans of concrete operators.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::operators::{KernelImage, OperatorSpec};
use crate::quadrature::{check_alpha, QuadratureGrid, SpaceParams};

/// Compact verdict: outermost `|S̃|` below this fraction of the innermost.
pub const DECAY_FRACTION: f64 = 0.05;
/// Relative slack for the monotone-trend check.
const MONOTONE_RTOL: f64 = 1e-9;
/// Boundedness: allowed growth of the sup between the two outermost radius levels.
pub const SUP_STABILITY_RTOL: f64 = 0.05;
pub const DEFAULT_RAYS: usize = 8;
pub const DEFAULT_RADII: usize = 7;

/// `p(2+α)/(1+α) max{1, 1/(p-1)}`, for `p > 1`.
pub fn m_threshold(p: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::param(
            "p",
            p,
            "needs p > 1; use m_threshold_small_p for 0 < p <= 1",
        ));
    }
    Ok(p * (2.0 + alpha) / (1.0 + alpha) * 1f64.max(1.0 / (p - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallPThreshold {
    pub threshold: f64,
    /// `(2+α)/(pδ) + 1`.
    pub first_branch: f64,
    /// `(1+pδ)/(1+α) + 1`.
    pub second_branch: f64,
    /// Weight `β = (2+α)/p - 2 + δ` of the norm `‖S_z 1‖_{m,β}`.
    pub beta_exponent: f64,
}

/// Threshold for `0 < p <= 1`: `max{(2+α)/(pδ) + 1, (1+pδ)/(1+α) + 1}`.
pub fn m_threshold_small_p(p: f64, alpha: f64, delta: f64) -> Result<SmallPThreshold> {
    check_alpha(alpha)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("p", p, "needs 0 < p <= 1"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::param("delta", delta, "must be positive"));
    }
    let first_branch = (2.0 + alpha) / (p * delta) + 1.0;
    let second_branch = (1.0 + p * delta) / (1.0 + alpha) + 1.0;
    Ok(SmallPThreshold {
        threshold: first_branch.max(second_branch),
        first_branch,
        second_branch,
        beta_exponent: (2.0 + alpha) / p - 2.0 + delta,
    })
}

/// The `δ` that balances both branches, `(1+α)/p`.
pub fn default_delta(p: f64, alpha: f64) -> f64 {
    (1.0 + alpha) / p
}

/// `(p(2+α)/((p-1)(1+α)), p(2+α)/(1+α)]`, the `m` range of the `p → q` result.
pub fn pq_window(p: f64, alpha: f64) -> (f64, f64) {
    let hi = p * (2.0 + alpha) / (1.0 + alpha);
    (hi / (p - 1.0), hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", content = "reason", rename_all = "snake_case")]
pub enum PqRegime {
    CaseA,
    CaseB,
    Inapplicable(String),
}

impl PqRegime {
    pub fn label(&self) -> &str {
        match self {
            PqRegime::CaseA => "case_a",
            PqRegime::CaseB => "case_b",
            PqRegime::Inapplicable(_) => "inapplicable",
        }
    }
}

/// Classifies `(p, q, m)` for `p > 2`. `p = m` counts as case (a).
pub fn pq_regime(p: f64, q: f64, m: f64, alpha: f64) -> Result<PqRegime> {
    check_alpha(alpha)?;
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::param("p", p, "needs p > 2"));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::param("q", q, "must be positive"));
    }
    let (lo, hi) = pq_window(p, alpha);
    if !(m > lo && m <= hi) {
        return Ok(PqRegime::Inapplicable(format!("m = {m} outside ({lo}, {hi}]")));
    }
    if p >= m {
        let q_max = m * (1.0 + alpha) / (2.0 + alpha);
        if q < q_max {
            return Ok(PqRegime::CaseA);
        }
        return Ok(PqRegime::Inapplicable(format!("p >= m needs q < {q_max}")));
    }
    let q_max = p / (2.0 + alpha);
    if q < q_max {
        return Ok(PqRegime::CaseB);
    }
    Ok(PqRegime::Inapplicable(format!("p < m needs q < {q_max}")))
}

/// How each sample's quadrature grid is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    /// [`QuadratureGrid::focused`] at `|z|`.
    Focused,
    Fixed {
        n_rad: usize,
        n_ang: usize,
    },
}

impl GridPolicy {
    fn grid(self, alpha: f64, z: DiskPoint) -> Result<QuadratureGrid> {
        match self {
            GridPolicy::Focused => QuadratureGrid::focused(alpha, z.modulus()),
            GridPolicy::Fixed { n_rad, n_ang } => QuadratureGrid::new(alpha, n_rad, n_ang),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    /// Ray index, or the sample index for unstructured sample lists.
    pub ray: usize,
    pub angle: f64,
    pub radius: f64,
    pub z: Complex64,
    pub berezin: Complex64,
    /// `‖S_z 1‖_{t,α}` per requested `t`.
    pub sz1_norms: Vec<NormValue>,
    pub n_rad: usize,
    pub n_ang: usize,
    /// Set when the sample could not be computed; numeric fields are then zero.
    pub error: Option<String>,
}

impl ScanSample {
    pub fn norm(&self, t: f64) -> Option<f64> {
        self.sz1_norms.iter().find(|n| n.t == t).map(|n| n.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessVerdict {
    pub m: f64,
    pub threshold: f64,
    pub m_above_threshold: bool,
    /// `sup ‖S_z 1‖_{m,α}` over the samples.
    pub sup_norm: f64,
    /// Finite, and the outermost radius level exceeds the next one by at most 5%.
    pub sup_stable: bool,
    pub hypothesis_satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactnessVerdict {
    /// `max` over rays of `|S̃|` at the innermost radius.
    pub innermost: f64,
    /// `max` over rays of `|S̃|` at the outermost radius.
    pub outermost: f64,
    pub decays: bool,
    /// `|S̃|` non-increasing along every ray over the outer half of the radii.
    pub monotone_outer_half: bool,
    /// `S̃` vanishes at every sample.
    pub zero_operator: bool,
    /// Slope of `log max_ray |S̃|` against `log(1-|z|)` over the outer half.
    pub fitted_rate: Option<f64>,
    /// `‖S_z 1‖_{1,α}` smaller at the outermost radius than at the innermost, on every ray.
    pub probe_consistent: bool,
    pub consistent_with_compact: bool,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub grid: GridPolicy,
    pub norm_exponents: Vec<f64>,
    pub decay_fraction: f64,
    pub sup_stability_rtol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub operator: String,
    pub params: SpaceParams,
    pub rays: Vec<f64>,
    pub radii: Vec<f64>,
    /// Ray-major; radius ascending within each ray.
    pub samples: Vec<ScanSample>,
    pub complete: bool,
    pub boundedness: BoundednessVerdict,
    pub compactness: Option<CompactnessVerdict>,
    pub metadata: ScanMetadata,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per sample: angle, radius, Re S̃, Im S̃, then one column per norm.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("angle,radius,re_berezin,im_berezin");
        for t in &self.metadata.norm_exponents {
            write!(s, ",sz1_norm_t{t}").unwrap();
        }
        s.push('\n');
        for smp in &self.samples {
            write!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                smp.angle, smp.radius, smp.berezin.re, smp.berezin.im
            )
            .unwrap();
            for t in &self.metadata.norm_exponents {
                match smp.norm(*t) {
                    Some(v) => write!(s, ",{v:.16e}").unwrap(),
                    None => s.push_str(",nan"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Default boundary approach: `1 - 2^{-j}`, `j = 1..=7`.
pub fn default_radii() -> Vec<f64> {
    (1..=DEFAULT_RADII as i32).map(|j| 1.0 - 0.5f64.powi(j)).collect()
}

/// `n` equally spaced angles starting at 0.
pub fn equally_spaced_rays(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

fn scan_params(params: &SpaceParams) -> Result<(f64, f64)> {
    let m = params.m.ok_or(Error::param("m", f64::NAN, "scans need m"))?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::param("m", m, "must be positive"));
    }
    Ok((m, m_threshold(params.p, params.alpha)?))
}

/// `{1, m/2, m}` without duplicates, ascending.
fn norm_exponents(m: f64) -> Vec<f64> {
    let mut ts = vec![1.0, 0.5 * m, m];
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup();
    ts
}

fn sample(
    s: &OperatorSpec,
    alpha: f64,
    policy: GridPolicy,
    ts: &[f64],
    ray: usize,
    angle: f64,
    z: DiskPoint,
) -> ScanSample {
    let mut out = ScanSample {
        ray,
        angle,
        radius: z.modulus(),
        z: z.value(),
        berezin: Complex64::new(0.0, 0.0),
        sz1_norms: Vec::new(),
        n_rad: 0,
        n_ang: 0,
        error: None,
    };
    let run = || -> Result<(QuadratureGrid, Complex64, Vec<f64>)> {
        let grid = policy.grid(alpha, z)?;
        let (b, norms) = KernelImage::compute(s, z, alpha, &grid)?.berezin_and_norms(ts)?;
        Ok((grid, b, norms))
    };
    match run() {
        Ok((grid, b, norms)) => {
            out.n_rad = grid.n_rad();
            out.n_ang = grid.n_ang();
            out.berezin = b;
            out.sz1_norms = ts.iter().zip(norms).map(|(&t, value)| NormValue { t, value }).collect();
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn boundedness(samples: &[ScanSample], m: f64, threshold: f64) -> BoundednessVerdict {
    let ok: Vec<&ScanSample> = samples.iter().filter(|s| s.error.is_none()).collect();
    let norm_m = |s: &ScanSample| s.norm(m).unwrap_or(f64::INFINITY);
    let sup_norm = ok.iter().map(|s| norm_m(s)).fold(0.0, f64::max);
    // radius levels, outermost first
    let mut levels: Vec<f64> = ok.iter().map(|s| s.radius).collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let level_sup = |r: f64| {
        ok.iter()
            .filter(|s| (s.radius - r).abs() <= 1e-12)
            .map(|s| norm_m(s))
            .fold(0.0, f64::max)
    };
    let sup_stable = sup_norm.is_finite()
        && !ok.is_empty()
        && match levels.as_slice() {
            [outer, next, ..] => level_sup(*outer) <= (1.0 + SUP_STABILITY_RTOL) * level_sup(*next),
            _ => true,
        };
    let m_above_threshold = m > threshold;
    BoundednessVerdict {
        m,
        threshold,
        m_above_threshold,
        sup_norm,
        sup_stable,
        hypothesis_satisfied: m_above_threshold && sup_stable && ok.len() == samples.len(),
    }
}

fn compactness(samples: &[ScanSample], n_rays: usize, radii: &[f64]) -> CompactnessVerdict {
    let n_r = radii.len();
    let at = |ray: usize, j: usize| &samples[ray * n_r + j];
    let level_max = |j: usize| (0..n_rays).map(|k| at(k, j).berezin.norm()).fold(0.0, f64::max);
    let innermost = level_max(0);
    let outermost = level_max(n_r - 1);
    let zero_operator = samples.iter().all(|s| s.berezin.norm() == 0.0);
    let decays = outermost < DECAY_FRACTION * innermost;
    let half = n_r / 2;
    let monotone_outer_half = (0..n_rays).all(|k| {
        (half + 1..n_r).all(|j| {
            let (prev, cur) = (at(k, j - 1).berezin.norm(), at(k, j).berezin.norm());
            cur <= prev * (1.0 + MONOTONE_RTOL) + f64::MIN_POSITIVE
        })
    });
    let fitted_rate = {
        let pts: Vec<(f64, f64)> = (half..n_r)
            .map(|j| ((1.0 - radii[j]).ln(), level_max(j)))
            .filter(|(_, y)| *y > 0.0)
            .map(|(x, y)| (x, y.ln()))
            .collect();
        (pts.len() >= 2).then(|| {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        })
    };
    let probe_consistent = (0..n_rays).all(|k| match (at(k, 0).norm(1.0), at(k, n_r - 1).norm(1.0)) {
        (Some(a), Some(b)) => b < a || (a == 0.0 && b == 0.0),
        _ => false,
    });
    let complete = samples.iter().all(|s| s.error.is_none());
    let consistent_with_compact = complete && (zero_operator || (decays && monotone_outer_half));
    let label = if !complete {
        "incomplete"
    } else if consistent_with_compact {
        "compact-consistent"
    } else {
        "not compact-consistent"
    };
    CompactnessVerdict {
        innermost,
        outermost,
        decays,
        monotone_outer_half,
        zero_operator,
        fitted_rate,
        probe_consistent,
        consistent_with_compact,
        label: label.to_string(),
    }
}

/// `sup_z ‖S_z 1‖_{m,α}` over `z_samples` against the boundedness threshold.
/// Also records `‖S_z 1‖_{t,α}` for `t ∈ {1, m/2}` and the Berezin values.
pub fn boundedness_report(
    s: &OperatorSpec,
    params: SpaceParams,
    z_samples: &[DiskPoint],
    policy: GridPolicy,
) -> Result<ScanReport> {
    let (m, threshold) = scan_params(&params)?;
    let ts = norm_exponents(m);
    let mut order: Vec<usize> = (0..z_samples.len()).collect();
    order.sort_by(|&a, &b| {
        z_samples[a]
            .modulus()
            .total_cmp(&z_samples[b].modulus())
            .then(a.cmp(&b))
    });
    let samples: Vec<ScanSample> = order
        .par_iter()
        .map(|&i| {
            let z = z_samples[i];
            sample(s, params.alpha, policy, &ts, i, z.value().arg(), z)
        })
        .collect();
    Ok(ScanReport {
        operator: s.name(),
        params,
        rays: Vec::new(),
        radii: Vec::new(),
        complete: samples.iter().all(|x| x.error.is_none()),
        boundedness: boundedness(&samples, m, threshold),
        compactness: None,
        samples,
        metadata: ScanMetadata {
            grid: policy,
            norm_exponents: ts,
            decay_fraction: DECAY_FRACTION,
            sup_stability_rtol: SUP_STABILITY_RTOL,
        },
    })
}

/// Berezin transform and `‖S_z 1‖_{t,α}`, `t ∈ {1, m/2, m}`, on rays × radii,
/// with the boundedness and compactness verdicts.
pub fn compactness_scan(
    s: &OperatorSpec,
    params: SpaceParams,
    rays: &[f64],
    radii: &[f64],
    policy: GridPolicy,
) -> Result<ScanReport> {
    let (m, threshold) = scan_params(&params)?;
    if rays.is_empty() || radii.len() < 2 {
        return Err(Error::param(
            "radii",
            radii.len() as f64,
            "need at least one ray and two radii",
        ));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("radii", f64::NAN, "radii must be strictly increasing"));
    }
    let pts: Vec<(usize, f64, DiskPoint)> = rays
        .iter()
        .enumerate()
        .flat_map(|(k, &t)| radii.iter().map(move |&r| (k, t, r)))
        .map(|(k, t, r)| Ok((k, t, DiskPoint::polar(r, t)?)))
        .collect::<Result<_>>()?;
    let ts = norm_exponents(m);
    let samples: Vec<ScanSample> = pts
        .par_iter()
        .map(|&(k, t, z)| sample(s, params.alpha, policy, &ts, k, t, z))
        .collect();
    let compactness = compactness(&samples, rays.len(), radii);
    Ok(ScanReport {
        operator: s.name(),
        params,
        rays: rays.to_vec(),
        radii: radii.to_vec(),
        complete: samples.iter().all(|x| x.error.is_none()),
        boundedness: boundedness(&samples, m, threshold),
        compactness: Some(compactness),
        samples,
        metadata: ScanMetadata {
            grid: policy,
            norm_exponents: ts,
            decay_fraction: DECAY_FRACTION,
            sup_stability_rtol: SUP_STABILITY_RTOL,
        },
    })
}
