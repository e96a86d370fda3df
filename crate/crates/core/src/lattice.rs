//! Hyperbolic `r`-lattices truncated to `|w| <= R_max`, their cells and cell measures.
//!
//! Centers are a greedy maximal `r/2`-separated subset of ring candidates
//! whose own covering radius is at most `r/4`, so every point of the
//! truncated disk lies within `3r/4` of a center.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bergman_metric_c, hyperbolic_radius, DiskPoint};
use crate::quadrature::{check_alpha, QuadratureGrid};

/// Maximum number of centers [`Lattice::build`] will produce.
pub const MAX_CENTERS: usize = 1_000_000;
const MAX_CANDIDATES: usize = 40_000_000;
const EXPORT_HEADER: &str = "# bergman-lab lattice v1";
const MULTIPLICITY_SAMPLES: usize = 10_000;
const MULTIPLICITY_SEED: u64 = 0x5eed;
const TIE_RTOL: f64 = 1e-12;

/// Centers bucketed by hyperbolic radius, sorted by angle inside a bucket.
#[derive(Debug, Clone, Default)]
struct SpatialIndex {
    width: f64,
    buckets: Vec<Bucket>,
}

#[derive(Debug, Clone, Default)]
struct Bucket {
    lo: f64,
    hi: f64,
    entries: Vec<(f64, usize)>,
}

impl SpatialIndex {
    fn new(width: f64) -> Self {
        SpatialIndex {
            width,
            buckets: Vec::new(),
        }
    }

    fn bucket_of(&self, modulus: f64) -> usize {
        (hyperbolic_radius(modulus) / self.width).floor().max(0.0) as usize
    }

    fn insert(&mut self, c: Complex64, index: usize) {
        let m = c.norm();
        let b = self.bucket_of(m);
        if b >= self.buckets.len() {
            self.buckets.resize_with(b + 1, || Bucket {
                lo: f64::INFINITY,
                hi: 0.0,
                entries: Vec::new(),
            });
        }
        let bucket = &mut self.buckets[b];
        bucket.lo = bucket.lo.min(m);
        bucket.hi = bucket.hi.max(m);
        let a = angle(c);
        let pos = bucket.entries.partition_point(|&(t, i)| (t, i) < (a, index));
        bucket.entries.insert(pos, (a, index));
    }

    /// Calls `visit(index)` for every center that may lie within Bergman
    /// distance `d` of `w` (a superset of the true neighbours).
    fn for_candidates(&self, w: Complex64, d: f64, mut visit: impl FnMut(usize)) {
        if self.buckets.is_empty() {
            return;
        }
        let rw = hyperbolic_radius(w.norm());
        let first = ((rw - d) / self.width).floor().max(0.0) as usize;
        let last = (((rw + d) / self.width).floor() as usize).min(self.buckets.len() - 1);
        if first > last {
            return;
        }
        let t2 = d.tanh().powi(2);
        let a = w.norm();
        let theta = angle(w);
        for bucket in &self.buckets[first..=last] {
            if bucket.entries.is_empty() {
                continue;
            }
            let half = angular_window(a, bucket.lo, bucket.hi, t2);
            if half < 0.0 {
                continue;
            }
            if half >= PI {
                bucket.entries.iter().for_each(|&(_, i)| visit(i));
                continue;
            }
            let (lo, hi) = (theta - half, theta + half);
            let es = &bucket.entries;
            let range = |from: f64, to: f64| {
                let s = es.partition_point(|&(t, _)| t < from);
                let e = es.partition_point(|&(t, _)| t <= to);
                s..e
            };
            if lo < 0.0 {
                for k in range(lo + TAU, TAU) {
                    visit(es[k].1);
                }
                for k in range(0.0, hi) {
                    visit(es[k].1);
                }
            } else if hi >= TAU {
                for k in range(lo, TAU) {
                    visit(es[k].1);
                }
                for k in range(0.0, hi - TAU) {
                    visit(es[k].1);
                }
            } else {
                for k in range(lo, hi) {
                    visit(es[k].1);
                }
            }
        }
    }
}

fn angle(c: Complex64) -> f64 {
    let a = c.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Largest angular offset at which a center with modulus in `[lo, hi]` can be
/// within pseudo-hyperbolic distance `sqrt(t2)` of a point of modulus `a`.
/// Negative when no such center exists, `>= π` when all angles qualify.
fn angular_window(a: f64, lo: f64, hi: f64, t2: f64) -> f64 {
    if a < 1e-9 || lo < 1e-9 {
        return PI;
    }
    // ρ < T  ⇔  cos Δ > A/ρ_c + B ρ_c
    let q = (1.0 - a * a) / (1.0 - t2);
    let big_a = (1.0 - q) / (2.0 * a);
    let big_b = (a * a + q) / (2.0 * a);
    let at = if big_a > 0.0 {
        (big_a / big_b).sqrt().clamp(lo, hi)
    } else {
        lo
    };
    let g = big_a / at + big_b * at;
    if g <= -1.0 {
        PI
    } else if g > 1.0 + 1e-12 {
        -1.0
    } else {
        g.min(1.0).acos() + 1e-9
    }
}

/// A truncated `r`-lattice.
#[derive(Debug, Clone)]
pub struct Lattice {
    r: f64,
    r_max: f64,
    centers: Vec<DiskPoint>,
    multiplicity: usize,
    index: SpatialIndex,
}

/// Per-cell `dA_α` masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMeasures {
    pub alpha: f64,
    pub values: Vec<f64>,
}

impl CellMeasures {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub r: f64,
    pub r_max: f64,
    pub count: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Largest sampled `min_k β(w, a_k)`.
    pub covering_gap: f64,
    pub worst_sample: Complex64,
    /// Smallest `β(a_i, a_j)`, `i != j` (`+inf` with fewer than two centers).
    pub min_separation: f64,
    pub covering_ok: bool,
    pub separation_ok: bool,
    pub pass: bool,
}

impl Lattice {
    /// Greedy maximal `r/2`-separated lattice in `|w| <= r_max`, seeded at 0.
    pub fn build(r: f64, r_max: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::param("r", r, "must lie in (0, 1]"));
        }
        check_r_max(r_max)?;
        let outer = hyperbolic_radius(r_max);
        let step = r / 4.0;
        let n_rings = (outer / step).ceil().max(1.0) as usize;
        let h = outer / n_rings as f64;

        let sep = 0.5 * r;
        let mut centers: Vec<DiskPoint> = vec![DiskPoint::ORIGIN];
        let mut index = SpatialIndex::new(0.25 * r);
        index.insert(Complex64::new(0.0, 0.0), 0);
        let rings: Vec<(f64, usize)> = (1..=n_rings)
            .map(|j| {
                let radius = j as f64 * h;
                // exact on the last ring so the boundary circle is covered
                let modulus = if j == n_rings { r_max } else { radius.tanh() };
                let n_ang = (PI * (2.0 * radius).sinh() / step).ceil().max(1.0) as usize;
                (modulus, n_ang)
            })
            .collect();
        if rings.iter().map(|r| r.1).sum::<usize>() > MAX_CANDIDATES {
            return Err(Error::LatticeTooLarge { cap: MAX_CENTERS });
        }
        for &(modulus, n_ang) in &rings {
            for i in 0..n_ang {
                let c = Complex64::from_polar(modulus, TAU * i as f64 / n_ang as f64);
                let mut clear = true;
                index.for_candidates(c, sep, |k| {
                    if clear && bergman_metric_c(c, centers[k].value()) < sep {
                        clear = false;
                    }
                });
                if clear {
                    if centers.len() == MAX_CENTERS {
                        return Err(Error::LatticeTooLarge { cap: MAX_CENTERS });
                    }
                    index.insert(c, centers.len());
                    centers.push(DiskPoint::interior(c));
                }
            }
        }
        let mut lat = Lattice {
            r,
            r_max,
            centers,
            multiplicity: 0,
            index,
        };
        lat.multiplicity = lat.measure_multiplicity(MULTIPLICITY_SAMPLES, MULTIPLICITY_SEED);
        Ok(lat)
    }

    /// A lattice with the given centers, taken as is (no covering or
    /// separation guarantee; see [`Lattice::verify`]).
    pub fn from_centers(r: f64, r_max: f64, centers: Vec<DiskPoint>) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::param("r", r, "must be positive"));
        }
        check_r_max(r_max)?;
        if centers.len() > MAX_CENTERS {
            return Err(Error::LatticeTooLarge { cap: MAX_CENTERS });
        }
        let mut index = SpatialIndex::new(0.25 * r);
        for (k, c) in centers.iter().enumerate() {
            index.insert(c.value(), k);
        }
        let mut lat = Lattice {
            r,
            r_max,
            centers,
            multiplicity: 0,
            index,
        };
        lat.multiplicity = lat.measure_multiplicity(MULTIPLICITY_SAMPLES, MULTIPLICITY_SEED);
        Ok(lat)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn centers(&self) -> &[DiskPoint] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Largest number of dilated disks `D(a_k, 2r)` containing one sampled point.
    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    fn measure_multiplicity(&self, n: usize, seed: u64) -> usize {
        let d = 2.0 * self.r;
        sample_points(self.r_max, n, seed)
            .par_iter()
            .map(|&w| {
                let mut count = 0;
                self.index.for_candidates(w, d, |k| {
                    if bergman_metric_c(w, self.centers[k].value()) < d {
                        count += 1;
                    }
                });
                count
            })
            .max()
            .unwrap_or(0)
    }

    /// Index of the nearest center in the Bergman metric; near-ties (relative
    /// `1e-12`) go to the smaller index.
    pub fn cell_assign(&self, w: DiskPoint) -> Result<usize> {
        let m = w.modulus();
        if m > self.r_max * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                modulus: m,
                r_max: self.r_max,
            });
        }
        self.nearest(w.value())
            .map(|(k, _)| k)
            .ok_or(Error::CellIndex { index: 0, count: 0 })
    }

    /// `(k, β(w, a_k))` for the nearest center.
    fn nearest(&self, w: Complex64) -> Option<(usize, f64)> {
        // ρ² is monotone in β and cheaper to evaluate
        let mut best: Option<(usize, f64)> = None;
        let bound = 0.76 * self.r;
        let limit = bound.tanh().powi(2);
        self.index.for_candidates(w, bound, |k| {
            let d = rho_sq(w, self.centers[k].value());
            if d < limit {
                consider(&mut best, k, d);
            }
        });
        if best.is_none() {
            // built lattices cover within 3r/4; other center sets may need a full scan
            for (k, c) in self.centers.iter().enumerate() {
                consider(&mut best, k, rho_sq(w, c.value()));
            }
        }
        best.map(|(k, _)| (k, bergman_metric_c(w, self.centers[k].value())))
    }

    /// Covering and separation check on seeded samples uniform in area over
    /// `|w| <= R_max`.
    pub fn verify(&self, n_samples: usize, seed: u64) -> LatticeReport {
        let samples = sample_points(self.r_max, n_samples, seed);
        let gaps: Vec<f64> = samples
            .par_iter()
            .map(|&w| self.nearest(w).map_or(f64::INFINITY, |(_, d)| d))
            .collect();
        let (mut covering_gap, mut worst_sample) = (0.0, Complex64::new(0.0, 0.0));
        for (g, w) in gaps.iter().zip(&samples) {
            if *g > covering_gap {
                covering_gap = *g;
                worst_sample = *w;
            }
        }
        let min_separation = self.min_separation();
        let covering_ok = covering_gap < self.r + 1e-9;
        let separation_ok = min_separation >= 0.5 * self.r;
        LatticeReport {
            r: self.r,
            r_max: self.r_max,
            count: self.len(),
            n_samples,
            seed,
            covering_gap,
            worst_sample,
            min_separation,
            covering_ok,
            separation_ok,
            pass: covering_ok && separation_ok,
        }
    }

    fn min_separation(&self) -> f64 {
        let d = self.r;
        let near = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let a = self.centers[i].value();
                let mut m = f64::INFINITY;
                self.index.for_candidates(a, d, |k| {
                    if k != i {
                        m = m.min(bergman_metric_c(a, self.centers[k].value()));
                    }
                });
                m
            })
            .reduce(|| f64::INFINITY, f64::min);
        if near.is_finite() {
            return near;
        }
        // no pair closer than r: fall back to all pairs
        let mut m = f64::INFINITY;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                m = m.min(bergman_metric_c(self.centers[i].value(), self.centers[j].value()));
            }
        }
        m
    }

    /// A grid over `|w| <= R_max` fine enough to resolve the smallest cells.
    pub fn measure_grid(&self, alpha: f64) -> Result<QuadratureGrid> {
        // rough Euclidean size of the outermost cells
        let e = (1.0 - self.r_max) * (0.5 * self.r).tanh();
        let n_ang = ((2.0 * TAU / e).ceil() as usize).next_power_of_two().clamp(256, 4096);
        let n_rad = ((2.0 / e).ceil() as usize).next_power_of_two().clamp(64, 512);
        QuadratureGrid::truncated(alpha, self.r_max, n_rad, n_ang)
    }

    /// `A_α(D_k)` for every cell, each node of `grid` credited to its cell.
    pub fn cell_measures(&self, alpha: f64, grid: &QuadratureGrid) -> Result<CellMeasures> {
        check_alpha(alpha)?;
        if grid.alpha() != alpha {
            return Err(Error::param("alpha", alpha, "does not match the grid weight"));
        }
        match grid.r_max() {
            Some(rm) if rm <= self.r_max => {}
            _ => {
                return Err(Error::param(
                    "grid",
                    grid.r_max().unwrap_or(1.0),
                    "cell measures need a grid truncated inside the lattice domain",
                ))
            }
        }
        let n_ang = grid.n_ang();
        let rows: Vec<Vec<usize>> = (0..grid.n_rad())
            .into_par_iter()
            .map(|i| {
                (0..n_ang)
                    .map(|j| {
                        self.nearest(grid.node(i * n_ang + j))
                            .map(|(k, _)| k)
                            .expect("lattice has centers")
                    })
                    .collect()
            })
            .collect();
        let mut values = vec![0.0; self.len()];
        for (i, row) in rows.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                values[k] += grid.node_weight(i * n_ang + j);
            }
        }
        Ok(CellMeasures { alpha, values })
    }

    pub fn cell_measure(&self, k: usize, alpha: f64, grid: &QuadratureGrid) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::CellIndex {
                index: k,
                count: self.len(),
            });
        }
        Ok(self.cell_measures(alpha, grid)?.values[k])
    }

    /// Versioned text record: header, `r R_max count`, then `re im` per center.
    pub fn export(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{EXPORT_HEADER}").unwrap();
        writeln!(s, "{:.16e} {:.16e} {}", self.r, self.r_max, self.len()).unwrap();
        for c in &self.centers {
            writeln!(s, "{:.16e} {:.16e}", c.value().re, c.value().im).unwrap();
        }
        s
    }

    pub fn import(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, h)) if h == EXPORT_HEADER => {}
            _ => return Err(parse_err(1, "missing lattice header")),
        }
        let (ln, meta) = lines.next().ok_or_else(|| parse_err(2, "missing r R_max count"))?;
        let fields: Vec<&str> = meta.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(ln, "expected r R_max count"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(ln, &e.to_string()));
        let r = num(fields[0])?;
        let r_max = num(fields[1])?;
        let count: usize = fields[2].parse().map_err(|_| parse_err(ln, "bad count"))?;
        let mut centers = Vec::with_capacity(count);
        for (ln, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(re), Some(im), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(ln, "expected two numbers"));
            };
            let re: f64 = re.parse().map_err(|_| parse_err(ln, "bad real part"))?;
            let im: f64 = im.parse().map_err(|_| parse_err(ln, "bad imaginary part"))?;
            centers.push(DiskPoint::new(re, im).map_err(|e| parse_err(ln, &e.to_string()))?);
        }
        if centers.len() != count {
            return Err(parse_err(0, "center count does not match header"));
        }
        Lattice::from_centers(r, r_max, centers)
    }
}

#[inline]
fn rho_sq(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm_sqr() / (Complex64::new(1.0, 0.0) - z.conj() * w).norm_sqr()
}

fn consider(best: &mut Option<(usize, f64)>, k: usize, d: f64) {
    match *best {
        None => *best = Some((k, d)),
        Some((bk, bd)) => {
            let tie = (d - bd).abs() <= TIE_RTOL * bd.max(f64::MIN_POSITIVE);
            if (tie && k < bk) || (!tie && d < bd) {
                *best = Some((k, d));
            }
        }
    }
}

fn check_r_max(r_max: f64) -> Result<()> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::param("r_max", r_max, "must lie in (0, 1)"));
    }
    Ok(())
}

/// Area-uniform points in `|w| <= r_max`; each sample depends only on
/// `(seed, index)`, so results do not depend on how work is split.
pub fn sample_points(r_max: f64, n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let t: f64 = rng.random();
            Complex64::from_polar(r_max * u.sqrt(), TAU * t)
        })
        .collect()
}
