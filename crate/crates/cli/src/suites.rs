//! Invariant sweeps behind `verify <suite>`, one CSV row per check.

#![allow(clippy::type_complexity)]

use std::f64::consts::TAU;
use std::fmt::Write as _;

use bergman_lab::atomic::{round_trip, Decomposer, DEFAULT_RIDGE, ROUND_TRIP_RADIUS, ROUND_TRIP_TOL};
use bergman_lab::estimates::{i_ct, i_ct_bounds, lattice_sum_envelope_check};
use bergman_lab::geometry::{bergman_disk, bergman_metric, mobius, pseudo_hyperbolic};
use bergman_lab::kernels::{kernel_c, kernel_norm, kernel_norm_bounds, normalizer};
use bergman_lab::operators::{
    berezin, berezin_closed_form, kernel_pointwise_bound_check, toeplitz_berezin_direct, u_z_apply,
};
use bergman_lab::quadrature::integrate_adaptive;
use bergman_lab::{DiskPoint, Lattice, OperatorSpec, QuadratureGrid, Result, Sequence, Symbol};
use num_complex::Complex64;

pub const SUITES: [&str; 7] = [
    "geometry",
    "quadrature",
    "kernels",
    "estimates",
    "lattice",
    "atomic",
    "operators",
];

const ALPHAS: [f64; 4] = [-0.5, 0.0, 1.0, 2.5];

pub struct Row {
    pub check: &'static str,
    pub params: String,
    pub observed: f64,
    pub expected: String,
    pub pass: bool,
}

impl Row {
    fn le(check: &'static str, params: String, observed: f64, bound: f64) -> Row {
        Row {
            check,
            params,
            observed,
            expected: format!("<= {bound:e}"),
            pass: observed <= bound,
        }
    }

    fn within(check: &'static str, params: String, observed: f64, lo: f64, hi: f64) -> Row {
        Row {
            check,
            params,
            observed,
            expected: format!("[{lo:.16e}; {hi:.16e}]"),
            pass: lo <= observed && observed <= hi,
        }
    }
}

pub const CSV_HEADER: &str = "check,parameters,observed,expected,pass";

pub fn to_csv(rows: &[Row]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{:.16e},{},{}",
            r.check, r.params, r.observed, r.expected, r.pass
        )
        .unwrap();
    }
    s
}

pub fn run(suite: &str, seed: u64) -> Option<Result<Vec<Row>>> {
    Some(match suite {
        "geometry" => geometry(),
        "quadrature" => quadrature(),
        "kernels" => kernels(),
        "estimates" => estimates(),
        "lattice" => lattice(seed),
        "atomic" => atomic(),
        "operators" => operators(),
        _ => return None,
    })
}

fn sample_points() -> Result<Vec<DiskPoint>> {
    [(0.0, 0.0), (0.3, 1.0), (0.6, -2.0), (0.8, 2.9), (0.95, 0.4)]
        .iter()
        .map(|&(r, t)| DiskPoint::polar(r, t))
        .collect()
}

fn pt_str(z: DiskPoint) -> String {
    format!("{:+.3}{:+.3}i", z.value().re, z.value().im)
}

fn geometry() -> Result<Vec<Row>> {
    let pts = sample_points()?;
    let mut rows = Vec::new();
    let mut inv: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    for &z in &pts {
        for &w in &pts {
            inv = inv.max((mobius(z, mobius(z, w)).value() - w.value()).norm());
            sym = sym.max((pseudo_hyperbolic(z, w) - pseudo_hyperbolic(w, z)).abs());
            let a = pts[3];
            invariance =
                invariance.max((pseudo_hyperbolic(mobius(a, z), mobius(a, w)) - pseudo_hyperbolic(z, w)).abs());
        }
    }
    rows.push(Row::le("mobius_involution", "5x5 points".into(), inv, 1e-12));
    rows.push(Row::le("pseudo_hyperbolic_symmetric", "5x5 points".into(), sym, 1e-15));
    rows.push(Row::le(
        "pseudo_hyperbolic_invariant",
        "5x5 points".into(),
        invariance,
        1e-12,
    ));
    for &z in &pts {
        let err = (bergman_metric(DiskPoint::ORIGIN, z) - z.modulus().atanh()).abs();
        rows.push(Row::le("metric_from_origin", format!("z={}", pt_str(z)), err, 1e-12));
    }
    for &a in &pts {
        for &r in &[0.25, 1.0, 2.0] {
            let d = bergman_disk(a, r)?;
            let mut err: f64 = 0.0;
            for j in 0..16 {
                let w = DiskPoint::from_complex(d.center + Complex64::from_polar(d.radius, TAU * j as f64 / 16.0))?;
                err = err.max((bergman_metric(a, w) - r).abs());
            }
            rows.push(Row::le(
                "bergman_disk_boundary",
                format!("a={} r={r}", pt_str(a)),
                err,
                1e-8,
            ));
        }
    }
    Ok(rows)
}

fn quadrature() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &alpha in &ALPHAS {
        let grid = QuadratureGrid::default_for(alpha)?;
        rows.push(Row::le(
            "unit_mass",
            format!("alpha={alpha}"),
            (grid.mass() - 1.0).abs(),
            1e-13,
        ));
        // ∫|w|^{2n} dA_α = Π_{k<=n} k/(k+α+1)
        let mut worst: f64 = 0.0;
        let mut exact = 1.0;
        for n in 0..=40 {
            if n > 0 {
                exact *= n as f64 / (n as f64 + alpha + 1.0);
            }
            let vals: Vec<f64> = grid.nodes().map(|w| w.norm_sqr().powi(n)).collect();
            worst = worst.max((grid.integrate_real_values(&vals)? / exact - 1.0).abs());
        }
        rows.push(Row::le(
            "monomial_moments",
            format!("alpha={alpha} n<=40"),
            worst,
            1e-12,
        ));
        let z = Complex64::new(0.5, 0.0);
        let vals: Vec<f64> = grid.nodes().map(|w| kernel_c(z, w, alpha).norm_sqr()).collect();
        let exact = 0.75f64.powf(-(2.0 + alpha));
        let err = (grid.integrate_real_values(&vals)? / exact - 1.0).abs();
        rows.push(Row::le("kernel_norm_sq", format!("alpha={alpha} z=0.5"), err, 1e-12));
        let adaptive = integrate_adaptive(|w| Complex64::new(w.norm_sqr(), 0.0), alpha, 1e-12)?;
        let err = (adaptive.value.re - 1.0 / (alpha + 2.0)).abs();
        rows.push(Row::le("adaptive_second_moment", format!("alpha={alpha}"), err, 1e-12));
    }
    Ok(rows)
}

fn kernels() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &alpha in &ALPHAS {
        let grid = QuadratureGrid::default_for(alpha)?;
        let nodes: Vec<Complex64> = grid.nodes().collect();
        for &(r, t) in &[(0.0, 0.0), (0.3, 1.0), (0.6, -2.0), (0.9, 0.5)] {
            let z = Complex64::from_polar(r, t);
            let kz: Vec<Complex64> = nodes.iter().map(|&w| kernel_c(z, w, alpha).conj()).collect();
            let mut worst: f64 = 0.0;
            for deg in 0..=10 {
                let vals: Vec<Complex64> = nodes.iter().zip(&kz).map(|(w, k)| w.powi(deg) * k).collect();
                worst = worst.max((grid.integrate_values(&vals)? - z.powi(deg)).norm());
            }
            rows.push(Row::le(
                "reproducing",
                format!("alpha={alpha} |z|={r} deg<=10"),
                worst,
                1e-8,
            ));
        }
        for &r in &[0.0, 0.5, 0.9, 0.95] {
            let z = DiskPoint::polar(r, 0.7)?;
            let n = kernel_norm(z, 2.0, alpha, &QuadratureGrid::focused(alpha, r)?)? * normalizer(z.value(), alpha);
            rows.push(Row::le(
                "normalized_kernel_norm",
                format!("alpha={alpha} |z|={r}"),
                (n - 1.0).abs(),
                1e-8,
            ));
        }
    }
    for &p in &[1.5, 2.0, 3.0] {
        for &alpha in &[0.0, 1.0] {
            for &r in &[0.3, 0.8, 0.95] {
                let z = DiskPoint::polar(r, -1.1)?;
                let v = kernel_norm(z, p, alpha, &QuadratureGrid::focused(alpha, r)?)?;
                let (lo, hi) = kernel_norm_bounds(z, p, alpha)?;
                rows.push(Row::within(
                    "kernel_norm_bounds",
                    format!("p={p} alpha={alpha} |z|={r}"),
                    v,
                    lo * (1.0 - 1e-9),
                    hi * (1.0 + 1e-9),
                ));
            }
        }
    }
    Ok(rows)
}

fn estimates() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &(c, t) in &[(-1.0, 0.0), (1.0, 0.0), (2.0, 1.0), (0.5, -0.5), (0.0, 0.0)] {
        for &r in &[0.0, 0.5, 0.9, 0.99] {
            let z = DiskPoint::polar(r, 2.2)?;
            let b = i_ct_bounds(z, c, t)?;
            let v = i_ct(z, c, t, 1e-12 * b.upper.abs().max(1.0))?;
            let slack = b.factor * v.err_est + 1e-9;
            let mut row = Row::within(
                "i_ct_bracket",
                format!("c={c} t={t} |z|={r}"),
                v.value,
                b.lower,
                b.upper,
            );
            row.expected = format!("{} (slack {slack:.1e})", row.expected);
            row.pass = b.contains(v.value, slack);
            rows.push(row);
        }
    }
    let lat = Lattice::build(0.5, 0.9995)?;
    for &(t1, t2, ref radii) in &[
        (2.0, 3.0, vec![0.5, 0.9, 0.99, 0.999]),
        (2.0, 2.0, vec![0.5, 0.9, 0.99, 0.999]),
        (2.0, 0.0, vec![0.5, 0.9, 0.99]),
    ] {
        let rep = lattice_sum_envelope_check(&lat, t1, t2, radii)?;
        let last = rep.rows.last().map_or(f64::NAN, |r| r.ratio);
        let mut row = Row::le(
            "lattice_sum_envelope",
            format!("t1={t1} t2={t2} regime={}", rep.regime.name()),
            last,
            rep.constant,
        );
        row.expected = format!("bounded ratio (max {:.6e})", rep.constant);
        row.pass = rep.pass;
        rows.push(row);
    }
    Ok(rows)
}

fn lattice(seed: u64) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &(r, r_max) in &[(0.5, 0.95), (0.35, 0.9), (0.7, 0.99), (1.0, 0.5)] {
        let lat = Lattice::build(r, r_max)?;
        let rep = lat.verify(10_000, seed);
        let params = format!("r={r} r_max={r_max} centers={}", lat.len());
        rows.push(Row::le("covering_gap", params.clone(), rep.covering_gap, r + 1e-9));
        let mut sep = Row::le("separation", params.clone(), rep.min_separation, f64::INFINITY);
        sep.expected = format!(">= {:e}", r / 2.0);
        sep.pass = rep.min_separation >= r / 2.0;
        rows.push(sep);
        for &alpha in &[0.0, 1.0] {
            let total = lat.cell_measures(alpha, &lat.measure_grid(alpha)?)?.total();
            let expected = 1.0 - (1.0 - r_max * r_max).powf(alpha + 1.0);
            rows.push(Row::le(
                "cell_total",
                format!("{params} alpha={alpha}"),
                (total - expected).abs(),
                1e-3,
            ));
        }
    }
    Ok(rows)
}

fn atomic() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let lat = Lattice::build(0.5, 0.95)?;
    let a = Complex64::new(0.3, 0.0);
    for &alpha in &[0.0, 1.0] {
        let dec = Decomposer::new(&lat, alpha, DEFAULT_RIDGE)?;
        let fs: [(&str, Box<dyn Fn(DiskPoint) -> Complex64>); 3] = [
            ("one", Box::new(|_| Complex64::new(1.0, 0.0))),
            ("w", Box::new(|w: DiskPoint| w.value())),
            (
                "kernel:0.3",
                Box::new(move |w: DiskPoint| kernel_c(a, w.value(), alpha)),
            ),
        ];
        for (name, f) in &fs {
            let exp = dec.decompose(f, 2.0)?;
            let rt = round_trip(&exp, f, ROUND_TRIP_RADIUS);
            rows.push(Row::le(
                "round_trip",
                format!("f={name} p=2 alpha={alpha} r=0.5 radius={ROUND_TRIP_RADIUS}"),
                rt.relative_error,
                ROUND_TRIP_TOL,
            ));
        }
    }
    Ok(rows)
}

fn operators() -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let d = OperatorSpec::diagonal(Sequence::inv_n());
    let t = Symbol::one_minus_r2();
    for &alpha in &[0.0, 1.0] {
        let (mut id, mut proj, mut diag, mut toep): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for &r in &[0.0, 0.3, 0.6, 0.8, 0.9, 0.95] {
            let z = DiskPoint::polar(r, 2.4)?;
            let grid = QuadratureGrid::focused(alpha, r)?;
            id = id.max((berezin(&OperatorSpec::Identity, z, alpha, &grid)? - 1.0).norm());
            let b = berezin(&OperatorSpec::projection_onto_constants(), z, alpha, &grid)?;
            proj = proj.max((b - (1.0 - r * r).powf(2.0 + alpha)).norm());
            let closed = berezin_closed_form(&d, z, alpha)?.expect("diagonal operators have a closed form");
            diag = diag.max((berezin(&d, z, alpha, &grid)? - closed).norm());
            let direct = toeplitz_berezin_direct(&t, z, alpha, &grid)?;
            toep = toep.max((berezin(&OperatorSpec::Toeplitz(t.clone()), z, alpha, &grid)? - direct).norm());
        }
        rows.push(Row::le(
            "berezin_identity",
            format!("alpha={alpha} |z|<=0.95"),
            id,
            1e-8,
        ));
        rows.push(Row::le(
            "berezin_projection",
            format!("alpha={alpha} |z|<=0.95"),
            proj,
            1e-6,
        ));
        rows.push(Row::le(
            "berezin_diagonal_dual_path",
            format!("alpha={alpha} |z|<=0.95"),
            diag,
            1e-6,
        ));
        rows.push(Row::le(
            "berezin_toeplitz_dual_path",
            format!("alpha={alpha} |z|<=0.95"),
            toep,
            1e-6,
        ));
    }
    let grid = QuadratureGrid::default_for(0.0)?;
    let a = Complex64::new(0.3, 0.0);
    let fs: [(&str, fn(Complex64, Complex64) -> Complex64); 4] = [
        ("1", |_, _| Complex64::new(1.0, 0.0)),
        ("w", |w, _| w),
        ("w^2", |w, _| w * w),
        ("K_0.3", |w, a| kernel_c(a, w, 0.0)),
    ];
    for &r in &[0.0, 0.5, 0.9] {
        let z = DiskPoint::polar(r, 1.0)?;
        for (name, f) in &fs {
            let norm_sq = |g: &dyn Fn(Complex64) -> Complex64| -> Result<f64> {
                let vals: Vec<f64> = grid.nodes().map(|w| g(w).norm_sqr()).collect();
                grid.integrate_real_values(&vals)
            };
            let plain = norm_sq(&|w| f(w, a))?;
            let moved = norm_sq(&|w| {
                u_z_apply(
                    z,
                    |u| f(u.value(), a),
                    DiskPoint::from_complex(w).expect("grid nodes are interior"),
                    0.0,
                )
            })?;
            rows.push(Row::le(
                "u_z_isometry",
                format!("f={name} |z|={r} alpha=0"),
                (moved.sqrt() - plain.sqrt()).abs(),
                1e-7,
            ));
        }
    }
    let ops = [
        OperatorSpec::Identity,
        OperatorSpec::Toeplitz(Symbol::one()),
        OperatorSpec::Toeplitz(Symbol::one_minus_r2()),
        OperatorSpec::projection_onto_constants(),
    ];
    let pts = sample_points()?;
    let grid = QuadratureGrid::focused(0.0, 0.95)?;
    for s in &ops {
        for &m in &[2.0, 4.0, 8.0] {
            let mut worst: f64 = 0.0;
            let mut pass = true;
            for &z in &pts[..4] {
                for &w in &pts[..4] {
                    let b = kernel_pointwise_bound_check(s, z, w, m, 0.0, &grid)?;
                    pass &= b.pass;
                    if b.rhs > 0.0 {
                        worst = worst.max(b.lhs / b.rhs);
                    }
                }
            }
            let mut row = Row::le(
                "pointwise_bound",
                format!("op={} m={m} 4x4 points", s.name()),
                worst,
                1.0 + 1e-4,
            );
            row.pass = pass;
            rows.push(row);
        }
    }
    Ok(rows)
}
