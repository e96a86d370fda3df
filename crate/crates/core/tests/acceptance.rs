//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

// named function tables
#![allow(clippy::type_complexity)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bergman_lab::atomic::{round_trip, weak_null_coeff_decay, Decomposer, DEFAULT_RIDGE};
use bergman_lab::diagnostics::{
    compactness_scan, default_radii, equally_spaced_rays, m_threshold, m_threshold_small_p, pq_regime, GridPolicy,
    PqRegime,
};
use bergman_lab::estimates::{i_ct, i_ct_bounds};
use bergman_lab::kernels::{kernel_c, kernel_norm, kernel_norm_bounds};
use bergman_lab::lattice::Lattice;
use bergman_lab::operators::{
    apply_to_kernel, berezin, berezin_closed_form, KernelImage, OperatorSpec, Sequence, Symbol,
};
use bergman_lab::{DiskPoint, QuadratureGrid, SpaceParams};
use num_complex::Complex64;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, secs: u64) -> std::result::Result<(), String> {
    check(
        elapsed.as_secs_f64() < secs as f64,
        format!("took {elapsed:.1?}, limit {secs} s"),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cases = [(-1.0, 0.0), (1.0, 0.0), (2.0, 1.0), (0.5, -0.5), (0.0, 0.0)];
    let mut n = 0;
    for &(c, t) in &cases {
        for &r in &[0.0, 0.5, 0.9, 0.99] {
            let z = DiskPoint::polar(r, 0.4).map_err(|e| e.to_string())?;
            let b = i_ct_bounds(z, c, t).map_err(|e| e.to_string())?;
            let v = i_ct(z, c, t, 1e-12 * b.upper.abs().max(1.0)).map_err(|e| e.to_string())?;
            check(
                b.contains(v.value, b.factor * v.err_est + 1e-9),
                format!("c={c} t={t} |z|={r}: {} outside [{}, {}]", v.value, b.lower, b.upper),
            )?;
            n += 1;
        }
    }
    within(start.elapsed(), 30)?;
    Ok(format!("{n} brackets hold"))
}

// ∫|K_z|^p dA_α = (α+1) Σ_n ((s)_n/n!)² |z|^{2n} B(n+1, α+1), s = p(2+α)/2
fn kernel_norm_series(r: f64, p: f64, alpha: f64) -> f64 {
    let s = 0.5 * p * (2.0 + alpha);
    let (mut coef, mut beta, mut xn, mut total) = (1.0, 1.0 / (alpha + 1.0), 1.0, 0.0);
    for n in 0..1_000_000 {
        let term = coef * coef * xn * beta;
        total += term;
        if n > 10 && term < 1e-18 * total {
            break;
        }
        let nf = n as f64;
        coef *= (s + nf) / (nf + 1.0);
        beta *= (nf + 1.0) / (nf + alpha + 2.0);
        xn *= r * r;
    }
    ((alpha + 1.0) * total).powf(1.0 / p)
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for &alpha in &[-0.5, 0.0, 1.0, 2.5] {
        let grid = QuadratureGrid::default_for(alpha).map_err(|e| e.to_string())?;
        let nodes: Vec<Complex64> = grid.nodes().collect();
        for &(r, th) in &[
            (0.0, 0.0),
            (0.3, 1.0),
            (0.6, -2.0),
            (0.75, 2.9),
            (0.9, 0.5),
            (0.9, -1.7),
        ] {
            let z = Complex64::from_polar(r, th);
            let kz: Vec<Complex64> = nodes.iter().map(|&w| kernel_c(z, w, alpha).conj()).collect();
            for deg in 0..=10 {
                let vals: Vec<Complex64> = nodes.iter().zip(&kz).map(|(w, k)| w.powi(deg) * k).collect();
                let v = grid.integrate_values(&vals).map_err(|e| e.to_string())?;
                worst = worst.max((v - z.powi(deg)).norm());
            }
        }
    }
    check(worst <= 1e-8, format!("reproducing error {worst:e}"))?;
    let mut worst_norm: f64 = 0.0;
    for &alpha in &[-0.5, 0.0, 1.0, 2.5] {
        for &r in &[0.0, 0.3, 0.6, 0.8, 0.9, 0.95] {
            let z = DiskPoint::polar(r, 1.3).map_err(|e| e.to_string())?;
            let grid = QuadratureGrid::focused(alpha, r).map_err(|e| e.to_string())?;
            let n = kernel_norm(z, 2.0, alpha, &grid).map_err(|e| e.to_string())?;
            worst_norm = worst_norm.max((n * (1.0 - r * r).powf(0.5 * (2.0 + alpha)) - 1.0).abs());
        }
    }
    check(
        worst_norm <= 1e-8,
        format!("normalized kernel norm off by {worst_norm:e}"),
    )?;
    Ok(format!("reproducing error {worst:.1e}, |‖k_z‖-1| {worst_norm:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut worst_p2: f64 = 0.0;
    for &p in &[1.5, 2.0, 3.0] {
        for &alpha in &[0.0, 1.0] {
            for &r in &[0.3, 0.8, 0.95] {
                let z = DiskPoint::polar(r, -0.8).map_err(|e| e.to_string())?;
                let grid = QuadratureGrid::focused(alpha, r).map_err(|e| e.to_string())?;
                let v = kernel_norm(z, p, alpha, &grid).map_err(|e| e.to_string())?;
                let series = kernel_norm_series(r, p, alpha);
                check(
                    (v - series).abs() <= 1e-9 * series,
                    format!("p={p} α={alpha} |z|={r}: quadrature {v} vs series {series}"),
                )?;
                let (lo, hi) = kernel_norm_bounds(z, p, alpha).map_err(|e| e.to_string())?;
                check(
                    lo * (1.0 - 1e-9) <= v && v <= hi * (1.0 + 1e-9),
                    format!("p={p} α={alpha} |z|={r}: {v} outside [{lo}, {hi}]"),
                )?;
                if p == 2.0 {
                    check((lo - hi).abs() <= 1e-12 * hi, format!("p=2 brackets differ: {lo} {hi}"))?;
                    let exact = (1.0 - r * r).powf(-(2.0 + alpha) / 2.0);
                    worst_p2 = worst_p2.max((v / exact - 1.0).abs());
                }
            }
        }
    }
    check(worst_p2 <= 1e-6, format!("p=2 relative error {worst_p2:e}"))?;
    Ok(format!("18 norms bracketed, p=2 relative error {worst_p2:.1e}"))
}

fn criterion_4() -> Outcome {
    let lat = Lattice::build(0.5, 0.95).map_err(|e| e.to_string())?;
    let rep = lat.verify(10_000, 20_240_601);
    check(
        rep.covering_gap < 0.5 + 1e-9,
        format!("covering gap {}", rep.covering_gap),
    )?;
    check(rep.min_separation >= 0.25, format!("separation {}", rep.min_separation))?;
    let mut worst: f64 = 0.0;
    for &alpha in &[0.0, 1.0] {
        let grid = lat.measure_grid(alpha).map_err(|e| e.to_string())?;
        let total = lat.cell_measures(alpha, &grid).map_err(|e| e.to_string())?.total();
        let expected = 1.0 - (1.0 - 0.95f64 * 0.95).powf(alpha + 1.0);
        worst = worst.max((total - expected).abs());
    }
    check(worst <= 1e-3, format!("cell total off by {worst:e}"))?;
    Ok(format!(
        "{} centers, gap {:.4}, separation {:.4}, cell total error {worst:.1e}",
        lat.len(),
        rep.covering_gap,
        rep.min_separation
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let fs: [(&str, fn(DiskPoint, f64) -> Complex64); 3] = [
        ("1", |_, _| Complex64::new(1.0, 0.0)),
        ("w", |w, _| w.value()),
        ("K_0.3", |w, a| kernel_c(Complex64::new(0.3, 0.0), w.value(), a)),
    ];
    let rs = [0.7, 0.5, 0.35];
    let mut finest: f64 = 0.0;
    for &alpha in &[0.0, 1.0] {
        let mut errors = vec![Vec::new(); fs.len()];
        for &r in &rs {
            let lat = Lattice::build(r, 0.95).map_err(|e| e.to_string())?;
            let dec = Decomposer::new(&lat, alpha, DEFAULT_RIDGE).map_err(|e| e.to_string())?;
            for (errs, (name, f)) in errors.iter_mut().zip(&fs) {
                let exp = dec
                    .decompose(|w| f(w, alpha), 2.0)
                    .map_err(|e| format!("f={name} r={r}: {e}"))?;
                let rt = round_trip(&exp, |w| f(w, alpha), 0.8);
                errs.push(rt.relative_error);
            }
        }
        for (errs, (name, _)) in errors.iter().zip(&fs) {
            check(
                errs[2] <= 1e-2,
                format!("f={name} α={alpha}: error {:e} at r=0.35", errs[2]),
            )?;
            check(
                errs.windows(2).all(|w| w[1] < w[0]),
                format!("f={name} α={alpha}: errors {errs:?} not decreasing in r"),
            )?;
            finest = finest.max(errs[2]);
        }
    }
    within(start.elapsed(), 120)?;
    Ok(format!(
        "worst error at r=0.35 {finest:.1e}, decreasing over r = 0.7, 0.5, 0.35"
    ))
}

fn criterion_6() -> Outcome {
    // centers must reach beyond the z_n, so the lattice extends to 0.99
    let lat = Lattice::build(0.7, 0.99).map_err(|e| e.to_string())?;
    let zs: Vec<DiskPoint> = (1..=6)
        .map(|n| DiskPoint::real(1.0 - 0.5f64.powi(n)))
        .collect::<bergman_lab::Result<_>>()
        .map_err(|e| e.to_string())?;
    let s = weak_null_coeff_decay(&lat, 2.0, 0.0, &zs, 0.6).map_err(|e| e.to_string())?;
    // eventually: the second half of the sequence
    check(
        s[2..].windows(2).all(|w| w[1] < w[0]),
        format!("S_n {s:?} not eventually decreasing"),
    )?;
    check(s[5] < 0.1 * s[0], format!("S_6 = {:e} vs S_1 = {:e}", s[5], s[0]))?;
    Ok(format!("S_6/S_1 = {:.2e}", s[5] / s[0]))
}

fn criterion_7() -> Outcome {
    let err = |e: bergman_lab::Error| e.to_string();
    let mut id: f64 = 0.0;
    let mut proj: f64 = 0.0;
    let mut diag: f64 = 0.0;
    let d = OperatorSpec::diagonal(Sequence::inv_n());
    for &alpha in &[0.0, 1.0] {
        for &r in &[0.0, 0.3, 0.6, 0.8, 0.9, 0.95] {
            let z = DiskPoint::polar(r, 2.4).map_err(err)?;
            let grid = QuadratureGrid::focused(alpha, r).map_err(err)?;
            id = id.max((berezin(&OperatorSpec::Identity, z, alpha, &grid).map_err(err)? - 1.0).norm());
            let b = berezin(&OperatorSpec::projection_onto_constants(), z, alpha, &grid).map_err(err)?;
            proj = proj.max((b - (1.0 - r * r).powf(2.0 + alpha)).norm());
            let closed = berezin_closed_form(&d, z, alpha)
                .map_err(err)?
                .ok_or("no closed form")?;
            diag = diag.max((berezin(&d, z, alpha, &grid).map_err(err)? - closed).norm());
        }
    }
    check(id <= 1e-8, format!("identity off by {id:e}"))?;
    check(proj <= 1e-6, format!("projection off by {proj:e}"))?;
    check(diag <= 1e-6, format!("diagonal paths differ by {diag:e}"))?;
    Ok(format!("identity {id:.1e}, projection {proj:.1e}, diagonal {diag:.1e}"))
}

fn criterion_8() -> Outcome {
    let err = |e: bergman_lab::Error| e.to_string();
    let pts = [
        DiskPoint::ORIGIN,
        DiskPoint::real(0.5).map_err(err)?,
        DiskPoint::new(0.0, -0.6).map_err(err)?,
        DiskPoint::polar(0.8, 2.2).map_err(err)?,
        DiskPoint::polar(0.9, -0.9).map_err(err)?,
    ];
    let ops = [
        OperatorSpec::Identity,
        OperatorSpec::Toeplitz(Symbol::one()),
        OperatorSpec::Toeplitz(Symbol::one_minus_r2()),
        OperatorSpec::projection_onto_constants(),
    ];
    let ms = [2.0, 4.0, 8.0];
    let alpha = 0.0;
    let grid = QuadratureGrid::focused(alpha, 0.9).map_err(err)?;
    let mut worst_ratio: f64 = 0.0;
    let mut n = 0;
    for s in &ops {
        for z in pts {
            let img = KernelImage::compute(s, z, alpha, &grid).map_err(err)?;
            let norms: Vec<f64> = ms
                .iter()
                .map(|&m| img.s_z_one_norm(m))
                .collect::<bergman_lab::Result<_>>()
                .map_err(err)?;
            for w in pts {
                let lhs = apply_to_kernel(s, z, w, alpha, &grid).map_err(err)?.norm();
                for (&m, norm) in ms.iter().zip(&norms) {
                    let e = (2.0 + alpha) / m;
                    let d = (Complex64::new(1.0, 0.0) - z.value().conj() * w.value()).norm();
                    let rhs = norm * (1.0 - z.norm_sqr()).powf(-e) * (1.0 - w.norm_sqr()).powf(-e)
                        / d.powf((1.0 - 2.0 / m) * (2.0 + alpha));
                    check(
                        lhs <= rhs * (1.0 + 1e-4),
                        format!("{} z={:?} w={:?} m={m}: {lhs} > {rhs}", s.name(), z.value(), w.value()),
                    )?;
                    if rhs > 0.0 {
                        worst_ratio = worst_ratio.max(lhs / rhs);
                    }
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} checks, max lhs/rhs {worst_ratio:.6}"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let params = SpaceParams::new(0.0, 2.0, Some(5.0)).map_err(|e| e.to_string())?;
    let rays = equally_spaced_rays(8);
    let radii = default_radii();
    let expect = [
        ("identity", false),
        ("toeplitz:one", false),
        ("toeplitz:oneminusr2", true),
        ("diagonal:inv_n", true),
        ("finiterank:proj", true),
    ];
    let mut summary = Vec::new();
    for (sel, compact) in expect {
        let s: OperatorSpec = sel.parse().map_err(|e: bergman_lab::Error| e.to_string())?;
        let rep = compactness_scan(&s, params, &rays, &radii, GridPolicy::Focused).map_err(|e| e.to_string())?;
        check(rep.complete, format!("{sel}: incomplete scan"))?;
        let v = rep.compactness.ok_or("missing verdict")?;
        if compact {
            check(v.label == "compact-consistent", format!("{sel}: {}", v.label))?;
            check(
                v.outermost < 0.05 * v.innermost,
                format!("{sel}: {} vs {}", v.outermost, v.innermost),
            )?;
            check(v.monotone_outer_half, format!("{sel}: outer half not monotone"))?;
            check(v.probe_consistent, format!("{sel}: ‖S_z1‖_1 probe disagrees"))?;
        } else {
            check(v.label == "not compact-consistent", format!("{sel}: {}", v.label))?;
            check(v.outermost > 0.9, format!("{sel}: outermost {}", v.outermost))?;
        }
        summary.push(format!("{sel} {:.3}", v.outermost));
    }
    within(start.elapsed(), 300)?;
    Ok(format!("outermost |S̃|: {}", summary.join(", ")))
}

fn criterion_10() -> Outcome {
    let err = |e: bergman_lab::Error| e.to_string();
    check(m_threshold(2.0, 0.0).map_err(err)? == 4.0, "m_threshold(2, 0) != 4")?;
    for i in 1..=50 {
        let p = 1.0 + 0.5 * i as f64 / 51.0;
        let m = m_threshold(p, 0.0).map_err(err)?;
        check(m < 3.0 / (p - 1.0), format!("p={p}: {m} >= {}", 3.0 / (p - 1.0)))?;
    }
    for &p in &[0.5, 1.0] {
        for &alpha in &[0.0, 1.0, 2.5] {
            let t = m_threshold_small_p(p, alpha, (1.0 + alpha) / p).map_err(err)?;
            check(
                (t.first_branch - t.second_branch).abs() <= 1e-12,
                format!("p={p} α={alpha}: branches {} {}", t.first_branch, t.second_branch),
            )?;
            check(
                (t.threshold - (2.0 + 1.0 / (1.0 + alpha))).abs() <= 1e-12,
                format!("p={p} α={alpha}: threshold {}", t.threshold),
            )?;
        }
    }
    check(
        pq_regime(4.0, 1.0, 3.0, 0.0).map_err(err)? == PqRegime::CaseA,
        "p=4 m=3 q=1 is not case_a",
    )?;
    check(
        pq_regime(4.0, 1.5, 5.0, 0.0).map_err(err)? == PqRegime::CaseB,
        "p=4 m=5 q=1.5 is not case_b",
    )?;
    check(
        matches!(pq_regime(4.0, 1.0, 2.0, 0.0).map_err(err)?, PqRegime::Inapplicable(_)),
        "p=4 m=2 is not inapplicable",
    )?;
    Ok("threshold arithmetic and regimes agree".into())
}

fn criterion_11() -> Outcome {
    let params = SpaceParams::new(1.0, 2.0, Some(6.0)).map_err(|e| e.to_string())?;
    let s: OperatorSpec = "diagonal:inv_n"
        .parse()
        .map_err(|e: bergman_lab::Error| e.to_string())?;
    let rays = equally_spaced_rays(3);
    let radii = [0.5, 0.75, 0.875, 0.9375];
    let run = |jobs: usize| -> std::result::Result<(String, String), String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| e.to_string())?;
        let rep = pool
            .install(|| compactness_scan(&s, params, &rays, &radii, GridPolicy::Focused))
            .map_err(|e| e.to_string())?;
        Ok((rep.to_json(), rep.to_csv()))
    };
    let a = run(1)?;
    let b = run(1)?;
    let c = run(4)?;
    check(a == b, "repeated runs differ")?;
    check(a == c, "1 and 4 worker runs differ")?;
    Ok(format!(
        "{} JSON bytes, {} CSV bytes identical across runs and job counts",
        a.0.len(),
        a.1.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("I_ct brackets", criterion_1),
        ("reproducing property", criterion_2),
        ("kernel norm brackets", criterion_3),
        ("lattice", criterion_4),
        ("atomic round trip", criterion_5),
        ("weak-null coefficient decay", criterion_6),
        ("Berezin oracles", criterion_7),
        ("pointwise kernel bound", criterion_8),
        ("compactness scans", criterion_9),
        ("threshold arithmetic", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} {name}: PASS ({t:.1} s) {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({t:.1} s) {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
