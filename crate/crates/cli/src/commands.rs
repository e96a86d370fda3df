use std::fmt::Write as _;
use std::fs;

use bergman_lab::atomic::{round_trip, Decomposer, RESIDUAL_THRESHOLD, ROUND_TRIP_RADIUS, ROUND_TRIP_TOL};
use bergman_lab::diagnostics::{
    compactness_scan, default_delta, m_threshold, m_threshold_small_p, pq_regime, pq_window,
};
use bergman_lab::{DiskPoint, Lattice, QuadratureGrid};

use crate::config::{CliError, CliResult, RunConfig};

/// Radii of the reconstruction-error table.
const ERROR_TABLE_RADII: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub fn threshold(p: f64, alpha: f64, delta: Option<f64>, m: Option<f64>, q: Option<f64>) -> CliResult<String> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(CliError::Usage(format!("p = {p} must be positive")));
    }
    let mut out = String::new();
    writeln!(out, "p: {p}").unwrap();
    writeln!(out, "alpha: {alpha}").unwrap();
    if p > 1.0 {
        if delta.is_some() {
            return Err(CliError::Usage("--delta only applies to p <= 1".into()));
        }
        let t = m_threshold(p, alpha)?;
        writeln!(
            out,
            "criterion: bounded if sup_z ||S_z 1||_(m,alpha) < inf for some m > threshold"
        )
        .unwrap();
        writeln!(out, "m threshold: {t}").unwrap();
    } else {
        let delta = delta.unwrap_or_else(|| default_delta(p, alpha));
        let t = m_threshold_small_p(p, alpha, delta)?;
        writeln!(
            out,
            "criterion: bounded if sup_z ||S_z 1||_(m,beta) < inf for some m > threshold"
        )
        .unwrap();
        writeln!(out, "delta: {delta}").unwrap();
        writeln!(out, "first branch: {}", t.first_branch).unwrap();
        writeln!(out, "second branch: {}", t.second_branch).unwrap();
        writeln!(out, "beta: {}", t.beta_exponent).unwrap();
        writeln!(out, "m threshold: {}", t.threshold).unwrap();
    }
    if p > 2.0 {
        let (lo, hi) = pq_window(p, alpha);
        writeln!(out, "p -> q window: {lo} < m <= {hi}").unwrap();
        if let (Some(m), Some(q)) = (m, q) {
            let regime = pq_regime(p, q, m, alpha)?;
            writeln!(out, "p -> q regime (m = {m}, q = {q}): {}", regime.label()).unwrap();
        }
    }
    Ok(out)
}

/// Runs a scan, writes its files and returns the one-line verdict. Incomplete
/// scans still write their (flagged) output before failing.
pub fn scan(cfg: &RunConfig) -> CliResult<String> {
    let s = cfg.operator_spec()?;
    let sp = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Usage("missing scan parameters".into()))?;
    let report = compactness_scan(&s, cfg.params, &sp.rays, &sp.radii, cfg.grid)?;
    let mut written = Vec::new();
    if cfg.format.json() {
        let path = cfg.output_path("json");
        fs::write(&path, report.to_json() + "\n")?;
        written.push(path.display().to_string());
    }
    if cfg.format.csv() {
        let path = cfg.output_path("csv");
        fs::write(&path, report.to_csv())?;
        written.push(path.display().to_string());
    }
    let c = report.compactness.as_ref().expect("scans carry a compactness verdict");
    let b = &report.boundedness;
    let line = format!(
        "{}: {} (outermost |S~| {:.3e}, innermost {:.3e}); sup ||S_z 1||_m {:.6e}, hypothesis {}; wrote {}",
        report.operator,
        c.label,
        c.outermost,
        c.innermost,
        b.sup_norm,
        if b.hypothesis_satisfied {
            "satisfied"
        } else {
            "not satisfied"
        },
        written.join(", ")
    );
    if !report.complete {
        let failed = report.samples.iter().filter(|x| x.error.is_some()).count();
        return Err(CliError::Failure(format!(
            "{line}\n{failed} samples failed; output is partial"
        )));
    }
    Ok(line)
}

/// Decomposes, writes `<output>.expansion` and the error table `<output>.csv`.
pub fn atomic(cfg: &RunConfig) -> CliResult<String> {
    let f = cfg.function_sel()?;
    let lp = cfg
        .lattice
        .ok_or_else(|| CliError::Usage("missing lattice parameters".into()))?;
    let (p, alpha) = (cfg.params.p, cfg.params.alpha);
    let lat = Lattice::build(lp.r, lp.r_max)?;
    let dec = Decomposer::new(&lat, alpha, cfg.ridge)?;
    let fun = |w: DiskPoint| f.eval(w.value(), alpha);
    let exp = dec.decompose(fun, p).map_err(|e| match e {
        bergman_lab::Error::IllConditioned { .. } => CliError::Failure(e.to_string()),
        e => e.into(),
    })?;

    let lattice_ref = format!("r={} r_max={} centers={}", lp.r, lp.r_max, lat.len());
    let exp_path = cfg.output_path("expansion");
    fs::write(&exp_path, exp.export(&lattice_ref))?;

    let mut table = String::from("radius,max_abs_error,max_abs_f,relative_error\n");
    let mut verdict = None;
    for &radius in &ERROR_TABLE_RADII {
        let rt = round_trip(&exp, fun, radius);
        writeln!(
            table,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            radius, rt.max_abs_error, rt.max_abs_f, rt.relative_error
        )
        .unwrap();
        if radius == ROUND_TRIP_RADIUS {
            verdict = Some(rt);
        }
    }
    let table_path = cfg.output_path("csv");
    fs::write(&table_path, table)?;
    let rt = verdict.expect("table covers the check radius");

    let grid = QuadratureGrid::default_for(alpha)?;
    let vals: Vec<f64> = grid.nodes().map(|w| f.eval(w, alpha).norm().powf(p)).collect();
    let f_norm = grid.integrate_real_values(&vals)?.powf(1.0 / p);
    let mut out = String::new();
    writeln!(out, "centers: {}", lat.len()).unwrap();
    writeln!(out, "relative residual: {:.3e}", exp.relative_residual).unwrap();
    writeln!(
        out,
        "coefficient norm ratio ||c||_p / ||f||_(p,alpha): {:.6e}",
        exp.coeff_norm() / f_norm
    )
    .unwrap();
    writeln!(
        out,
        "max relative error on |w| <= {ROUND_TRIP_RADIUS}: {:.3e}",
        rt.relative_error
    )
    .unwrap();
    write!(out, "wrote {}, {}", exp_path.display(), table_path.display()).unwrap();
    if !rt.pass {
        return Err(CliError::Failure(format!(
            "{out}\nround trip failed: error {:.3e} (limit {ROUND_TRIP_TOL:e}), residual {:.3e} (limit {RESIDUAL_THRESHOLD:e})",
            rt.relative_error, rt.relative_residual
        )));
    }
    Ok(out)
}
