//! Re-checks the files of a finished run against their defining equations.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rse1d_core::basis::{build_basis, Parity, Secular};
use rse1d_core::exact::{kp_rhs, ClearedTriple, TripleWellParams};
use rse1d_core::roots::Analytic;
use rse1d_core::rse::solve_with_basis;
use rse1d_core::tol;
use serde_json::Value;

use crate::config::ScenarioConfig;
use crate::{render_json, CliError};

/// Residual accepted when re-evaluating a secular equation at a stored root.
pub const SECULAR_RECHECK_TOL: f64 = 100.0 * tol::ROOT_TOL;
/// Accepted `||rhs| - 1|` at a stored band edge.
pub const BAND_EDGE_TOL: f64 = 1e-8;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct VerifyReport {
    /// `(file, rows checked)`.
    pub checked: Vec<(String, usize)>,
}

fn fail(msg: impl Into<String>) -> CliError {
    CliError::Verify(msg.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').collect())
}

fn float(s: &str, file: &str) -> Result<f64, CliError> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| fail(format!("{file}: not a number: {s:?}"))),
    }
}

fn check_basis_spectrum(text: &str, cfg: &ScenarioConfig, file: &str) -> Result<usize, CliError> {
    let g = cfg.geometry();
    let mut n = 0;
    for r in rows(text) {
        let k = C64::new(float(r[0], file)?, float(r[1], file)?);
        let parity = match r[3] {
            "even" => Parity::Even,
            "odd" => Parity::Odd,
            p => return Err(fail(format!("{file}: unknown parity {p:?}"))),
        };
        let res = Secular::new(g, parity).eval_scaled(k).residual();
        if !(res <= SECULAR_RECHECK_TOL) {
            return Err(fail(format!("{file}: k = {k} has secular residual {res:e}")));
        }
        n += 1;
    }
    Ok(n)
}

fn check_rse_spectrum(text: &str, cfg: &ScenarioConfig, run: &Value, file: &str) -> Result<usize, CliError> {
    let radius = run["results"]["basis"]["radius"]
        .as_f64()
        .ok_or_else(|| fail("run.json lacks results.basis.radius"))?;
    let basis = build_basis(cfg.geometry(), radius).map_err(|e| fail(format!("rebuilding basis: {e}")))?;
    let sol = solve_with_basis(Arc::new(basis), &cfg.perturbation()).map_err(|e| fail(format!("re-solving: {e}")))?;
    let tol_abs = tol::EIG_TOL * sol.h_norm;
    let mut n = 0;
    for r in rows(text) {
        let k = C64::new(float(r[0], file)?, float(r[1], file)?);
        let res = float(r[5], file)?;
        if !(res <= tol::EIG_TOL) {
            return Err(fail(format!("{file}: kappa = {k} has eigen residual {res:e}")));
        }
        let nearest = sol.kappas.iter().map(|q| (q - k).norm()).fold(f64::INFINITY, f64::min);
        if !(nearest <= tol_abs) {
            return Err(fail(format!("{file}: kappa = {k} is {nearest:e} from the recomputed spectrum")));
        }
        n += 1;
    }
    if n != sol.len() {
        return Err(fail(format!("{file}: {n} rows, recomputed spectrum has {}", sol.len())));
    }
    Ok(n)
}

fn check_pairs(text: &str, cfg: &ScenarioConfig) -> Result<usize, CliError> {
    let spike = cfg
        .perturbation()
        .spikes()
        .first()
        .copied()
        .ok_or_else(|| fail("pairs.csv without a spike"))?;
    let p = TripleWellParams::new(cfg.geometry(), spike.position, spike.strength).map_err(|e| fail(e.to_string()))?;
    let f = ClearedTriple::new(p);
    let mut n = 0;
    for r in rows(text) {
        let k = C64::new(float(r[2], "pairs.csv")?, float(r[3], "pairs.csv")?);
        let res = f.eval_scaled(k).residual();
        if !(res <= SECULAR_RECHECK_TOL) {
            return Err(fail(format!("pairs.csv: exact root {k} has residual {res:e}")));
        }
        let rse = C64::new(float(r[0], "pairs.csv")?, float(r[1], "pairs.csv")?);
        let rel = float(r[4], "pairs.csv")?;
        if ((rse - k).norm() / k.norm() - rel).abs() > 1e-12 * rel.max(1e-300) + 1e-15 {
            return Err(fail(format!("pairs.csv: inconsistent rel_error at {k}")));
        }
        n += 1;
    }
    Ok(n)
}

fn check_bands(text: &str, run: &Value) -> Result<usize, CliError> {
    let kp = &run["results"]["kp_bands"];
    let (d, gamma, k_max) = match (kp["period"].as_f64(), kp["gamma"].as_f64(), kp["k_max"].as_f64()) {
        (Some(d), Some(g), Some(k)) => (d, g, k),
        _ => return Err(fail("run.json lacks results.kp_bands")),
    };
    let mut n = 0;
    let mut previous = f64::NEG_INFINITY;
    for r in rows(text) {
        let (lo, hi) = (float(r[0], "bands.csv")?, float(r[1], "bands.csv")?);
        if !(lo <= hi && lo > previous) {
            return Err(fail(format!("bands.csv: bands not sorted and disjoint at [{lo}, {hi}]")));
        }
        previous = hi;
        for e in [lo, hi] {
            if e > 0.0 && e < k_max {
                let defect = (kp_rhs(e, gamma, d).abs() - 1.0).abs();
                if defect > BAND_EDGE_TOL {
                    return Err(fail(format!("bands.csv: edge {e} has ||rhs| - 1| = {defect:e}")));
                }
            }
        }
        n += 1;
    }
    Ok(n)
}

/// Checks every output listed next to `run_json`.
pub fn verify(run_json: &Path) -> Result<VerifyReport, CliError> {
    let dir: PathBuf = run_json.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let text = read(run_json)?;
    let run: Value = serde_json::from_str(&text).map_err(|e| fail(format!("run.json: {e}")))?;
    if render_json(&run) != text {
        return Err(fail("run.json does not round-trip byte-identically"));
    }
    let cfg: ScenarioConfig =
        serde_json::from_value(run["config"].clone()).map_err(|e| fail(format!("run.json config: {e}")))?;
    let mut report = VerifyReport::default();
    let source = run["spectrum_source"].as_str();
    let spectrum = dir.join("spectrum.csv");
    if spectrum.exists() {
        let t = read(&spectrum)?;
        let n = match source {
            Some("rse") => check_rse_spectrum(&t, &cfg, &run, "spectrum.csv")?,
            Some("basis") => check_basis_spectrum(&t, &cfg, "spectrum.csv")?,
            other => return Err(fail(format!("unknown spectrum_source {other:?}"))),
        };
        report.checked.push(("spectrum.csv".into(), n));
    }
    let basis = dir.join("basis.csv");
    if basis.exists() {
        let n = check_basis_spectrum(&read(&basis)?, &cfg, "basis.csv")?;
        report.checked.push(("basis.csv".into(), n));
    }
    let pairs = dir.join("pairs.csv");
    if pairs.exists() {
        let n = check_pairs(&read(&pairs)?, &cfg)?;
        report.checked.push(("pairs.csv".into(), n));
    }
    let bands = dir.join("bands.csv");
    if bands.exists() {
        let n = check_bands(&read(&bands)?, &run)?;
        report.checked.push(("bands.csv".into(), n));
    }
    Ok(report)
}
