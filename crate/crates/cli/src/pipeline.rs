use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rse1d_core::analysis::{
    asymptotic_period, band_overlap, convergence_ladder, group_periods, match_states, mirror_defect, q_factor,
    solve_at_size, LadderOptions, Matching, QFactor, Reference,
};
use rse1d_core::basis::{build_basis, radius_for_size, BasisSet, ParityAudit, Secular, StateClass, SystemGeometry};
use rse1d_core::exact::{allowed_bands, find_exact_triple, TripleAudit, TripleWellParams};
use rse1d_core::roots::Analytic;
use rse1d_core::rse::{solve_with_basis, Perturbation, RseSolution};
use rse1d_core::tol;
use serde_json::{json, Value};

use crate::config::{ScenarioConfig, Task};
use crate::output::{self, OutputSet, SpectrumRow, SweepRow};
use crate::CliError;

/// Results of one run, kept in memory until every task has finished.
#[derive(Debug)]
pub struct RunReport {
    pub outputs: OutputSet,
    pub summary: Value,
}

fn solver(task: Task) -> impl Fn(rse1d_core::Error) -> CliError {
    move |source| CliError::Solver {
        task: task.name().to_string(),
        source,
    }
}

fn c(k: C64) -> Value {
    json!([k.re, k.im])
}

fn cs(ks: &[C64]) -> Value {
    Value::Array(ks.iter().map(|&k| c(k)).collect())
}

fn parity_audit(a: &ParityAudit) -> Value {
    json!({
        "winding_count": a.winding_count,
        "origin_multiplicity": a.origin_multiplicity,
        "found_count": a.found_count,
        "contour_radius": a.contour_radius,
        "nodes": a.nodes,
        "passed": a.passed(),
    })
}

fn triple_audit(a: &TripleAudit) -> Value {
    json!({
        "winding_count": a.winding_count,
        "origin_multiplicity": a.origin_multiplicity,
        "found_count": a.found_count,
        "contour_radius": a.contour_radius,
        "nodes": a.nodes,
        "passed": a.passed(),
    })
}

pub fn tolerances() -> Value {
    json!({
        "root_tol": tol::ROOT_TOL,
        "dedup_tol": tol::DEDUP_TOL,
        "quad_tol": tol::QUAD_TOL,
        "degenerate_tol": tol::DEGENERATE_TOL,
        "contour_margin": tol::CONTOUR_MARGIN,
        "k_floor": tol::K_FLOOR,
        "winding_nodes": tol::WINDING_NODES,
        "eig_tol": tol::EIG_TOL,
        "axis_tol": tol::AXIS_TOL,
        "pole_tol": tol::POLE_TOL,
        "band_tol": tol::BAND_TOL,
    })
}

fn basis_rows(basis: &BasisSet) -> Vec<SpectrumRow> {
    basis
        .states
        .iter()
        .map(|s| SpectrumRow {
            k: s.k,
            class: s.class,
            parity: s.parity.name(),
            residual: Secular::new(basis.geometry, s.parity).eval_scaled(s.k).residual(),
        })
        .collect()
}

fn rse_rows(sol: &RseSolution) -> Vec<SpectrumRow> {
    (0..sol.len())
        .map(|nu| SpectrumRow {
            k: sol.kappas[nu],
            class: sol.class(nu),
            parity: sol.parity(nu).map_or("mixed", |p| p.name()),
            residual: sol.residuals[nu] / sol.h_norm.max(f64::MIN_POSITIVE),
        })
        .collect()
}

fn class_counts(classes: impl Iterator<Item = StateClass>) -> Value {
    let (mut b, mut ab, mut n) = (0, 0, 0);
    for class in classes {
        match class {
            StateClass::Bound => b += 1,
            StateClass::Antibound => ab += 1,
            StateClass::Normal => n += 1,
        }
    }
    json!({ "bound": b, "antibound": ab, "normal": n })
}

fn max_q(kappas: &[C64]) -> f64 {
    kappas
        .iter()
        .filter(|k| k.re.abs() > tol::AXIS_TOL)
        .filter_map(|&k| match q_factor(k) {
            QFactor::Finite(q) => Some(q),
            QFactor::Infinite => None,
        })
        .fold(0.0, f64::max)
}

fn basis_radius(cfg: &ScenarioConfig, geom: SystemGeometry) -> rse1d_core::Result<f64> {
    match (cfg.basis.radius, cfg.basis.target_m) {
        (Some(r), _) => Ok(r),
        (None, Some(m)) => radius_for_size(geom, m),
        (None, None) => Err(rse1d_core::Error::InvalidInput("no basis size configured".into())),
    }
}

fn within(kappas: &[C64], radius: f64) -> Vec<C64> {
    kappas.iter().copied().filter(|k| k.norm() <= radius).collect()
}

fn matching_summary(m: &Matching, window_radius: f64) -> Value {
    json!({
        "pairs": m.pairs.len(),
        "max_rel_error": m.max_rel_error(),
        "unmatched_references": cs(&m.unmatched_references),
        "unmatched_candidates_in_window": cs(&within(&m.unmatched_candidates, window_radius)),
    })
}

/// Runs every configured task in a fixed order. Nothing is written to disk.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let geom = cfg.geometry();
    let pert = cfg.perturbation();
    let an = &cfg.analysis;
    let mut outputs = OutputSet::default();
    let mut summary = serde_json::Map::new();
    let mut timing = serde_json::Map::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timing: &mut serde_json::Map<String, Value>| {
        timing.insert(name.to_string(), json!(clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let needs_basis = cfg.has(Task::Basis) || cfg.has(Task::Rse) || cfg.has(Task::ExactTriple);
    let needs_solution = cfg.has(Task::Rse) || cfg.has(Task::ExactTriple) || (cfg.has(Task::KpBands) && an.k_max.is_none());
    let mut basis: Option<Arc<BasisSet>> = None;
    if needs_basis || needs_solution {
        let task = if cfg.has(Task::Basis) { Task::Basis } else { Task::Rse };
        let r = basis_radius(cfg, geom).map_err(solver(task))?;
        let b = build_basis(geom, r).map_err(solver(task))?;
        summary.insert(
            "basis".into(),
            json!({
                "M": b.len(),
                "radius": b.radius,
                "counts": class_counts(b.states.iter().map(|s| s.class)),
                "audit": { "even": parity_audit(&b.audit.even), "odd": parity_audit(&b.audit.odd) },
                "mirror_defect": mirror_defect(&b.wavenumbers()),
            }),
        );
        basis = Some(Arc::new(b));
        lap("basis", &mut timing);
    }
    let window_radius = basis.as_ref().map(|b| an.window * b.radius);

    let mut solution: Option<RseSolution> = None;
    if let (true, Some(b)) = (needs_solution, &basis) {
        let sol = solve_with_basis(b.clone(), &pert).map_err(solver(Task::Rse))?;
        summary.insert(
            "rse".into(),
            json!({
                "M": sol.len(),
                "max_relative_residual": sol.max_relative_residual(),
                "counts": class_counts((0..sol.len()).map(|nu| sol.class(nu))),
                "mirror_defect": mirror_defect(&sol.kappas),
                "periods": {
                    "asymptotic_period": window_radius.and_then(|w| asymptotic_period(&sol.kappas, w)),
                    "group_sizes": group_periods(&within(&sol.kappas, window_radius.unwrap_or(f64::INFINITY)), an.gap_factor)
                        .iter().map(|g| g.size).collect::<Vec<_>>(),
                },
                "max_q": max_q(&within(&sol.kappas, window_radius.unwrap_or(f64::INFINITY))),
            }),
        );
        solution = Some(sol);
        lap("rse", &mut timing);
    }

    let spectrum_source = if cfg.has(Task::Rse) {
        Some("rse")
    } else if cfg.has(Task::Basis) {
        Some("basis")
    } else {
        None
    };
    if let Some(b) = &basis {
        if cfg.has(Task::Basis) {
            let name = if cfg.has(Task::Rse) { "basis.csv" } else { "spectrum.csv" };
            outputs.add(name, output::spectrum_csv(&basis_rows(b)));
        }
    }
    if let (true, Some(sol)) = (cfg.has(Task::Rse), &solution) {
        outputs.add("spectrum.csv", output::spectrum_csv(&rse_rows(sol)));
    }

    if cfg.has(Task::ExactTriple) {
        let (sol, w) = (solution.as_ref().unwrap(), window_radius.unwrap());
        let spike = pert.spikes()[0];
        let params = TripleWellParams::new(geom, spike.position, spike.strength).map_err(solver(Task::ExactTriple))?;
        let found = find_exact_triple(&params, w, &sol.kappas).map_err(solver(Task::ExactTriple))?;
        let matching = match_states(&sol.kappas, &found.roots, an.max_dist / geom.a);
        outputs.add("pairs.csv", output::pairs_csv(&matching.pairs));
        let mut entry = matching_summary(&matching, w);
        entry["exact_roots"] = json!(found.roots.len());
        entry["failed_seeds"] = json!(found.failures.len());
        entry["audit"] = found.audit.as_ref().map_or(Value::Null, triple_audit);
        entry["window_radius"] = json!(w);
        summary.insert("exact_triple".into(), entry);
        lap("exact-triple", &mut timing);
    }

    if cfg.has(Task::KpBands) {
        let d = cfg.lattice_period().unwrap();
        let strength = cfg.perturbation.lattice.as_ref().unwrap().strength;
        let k_max = an.k_max.or(window_radius).unwrap();
        let bands = allowed_bands(strength, d, k_max).map_err(solver(Task::KpBands))?;
        let pad = an.pad.unwrap_or(0.05 * std::f64::consts::PI / d);
        outputs.add("bands.csv", output::bands_csv(&bands));
        let overlap = solution
            .as_ref()
            .map(|s| band_overlap(&within(&s.kappas, k_max), &bands, pad).ok());
        summary.insert(
            "kp_bands".into(),
            json!({ "period": d, "gamma": strength, "k_max": k_max, "pad": pad, "bands": bands.bands.len(), "overlap": overlap.flatten() }),
        );
        lap("kp-bands", &mut timing);
    }

    if cfg.has(Task::Converge) {
        let opts = LadderOptions {
            window: an.window,
            max_dist: an.max_dist,
            ..Default::default()
        };
        let ladder_max = *an.m_ladder.last().unwrap();
        let single = pert.spikes().len() == 1 && cfg.perturbation.lattice.is_none();
        let reference = if single && an.reference_m.is_none() {
            // exact roots, seeded by the largest rung
            let spike = pert.spikes()[0];
            let params = TripleWellParams::new(geom, spike.position, spike.strength).map_err(solver(Task::Converge))?;
            let r_min = radius_for_size(geom, an.m_ladder[0]).map_err(solver(Task::Converge))?;
            let seeds = solve_at_size(geom, ladder_max, &pert).map_err(solver(Task::Converge))?;
            let found = find_exact_triple(&params, an.window * r_min * 1.05, &seeds.kappas).map_err(solver(Task::Converge))?;
            Reference::Exact(found.roots)
        } else {
            Reference::SelfConvergence {
                m: an.reference_m.unwrap_or(ladder_max),
            }
        };
        let ladder = convergence_ladder(geom, &pert, &an.m_ladder, &reference, &opts).map_err(solver(Task::Converge))?;
        outputs.add("convergence.csv", output::convergence_csv(&ladder));
        summary.insert(
            "convergence".into(),
            json!({
                "reference": match reference { Reference::Exact(_) => "exact", Reference::SelfConvergence { .. } => "self" },
                "reference_M": ladder.reference_m,
                "M": ladder.m_values(),
                "max_rel_error": ladder.rungs.iter().map(|r| r.max_error).collect::<Vec<_>>(),
                "unmatched_references": ladder.rungs.iter().map(|r| r.matching.unmatched_references.len()).collect::<Vec<_>>(),
                "window_radius": ladder.window_radius,
                "slope": ladder.slope,
            }),
        );
        lap("converge", &mut timing);
    }

    if cfg.has(Task::LatticeSweep) {
        let cases: Vec<(usize, f64)> = cfg
            .sweep
            .n_values
            .iter()
            .flat_map(|&n| cfg.sweep.gamma_values.iter().map(move |&g| (n, g)))
            .collect();
        let rows: Vec<SweepRow> = cases
            .par_iter()
            .map(|&(n, gamma)| -> rse1d_core::Result<SweepRow> {
                let g = SystemGeometry::new(geom.a, gamma)?;
                let p = Perturbation::lattice(n, gamma, geom.a)?;
                let r = basis_radius(cfg, g)?;
                let sol = solve_with_basis(Arc::new(build_basis(g, r)?), &p)?;
                let w = an.window * sol.basis.radius;
                let count = |class| (0..sol.len()).filter(|&nu| sol.class(nu) == class).count();
                Ok(SweepRow {
                    n,
                    gamma,
                    m: sol.len(),
                    bound: count(StateClass::Bound),
                    antibound: count(StateClass::Antibound),
                    normal: count(StateClass::Normal),
                    period: asymptotic_period(&sol.kappas, w),
                    max_q: max_q(&within(&sol.kappas, w)),
                })
            })
            .collect::<rse1d_core::Result<_>>()
            .map_err(solver(Task::LatticeSweep))?;
        outputs.add("lattice_sweep.csv", output::sweep_csv(&rows));
        lap("lattice-sweep", &mut timing);
    }

    if cfg.wants("gnuplot") {
        let names = outputs.names();
        let script = output::plot_script(&names);
        outputs.add("plot.gp", script);
    }
    if !cfg.wants("csv") {
        outputs.retain(|name| !name.ends_with(".csv"));
    }

    let config_echo = serde_json::to_value(cfg).map_err(|e| CliError::Io {
        path: Path::new("run.json").to_path_buf(),
        message: e.to_string(),
    })?;
    let summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config_echo,
        "tolerances": tolerances(),
        "spectrum_source": spectrum_source,
        "results": Value::Object(summary),
        "timing": if cfg.output.record_timing { Value::Object(timing) } else { Value::Null },
    });
    if cfg.wants("json") {
        outputs.add("run.json", render_json(&summary));
    }
    Ok(RunReport { outputs, summary })
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}
