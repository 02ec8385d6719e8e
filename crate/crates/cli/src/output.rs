//! File layouts of a run directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rse1d_core::analysis::{q_factor, ConvergenceLadder, MatchedPair, QFactor};
use rse1d_core::basis::StateClass;
use rse1d_core::exact::BandStructure;

use crate::CliError;

pub const SPECTRUM_HEADER: &str = "re_k,im_k,class,parity,q_factor,residual";
pub const CONVERGENCE_HEADER: &str = "M,re_k_ref,im_k_ref,rel_error";
pub const BANDS_HEADER: &str = "k_lo,k_hi";
pub const PAIRS_HEADER: &str = "re_rse,im_rse,re_ref,im_ref,rel_error";
pub const SWEEP_HEADER: &str = "n,gamma,M,bound,antibound,normal,period,max_q";

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub k: C64,
    pub class: StateClass,
    /// `even`, `odd`, or `mixed` for perturbed states without definite parity.
    pub parity: &'static str,
    pub residual: f64,
}

/// Rows sorted by class, then `Im k` descending, then `Re k`.
pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|x, y| {
        x.class
            .cmp(&y.class)
            .then(y.k.im.total_cmp(&x.k.im))
            .then(x.k.re.total_cmp(&y.k.re))
            .then(x.parity.cmp(y.parity))
    });
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for r in &sorted {
        let q = match q_factor(r.k) {
            QFactor::Finite(q) => num(q),
            QFactor::Infinite => "inf".into(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.k.re),
            num(r.k.im),
            r.class.name(),
            r.parity,
            q,
            num(r.residual)
        );
    }
    out
}

pub fn convergence_csv(ladder: &ConvergenceLadder) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for rung in &ladder.rungs {
        for p in &rung.matching.pairs {
            let _ = writeln!(out, "{},{},{},{}", rung.m, num(p.kappa_ref.re), num(p.kappa_ref.im), num(p.rel_error));
        }
    }
    out
}

pub fn bands_csv(bands: &BandStructure) -> String {
    let mut out = format!("{BANDS_HEADER}\n");
    for &(lo, hi) in &bands.bands {
        let _ = writeln!(out, "{},{}", num(lo), num(hi));
    }
    out
}

pub fn pairs_csv(pairs: &[MatchedPair]) -> String {
    let mut out = format!("{PAIRS_HEADER}\n");
    for p in pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(p.kappa_rse.re),
            num(p.kappa_rse.im),
            num(p.kappa_ref.re),
            num(p.kappa_ref.im),
            num(p.rel_error)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub gamma: f64,
    pub m: usize,
    pub bound: usize,
    pub antibound: usize,
    pub normal: usize,
    pub period: Option<usize>,
    pub max_q: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let period = r.period.map_or_else(String::new, |p| p.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            num(r.gamma),
            r.m,
            r.bound,
            r.antibound,
            r.normal,
            period,
            num(r.max_q)
        );
    }
    out
}

/// Gnuplot script for whichever data files were written.
pub fn plot_script(files: &[&str]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    if files.contains(&"spectrum.csv") {
        s.push_str(
            "\nset output 'spectrum.png'\nset xlabel 'Re k'\nset ylabel 'Im k'\n\
             plot 'spectrum.csv' using 1:2 with points pt 7 ps 0.6 title 'resonant states'\n",
        );
    }
    if files.contains(&"pairs.csv") {
        s.push_str(
            "\nset output 'pairs.png'\nset xlabel 'Re k'\nset ylabel 'Im k'\n\
             plot 'pairs.csv' using 3:4 with points pt 6 ps 1.0 title 'exact', \\\n     \
             'pairs.csv' using 1:2 with points pt 7 ps 0.5 title 'RSE'\n",
        );
        s.push_str(
            "\nset output 'pairs_error.png'\nset logscale xy\nset xlabel '|Re k|'\nset ylabel 'relative error'\n\
             plot 'pairs.csv' using (abs($3)):5 with points pt 7 ps 0.6 title 'relative error'\nunset logscale\n",
        );
    }
    if files.contains(&"convergence.csv") {
        s.push_str(
            "\nset output 'convergence.png'\nset logscale xy\nset xlabel '|Re k|'\nset ylabel 'relative error'\n\
             plot 'convergence.csv' using (abs($2)):4:1 with points pt 7 ps 0.6 lc variable title 'M'\nunset logscale\n",
        );
    }
    if files.contains(&"bands.csv") {
        s.push_str(
            "\nset output 'bands.png'\nset xlabel 'k'\nunset ylabel\nset yrange [0:1]\n\
             plot 'bands.csv' using 1:(0.5):1:2:(0):(1) with boxxyerror fs solid 0.3 title 'allowed bands'\nset autoscale y\n",
        );
    }
    if files.contains(&"lattice_sweep.csv") {
        s.push_str(
            "\nset output 'lattice_sweep.png'\nset xlabel 'N'\nset ylabel 'count'\n\
             plot 'lattice_sweep.csv' using 1:4 with linespoints title 'bound', \\\n     \
             'lattice_sweep.csv' using 1:5 with linespoints title 'antibound'\n",
        );
    }
    s
}

/// Files of one run, written together.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn retain(&mut self, keep: impl Fn(&str) -> bool) {
        self.files.retain(|(n, _)| keep(n));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into `dir`. On failure the files written so far are
    /// removed again, and `dir` too if this call created it.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let created = !dir.exists();
        let io = |path: &Path, e: std::io::Error| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, contents) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                if created {
                    let _ = std::fs::remove_dir(dir);
                }
                return Err(io(&path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1.5655098600826598, 1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn empty_band_list_is_header_only() {
        let b = BandStructure {
            d: 1.0,
            gamma: 1.0,
            k_max: 1.0,
            bands: vec![],
        };
        assert_eq!(bands_csv(&b), "k_lo,k_hi\n");
    }

    #[test]
    fn spectrum_rows_are_ordered() {
        let row = |re: f64, im: f64, class| SpectrumRow {
            k: C64::new(re, im),
            class,
            parity: "even",
            residual: 0.0,
        };
        let csv = spectrum_csv(&[
            row(2.0, -0.5, StateClass::Normal),
            row(0.0, 1.0, StateClass::Bound),
            row(-2.0, -0.5, StateClass::Normal),
            row(0.0, 2.0, StateClass::Bound),
        ]);
        let classes: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
        assert_eq!(classes, ["bound", "bound", "normal", "normal"]);
        let first: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        assert_eq!(first[0], 2.0);
        assert!(csv.lines().nth(3).unwrap().starts_with("-2."));
    }
}
