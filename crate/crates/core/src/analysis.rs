//! Spectrum comparison and post-processing: matching, convergence ladders,
//! Q-factors and the grouping of resonances into periods.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{build_basis, radius_for_size, SystemGeometry};
use crate::exact::BandStructure;
use crate::rse::{solve_with_basis, Perturbation, RseSolution};
use crate::{tol, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub kappa_rse: C64,
    pub kappa_ref: C64,
    /// `|kappa_rse - kappa_ref| / |kappa_ref|`.
    pub rel_error: f64,
}

impl MatchedPair {
    pub fn new(kappa_rse: C64, kappa_ref: C64) -> Self {
        Self {
            kappa_rse,
            kappa_ref,
            rel_error: (kappa_rse - kappa_ref).norm() / kappa_ref.norm(),
        }
    }

    pub fn distance(&self) -> f64 {
        (self.kappa_rse - self.kappa_ref).norm()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    /// Pairs sorted by the reference `(Re, Im)`.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_candidates: Vec<C64>,
    pub unmatched_references: Vec<C64>,
}

impl Matching {
    pub fn max_rel_error(&self) -> Option<f64> {
        self.pairs.iter().map(|p| p.rel_error).reduce(f64::max)
    }
}

fn lex(x: &C64, y: &C64) -> std::cmp::Ordering {
    x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
}

/// One-to-one matching, shortest distance first. Pairs farther apart than
/// `max_dist` are not formed; the leftovers are reported.
pub fn match_states(candidates: &[C64], references: &[C64], max_dist: f64) -> Matching {
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        for (j, r) in references.iter().enumerate() {
            let dist = (c - r).norm();
            if dist <= max_dist {
                edges.push((dist, i, j));
            }
        }
    }
    edges.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(lex(&references[x.2], &references[y.2]))
            .then(lex(&candidates[x.1], &candidates[y.1]))
    });
    let mut used_c = vec![false; candidates.len()];
    let mut used_r = vec![false; references.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in edges {
        if !used_c[i] && !used_r[j] {
            used_c[i] = true;
            used_r[j] = true;
            pairs.push(MatchedPair::new(candidates[i], references[j]));
        }
    }
    pairs.sort_by(|x, y| lex(&x.kappa_ref, &y.kappa_ref));
    let pick = |list: &[C64], used: &[bool]| -> Vec<C64> {
        list.iter().zip(used).filter(|(_, &u)| !u).map(|(&k, _)| k).collect()
    };
    Matching {
        pairs,
        unmatched_candidates: pick(candidates, &used_c),
        unmatched_references: pick(references, &used_r),
    }
}

/// Least-squares slope of `ln y` against `ln x`. Points with a nonpositive
/// coordinate are skipped; `None` if fewer than two remain.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `ln rel_error` against `ln Re kappa` over normal states with
/// `Re kappa > 0` whose error exceeds `error_floor`.
pub fn error_wavenumber_slope(pairs: &[MatchedPair], error_floor: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.kappa_ref.re > tol::AXIS_TOL && p.rel_error > error_floor)
        .map(|p| (p.kappa_ref.re, p.rel_error))
        .collect();
    loglog_slope(&points)
}

/// Reference spectrum of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Known exact wavenumbers.
    Exact(Vec<C64>),
    /// An RSE solve with a basis of this many states.
    SelfConvergence { m: usize },
}

#[derive(Debug, Clone)]
pub struct LadderRung {
    /// Number of basis states actually used.
    pub m: usize,
    pub radius: f64,
    pub matching: Matching,
    /// Largest relative error over the matched states; 0 if none matched.
    pub max_error: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceLadder {
    pub rungs: Vec<LadderRung>,
    /// Reference wavenumbers inside the evaluation window.
    pub reference: Vec<C64>,
    /// Basis size of the reference solve, if any.
    pub reference_m: Option<usize>,
    /// States are compared only for `|kappa| <= window_radius`.
    pub window_radius: f64,
    /// Least-squares slope of `ln max_error` against `ln M`.
    pub slope: Option<f64>,
}

impl ConvergenceLadder {
    pub fn m_values(&self) -> Vec<usize> {
        self.rungs.iter().map(|r| r.m).collect()
    }
}

/// Settings of [`convergence_ladder`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    /// Evaluation window as a fraction of the smallest basis radius.
    pub window: f64,
    /// Largest distance between matched states, in units of `1/a`.
    pub max_dist: f64,
    /// References with `|kappa|` below this (units of `1/a`) are skipped.
    pub min_modulus: f64,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            window: 0.5,
            max_dist: std::f64::consts::PI / 8.0,
            min_modulus: 1e-3,
        }
    }
}

/// RSE solve with the smallest complete basis holding at least `m` states.
pub fn solve_at_size(geom: SystemGeometry, m: usize, pert: &Perturbation) -> Result<RseSolution> {
    pert.validate(&geom)?;
    let radius = radius_for_size(geom, m)?;
    solve_with_basis(Arc::new(build_basis(geom, radius)?), pert)
}

/// Errors of RSE solves at basis sizes `m_values` against `reference`.
///
/// The rungs are solved in parallel. Errors are evaluated over the fixed
/// window `|kappa| <= window * R_min`, where `R_min` is the basis radius of
/// the smallest rung.
pub fn convergence_ladder(
    geom: SystemGeometry,
    pert: &Perturbation,
    m_values: &[usize],
    reference: &Reference,
    opts: &LadderOptions,
) -> Result<ConvergenceLadder> {
    if m_values.len() < 2 {
        return Err(Error::InvalidInput("a convergence ladder needs at least two basis sizes".into()));
    }
    if m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("basis sizes must be strictly increasing".into()));
    }
    pert.validate(&geom)?;
    let solves: Vec<RseSolution> = m_values
        .par_iter()
        .map(|&m| solve_at_size(geom, m, pert))
        .collect::<Result<_>>()?;
    let r_min = solves.iter().map(|s| s.basis.radius).fold(f64::INFINITY, f64::min);
    let window_radius = opts.window * r_min;
    let floor = opts.min_modulus / geom.a;
    let (all_refs, reference_m) = match reference {
        Reference::Exact(k) => (k.clone(), None),
        Reference::SelfConvergence { m } => {
            let sol = solve_at_size(geom, *m, pert)?;
            (sol.kappas, Some(sol.basis.len()))
        }
    };
    let refs: Vec<C64> = all_refs
        .into_iter()
        .filter(|k| k.norm() <= window_radius && k.norm() >= floor)
        .collect();
    let max_dist = opts.max_dist / geom.a;
    let rungs: Vec<LadderRung> = solves
        .iter()
        .map(|sol| {
            let matching = match_states(&sol.kappas, &refs, max_dist);
            LadderRung {
                m: sol.basis.len(),
                radius: sol.basis.radius,
                max_error: matching.max_rel_error().unwrap_or(0.0),
                matching,
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = rungs.iter().map(|r| (r.m as f64, r.max_error)).collect();
    Ok(ConvergenceLadder {
        slope: loglog_slope(&points),
        rungs,
        reference: refs,
        reference_m,
        window_radius,
    })
}

/// `Q = |Re kappa / (2 Im kappa)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QFactor {
    Finite(f64),
    /// `|Im kappa|` below `1e-14`.
    Infinite,
}

impl QFactor {
    pub fn value(self) -> f64 {
        match self {
            QFactor::Finite(q) => q,
            QFactor::Infinite => f64::INFINITY,
        }
    }
}

pub fn q_factor(kappa: C64) -> QFactor {
    if kappa.im.abs() < 1e-14 {
        QFactor::Infinite
    } else {
        QFactor::Finite((kappa.re / (2.0 * kappa.im)).abs())
    }
}

/// Run of consecutive normal states between two large spacings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Group {
    pub size: usize,
    pub re_min: f64,
    pub re_max: f64,
}

/// Normal states with `Re kappa > 0`, sorted by `Re kappa`.
fn positive_normal(kappas: &[C64]) -> Vec<f64> {
    let mut re: Vec<f64> = kappas.iter().filter(|k| k.re > tol::AXIS_TOL).map(|k| k.re).collect();
    re.sort_by(f64::total_cmp);
    re
}

/// Splits the positive-`Re` normal states wherever the spacing of
/// consecutive real parts exceeds `gap_factor` times the median spacing.
pub fn group_periods(kappas: &[C64], gap_factor: f64) -> Vec<Group> {
    let re = positive_normal(kappas);
    if re.is_empty() {
        return Vec::new();
    }
    let gaps: Vec<f64> = re.windows(2).map(|w| w[1] - w[0]).collect();
    let threshold = gap_factor * median(&gaps).unwrap_or(f64::INFINITY);
    let mut groups = Vec::new();
    let mut start = 0;
    for (j, &g) in gaps.iter().enumerate() {
        if g > threshold {
            groups.push(Group {
                size: j + 1 - start,
                re_min: re[start],
                re_max: re[j],
            });
            start = j + 1;
        }
    }
    groups.push(Group {
        size: re.len() - start,
        re_min: re[start],
        re_max: re[re.len() - 1],
    });
    groups
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}

/// Period of the spacing pattern of positive-`Re` normal states with
/// `|kappa| <= window_radius`.
///
/// The first quarter of the spacings is discarded. For every lag `p` the
/// normalised mismatch `D(p) = mean((s_{j+p} - s_j)^2) / var(s)` is formed;
/// the result is the smallest divisor `q` of the best lag with
/// `D(q) <= max(2 D(best), 0.05)`. `None` if fewer than six spacings remain.
pub fn asymptotic_period(kappas: &[C64], window_radius: f64) -> Option<usize> {
    let inside: Vec<C64> = kappas.iter().copied().filter(|k| k.norm() <= window_radius).collect();
    let re = positive_normal(&inside);
    if re.len() < 2 {
        return None;
    }
    let spacings: Vec<f64> = re.windows(2).map(|w| w[1] - w[0]).collect();
    let s = &spacings[spacings.len() / 4..];
    let n = s.len();
    if n < 6 {
        return None;
    }
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 1e-24 * mean * mean {
        return Some(1);
    }
    let mismatch = |p: usize| -> f64 {
        let m = n - p;
        (0..m).map(|j| (s[j + p] - s[j]).powi(2)).sum::<f64>() / m as f64 / var
    };
    let lags: Vec<(usize, f64)> = (1..=n / 3).map(|p| (p, mismatch(p))).collect();
    let &(best, d_best) = lags.iter().min_by(|x, y| x.1.total_cmp(&y.1))?;
    let accept = (2.0 * d_best).max(0.05);
    lags.iter()
        .find(|&&(q, d)| best % q == 0 && d <= accept)
        .map(|&(q, _)| q)
}

/// Fraction of normal states whose `|Re kappa|` falls inside a band padded
/// by `pad` on each side.
pub fn band_overlap(kappas: &[C64], bands: &BandStructure, pad: f64) -> Result<f64> {
    let normal: Vec<f64> = kappas.iter().filter(|k| k.re.abs() > tol::AXIS_TOL).map(|k| k.re.abs()).collect();
    if normal.is_empty() {
        return Err(Error::EmptyStates);
    }
    let hits = normal.iter().filter(|&&k| bands.contains(k, pad)).count();
    Ok(hits as f64 / normal.len() as f64)
}

/// Largest distance from a state to the nearest mirror image `-kappa*` in
/// the same list.
pub fn mirror_defect(kappas: &[C64]) -> f64 {
    kappas
        .iter()
        .map(|k| {
            let m = -k.conj();
            kappas.iter().map(|q| (q - m).norm()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identical_lists_match_exactly() {
        let k = vec![c(1.0, -0.2), c(-1.0, -0.2), c(0.0, 1.5)];
        let m = match_states(&k, &k, 0.1);
        assert_eq!(m.pairs.len(), 3);
        assert!(m.pairs.iter().all(|p| p.rel_error == 0.0));
    }

    #[test]
    fn shifted_list_has_uniform_distance() {
        let r = vec![c(1.0, -0.2), c(3.0, -0.4), c(5.0, -0.5)];
        let s: Vec<C64> = r.iter().map(|k| k + 1e-4).collect();
        let m = match_states(&s, &r, 0.1);
        assert!(m.pairs.iter().all(|p| (p.distance() - 1e-4).abs() < 1e-12));
    }

    #[test]
    fn far_states_are_dropped() {
        let m = match_states(&[c(1.0, 0.0), c(9.0, 0.0)], &[c(1.1, 0.0)], 0.5);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.unmatched_candidates, vec![c(9.0, 0.0)]);
        assert!(m.unmatched_references.is_empty());
    }

    #[test]
    fn greedy_takes_closest_first() {
        // 1.0 is closest to 1.05; 1.2 must then take 1.3
        let m = match_states(&[c(1.0, 0.0), c(1.2, 0.0)], &[c(1.05, 0.0), c(1.3, 0.0)], 1.0);
        assert_eq!(m.pairs[0].kappa_rse, c(1.0, 0.0));
        assert_eq!(m.pairs[1].kappa_rse, c(1.2, 0.0));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 / x)).collect();
        assert!((loglog_slope(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn q_factor_values() {
        assert_eq!(q_factor(c(1.0, -0.5)), QFactor::Finite(1.0));
        assert_eq!(q_factor(c(0.0, -0.7)), QFactor::Finite(0.0));
        assert_eq!(q_factor(c(2.0, 0.0)), QFactor::Infinite);
    }

    #[test]
    fn uniform_spacing_is_one_group() {
        let k: Vec<C64> = (1..40).map(|n| c(n as f64, -0.3)).collect();
        let g = group_periods(&k, 1.5);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].size, 39);
        assert_eq!(asymptotic_period(&k, 100.0), Some(1));
    }

    #[test]
    fn periodic_spacing_is_detected() {
        // spacing pattern (1, 1, 1, 2) repeats with period 4
        let mut x = 0.5;
        let mut k = Vec::new();
        for j in 0..120 {
            x += if j % 4 == 3 { 2.0 } else { 1.0 };
            k.push(c(x, -0.1));
        }
        assert_eq!(asymptotic_period(&k, 1e3), Some(4));
        let g = group_periods(&k, 1.5);
        assert!(g[1..g.len() - 1].iter().all(|g| g.size == 4));
    }

    #[test]
    fn overlap_of_band_midpoints() {
        let bands = BandStructure {
            d: 1.0,
            gamma: 1.0,
            k_max: 10.0,
            bands: vec![(1.0, 2.0), (4.0, 5.0)],
        };
        let k = [c(1.5, -0.1), c(-4.5, -0.1), c(3.0, -0.1), c(0.0, 1.0)];
        assert!((band_overlap(&k, &bands, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(band_overlap(&[c(0.0, 1.0)], &bands, 0.1), Err(Error::EmptyStates)));
    }

    #[test]
    fn mirror_defect_of_pairs() {
        assert_eq!(mirror_defect(&[c(1.0, -0.2), c(-1.0, -0.2), c(0.0, 2.0)]), 0.0);
        assert!(mirror_defect(&[c(1.0, -0.2)]) > 1.0);
    }
}
