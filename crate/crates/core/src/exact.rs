//! Closed-form reference problems: the triple-delta well and the
//! Kronig-Penney lattice.

use std::f64::consts::PI;

use crate::basis::{canonicalize, midpoints, SystemGeometry};
use crate::roots::{audited_count, newton_refine, winding_number, Analytic, NewtonOptions, ScaledEval};
use crate::{tol, Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Double well `(a, gamma)` with a third spike `-beta delta(x - b)` inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleWellParams {
    pub geom: SystemGeometry,
    pub b: f64,
    pub beta: f64,
}

impl TripleWellParams {
    pub fn new(geom: SystemGeometry, b: f64, beta: f64) -> Result<Self> {
        if !(b.abs() < geom.a) {
            return Err(Error::SpikeOutOfRange {
                position: b,
                half_width: geom.a,
            });
        }
        if !(beta.is_finite() && beta != 0.0) {
            return Err(Error::InvalidInput(format!("beta must be finite and nonzero, got {beta}")));
        }
        Ok(Self { geom, b, beta })
    }
}

/// Triple-well secular function
/// `F = xi^2 (1 - eta) - 2 xi cos(2 kappa b) + 1 + eta`,
/// `xi = exp(2i kappa a) / (1 + 2i kappa/gamma)`, `eta = 2i kappa / beta`.
///
/// `kappa = i gamma/2` is a double pole. At `kappa = 0`, `F` has a zero of
/// order at least two that is not a resonant state; both points are refused.
pub fn triple_secular(kappa: C64, p: &TripleWellParams) -> Result<C64> {
    let SystemGeometry { a, gamma } = p.geom;
    let near = tol::POLE_TOL / a;
    if kappa.norm() < near || (kappa - I * gamma / 2.0).norm() < near {
        return Err(Error::NearPole { kappa });
    }
    let xi = (2.0 * I * kappa * a).exp() / (1.0 + 2.0 * I * kappa / gamma);
    let eta = 2.0 * I * kappa / p.beta;
    Ok(xi * xi * (1.0 - eta) - 2.0 * xi * (2.0 * kappa * p.b).cos() + 1.0 + eta)
}

/// `G = F (1 + 2i kappa/gamma)^2`, an entire function with the same nonzero
/// roots as [`triple_secular`].
///
/// In the lower half plane the value is multiplied by `exp(-4i kappa a)`.
#[derive(Debug, Clone, Copy)]
pub struct ClearedTriple {
    pub params: TripleWellParams,
}

impl ClearedTriple {
    pub fn new(params: TripleWellParams) -> Self {
        Self { params }
    }

    /// Unscaled `G(kappa)`.
    pub fn value(&self, kappa: C64) -> C64 {
        let TripleWellParams { geom, b, beta } = self.params;
        let (a, gamma) = (geom.a, geom.gamma);
        let e2 = (4.0 * I * kappa * a).exp();
        let p = 0.5 * ((2.0 * I * kappa * (a + b)).exp() + (2.0 * I * kappa * (a - b)).exp());
        let d = 1.0 + 2.0 * I * kappa / gamma;
        let eta = 2.0 * I * kappa / beta;
        e2 * (1.0 - eta) - 2.0 * p * d + (1.0 + eta) * d * d
    }
}

impl Analytic for ClearedTriple {
    fn eval_scaled(&self, kappa: C64) -> ScaledEval {
        let TripleWellParams { geom, b, beta } = self.params;
        let (a, gamma) = (geom.a, geom.gamma);
        // exponents of E^2, the two halves of P, and D^2, relative to the scale
        let shift = if kappa.im < 0.0 { -4.0 * I * kappa * a } else { C64::new(0.0, 0.0) };
        let e2 = (4.0 * I * kappa * a + shift).exp();
        let p_plus = (2.0 * I * kappa * (a + b) + shift).exp();
        let p_minus = (2.0 * I * kappa * (a - b) + shift).exp();
        let s = shift.exp();
        let p = 0.5 * (p_plus + p_minus);
        let dp = I * ((a + b) * p_plus + (a - b) * p_minus);
        let d = 1.0 + 2.0 * I * kappa / gamma;
        let dd = 2.0 * I / gamma;
        let eta = 2.0 * I * kappa / beta;
        let deta = 2.0 * I / beta;

        let t1 = e2 * (1.0 - eta);
        let t2 = -2.0 * p * d;
        let t3 = (1.0 + eta) * d * d * s;
        let derivative = 4.0 * I * a * t1 - deta * e2 - 2.0 * dp * d - 2.0 * p * dd
            + (deta * d * d + 2.0 * (1.0 + eta) * d * dd) * s;
        ScaledEval {
            value: t1 + t2 + t3,
            derivative,
            magnitude: t1.norm() + t2.norm() + t3.norm(),
        }
    }
}

/// Argument-principle audit of the cleared triple-well function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleAudit {
    /// Zeros of `G` inside the contour.
    pub winding_count: usize,
    /// Zeros of `G` inside a small disk around the origin.
    pub origin_multiplicity: usize,
    /// Accepted roots inside the contour.
    pub found_count: usize,
    pub contour_radius: f64,
    pub nodes: usize,
}

impl TripleAudit {
    pub fn passed(&self) -> bool {
        self.winding_count == self.found_count + self.origin_multiplicity
    }
}

#[derive(Debug, Clone)]
pub struct TripleRoots {
    /// Nonzero roots with `|kappa| <= radius`, sorted by `(Re, Im)`.
    pub roots: Vec<C64>,
    /// Seeds whose Newton iteration failed, with the reason.
    pub failures: Vec<(C64, Error)>,
    /// `None` if the winding integral could not be made integral.
    pub audit: Option<TripleAudit>,
}

/// Radius of the disk used to count the trivial zeros at the origin.
const ORIGIN_PROBE: f64 = 1e-3;

/// Multiplicity of the zero of `G` at `kappa = 0`.
///
/// This is at least two, and larger when a resonance coincides with the
/// origin (for example `b = 0` with `a = 1/gamma + 2/beta`).
pub fn cleared_origin_multiplicity(p: &TripleWellParams) -> usize {
    let w = winding_number(&ClearedTriple::new(*p), ORIGIN_PROBE / p.geom.a, 256);
    w.re.round().max(0.0) as usize
}

/// Sign changes and near-tangencies of `G` along the imaginary axis, where it
/// is real up to a positive factor.
fn axis_seeds(f: &ClearedTriple, radius: f64) -> Vec<C64> {
    let TripleWellParams { geom, beta, .. } = f.params;
    let step = (PI / (8.0 * geom.a))
        .min(geom.gamma.abs() / 8.0)
        .min(beta.abs() / 8.0)
        .min(radius / 16.0);
    let n = (2.0 * radius / step).ceil() as usize;
    let step = 2.0 * radius / n as f64;
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|j| {
            let q = -radius + j as f64 * step;
            let e = f.eval_scaled(C64::new(0.0, q));
            (q, e.value.re / e.magnitude.max(f64::MIN_POSITIVE))
        })
        .collect();
    let mut out = Vec::new();
    for w in grid.windows(2) {
        if w[0].1.signum() != w[1].1.signum() {
            out.push(C64::new(0.0, 0.5 * (w[0].0 + w[1].0)));
        }
    }
    for w in grid.windows(3) {
        let v = w[1].1.abs();
        if v < w[0].1.abs() && v < w[2].1.abs() {
            out.push(C64::new(0.0, w[1].0));
        }
    }
    out
}

/// Newton-polished roots of the triple-well secular equation with
/// `|kappa| <= radius`.
///
/// Every seed and its mirror `-seed*` is polished on [`ClearedTriple`];
/// imaginary-axis brackets are added automatically. Roots at the origin
/// are discarded. If the winding audit finds more zeros than roots, up to
/// three rounds of midpoint seeds are tried.
pub fn find_exact_triple(p: &TripleWellParams, radius: f64, seeds: &[C64]) -> Result<TripleRoots> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    if let Some(s) = seeds.iter().find(|s| !(s.re.is_finite() && s.im.is_finite())) {
        return Err(Error::InvalidInput(format!("non-finite seed {s}")));
    }
    let a = p.geom.a;
    let func = ClearedTriple::new(*p);
    let opts = NewtonOptions {
        escape_radius: 10.0 * radius,
        ..Default::default()
    };
    let floor = ORIGIN_PROBE / a;
    let pole = I * p.geom.gamma / 2.0;
    let dedup = tol::DEDUP_TOL / a;

    let mut found: Vec<C64> = Vec::new();
    let mut failures = Vec::new();
    let polish = |candidates: &[C64], found: &mut Vec<C64>, failures: &mut Vec<(C64, Error)>| {
        for &s in candidates {
            match newton_refine(&func, s, &opts) {
                Ok(k) => {
                    if k.norm() >= floor && (k - pole).norm() >= tol::POLE_TOL / a {
                        found.push(k);
                    }
                }
                Err(e) => failures.push((s, e)),
            }
        }
    };

    let mut initial: Vec<C64> = Vec::with_capacity(2 * seeds.len());
    for &s in seeds {
        initial.push(s);
        initial.push(-s.conj());
    }
    initial.extend(axis_seeds(&func, radius));
    polish(&initial, &mut found, &mut failures);
    let mut roots = canonicalize(&found, dedup);
    roots.retain(|k| k.norm() <= radius);

    let origin = cleared_origin_multiplicity(p);
    let count = audited_count(&func, radius, tol::WINDING_NODES, tol::CONTOUR_MARGIN / a).ok();
    let target = count.map(|w| w.count.saturating_sub(origin));
    for _ in 0..3 {
        let inside = roots.iter().filter(|k| count.is_none_or(|w| k.norm() < w.radius)).count();
        if target.is_none_or(|t| inside >= t) {
            break;
        }
        let extra = midpoints(&roots);
        let mut round_failures = Vec::new();
        polish(&extra, &mut found, &mut round_failures);
        roots = canonicalize(&found, dedup);
        roots.retain(|k| k.norm() <= radius);
    }
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let audit = count.map(|w| TripleAudit {
        winding_count: w.count,
        origin_multiplicity: origin,
        found_count: roots.iter().filter(|k| k.norm() < w.radius).count(),
        contour_radius: w.radius,
        nodes: w.nodes,
    });
    Ok(TripleRoots { roots, failures, audit })
}

/// Right-hand side of the Kronig-Penney dispersion `cos(qd) = cos(kd) - gamma sin(kd)/(2k)`.
pub fn kp_rhs(k: f64, gamma: f64, d: f64) -> f64 {
    if (k * d).abs() < tol::K_FLOOR {
        return 1.0 - gamma * d / 2.0;
    }
    (k * d).cos() - gamma * (k * d).sin() / (2.0 * k)
}

/// Allowed bands of the infinite lattice of spikes `-gamma delta(x - jd)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub d: f64,
    pub gamma: f64,
    pub k_max: f64,
    /// Disjoint sorted `[k_lo, k_hi]` intervals with `|rhs| <= 1`.
    pub bands: Vec<(f64, f64)>,
}

impl BandStructure {
    /// Whether `k` lies in a band widened by `pad` on each side.
    pub fn contains(&self, k: f64, pad: f64) -> bool {
        self.bands.iter().any(|&(lo, hi)| k >= lo - pad && k <= hi + pad)
    }
}

fn band_excess(k: f64, gamma: f64, d: f64) -> f64 {
    kp_rhs(k, gamma, d).abs() - 1.0
}

fn bisect_edge(mut allowed: f64, mut forbidden: f64, gamma: f64, d: f64) -> f64 {
    while (forbidden - allowed).abs() > tol::BAND_TOL {
        let mid = 0.5 * (allowed + forbidden);
        if mid == allowed || mid == forbidden {
            break;
        }
        if band_excess(mid, gamma, d) <= 0.0 {
            allowed = mid;
        } else {
            forbidden = mid;
        }
    }
    0.5 * (allowed + forbidden)
}

/// Bands in `(0, k_max]` from a scan at step `d/2048` with bisected edges.
pub fn allowed_bands(gamma: f64, d: f64, k_max: f64) -> Result<BandStructure> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("period must be positive, got {d}")));
    }
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(Error::InvalidInput(format!("k_max must be positive, got {k_max}")));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("gamma must be finite, got {gamma}")));
    }
    let n = (k_max / (d / 2048.0)).ceil() as usize;
    let step = k_max / n as f64;
    let mut bands = Vec::new();
    let mut start = (band_excess(0.0, gamma, d) <= 0.0).then_some(0.0);
    let mut prev = 0.0;
    for j in 1..=n {
        let k = j as f64 * step;
        let inside = band_excess(k, gamma, d) <= 0.0;
        match (start, inside) {
            (None, true) => start = Some(bisect_edge(k, prev, gamma, d)),
            (Some(lo), false) => {
                bands.push((lo, bisect_edge(prev, k, gamma, d)));
                start = None;
            }
            _ => {}
        }
        prev = k;
    }
    if let Some(lo) = start {
        bands.push((lo, k_max));
    }
    Ok(BandStructure { d, gamma, k_max, bands })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(b: f64, beta: f64) -> TripleWellParams {
        TripleWellParams::new(SystemGeometry::new(1.0, 3.0).unwrap(), b, beta).unwrap()
    }

    #[test]
    fn params_validation() {
        let g = SystemGeometry::new(1.0, 3.0).unwrap();
        assert!(matches!(TripleWellParams::new(g, 1.0, 3.0), Err(Error::SpikeOutOfRange { .. })));
        assert!(TripleWellParams::new(g, 0.0, 0.0).is_err());
        assert!(TripleWellParams::new(g, -0.99, 3.0).is_ok());
    }

    #[test]
    fn poles_are_refused() {
        let p = params(0.3, 3.0);
        assert!(matches!(triple_secular(C64::new(0.0, 0.0), &p), Err(Error::NearPole { .. })));
        assert!(matches!(triple_secular(C64::new(0.0, 1.5), &p), Err(Error::NearPole { .. })));
        assert!(triple_secular(C64::new(0.0, 1.6), &p).is_ok());
    }

    #[test]
    fn cleared_function_matches_secular() {
        let p = params(0.4, 2.0);
        let g = ClearedTriple::new(p);
        for &k in &[C64::new(0.7, 0.3), C64::new(4.0, -1.2), C64::new(-9.0, -0.4)] {
            let d = 1.0 + 2.0 * I * k / 3.0;
            let f = triple_secular(k, &p).unwrap();
            assert!((g.value(k) - f * d * d).norm() < 1e-12 * g.value(k).norm().max(1.0));
            let e = g.eval_scaled(k);
            let ratio = g.value(k) / e.value;
            let h = 1e-6;
            let fd = (g.value(k + h) - g.value(k - h)) / (2.0 * h);
            assert!((fd / ratio - e.derivative).norm() < 1e-6 * e.derivative.norm().max(1.0));
        }
    }

    #[test]
    fn infinite_beta_limit() {
        // eta -> 0 leaves xi^2 - 2 xi cos(2 kappa b) + 1
        let p = params(0.25, 1e15);
        let k = C64::new(2.0, -0.3);
        let xi = (2.0 * I * k).exp() / (1.0 + 2.0 * I * k / 3.0);
        let expected = xi * xi - 2.0 * xi * (0.5 * k).cos() + 1.0;
        assert!((triple_secular(k, &p).unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn cleared_origin_zero_is_at_least_double() {
        assert_eq!(cleared_origin_multiplicity(&params(0.3, 2.0)), 2);
        // a = 1/gamma + 2/beta: a resonance sits exactly at the origin
        assert_eq!(cleared_origin_multiplicity(&params(0.0, 3.0)), 3);
    }

    #[test]
    fn axis_roots_found_without_seeds() {
        let p = params(0.5, 3.0);
        let r = find_exact_triple(&p, 4.0, &[]).unwrap();
        assert!(r.roots.iter().any(|k| k.re == 0.0 && k.im > 0.0));
        for k in &r.roots {
            let rel = ClearedTriple::new(p).eval_scaled(*k).residual();
            assert!(rel < 1e-11);
        }
    }

    #[test]
    fn kp_rhs_values() {
        let d = 2.0 / 19.0;
        assert!((kp_rhs(0.0, 10.0, d) - 9.0 / 19.0).abs() < 1e-15);
        for n in 1..6 {
            let k = n as f64 * PI / d;
            assert!((kp_rhs(k, 10.0, d).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn free_particle_is_one_band() {
        let b = allowed_bands(0.0, 0.5, 30.0).unwrap();
        assert_eq!(b.bands, vec![(0.0, 30.0)]);
    }

    #[test]
    fn band_edges_touch_unit_modulus() {
        let d = 2.0 / 19.0;
        let b = allowed_bands(10.0, d, 200.0).unwrap();
        assert!(b.bands.len() >= 6);
        for &(lo, hi) in &b.bands {
            assert!(lo < hi);
            for e in [lo, hi] {
                if e > 0.0 && e < 200.0 {
                    assert!(band_excess(e, 10.0, d).abs() < 1e-8, "{e}");
                }
            }
        }
        for w in b.bands.windows(2) {
            assert!(w[0].1 < w[1].0);
        }
    }
}
