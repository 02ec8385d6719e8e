//! Resonant states of the symmetric double-delta well
//! `V(x) = -gamma [delta(x - a) + delta(x + a)]`.
//!
//! States are the zeros of `1 + 2ik/gamma +- exp(2ika)` (upper sign even).
//! [`build_basis`] collects all of them inside `|k| <= R`, normalises them
//! with the Siegert condition and certifies completeness with a winding
//! number per parity.

mod secular;
mod seeds;

use std::cmp::Ordering;
use std::fmt;

pub use secular::{origin_multiplicity, secular, secular_derivative, Secular};
pub use seeds::seed_grid;

pub use crate::roots::{count_roots_in_disk, newton_refine, NewtonOptions};

use crate::roots::audited_count;
use crate::{tol, Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Half-width `a` and spike strength `gamma` of the double well.
/// Positive `gamma` is a pair of wells, negative a pair of barriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemGeometry {
    pub a: f64,
    pub gamma: f64,
}

impl SystemGeometry {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("half-width a must be positive, got {a}")));
        }
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must be finite and nonzero, got {gamma}")));
        }
        Ok(Self { a, gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Sign in front of `exp(2ika)` in the secular function.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bound states sit on the positive imaginary axis, antibound states on the
/// negative one; everything else is a normal resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateClass {
    Bound,
    Antibound,
    Normal,
}

impl StateClass {
    pub fn classify(k: C64, axis_tol: f64) -> Self {
        if k.re.abs() > axis_tol {
            StateClass::Normal
        } else if k.im > 0.0 {
            StateClass::Bound
        } else {
            StateClass::Antibound
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StateClass::Bound => "bound",
            StateClass::Antibound => "antibound",
            StateClass::Normal => "normal",
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One normalised resonant state of the double well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantState {
    pub k: C64,
    pub parity: Parity,
    pub class: StateClass,
    /// Interior amplitude `B`: `phi = B (e^{ikx} +- e^{-ikx})` for `|x| <= a`.
    pub interior_amp: C64,
    /// Exterior amplitude `A`: `phi = A e^{ikx}` for `x > a`.
    pub exterior_amp: C64,
}

impl ResonantState {
    pub fn new(k: C64, parity: Parity, geom: &SystemGeometry) -> Result<Self> {
        let (exterior_amp, interior_amp) = normalize_state(k, parity, geom)?;
        Ok(Self {
            k,
            parity,
            class: StateClass::classify(k, tol::AXIS_TOL / geom.a),
            interior_amp,
            exterior_amp,
        })
    }
}

/// Siegert normalisation constants `(A, B)` of the state with wavenumber `k`.
pub fn normalize_state(k: C64, parity: Parity, geom: &SystemGeometry) -> Result<(C64, C64)> {
    if k.norm() < tol::K_FLOOR / geom.a {
        return Err(Error::ZeroWavenumber { k });
    }
    let s = parity.sign();
    let denom = geom.gamma + 2.0 * I * k;
    // Strong barriers push bound states onto k = i gamma/2, where `denom`
    // cancels to nothing; at a root it equals -s gamma exp(2ika) exactly.
    let inv = if denom.norm() < 1e-3 * geom.gamma.abs() {
        -s * (-2.0 * I * k * geom.a).exp() / geom.gamma
    } else {
        1.0 / denom
    };
    let radicand = s * (geom.a - inv);
    if !radicand.is_finite() || radicand.norm() < tol::DEGENERATE_TOL {
        return Err(Error::DegenerateNorm { k });
    }
    let b = 1.0 / (2.0 * radicand.sqrt());
    let a = b * 2.0 * I * k * inv;
    Ok((a, b))
}

/// Piecewise wavefunction of a double-well state.
pub fn wavefunction(state: &ResonantState, x: f64, geom: &SystemGeometry) -> C64 {
    let s = state.parity.sign();
    let k = state.k;
    if x > geom.a {
        state.exterior_amp * (I * k * x).exp()
    } else if x < -geom.a {
        s * state.exterior_amp * (-I * k * x).exp()
    } else {
        state.interior_amp * ((I * k * x).exp() + s * (-I * k * x).exp())
    }
}

/// Siegert normalisation integral
/// `int_{-a}^{a} phi^2 dx - (phi(a)^2 + phi(-a)^2) / (2ik)`
/// by composite Simpson quadrature on `panels` panels (rounded up to even).
pub fn siegert_norm(state: &ResonantState, geom: &SystemGeometry, panels: usize) -> C64 {
    let n = panels.max(2).next_multiple_of(2);
    let h = 2.0 * geom.a / n as f64;
    let sq = |x: f64| {
        let p = wavefunction(state, x, geom);
        p * p
    };
    let mut acc = sq(-geom.a) + sq(geom.a);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * sq(-geom.a + j as f64 * h);
    }
    let volume = acc * h / 3.0;
    let edge = (sq(geom.a) + sq(-geom.a)) / (2.0 * I * state.k);
    volume - edge
}

/// Argument-principle audit for one parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityAudit {
    /// Zeros of the secular function inside the contour, with multiplicity.
    pub winding_count: usize,
    /// Zeros at `k = 0`, which are not states.
    pub origin_multiplicity: usize,
    pub found_count: usize,
    pub contour_radius: f64,
    pub nodes: usize,
}

impl ParityAudit {
    pub fn expected(&self) -> usize {
        self.winding_count.saturating_sub(self.origin_multiplicity)
    }

    pub fn passed(&self) -> bool {
        self.winding_count == self.found_count + self.origin_multiplicity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletenessReport {
    pub even: ParityAudit,
    pub odd: ParityAudit,
}

impl CompletenessReport {
    pub fn get(&self, parity: Parity) -> &ParityAudit {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }
}

/// Every double-well resonant state with `|k| <= radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub geometry: SystemGeometry,
    /// Radius of the truncation disk (possibly nudged off a root).
    pub radius: f64,
    pub states: Vec<ResonantState>,
    pub audit: CompletenessReport,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn wavenumbers(&self) -> Vec<C64> {
        self.states.iter().map(|s| s.k).collect()
    }

    pub fn count_class(&self, class: StateClass) -> usize {
        self.states.iter().filter(|s| s.class == class).count()
    }

    pub fn count_parity(&self, parity: Parity) -> usize {
        self.states.iter().filter(|s| s.parity == parity).count()
    }

    /// Basis restricted to one parity, keeping the audit of the full set.
    pub fn restrict(&self, parity: Parity) -> BasisSet {
        BasisSet {
            states: self.states.iter().filter(|s| s.parity == parity).copied().collect(),
            ..self.clone()
        }
    }
}

/// Deterministic output order: class, then `Im k` descending, `Re k` ascending.
pub fn state_order(x: &ResonantState, y: &ResonantState) -> Ordering {
    x.class
        .cmp(&y.class)
        .then(y.k.im.total_cmp(&x.k.im))
        .then(x.k.re.total_cmp(&y.k.re))
        .then(x.parity.cmp(&y.parity))
}

struct RootSet {
    roots: Vec<C64>,
    dedup: f64,
}

impl RootSet {
    fn insert(&mut self, k: C64) -> bool {
        if self.roots.iter().any(|r| (r - k).norm() < self.dedup) {
            return false;
        }
        self.roots.push(k);
        true
    }
}

/// Snap axis roots onto the axis and make the off-axis set exactly closed
/// under `k -> -k*`.
pub(crate) fn canonicalize(roots: &[C64], dedup: f64) -> Vec<C64> {
    let mut set = RootSet { roots: Vec::new(), dedup };
    for &k in roots {
        if k.re.abs() <= 1e-10 * k.norm().max(1.0) {
            set.insert(C64::new(0.0, k.im));
        } else {
            let right = if k.re > 0.0 { k } else { -k.conj() };
            set.insert(right);
        }
    }
    let mut out = Vec::with_capacity(2 * set.roots.len());
    for k in set.roots {
        out.push(k);
        if k.re != 0.0 {
            out.push(-k.conj());
        }
    }
    out
}

fn polish_seeds(
    func: &Secular,
    seeds: &[C64],
    radius: f64,
    set: &mut RootSet,
) {
    let opts = NewtonOptions {
        escape_radius: 10.0 * radius,
        ..Default::default()
    };
    let floor = tol::K_FLOOR / func.geom.a;
    for &s in seeds {
        if let Ok(k) = newton_refine(func, s, &opts) {
            if k.norm() <= radius && k.norm() >= floor {
                set.insert(k);
            }
        }
    }
}

pub(crate) fn midpoints(roots: &[C64]) -> Vec<C64> {
    let mut sorted = roots.to_vec();
    sorted.sort_by(|x, y| x.arg().total_cmp(&y.arg()).then(x.norm().total_cmp(&y.norm())));
    let mut out = Vec::new();
    for w in sorted.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    sorted.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    for w in sorted.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    out
}

fn roots_for_parity(geom: &SystemGeometry, parity: Parity, radius: f64, expected: usize) -> Result<Vec<C64>> {
    let func = Secular::new(*geom, parity);
    let dedup = tol::DEDUP_TOL / geom.a;
    let mut set = RootSet { roots: Vec::new(), dedup };
    polish_seeds(&func, &seed_grid(geom, radius, parity), radius, &mut set);
    let mut roots = canonicalize(&set.roots, dedup);
    roots.retain(|k| k.norm() <= radius);
    for _ in 0..3 {
        if roots.len() == expected {
            break;
        }
        let extra = midpoints(&roots);
        set.roots = roots.clone();
        polish_seeds(&func, &extra, radius, &mut set);
        roots = canonicalize(&set.roots, dedup);
        roots.retain(|k| k.norm() <= radius);
    }
    if roots.len() != expected {
        return Err(Error::IncompleteBasis {
            parity: parity.name(),
            found: roots.len(),
            expected,
        });
    }
    Ok(roots)
}

/// Complete set of double-well resonant states with `|k| <= radius`.
pub fn build_basis(geom: SystemGeometry, radius: f64) -> Result<BasisSet> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let margin = tol::CONTOUR_MARGIN / geom.a;

    // Both parities must be audited on the same contour.
    let mut r = radius;
    let mut counts = None;
    for _ in 0..6 {
        let even = audited_count(&Secular::new(geom, Parity::Even), r, tol::WINDING_NODES, margin)?;
        let odd = audited_count(&Secular::new(geom, Parity::Odd), even.radius, tol::WINDING_NODES, margin)?;
        if odd.radius == even.radius {
            counts = Some((even, odd));
            break;
        }
        r = odd.radius;
    }
    let (even_w, odd_w) = counts.ok_or(Error::ContourTooClose { radius })?;
    let r = even_w.radius;

    let mut states = Vec::new();
    let mut audits = Vec::with_capacity(2);
    for (parity, w) in [(Parity::Even, even_w), (Parity::Odd, odd_w)] {
        let origin = origin_multiplicity(parity, &geom);
        let expected = w.count.saturating_sub(origin);
        let roots = roots_for_parity(&geom, parity, r, expected)?;
        audits.push(ParityAudit {
            winding_count: w.count,
            origin_multiplicity: origin,
            found_count: roots.len(),
            contour_radius: w.radius,
            nodes: w.nodes,
        });
        for k in roots {
            states.push(ResonantState::new(k, parity, &geom)?);
        }
    }
    states.sort_by(state_order);
    Ok(BasisSet {
        geometry: geom,
        radius: r,
        states,
        audit: CompletenessReport {
            even: audits[0],
            odd: audits[1],
        },
    })
}

/// Smallest truncation radius whose disk holds at least `target` states.
///
/// The returned radius sits halfway between the modulus of the `target`-th
/// state (sorted by `|k|`) and the next larger modulus, so the contour stays
/// clear of roots.
pub fn radius_for_size(geom: SystemGeometry, target: usize) -> Result<f64> {
    if target == 0 {
        return Err(Error::InvalidInput("target basis size must be positive".into()));
    }
    let mut guess = std::f64::consts::PI * (target as f64 + 8.0) / (4.0 * geom.a) + 4.0 / geom.a;
    loop {
        let basis = build_basis(geom, guess)?;
        let mut moduli: Vec<f64> = basis.states.iter().map(|s| s.k.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        if moduli.len() > target {
            let inner = moduli[target - 1];
            let gap = 2.0 * tol::CONTOUR_MARGIN / geom.a;
            if let Some(&outer) = moduli[target..].iter().find(|&&m| m > inner + gap) {
                return Ok(0.5 * (inner + outer));
            }
        }
        guess *= 1.5;
    }
}
