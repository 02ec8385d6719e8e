//! The resonant state expansion for delta-spike perturbations.
//!
//! A perturbation `dV(x) = -sum_j beta_j delta(x - b_j)` inside `|x| < a` is
//! projected on the double-well basis, `dV_nm = -sum_j beta_j phi_n(b_j) phi_m(b_j)`,
//! and the perturbed wavenumbers are the eigenvalues of the complex symmetric
//! matrix `H_nm = k_n delta_nm + dV_nm / (2 sqrt(k_n) sqrt(k_m))`.

use std::sync::Arc;

use faer::Mat;

use crate::basis::{build_basis, wavefunction, BasisSet, Parity, ResonantState, StateClass, SystemGeometry};
use crate::{tol, Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// `-strength * delta(x - position)`; positive strength is a well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSpike {
    pub position: f64,
    pub strength: f64,
}

impl DeltaSpike {
    pub fn new(position: f64, strength: f64) -> Self {
        Self { position, strength }
    }
}

/// Sum of delta spikes, sorted by position, with coincident spikes merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Perturbation {
    spikes: Vec<DeltaSpike>,
}

impl Perturbation {
    pub fn new(spikes: impl IntoIterator<Item = DeltaSpike>) -> Self {
        let mut sorted: Vec<DeltaSpike> = spikes.into_iter().collect();
        sorted.sort_by(|x, y| x.position.total_cmp(&y.position));
        let mut merged: Vec<DeltaSpike> = Vec::with_capacity(sorted.len());
        for s in sorted {
            match merged.last_mut() {
                Some(last) if (last.position - s.position).abs() <= 1e-12 => last.strength += s.strength,
                _ => merged.push(s),
            }
        }
        Self { spikes: merged }
    }

    pub fn single(position: f64, strength: f64) -> Self {
        Self::new([DeltaSpike::new(position, strength)])
    }

    /// Inner spikes of an `n`-spike lattice of period `d = 2a/(n-1)` spanning
    /// `[-a, a]`; the two outer spikes belong to the unperturbed double well.
    pub fn lattice(n: usize, strength: f64, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("a lattice needs at least 2 spikes, got {n}")));
        }
        let d = 2.0 * a / (n - 1) as f64;
        Ok(Self::new(
            (2..n).map(|j| DeltaSpike::new(-a + d * (j - 1) as f64, strength)),
        ))
    }

    pub fn spikes(&self) -> &[DeltaSpike] {
        &self.spikes
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    /// Invariant under `x -> -x`.
    pub fn is_symmetric(&self) -> bool {
        self.spikes.iter().all(|s| {
            self.spikes
                .iter()
                .any(|t| (t.position + s.position).abs() <= 1e-12 && (t.strength - s.strength).abs() <= 1e-12 * s.strength.abs().max(1.0))
        })
    }

    pub fn validate(&self, geom: &SystemGeometry) -> Result<()> {
        for s in &self.spikes {
            if !(s.position.abs() < geom.a) || !s.strength.is_finite() {
                return Err(Error::SpikeOutOfRange {
                    position: s.position,
                    half_width: geom.a,
                });
            }
        }
        Ok(())
    }
}

/// Interior wavefunction `phi_n(b)`: `2B cos(kb)` (even) or `2iB sin(kb)` (odd).
pub fn phi_at(state: &ResonantState, b: f64) -> C64 {
    let kb = state.k * b;
    match state.parity {
        Parity::Even => 2.0 * state.interior_amp * kb.cos(),
        Parity::Odd => 2.0 * I * state.interior_amp * kb.sin(),
    }
}

/// Dense matrix `dV_nm = -sum_j beta_j phi_n(b_j) phi_m(b_j)`.
pub fn perturbation_matrix(basis: &BasisSet, pert: &Perturbation) -> Result<Mat<C64>> {
    pert.validate(&basis.geometry)?;
    let m = basis.len();
    let mut dv = Mat::<C64>::zeros(m, m);
    for spike in pert.spikes() {
        let phi: Vec<C64> = basis.states.iter().map(|s| phi_at(s, spike.position)).collect();
        for n in 0..m {
            let w = -spike.strength * phi[n];
            for l in n..m {
                dv[(n, l)] += w * phi[l];
            }
        }
    }
    for n in 0..m {
        for l in 0..n {
            dv[(n, l)] = dv[(l, n)];
        }
    }
    Ok(dv)
}

/// Symmetrised RSE matrix together with the basis it was built from.
#[derive(Debug, Clone)]
pub struct RseMatrix {
    pub h: Mat<C64>,
    /// Principal `sqrt(k_n)` used in the symmetrisation.
    pub sqrt_k: Vec<C64>,
    pub basis: Arc<BasisSet>,
}

impl RseMatrix {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.h[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn assemble(basis: Arc<BasisSet>, pert: &Perturbation) -> Result<RseMatrix> {
    let floor = tol::K_FLOOR / basis.geometry.a;
    if let Some(s) = basis.states.iter().find(|s| s.k.norm() < floor) {
        return Err(Error::ZeroWavenumber { k: s.k });
    }
    let dv = perturbation_matrix(&basis, pert)?;
    let sqrt_k: Vec<C64> = basis.states.iter().map(|s| s.k.sqrt()).collect();
    let m = basis.len();
    let mut h = Mat::<C64>::zeros(m, m);
    for n in 0..m {
        h[(n, n)] = basis.states[n].k + dv[(n, n)] / (2.0 * sqrt_k[n] * sqrt_k[n]);
        for l in n + 1..m {
            let v = dv[(n, l)] / (2.0 * sqrt_k[n] * sqrt_k[l]);
            h[(n, l)] = v;
            h[(l, n)] = v;
        }
    }
    Ok(RseMatrix { h, sqrt_k, basis })
}

/// Perturbed resonant states.
#[derive(Debug, Clone)]
pub struct RseSolution {
    /// Eigenvalues sorted by `(Re, Im)`.
    pub kappas: Vec<C64>,
    /// `coefficients[nu][n]`: column `nu` of `C`, with `sum_n C_n^2 = 1`.
    pub coefficients: Vec<Vec<C64>>,
    /// `max_n |(H C_nu - kappa_nu C_nu)_n|` per state.
    pub residuals: Vec<f64>,
    /// Infinity norm of the matrix that was diagonalised.
    pub h_norm: f64,
    pub sqrt_k: Vec<C64>,
    pub basis: Arc<BasisSet>,
}

impl RseSolution {
    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }

    pub fn class(&self, nu: usize) -> StateClass {
        StateClass::classify(self.kappas[nu], tol::AXIS_TOL / self.basis.geometry.a)
    }

    pub fn count_class(&self, class: StateClass) -> usize {
        (0..self.len()).filter(|&nu| self.class(nu) == class).count()
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0_f64, |m, &r| m.max(r)) / self.h_norm.max(f64::MIN_POSITIVE)
    }

    /// Parity of state `nu` if its expansion lives in one parity sector only.
    pub fn parity(&self, nu: usize) -> Option<Parity> {
        let (mut even, mut odd) = (0.0, 0.0);
        for (c, s) in self.coefficients[nu].iter().zip(&self.basis.states) {
            match s.parity {
                Parity::Even => even += c.norm_sqr(),
                Parity::Odd => odd += c.norm_sqr(),
            }
        }
        let total = even + odd;
        if odd <= 1e-9 * total {
            Some(Parity::Even)
        } else if even <= 1e-9 * total {
            Some(Parity::Odd)
        } else {
            None
        }
    }
}

/// Full eigendecomposition of the RSE matrix.
pub fn eigensolve(matrix: &RseMatrix) -> Result<RseSolution> {
    let m = matrix.dim();
    let h_norm = matrix.norm_inf();
    if (0..m).any(|i| (0..m).any(|j| !(matrix.h[(i, j)].re.is_finite() && matrix.h[(i, j)].im.is_finite()))) {
        return Err(Error::EigFailure("matrix has non-finite entries".into()));
    }
    let evd = matrix
        .h
        .eigen()
        .map_err(|e| Error::EigFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();

    let mut pairs: Vec<(C64, Vec<C64>)> = (0..m)
        .map(|nu| {
            let mut c: Vec<C64> = (0..m).map(|n| u[(n, nu)]).collect();
            normalize_bilinear(&mut c);
            (s[nu], c)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let mut kappas = Vec::with_capacity(m);
    let mut coefficients = Vec::with_capacity(m);
    for (kappa, c) in pairs {
        kappas.push(kappa);
        coefficients.push(c);
    }
    let cmat = Mat::<C64>::from_fn(m, m, |n, nu| coefficients[nu][n]);
    let hc = &matrix.h * &cmat;
    let residuals: Vec<f64> = (0..m)
        .map(|nu| {
            (0..m)
                .map(|n| (hc[(n, nu)] - kappas[nu] * cmat[(n, nu)]).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(RseSolution {
        kappas,
        coefficients,
        residuals,
        h_norm,
        sqrt_k: matrix.sqrt_k.clone(),
        basis: matrix.basis.clone(),
    })
}

/// Scales `c` so that `sum c_n^2 = 1` (no conjugation) and the largest entry
/// has a positive real part. Quasi-null vectors keep unit Euclidean norm.
fn normalize_bilinear(c: &mut [C64]) {
    let euclid = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if euclid > 0.0 {
        c.iter_mut().for_each(|z| *z /= euclid);
    }
    let q: C64 = c.iter().map(|z| z * z).sum();
    if q.norm() > 1e-12 {
        let scale = q.sqrt();
        c.iter_mut().for_each(|z| *z /= scale);
    }
    let lead = c
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or_default();
    if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
        c.iter_mut().for_each(|z| *z = -*z);
    }
}

/// `max_n |(H c - kappa c)_n|`.
pub fn eigen_residual(h: &Mat<C64>, kappa: C64, c: &[C64]) -> f64 {
    let m = c.len();
    (0..m)
        .map(|n| {
            let hc: C64 = (0..m).map(|l| h[(n, l)] * c[l]).sum();
            (hc - kappa * c[n]).norm()
        })
        .fold(0.0, f64::max)
}

/// `build_basis -> perturbation_matrix -> assemble -> eigensolve`.
pub fn solve(geom: SystemGeometry, radius: f64, pert: &Perturbation) -> Result<RseSolution> {
    pert.validate(&geom)?;
    let basis = Arc::new(build_basis(geom, radius)?);
    solve_with_basis(basis, pert)
}

pub fn solve_with_basis(basis: Arc<BasisSet>, pert: &Perturbation) -> Result<RseSolution> {
    eigensolve(&assemble(basis, pert)?)
}

/// Perturbed wavefunction `psi_nu(x) = sum_n C_n sqrt(kappa_nu) / sqrt(k_n) phi_n(x)`.
///
/// `sqrt(k_n)` is the same principal root used to build `H`, so the
/// expansion is consistent with the eigenvectors.
pub fn perturbed_wavefunction(sol: &RseSolution, nu: usize, x: f64) -> Result<C64> {
    let kappa = sol.kappas[nu];
    if kappa.norm() < tol::K_FLOOR / sol.basis.geometry.a {
        return Err(Error::ZeroWavenumber { k: kappa });
    }
    let geom = &sol.basis.geometry;
    let sum: C64 = sol.coefficients[nu]
        .iter()
        .zip(&sol.basis.states)
        .zip(&sol.sqrt_k)
        .map(|((c, s), sk)| c / sk * wavefunction(s, x, geom))
        .sum();
    Ok(kappa.sqrt() * sum)
}
