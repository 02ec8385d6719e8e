//! Library results checked against independent reference computations.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rse1d_core::analysis::solve_at_size;
use rse1d_core::basis::{build_basis, secular, wavefunction, Parity, StateClass, SystemGeometry};
use rse1d_core::exact::{allowed_bands, find_exact_triple, kp_rhs, ClearedTriple, TripleWellParams};
use rse1d_core::roots::{newton_refine, Analytic, NewtonOptions};
use rse1d_core::rse::{perturbed_wavefunction, solve_with_basis, Perturbation};

const I: C64 = C64::new(0.0, 1.0);

fn geom(a: f64, gamma: f64) -> SystemGeometry {
    SystemGeometry::new(a, gamma).unwrap()
}

/// Root of `f(iq)` on the positive imaginary axis by plain bisection.
fn axis_bisection(g: &SystemGeometry, parity: Parity) -> f64 {
    let s = parity.sign();
    let f = |q: f64| 1.0 - 2.0 * q / g.gamma + s * (-2.0 * q * g.a).exp();
    let (mut lo, mut hi) = (1e-6, g.gamma.abs() + 10.0);
    assert!(f(lo).signum() != f(hi).signum());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn bound_states_agree_with_axis_bisection() {
    let g = geom(1.0, 3.0);
    let basis = build_basis(g, 10.0).unwrap();
    assert_eq!(basis.count_class(StateClass::Bound), 2);
    assert_eq!(basis.count_class(StateClass::Antibound), 0);
    for parity in [Parity::Even, Parity::Odd] {
        let q = axis_bisection(&g, parity);
        let state = basis
            .states
            .iter()
            .find(|s| s.class == StateClass::Bound && s.parity == parity)
            .unwrap();
        assert!((state.k - C64::new(0.0, q)).norm() < 1e-10, "{parity}: {} vs {q}", state.k);
    }
}

/// Number of zeros inside `|k| = r` from the unwrapped phase of the plain
/// secular function on a very fine circle.
fn phase_count(g: &SystemGeometry, parity: Parity, r: f64, samples: usize) -> i64 {
    let mut total = 0.0;
    let mut prev = secular(C64::new(r, 0.0), parity, g).arg();
    for j in 1..=samples {
        let k = C64::from_polar(r, 2.0 * PI * j as f64 / samples as f64);
        let arg = secular(k, parity, g).arg();
        let mut d = arg - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = arg;
    }
    (total / (2.0 * PI)).round() as i64
}

#[test]
fn state_count_agrees_with_phase_unwrapping() {
    for (gamma, r) in [(3.0, 12.0), (10.0, 9.0), (-4.0, 11.0)] {
        let g = geom(1.0, gamma);
        let basis = build_basis(g, r).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let origin = if parity == Parity::Odd { 1 } else { 0 };
            let zeros = phase_count(&g, parity, basis.radius, 400_000);
            assert_eq!(zeros - origin, basis.count_parity(parity) as i64, "gamma {gamma} {parity}");
        }
    }
}

#[test]
fn derivative_jumps_at_the_spikes() {
    let g = geom(1.0, 3.0);
    let basis = build_basis(g, 15.0).unwrap();
    let h = 1e-5;
    for s in &basis.states {
        let psi = |x: f64| wavefunction(s, x, &g);
        let right = (-3.0 * psi(g.a) + 4.0 * psi(g.a + h) - psi(g.a + 2.0 * h)) / (2.0 * h);
        let left = (3.0 * psi(g.a) - 4.0 * psi(g.a - h) + psi(g.a - 2.0 * h)) / (2.0 * h);
        let jump = right - left;
        let expected = -g.gamma * psi(g.a);
        let scale = (s.k * psi(g.a)).norm().max(expected.norm());
        assert!((jump - expected).norm() < 1e-6 * scale, "k = {}", s.k);
    }
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Composite 5-point Gauss-Legendre rule on `[lo, hi]`.
fn gauss<F: Fn(f64) -> C64>(f: F, lo: f64, hi: f64, panels: usize) -> C64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for &(x, w) in &GL5 {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}

#[test]
fn siegert_norm_by_independent_quadrature() {
    let g = geom(1.0, 3.0);
    let basis = build_basis(g, 40.0).unwrap();
    for s in &basis.states {
        // interior form written out independently of the library
        let sign = s.parity.sign();
        let phi = |x: f64| s.interior_amp * ((I * s.k * x).exp() + sign * (-I * s.k * x).exp());
        let volume = gauss(|x| phi(x) * phi(x), -g.a, g.a, 400);
        let edge = (phi(g.a).powi(2) + phi(-g.a).powi(2)) / (2.0 * I * s.k);
        assert!((volume - edge - 1.0).norm() < 1e-10, "k = {}", s.k);
    }
}

#[test]
fn first_order_shift_matches_exact_root() {
    // beta -> 0: kappa = k - 2 beta B^2 / k + O(beta^2)
    let g = geom(1.0, 3.0);
    let basis = build_basis(g, 6.0).unwrap();
    for s in basis.states.iter().filter(|s| s.parity == Parity::Even) {
        let defect = |beta: f64| {
            let p = TripleWellParams::new(g, 0.0, beta).unwrap();
            let exact = newton_refine(&ClearedTriple::new(p), s.k, &NewtonOptions::default()).unwrap();
            let first = s.k - 2.0 * beta * s.interior_amp.powi(2) / s.k;
            ((exact - first).norm(), (exact - s.k).norm())
        };
        let (e1, shift) = defect(1e-3);
        let (e2, _) = defect(1e-4);
        assert!(e1 < 1e-2 * shift, "k = {}", s.k);
        let order = (e1 / e2).log10();
        assert!((order - 2.0).abs() < 0.1, "k = {}: order {order}", s.k);
    }
}

#[test]
fn symmetric_triple_well_contains_odd_double_well_states() {
    let g = geom(1.0, 3.0);
    let basis = build_basis(g, 20.0).unwrap();
    let p = TripleWellParams::new(g, 0.0, 3.0).unwrap();
    let odd: Vec<C64> = basis.restrict(Parity::Odd).wavenumbers();
    for &k in &odd {
        assert!(ClearedTriple::new(p).eval_scaled(k).residual() < 1e-12);
    }
    let roots = find_exact_triple(&p, 10.0, &basis.wavenumbers()).unwrap().roots;
    for k in odd.iter().filter(|k| k.norm() < 9.0) {
        assert!(roots.iter().any(|r| (r - k).norm() < 1e-9), "missing {k}");
    }
}

#[test]
fn exact_triple_roots_are_mirror_symmetric_and_audited() {
    let g = geom(1.0, 3.0);
    let p = TripleWellParams::new(g, 0.5, 3.0).unwrap();
    let sol = solve_at_size(g, 120, &Perturbation::single(0.5, 3.0)).unwrap();
    let found = find_exact_triple(&p, 30.0, &sol.kappas).unwrap();
    let audit = found.audit.unwrap();
    assert!(audit.passed(), "{audit:?}");
    for k in &found.roots {
        let m = -k.conj();
        assert!(found.roots.iter().any(|r| (r - m).norm() < 1e-12), "{k}");
    }
}

/// `[psi(b+h) + psi(b-h) - 2 psi(b) cos(kappa h)] kappa / sin(kappa h) + beta psi(b)`
/// vanishes for an exact eigenfunction with a spike `-beta delta(x-b)` and no
/// other spike within `h` of `b`.
fn jump_defect(psi: impl Fn(f64) -> C64, kappa: C64, b: f64, beta: f64, h: f64) -> f64 {
    let lhs = (psi(b + h) + psi(b - h) - 2.0 * psi(b) * (kappa * h).cos()) * kappa / (kappa * h).sin();
    (lhs + beta * psi(b)).norm() / (beta * psi(b)).norm()
}

#[test]
fn perturbed_states_develop_the_spike_jump() {
    let g = geom(1.0, 3.0);
    let (b, beta, h) = (0.3, 3.0, 0.1);
    let pert = Perturbation::single(b, beta);
    let mut previous: Option<f64> = None;
    for m in [100, 400] {
        let sol = solve_at_size(g, m, &pert).unwrap();
        let worst = (0..sol.len())
            .filter(|&nu| sol.kappas[nu].norm() < 6.0 && sol.kappas[nu].norm() > 0.5)
            .map(|nu| jump_defect(|x| perturbed_wavefunction(&sol, nu, x).unwrap(), sol.kappas[nu], b, beta, h))
            .fold(0.0, f64::max);
        assert!(worst < 0.2, "M = {m}: {worst}");
        if let Some(p) = previous {
            assert!(worst < p, "defect did not decrease: {p} -> {worst}");
        }
        previous = Some(worst);
    }
}

#[test]
fn zero_perturbation_wavefunctions_are_basis_functions() {
    let g = geom(1.0, 3.0);
    let basis = Arc::new(build_basis(g, 8.0).unwrap());
    let sol = solve_with_basis(basis.clone(), &Perturbation::default()).unwrap();
    for nu in 0..sol.len() {
        let state = basis.states.iter().find(|s| s.k == sol.kappas[nu]).unwrap();
        for x in [-0.7, 0.1, 0.9] {
            let psi = perturbed_wavefunction(&sol, nu, x).unwrap();
            assert!((psi - wavefunction(state, x, &g)).norm() < 1e-12);
        }
    }
}

#[test]
fn band_pattern_matches_dense_grid() {
    let d = 2.0 / 19.0;
    for gamma in [10.0, -10.0] {
        let bands = allowed_bands(gamma, d, 120.0).unwrap();
        let dk = 1e-4;
        let n = (120.0 / dk) as usize;
        for j in 1..n {
            let k = j as f64 * dk;
            let near_edge = bands.bands.iter().any(|&(lo, hi)| (k - lo).abs() < 1e-6 || (k - hi).abs() < 1e-6);
            if near_edge {
                continue;
            }
            let grid_allowed = kp_rhs(k, gamma, d).abs() <= 1.0;
            assert_eq!(grid_allowed, bands.contains(k, 0.0), "gamma {gamma}, k {k}");
        }
    }
}

#[test]
fn band_gaps_shrink_with_wavenumber() {
    let d = 2.0 / 19.0;
    let bands = allowed_bands(10.0, d, 250.0).unwrap();
    let gaps: Vec<f64> = bands.bands.windows(2).map(|w| w[1].0 - w[0].1).collect();
    assert!(gaps.len() >= 5);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    // one band per cell (n pi/d, (n+1) pi/d)
    assert_eq!(bands.bands.len(), (250.0 * d / PI).ceil() as usize);
}
