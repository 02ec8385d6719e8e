//! Newton polishing and argument-principle root counting for entire functions
//! of a complex wavenumber.

use crate::{tol, Error, Result, C64};

/// Value, derivative and a magnitude reference of an analytic function, all
/// multiplied by the same nonzero factor.
///
/// Secular functions of open systems grow like `exp(2|Im k| a)` in one half
/// plane; evaluating them pre-divided by the dominant exponential keeps every
/// ratio below finite.
#[derive(Debug, Clone, Copy)]
pub struct ScaledEval {
    pub value: C64,
    pub derivative: C64,
    /// Sum of the moduli of the individual terms (same scaling as `value`).
    pub magnitude: f64,
}

impl ScaledEval {
    /// `|f| / sum |terms|`, insensitive to the common factor.
    pub fn residual(&self) -> f64 {
        if self.magnitude > 0.0 {
            self.value.norm() / self.magnitude
        } else {
            self.value.norm()
        }
    }

    pub fn newton_step(&self) -> C64 {
        self.value / self.derivative
    }

    pub fn log_derivative(&self) -> C64 {
        self.derivative / self.value
    }
}

/// An entire function that can be evaluated in scaled form.
pub trait Analytic {
    fn eval_scaled(&self, k: C64) -> ScaledEval;
}

impl<F> Analytic for F
where
    F: Fn(C64) -> ScaledEval,
{
    fn eval_scaled(&self, k: C64) -> ScaledEval {
        self(k)
    }
}

/// Wraps a plain `(f, f')` pair; no rescaling is applied.
pub struct Plain<F, D> {
    pub f: F,
    pub df: D,
}

impl<F, D> Analytic for Plain<F, D>
where
    F: Fn(C64) -> C64,
    D: Fn(C64) -> C64,
{
    fn eval_scaled(&self, k: C64) -> ScaledEval {
        ScaledEval {
            value: (self.f)(k),
            derivative: (self.df)(k),
            magnitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Accepted relative residual, see [`ScaledEval::residual`].
    pub root_tol: f64,
    pub max_iter: usize,
    /// Iterates leaving this disk are abandoned.
    pub escape_radius: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            root_tol: tol::ROOT_TOL,
            max_iter: 100,
            escape_radius: f64::INFINITY,
        }
    }
}

/// Newton-Raphson iteration from `k0` until the relative residual drops below
/// `opts.root_tol`.
pub fn newton_refine<A: Analytic + ?Sized>(func: &A, k0: C64, opts: &NewtonOptions) -> Result<C64> {
    let mut k = k0;
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_iter {
        let e = func.eval_scaled(k);
        residual = e.residual();
        if residual <= opts.root_tol {
            return Ok(k);
        }
        let step = e.newton_step();
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        k -= step;
        if k.norm() > opts.escape_radius {
            break;
        }
        // Stagnation at the rounding floor: accept if the residual is tiny.
        if step.norm() <= 4.0 * f64::EPSILON * k.norm().max(1.0) {
            let e = func.eval_scaled(k);
            residual = e.residual();
            if residual <= 100.0 * opts.root_tol {
                return Ok(k);
            }
            break;
        }
    }
    Err(Error::NoConvergence { k, residual })
}

/// Trapezoidal approximation of `(1/2 pi i) \oint f'/f dk` over `|k| = radius`.
pub fn winding_number<A: Analytic + ?Sized>(func: &A, radius: f64, nodes: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = std::f64::consts::TAU * j as f64 / nodes as f64;
        let k = C64::from_polar(radius, theta);
        acc += func.eval_scaled(k).log_derivative() * k;
    }
    acc / nodes as f64
}

/// Outcome of an argument-principle count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingCount {
    pub count: usize,
    /// Radius actually used, after any nudging away from nearby roots.
    pub radius: f64,
    pub nodes: usize,
}

fn contour_is_clear<A: Analytic + ?Sized>(func: &A, radius: f64, nodes: usize, margin: f64) -> bool {
    (0..nodes).all(|j| {
        let theta = std::f64::consts::TAU * j as f64 / nodes as f64;
        let e = func.eval_scaled(C64::from_polar(radius, theta));
        e.newton_step().norm() >= margin
    })
}

/// Number of zeros of `func` inside `|k| < radius`, counted with multiplicity.
///
/// If a node of the contour sits within `contour_margin` of a root (estimated
/// from the Newton step length) the radius is pushed outward by the margin,
/// at most five times.
pub fn count_roots_in_disk<A: Analytic + ?Sized>(
    func: &A,
    radius: f64,
    nodes: usize,
    contour_margin: f64,
) -> Result<WindingCount> {
    let mut r = radius;
    for _ in 0..=5 {
        if contour_is_clear(func, r, nodes, contour_margin) {
            let w = winding_number(func, r, nodes);
            let rounded = w.re.round();
            if (w.re - rounded).abs() > 0.25 || w.im.abs() > 0.25 || rounded < 0.0 {
                return Err(Error::NonIntegerWinding { value: w, nodes });
            }
            return Ok(WindingCount {
                count: rounded as usize,
                radius: r,
                nodes,
            });
        }
        r += contour_margin;
    }
    Err(Error::ContourTooClose { radius })
}

/// Root count confirmed at two consecutive node counts.
///
/// Starts at `start_nodes` and doubles until the counts at `n` and `2n` nodes
/// agree and both pass the integrality check.
pub fn audited_count<A: Analytic + ?Sized>(
    func: &A,
    radius: f64,
    start_nodes: usize,
    contour_margin: f64,
) -> Result<WindingCount> {
    const MAX_NODES: usize = 1 << 22;
    let mut nodes = start_nodes.max(16);
    let mut previous: Option<WindingCount> = None;
    let mut last_err = None;
    while nodes <= MAX_NODES {
        match count_roots_in_disk(func, radius, nodes, contour_margin) {
            Ok(w) => {
                if let Some(p) = previous {
                    if p.count == w.count && p.radius == w.radius {
                        return Ok(p);
                    }
                }
                previous = Some(w);
            }
            Err(e @ Error::ContourTooClose { .. }) => return Err(e),
            Err(e) => {
                previous = None;
                last_err = Some(e);
            }
        }
        nodes *= 2;
    }
    Err(last_err.unwrap_or(Error::NonIntegerWinding {
        value: C64::new(f64::NAN, f64::NAN),
        nodes: MAX_NODES,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> Plain<impl Fn(C64) -> C64, impl Fn(C64) -> C64> {
        // roots at 1, -2, 3i
        let r = [C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 3.0)];
        Plain {
            f: move |z: C64| (z - r[0]) * (z - r[1]) * (z - r[2]),
            df: move |z: C64| {
                (z - r[1]) * (z - r[2]) + (z - r[0]) * (z - r[2]) + (z - r[0]) * (z - r[1])
            },
        }
    }

    #[test]
    fn newton_converges_on_polynomial() {
        let k = newton_refine(&cubic(), C64::new(0.2, 2.5), &NewtonOptions::default()).unwrap();
        assert!((k - C64::new(0.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn newton_fixed_point_returns_seed() {
        let seed = C64::new(1.0, 0.0);
        let k = newton_refine(&cubic(), seed, &NewtonOptions::default()).unwrap();
        assert_eq!(k, seed);
    }

    #[test]
    fn newton_reports_failure() {
        let f = Plain {
            f: |z: C64| z.exp(),
            df: |z: C64| z.exp(),
        };
        let opts = NewtonOptions {
            max_iter: 20,
            ..Default::default()
        };
        assert!(matches!(
            newton_refine(&f, C64::new(0.0, 0.0), &opts),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn winding_counts_polynomial_roots() {
        let f = cubic();
        for (r, n) in [(0.5, 0), (1.5, 1), (2.5, 2), (4.0, 3)] {
            let w = count_roots_in_disk(&f, r, 256, 1e-3).unwrap();
            assert_eq!(w.count, n, "radius {r}");
        }
        let w = audited_count(&f, 4.0, 64, 1e-3).unwrap();
        assert_eq!(w.count, 3);
    }

    #[test]
    fn contour_on_root_is_nudged() {
        let f = cubic();
        // |1| = 1 sits on the contour; the nudged radius encloses it.
        let w = audited_count(&f, 1.0, 512, 1e-3).unwrap();
        assert!(w.radius > 1.0);
        assert_eq!(w.count, 1);
    }
}
