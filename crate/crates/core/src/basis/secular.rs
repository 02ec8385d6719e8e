use crate::roots::{Analytic, ScaledEval};
use crate::C64;

use super::{Parity, SystemGeometry};

const I: C64 = C64::new(0.0, 1.0);

/// Secular function of the double well, `1 + 2ik/gamma +- exp(2ika)`, with the
/// upper sign for even states.
pub fn secular(k: C64, parity: Parity, geom: &SystemGeometry) -> C64 {
    1.0 + 2.0 * I * k / geom.gamma + parity.sign() * (2.0 * I * k * geom.a).exp()
}

/// Analytic `d/dk` of [`secular`].
pub fn secular_derivative(k: C64, parity: Parity, geom: &SystemGeometry) -> C64 {
    2.0 * I / geom.gamma + parity.sign() * 2.0 * I * geom.a * (2.0 * I * k * geom.a).exp()
}

/// [`secular`] as an [`Analytic`] function, rescaled by `exp(-2ika)` in the
/// lower half plane where the exponential dominates.
#[derive(Debug, Clone, Copy)]
pub struct Secular {
    pub geom: SystemGeometry,
    pub parity: Parity,
}

impl Secular {
    pub fn new(geom: SystemGeometry, parity: Parity) -> Self {
        Self { geom, parity }
    }

    pub fn value(&self, k: C64) -> C64 {
        secular(k, self.parity, &self.geom)
    }
}

impl Analytic for Secular {
    fn eval_scaled(&self, k: C64) -> ScaledEval {
        let SystemGeometry { a, gamma } = self.geom;
        let s = self.parity.sign();
        let lin = 1.0 + 2.0 * I * k / gamma;
        let dlin = 2.0 * I / gamma;
        if k.im >= 0.0 {
            let e = (2.0 * I * k * a).exp();
            ScaledEval {
                value: lin + s * e,
                derivative: dlin + s * 2.0 * I * a * e,
                magnitude: 1.0 + (2.0 * k / gamma).norm() + e.norm(),
            }
        } else {
            let einv = (-2.0 * I * k * a).exp();
            ScaledEval {
                value: lin * einv + s,
                derivative: dlin * einv + s * 2.0 * I * a,
                magnitude: (1.0 + (2.0 * k / gamma).norm()) * einv.norm() + 1.0,
            }
        }
    }
}

/// Number of zeros the secular function has at `k = 0`.
///
/// The even function equals 2 there. The odd one vanishes identically at the
/// origin, with a double zero when `gamma a = 1`.
pub fn origin_multiplicity(parity: Parity, geom: &SystemGeometry) -> usize {
    match parity {
        Parity::Even => 0,
        Parity::Odd => {
            if (1.0 / geom.gamma - geom.a).abs() * geom.gamma.abs() > 1e-12 {
                1
            } else {
                2
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> SystemGeometry {
        SystemGeometry::new(1.0, 3.0).unwrap()
    }

    #[test]
    fn value_at_origin() {
        let g = geom();
        assert_eq!(secular(C64::new(0.0, 0.0), Parity::Even, &g), C64::new(2.0, 0.0));
        assert_eq!(secular(C64::new(0.0, 0.0), Parity::Odd, &g), C64::new(0.0, 0.0));
    }

    #[test]
    fn derivative_plug_in_values() {
        let g = geom();
        let d0 = secular_derivative(C64::new(0.0, 0.0), Parity::Even, &g);
        assert!((d0 - (2.0 * I / 3.0 + 2.0 * I)).norm() < 1e-15);
        let k = C64::new(std::f64::consts::FRAC_PI_2, 0.0);
        let d1 = secular_derivative(k, Parity::Odd, &g);
        assert!((d1 - (2.0 * I / 3.0 + 2.0 * I)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let g = geom();
        let h = 1e-6;
        for &k in &[C64::new(0.3, 0.2), C64::new(5.1, -1.3), C64::new(-12.0, -2.2)] {
            for p in [Parity::Even, Parity::Odd] {
                let fd = (secular(k + h, p, &g) - secular(k - h, p, &g)) / (2.0 * h);
                let an = secular_derivative(k, p, &g);
                assert!((fd - an).norm() < 1e-7 * an.norm().max(1.0), "{k} {p:?}");
            }
        }
    }

    #[test]
    fn scaled_form_is_proportional() {
        let g = geom();
        let f = Secular::new(g, Parity::Odd);
        for &k in &[C64::new(2.0, 1.0), C64::new(7.0, -2.5)] {
            let e = f.eval_scaled(k);
            let ratio_v = secular(k, Parity::Odd, &g) / e.value;
            let ratio_d = secular_derivative(k, Parity::Odd, &g) / e.derivative;
            assert!((ratio_v - ratio_d).norm() < 1e-12 * ratio_v.norm());
        }
    }

    #[test]
    fn scaled_form_survives_deep_lower_half_plane() {
        let f = Secular::new(geom(), Parity::Even);
        let e = f.eval_scaled(C64::new(10.0, -500.0));
        assert!(e.value.re.is_finite() && e.log_derivative().re.is_finite());
    }
}
