//! Starting points for the Newton search of double-well resonant states.

use std::f64::consts::PI;

use crate::C64;

use super::{Parity, SystemGeometry};

const I: C64 = C64::new(0.0, 1.0);

/// Seeds covering the disk `|k| <= radius` for one parity.
///
/// Three families are returned:
/// * the asymptotic ladder `Re k = n pi/(2a)`, `Im k = -ln(n pi/(|gamma| a))/(2a)`
///   for `n = 1 ..= ceil(2aR/pi) + 2`, with mirror images `-k*`;
/// * the same ladder sharpened by fixed-point iteration of the logarithmic
///   branch form of the secular equation, one seed per branch;
/// * bracketing points from a scan of the imaginary axis, where the secular
///   function is real, at a step `<= min(pi/(8a), |gamma|/8)`.
pub fn seed_grid(geom: &SystemGeometry, radius: f64, parity: Parity) -> Vec<C64> {
    let mut seeds = asymptotic_seeds(geom, radius);
    seeds.extend(branch_seeds(geom, radius, parity));
    seeds.extend(axis_seeds(geom, radius, parity));
    seeds
}

fn asymptotic_seeds(geom: &SystemGeometry, radius: f64) -> Vec<C64> {
    let SystemGeometry { a, gamma } = *geom;
    let n_max = (2.0 * a * radius / PI).ceil() as usize + 2;
    let mut out = Vec::with_capacity(2 * n_max);
    for n in 1..=n_max {
        let re = n as f64 * PI / (2.0 * a);
        let im = -(PI * n as f64 / (gamma.abs() * a)).ln() / (2.0 * a);
        out.push(C64::new(re, im));
        out.push(C64::new(-re, im));
    }
    out
}

/// Solves `exp(2ika) = s (1 + 2ik/gamma)` on branch `m` by iterating
/// `k = (Log(s (1 + 2ik/gamma)) + 2 pi i m) / (2ia)`.
fn branch_seeds(geom: &SystemGeometry, radius: f64, parity: Parity) -> Vec<C64> {
    let SystemGeometry { a, gamma } = *geom;
    // even: exp(2ika) = -(1 + 2ik/gamma); odd: exp(2ika) = +(1 + 2ik/gamma)
    let s = -parity.sign();
    let m_max = (a * radius / PI).ceil() as i64 + 2;
    let mut out = Vec::new();
    for m in 0..=m_max {
        let mut k = C64::new(PI * m as f64 / a, 0.0);
        let shift = 2.0 * PI * I * m as f64;
        let mut ok = true;
        for _ in 0..40 {
            let next = ((s * (1.0 + 2.0 * I * k / gamma)).ln() + shift) / (2.0 * I * a);
            if !(next.re.is_finite() && next.im.is_finite()) {
                ok = false;
                break;
            }
            k = next;
        }
        if ok {
            out.push(k);
            out.push(-k.conj());
        }
    }
    out
}

fn axis_value(q: f64, geom: &SystemGeometry, parity: Parity) -> f64 {
    // f(iq) is real: 1 - 2q/gamma +- exp(-2qa)
    1.0 - 2.0 * q / geom.gamma + parity.sign() * (-2.0 * q * geom.a).exp()
}

fn axis_seeds(geom: &SystemGeometry, radius: f64, parity: Parity) -> Vec<C64> {
    let step = (PI / (8.0 * geom.a)).min(geom.gamma.abs() / 8.0).min(radius / 16.0);
    let n = (2.0 * radius / step).ceil() as usize;
    let step = 2.0 * radius / n as f64;
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|j| {
            let q = -radius + j as f64 * step;
            (q, axis_value(q, geom, parity))
        })
        .collect();
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let ((q0, v0), (q1, v1)) = (w[0], w[1]);
        if v0 == 0.0 {
            out.push(C64::new(0.0, q0));
        } else if v0.signum() != v1.signum() && v1 != 0.0 {
            out.push(C64::new(0.0, bisect(geom, parity, q0, q1)));
        }
    }
    // near-tangent double roots: local minima of |f| without a sign change
    for w in grid.windows(3) {
        let (q, v) = w[1];
        if v.abs() < w[0].1.abs() && v.abs() < w[2].1.abs() && w[0].1.signum() == w[2].1.signum() {
            out.push(C64::new(0.0, q));
        }
    }
    out
}

fn bisect(geom: &SystemGeometry, parity: Parity, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = axis_value(lo, geom, parity);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = axis_value(mid, geom, parity);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymptotic_ladder_count() {
        let g = SystemGeometry::new(1.0, 3.0).unwrap();
        // R = pi/(2a): ceil(1) + 2 = 3 rungs, each with its mirror
        let s = asymptotic_seeds(&g, PI / 2.0);
        assert_eq!(s.len(), 6);
        let full = seed_grid(&g, PI / 2.0, Parity::Even);
        assert!(full.len() > s.len());
    }

    #[test]
    fn off_axis_seeds_come_in_mirror_pairs() {
        let g = SystemGeometry::new(1.0, 3.0).unwrap();
        let s = seed_grid(&g, 25.0, Parity::Odd);
        for z in s.iter().filter(|z| z.re != 0.0) {
            let m = -z.conj();
            assert!(s.iter().any(|w| (w - m).norm() < 1e-12), "{z}");
        }
    }

    #[test]
    fn axis_scan_brackets_bound_states() {
        let g = SystemGeometry::new(1.0, 3.0).unwrap();
        let s = axis_seeds(&g, 5.0, Parity::Even);
        assert!(s.iter().any(|z| (z.im - 1.5655).abs() < 1e-3));
    }
}
