//! Bessel functions of the first and second kind of integer order.
//!
//! Three regimes: ascending series for `x <= 2`, Hankel asymptotics for
//! `x >= 25` (orders 0 and 1, then upward recurrence for `Y` and for `J`
//! below the turning point), and Miller's backward recurrence normalised by
//! `J0 + 2 (J2 + J4 + ...) = 1` in between. `Y0`, `Y1` in the middle range
//! come from Neumann's expansion in the Miller sequence.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX_X: f64 = 2.0;
const ASYMPTOTIC_MIN_X: f64 = 25.0;

/// Values and derivatives of `J_n` and `Y_n` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselEval {
    pub order: u32,
    pub x: f64,
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

impl BesselEval {
    /// `j yp - y jp - 2/(pi x)`, relative to `2/(pi x)`.
    pub fn wronskian_defect(&self) -> f64 {
        let w = 2.0 / (PI * self.x);
        (self.j * self.yp - self.y * self.jp - w) / w
    }
}

/// `J_n`, `Y_n` and their derivatives at `x > 0`.
pub fn bessel_jy(order: u32, x: f64) -> Result<BesselEval> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!(
            "Y_{order} is singular at x = {x}; need x > 0"
        )));
    }
    let n = order as usize;
    let js = j_sequence(n + 1, x);
    let ys = y_sequence(n + 1, x);
    let (jp, yp) = if n == 0 {
        (-js[1], -ys[1])
    } else {
        (0.5 * (js[n - 1] - js[n + 1]), 0.5 * (ys[n - 1] - ys[n + 1]))
    };
    Ok(BesselEval {
        order,
        x,
        j: js[n],
        y: ys[n],
        jp,
        yp,
    })
}

/// `J_n(x)` for `x >= 0`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    if x < 0.0 {
        let v = bessel_j(order, -x);
        return if order % 2 == 1 { -v } else { v };
    }
    j_sequence(order as usize, x)[order as usize]
}

/// `J_n(x)` and `J_n'(x)` for `x >= 0`.
pub fn bessel_j_deriv(order: u32, x: f64) -> (f64, f64) {
    if x == 0.0 {
        let j = if order == 0 { 1.0 } else { 0.0 };
        let jp = if order == 1 { 0.5 } else { 0.0 };
        return (j, jp);
    }
    let n = order as usize;
    let js = j_sequence(n + 1, x.abs());
    let jp = if n == 0 { -js[1] } else { 0.5 * (js[n - 1] - js[n + 1]) };
    (js[n], jp)
}

/// `J_0(x), ..., J_nmax(x)` for `x > 0`.
pub fn j_sequence(nmax: usize, x: f64) -> Vec<f64> {
    if x <= SERIES_MAX_X {
        (0..=nmax).map(|n| j_series(n, x)).collect()
    } else if x >= ASYMPTOTIC_MIN_X && (nmax as f64) < x {
        let (j0, _) = hankel(0, x);
        let (j1, _) = hankel(1, x);
        upward(nmax, x, j0, j1)
    } else {
        miller(nmax, x).0
    }
}

/// `Y_0(x), ..., Y_nmax(x)` for `x > 0`.
pub fn y_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let (y0, y1) = if x <= SERIES_MAX_X {
        (y0_series(x), y1_series(x))
    } else if x >= ASYMPTOTIC_MIN_X {
        (hankel(0, x).1, hankel(1, x).1)
    } else {
        let (_, full) = miller(1, x);
        neumann_y01(&full, x)
    };
    upward(nmax, x, y0, y1)
}

fn upward(nmax: usize, x: f64, f0: f64, f1: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(f0);
    if nmax >= 1 {
        out.push(f1);
    }
    for k in 1..nmax {
        let next = 2.0 * k as f64 / x * out[k] - out[k - 1];
        out.push(next);
    }
    out
}

fn j_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -q / (k as f64 * k as f64);
        harmonic += 1.0 / k as f64;
        let t = -term * harmonic;
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j_series(0, x) + sum)
}

fn y1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    // psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    let mut term = half; // (x/2)^{2k+1} (-1)^k / (k! (k+1)!)
    let mut hk = 0.0;
    let mut sum = term * (-2.0 * EULER_GAMMA + 1.0);
    for k in 1..200 {
        term *= q / (k as f64 * (k + 1) as f64);
        hk += 1.0 / k as f64;
        let t = term * (-2.0 * EULER_GAMMA + 2.0 * hk + 1.0 / (k + 1) as f64);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    -FRAC_2_PI / x + FRAC_2_PI * half.ln() * j_series(1, x) - sum / PI
}

/// Miller's backward recurrence. Returns `J_0..=J_nmax` and the full
/// normalised sequence (used by the Neumann expansion of `Y`).
fn miller(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let top = (nmax as f64).max(x);
    let mut start = (top + 20.0 + (50.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut seq = vec![0.0; start + 2];
    seq[start] = 1e-300;
    for k in (1..=start).rev() {
        seq[k - 1] = 2.0 * k as f64 / x * seq[k] - seq[k + 1];
        if seq[k - 1].abs() > 1e250 {
            seq.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let norm = seq[0] + 2.0 * seq.iter().skip(2).step_by(2).sum::<f64>();
    seq.iter_mut().for_each(|v| *v /= norm);
    (seq[..=nmax].to_vec(), seq)
}

fn neumann_y01(js: &[f64], x: f64) -> (f64, f64) {
    let l = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < js.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * js[2 * k] / k as f64;
        s1 += sign * (js[2 * k - 1] - js[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * (l * js[0] - 2.0 * s0);
    let y1 = -FRAC_2_PI * (js[0] / x - l * js[1] - s1);
    (y0, y1)
}

/// Hankel asymptotic expansion for order `nu` in {0, 1}; returns `(J, Y)`.
fn hankel(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * f64::from(nu * nu);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * eight_x);
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * f64::from(nu) + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    let amp = (FRAC_2_PI / x).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

/// The `k`-th positive zero of `J_order` (`k >= 1`).
pub fn bessel_j_zero(order: u32, k: u32) -> f64 {
    assert!(k >= 1, "zeros are counted from 1");
    let step = 0.25;
    let mut lo = if order == 0 { 1e-3 } else { f64::from(order) };
    let mut flo = bessel_j(order, lo);
    let mut found = 0;
    loop {
        let hi = lo + step;
        let fhi = bessel_j(order, hi);
        if flo == 0.0 || flo.signum() != fhi.signum() {
            found += 1;
            if found == k {
                return bisect(|x| bessel_j(order, x), lo, hi, flo);
            }
        }
        lo = hi;
        flo = fhi;
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
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

    // reference values from an arbitrary-precision evaluation (mpmath, 30 digits)
    const REF: &[(u32, f64, f64, f64)] = &[
        (0, 0.5, 0.938469807240812904, -0.444518733506706557),
        (1, 0.5, 0.242268457674873886, -1.47147239267024307),
        (0, 2.5, -0.0483837764681979963, 0.498070359615231888),
        (3, 5.0, 0.364831230613666994, 0.14626716269319277),
        (0, 10.0, -0.245935764451348335, 0.0556711672835993914),
        (2, 20.0, -0.16034135192299815, -0.0791917582456359607),
        (1, 30.0, -0.118751062616622937, 0.0844255706617472349),
        (10, 7.0, 0.0235393443882671348, -1.93992399325979054),
        (0, 100.0, 0.0199858503042231224, -0.0772443133650831523),
        (5, 60.0, 0.0274547442283440998, 0.0994646328404508856),
        (8, 0.01, 9.6880931282716259e-24, -4.10697614324785323e+21),
        (0, 24.9, 0.0832459683530154901, -0.136499183996765235),
    ];

    #[test]
    fn matches_reference_values() {
        for &(n, x, j, y) in REF {
            let e = bessel_jy(n, x).unwrap();
            assert!((e.j - j).abs() <= 1e-12 * j.abs(), "J_{n}({x}) = {} vs {j}", e.j);
            assert!((e.y - y).abs() <= 1e-12 * y.abs(), "Y_{n}({x}) = {} vs {y}", e.y);
        }
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert!((bessel_j(0, 1e-300) - 1.0).abs() < 1e-15);
        assert!(matches!(bessel_jy(0, 0.0), Err(Error::DomainError(_))));
        assert!(matches!(bessel_jy(2, -1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn first_zeros() {
        assert!((bessel_j_zero(0, 1) - 2.404825557695773).abs() < 1e-14 * 2.4);
        assert!((bessel_j_zero(1, 1) - 3.831705970207512).abs() < 1e-14 * 3.8);
        assert!(bessel_j(0, 2.404825557695773).abs() < 1e-12);
        let z: Vec<f64> = (1..=20).map(|k| bessel_j_zero(3, k)).collect();
        assert!(z.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn regimes_join_continuously() {
        for n in [0, 1, 4] {
            for edge in [SERIES_MAX_X, ASYMPTOTIC_MIN_X] {
                let (xa, xb) = (edge * (1.0 - 1e-12), edge * (1.0 + 1e-12));
                let a = bessel_jy(n, xa).unwrap();
                let b = bessel_jy(n, xb).unwrap();
                let dj = a.j + a.jp * (xb - xa) - b.j;
                let dy = a.y + a.yp * (xb - xa) - b.y;
                assert!(dj.abs() < 1e-14, "J_{n} at {edge}: {dj:e}");
                assert!(dy.abs() < 1e-14 * a.y.abs().max(1.0), "Y_{n} at {edge}: {dy:e}");
            }
        }
    }
}
