use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::real_cubic_roots;

/// Exterior conformal map `f(z) = R z − κ/(z − q) − κ/q` of the simply
/// connected droplet for `τ = 0` and a real charge `p > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffCenterMap {
    pub scale: f64,
    pub kappa: f64,
    pub pole: f64,
    pub c: f64,
    pub p: f64,
}

/// Cubic whose root `x = q²` determines the pole.
fn pole_cubic(c: f64, p: f64) -> [f64; 4] {
    let p2 = p * p;
    [
        1.0,
        -(p2 + 4.0 * c + 2.0) / (2.0 * p2),
        0.0,
        1.0 / (2.0 * p2 * p2),
    ]
}

/// Charge strength below which the droplet is doubly connected.
pub fn simply_connected_threshold(p: f64) -> f64 {
    let s = 1.0 - p * p;
    s * s / (4.0 * p * p)
}

pub fn offcenter_tau0_map(c: f64, p: f64) -> Result<OffCenterMap> {
    if !(p.is_finite() && p > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need finite c and p > 0, got c={c}, p={p}"
        )));
    }
    let threshold = simply_connected_threshold(p);
    if c <= threshold {
        return Err(Error::Phase(format!(
            "c={c} is not above the simply connected threshold {threshold}"
        )));
    }
    let candidates: Vec<OffCenterMap> = real_cubic_roots(pole_cubic(c, p), 1e-10)
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| {
            let q = x.sqrt();
            let pq = p * q;
            OffCenterMap {
                scale: (1.0 + pq * pq) / (2.0 * pq),
                kappa: (1.0 - q * q) * (1.0 - pq * pq) / (2.0 * pq),
                pole: q,
                c,
                p,
            }
        })
        .filter(|m| m.pole < 1.0 && m.kappa > 0.0)
        .collect();
    match candidates.as_slice() {
        [m] => Ok(*m),
        [] => Err(Error::NoValidRoot(format!(
            "no admissible pole for c={c}, p={p}"
        ))),
        _ => Err(Error::NoValidRoot(format!(
            "{} admissible poles for c={c}, p={p}",
            candidates.len()
        ))),
    }
}

impl OffCenterMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.scale * z - self.kappa / (z - self.pole) - self.kappa / self.pole
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let u = z - self.pole;
        self.scale + self.kappa / (u * u)
    }

    /// `P(q²)` for the stored pole.
    pub fn cubic_residual(&self) -> f64 {
        let [a3, a2, a1, a0] = pole_cubic(self.c, self.p);
        let x = self.pole * self.pole;
        ((a3 * x + a2) * x + a1) * x + a0
    }

    pub fn boundary(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| self.eval(Complex64::from_polar(1.0, TAU * k as f64 / n as f64)))
            .collect()
    }

    /// Smallest `|f′|` over `n` samples of the unit circle.
    pub fn min_derivative_on_circle(&self, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                self.derivative(Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
                    .norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance between boundary points that are at least an eighth
    /// of the perimeter apart along the curve; small values signal a near
    /// pinch. Samples are taken at the Möbius images `(u + q)/(1 + q u)` of
    /// equispaced `u`, which concentrates them where the pole approaches the
    /// circle.
    pub fn min_self_distance(&self, n: usize) -> f64 {
        let q = self.pole;
        let pts: Vec<Complex64> = (0..n)
            .map(|k| {
                let u = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
                self.eval((u + q) / (1.0 + q * u))
            })
            .collect();
        let mut arc = Vec::with_capacity(n);
        let mut s = 0.0;
        for k in 0..n {
            arc.push(s);
            s += (pts[(k + 1) % n] - pts[k]).norm();
        }
        let perimeter = s;
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let along = arc[j] - arc[i];
                if along.min(perimeter - along) >= perimeter / 8.0 {
                    best = best.min((pts[i] - pts[j]).norm());
                }
            }
        }
        best
    }
}
