//! Equilibrium measure of `V_p(x) = x²/2 − 2c log|x − p|` on the real line,
//! the limit of the planar problem as the ellipse degenerates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_sqrt_edges, laurent_at_infinity};

/// Bands closer than this are treated as a single interval.
pub const MERGE_TOL: f64 = 1e-12;
/// Points this close to the support have no reliable side.
pub const SUPPORT_PROXIMITY: f64 = 1e-12;
const EDGE_ROUNDOFF: f64 = 1e-14;
const FACTORED_TOL: f64 = 1e-12;

fn check(c: f64, p: f64) -> Result<()> {
    if !(c.is_finite() && c >= 0.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need finite c ≥ 0 and p, got c={c}, p={p}"
        )));
    }
    Ok(())
}

/// Soft edges `λ₁ ≤ λ₂ ≤ λ₃ ≤ λ₄` of the support.
pub fn edges(c: f64, p: f64) -> Result<[f64; 4]> {
    check(c, p)?;
    let outer = ((p + 2.0).powi(2) + 8.0 * c).sqrt();
    let inner = ((p - 2.0).powi(2) + 8.0 * c).sqrt();
    Ok([
        (p - 2.0 - outer) / 2.0,
        (p + 2.0 - inner) / 2.0,
        (p - 2.0 + outer) / 2.0,
        (p + 2.0 + inner) / 2.0,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity1D {
    pub c: f64,
    pub p: f64,
    pub edges: [f64; 4],
    /// `(A, B, C)` in `R(z) = z²/4 + (Az² + Bz + C)/(z − p)²`.
    pub coefficients: (f64, f64, f64),
}

impl SpectralDensity1D {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        Ok(Self {
            c,
            p,
            edges: edges(c, p)?,
            coefficients: (-c - 1.0, p * (c + 2.0), c * c - p * p),
        })
    }

    pub fn is_one_cut(&self) -> bool {
        self.edges[2] - self.edges[1] <= MERGE_TOL
    }

    /// Support intervals of positive length.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let [l1, l2, l3, l4] = self.edges;
        if self.is_one_cut() {
            return vec![(l1, l4)];
        }
        [(l1, l2), (l3, l4)]
            .into_iter()
            .filter(|(a, b)| b > a)
            .collect()
    }

    pub fn density(&self, x: f64) -> f64 {
        let [l1, l2, l3, l4] = self.edges;
        if self.is_one_cut() {
            // the factor |x − λ₂| cancels against |x − p|
            if !(l1..=l4).contains(&x) {
                return 0.0;
            }
            return (-(x - l1) * (x - l4)).max(0.0).sqrt() / (2.0 * PI);
        }
        let inside = self.bands().iter().any(|&(a, b)| (a..=b).contains(&x));
        if !inside {
            return 0.0;
        }
        let arg = -(x - l1) * (x - l2) * (x - l3) * (x - l4);
        let arg = if arg >= -EDGE_ROUNDOFF {
            arg.max(0.0)
        } else {
            return 0.0;
        };
        arg.sqrt() / (2.0 * PI * (x - self.p).abs())
    }

    /// `V′(z) = z − 2c/(z − p)`.
    pub fn potential_derivative(&self, z: Complex64) -> Complex64 {
        z - 2.0 * self.c / (z - self.p)
    }

    fn factored(&self, z: Complex64) -> Complex64 {
        let prod: Complex64 = self.edges.iter().map(|l| z - l).product();
        prod / (4.0 * (z - self.p).powi(2))
    }

    /// `R(z)` from its pole structure, cross-checked against the product
    /// over the edges.
    pub fn schiffer_r(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::new(self.p, 0.0) {
            return Err(Error::Domain(format!(
                "R has a double pole at p={}",
                self.p
            )));
        }
        let (a, b, c) = self.coefficients;
        let d = z - self.p;
        let quad = z * z / 4.0;
        let rest = (a * z * z + b * z + c) / (d * d);
        let value = quad + rest;
        let gap = (value - self.factored(z)).norm();
        if gap > FACTORED_TOL * (1.0 + quad.norm() + rest.norm()) {
            return Err(Error::Invariant(format!(
                "R(z) at {z} disagrees with its factored form by {gap:e}"
            )));
        }
        Ok(value)
    }

    fn distance_to_support(&self, z: Complex64) -> f64 {
        self.bands()
            .iter()
            .map(|&(a, b)| (z - Complex64::new(z.re.clamp(a, b), 0.0)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `∫ dμ(s)/(z − s)`. The square root of the edge product is the product
    /// of principal roots of the four linear factors, whose cuts cancel
    /// outside the bands; it grows like `z²` at infinity.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {z}")));
        }
        if self.distance_to_support(z) <= SUPPORT_PROXIMITY {
            return Err(Error::Proximity(z));
        }
        let d = z - self.p;
        if d.norm() == 0.0 {
            return Err(Error::Domain(format!(
                "removable point p={} is not evaluated",
                self.p
            )));
        }
        let root: Complex64 = self.edges.iter().map(|l| (z - l).sqrt()).product();
        Ok(z / 2.0 - self.c / d - root / (2.0 * d))
    }

    /// `∫ f dμ` over the bands with edge-adapted quadrature.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in self.bands() {
            total += integrate_sqrt_edges(|x| f(x) * self.density(x), a, b, tol, 0.0)?;
        }
        Ok(total)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.integrate(|_| 1.0, 1e-13)
    }

    /// Coefficients `m_k` of `Σ m_k z^{−(k+1)}` in the expansion of the
    /// Stieltjes transform at infinity, that is the moments `∫ x^k dμ`.
    pub fn stieltjes_moments(&self, kmax: usize) -> Result<Vec<f64>> {
        let reach = self
            .edges
            .iter()
            .map(|l| l.abs())
            .fold(self.p.abs(), f64::max);
        let radius = 2.0 * reach + 1.0;
        let failure = std::cell::RefCell::new(None);
        let coeffs = laurent_at_infinity(
            |z| {
                self.stieltjes(z).unwrap_or_else(|e| {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                })
            },
            radius,
            kmax,
            64 * (kmax + 8),
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(coeffs.into_iter().map(|m| m.re).collect()),
        }
    }
}

/// Marchenko–Pastur edges `(λ₋², λ₊²)` with `λ± = √(2c+1) ± 1`.
pub fn mp_edges(c: f64) -> Result<(f64, f64)> {
    check(c, 0.0)?;
    let s = (2.0 * c + 1.0).sqrt();
    Ok(((s - 1.0).powi(2), (s + 1.0).powi(2)))
}

/// Marchenko–Pastur density of the squared variable.
pub fn mp_density(c: f64, x: f64) -> Result<f64> {
    let (lo, hi) = mp_edges(c)?;
    if x <= 0.0 || !(lo..=hi).contains(&x) {
        return Ok(0.0);
    }
    Ok(((hi - x) * (x - lo)).max(0.0).sqrt() / (2.0 * PI * x))
}

/// The same law in the unsquared variable, supported on `±[λ₋, λ₊]`.
pub fn mp_square_density(c: f64, x: f64) -> Result<f64> {
    let (lo, hi) = mp_edges(c)?;
    let x2 = x * x;
    if x == 0.0 || !(lo..=hi).contains(&x2) {
        return Ok(0.0);
    }
    Ok(((hi - x2) * (x2 - lo)).max(0.0).sqrt() / (2.0 * PI * x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn edge_examples() {
        let e = edges(0.0, 0.0).unwrap();
        for (a, b) in e.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let c: f64 = 1.5;
        let (lm, lp) = ((2.0 * c + 1.0).sqrt() - 1.0, (2.0 * c + 1.0).sqrt() + 1.0);
        let e = edges(c, 0.0).unwrap();
        for (a, b) in e.iter().zip([-lp, -lm, lm, lp]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        let s17 = 17f64.sqrt();
        let e = edges(1.0, 1.0).unwrap();
        for (a, b) in e
            .iter()
            .zip([(-1.0 - s17) / 2.0, 0.0, (-1.0 + s17) / 2.0, 3.0])
        {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn edges_are_roots_of_quadratic_factors() {
        for (c, p) in [(1.0, 0.0), (1.0, 1.0), (1.0, 4.0), (0.3, -2.5)] {
            for l in edges(c, p).unwrap() {
                let f = ((l - p) * (l - 2.0) - 2.0 * c) * ((l - p) * (l + 2.0) - 2.0 * c);
                assert!(f.abs() < 1e-11, "c={c} p={p} λ={l}: {f}");
            }
        }
    }

    #[test]
    fn unit_mass() {
        for (c, p) in [
            (1.0, 0.0),
            (1.0, 1.0),
            (1.0, 4.0),
            (0.0, 0.0),
            (0.0, 1.0),
            (2.0, -0.7),
        ] {
            let m = SpectralDensity1D::new(c, p).unwrap().total_mass().unwrap();
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn centered_case_is_marchenko_pastur() {
        let d = SpectralDensity1D::new(1.0, 0.0).unwrap();
        for k in 0..400 {
            let x = -4.0 + 8.0 * k as f64 / 399.0;
            assert_abs_diff_eq!(
                d.density(x),
                mp_square_density(1.0, x).unwrap(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(d.density(x), d.density(-x), epsilon = 1e-12);
        }
    }

    #[test]
    fn semicircle_without_charge() {
        for p in [0.0, 1.0, -1.5] {
            let d = SpectralDensity1D::new(0.0, p).unwrap();
            assert!(d.is_one_cut());
            for x in [-1.9, -0.5, 0.0, 0.7, 1.99] {
                assert_abs_diff_eq!(
                    d.density(x),
                    (4.0 - x * x).sqrt() / (2.0 * PI),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn marchenko_pastur_mass_and_pushforward() {
        for c in [0.0, 0.5, 1.0, 3.0] {
            let (lo, hi) = mp_edges(c).unwrap();
            let mass = if c == 0.0 {
                // 1/x singularity at the hard edge: substitute x = t²
                integrate(
                    |t| 2.0 * t * mp_density(c, t * t).unwrap(),
                    0.0,
                    hi.sqrt(),
                    1e-12,
                    0.0,
                )
                .unwrap()
            } else {
                integrate_sqrt_edges(|x| mp_density(c, x).unwrap(), lo, hi, 1e-12, 0.0).unwrap()
            };
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
            let first = if c == 0.0 {
                integrate(
                    |t| 2.0 * t.powi(3) * mp_density(c, t * t).unwrap(),
                    0.0,
                    hi.sqrt(),
                    1e-12,
                    0.0,
                )
                .unwrap()
            } else {
                integrate_sqrt_edges(|x| x * mp_density(c, x).unwrap(), lo, hi, 1e-12, 0.0).unwrap()
            };
            let second = SpectralDensity1D::new(c, 0.0)
                .unwrap()
                .integrate(|x| x * x, 1e-12)
                .unwrap();
            assert_abs_diff_eq!(first, second, epsilon = 1e-7);
        }
    }

    #[test]
    fn density_vanishes_at_edges_and_off_support() {
        let d = SpectralDensity1D::new(1.0, 1.0).unwrap();
        for l in d.edges {
            assert!(d.density(l) < 1e-6);
        }
        assert_eq!(d.density(d.edges[0] - 0.1), 0.0);
        assert_eq!(d.density(0.5 * (d.edges[1] + d.edges[2])), 0.0);
        assert_eq!(d.density(d.edges[3] + 0.1), 0.0);
    }

    fn sample_points() -> Vec<Complex64> {
        (0..20)
            .map(|k| {
                let t = k as f64 * 0.7;
                z(5.0 * t.cos(), 0.3 + 3.0 * t.sin().abs()) * if k % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect()
    }

    #[test]
    fn stieltjes_squares_to_r() {
        for (c, p) in [(1.0, 0.0), (1.0, 1.0), (1.0, 4.0), (0.4, -1.3)] {
            let d = SpectralDensity1D::new(c, p).unwrap();
            for w in sample_points() {
                let g = d.stieltjes(w).unwrap();
                let r = d.schiffer_r(w).unwrap();
                let lhs = (d.potential_derivative(w) / 2.0 - g).powi(2);
                assert!(
                    (lhs - r).norm() <= 1e-10 * (1.0 + r.norm()),
                    "{w}: {lhs} vs {r}"
                );
            }
        }
    }

    #[test]
    fn stieltjes_against_quadrature() {
        for (c, p) in [(1.0, 0.0), (1.0, 4.0)] {
            let d = SpectralDensity1D::new(c, p).unwrap();
            for w in [
                z(3.0, 1.0),
                z(-1.0, 0.5),
                z(0.2, -2.0),
                z(7.0, 0.0),
                z(1.0, 3.0),
            ] {
                let re = d.integrate(|s| ((w - s).inv()).re, 1e-12).unwrap();
                let im = d.integrate(|s| ((w - s).inv()).im, 1e-12).unwrap();
                let g = d.stieltjes(w).unwrap();
                assert!((g - z(re, im)).norm() < 1e-6, "{w}: {g} vs {re}+{im}i");
            }
        }
    }

    #[test]
    fn stieltjes_asymptotics_and_boundary_values() {
        let d = SpectralDensity1D::new(1.0, 1.0).unwrap();
        let far = z(1e4, 3e3);
        assert_abs_diff_eq!((far * d.stieltjes(far).unwrap()).re, 1.0, epsilon = 1e-6);
        // G(x + i0) has imaginary part −π times the density
        for x in [-2.0, 0.0 - 0.3, 2.7, 2.9] {
            let g = d.stieltjes(z(x, 1e-9)).unwrap();
            assert_abs_diff_eq!(g.im, -PI * d.density(x), epsilon = 1e-6);
        }
        // analytic in the gap, removable at p
        let gap = 0.5 * (d.edges[1] + d.edges[2]);
        assert!(d.stieltjes(z(gap, 0.0)).unwrap().im.abs() < 1e-12);
        assert!(matches!(
            d.stieltjes(z(d.edges[3] - 0.1, 0.0)),
            Err(Error::Proximity(_))
        ));
        assert!(d.stieltjes(z(1.0 + 1e-7, 0.0)).unwrap().norm() < 10.0);
    }

    #[test]
    fn r_limits() {
        let (c, p) = (1.3, 0.8);
        let d = SpectralDensity1D::new(c, p).unwrap();
        let near = z(p + 1e-5, 1e-5);
        assert_abs_diff_eq!(
            ((near - p).powi(2) * d.schiffer_r(near).unwrap()).re,
            c * c,
            epsilon = 1e-4
        );
        let big = z(1e5, 0.0);
        assert_abs_diff_eq!(
            (d.schiffer_r(big).unwrap() - big * big / 4.0).re,
            -(c + 1.0),
            epsilon = 1e-4
        );
        for l in d.edges {
            assert!(d.factored(z(l, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn moments_from_expansion_match_quadrature() {
        for (c, p) in [(1.0, 0.0), (1.0, 1.0), (0.5, -2.0)] {
            let d = SpectralDensity1D::new(c, p).unwrap();
            let m = d.stieltjes_moments(3).unwrap();
            for (k, mk) in m.iter().enumerate() {
                let q = d.integrate(|x| x.powi(k as i32), 1e-12).unwrap();
                assert_abs_diff_eq!(*mk, q, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn rejects_negative_charge() {
        assert!(edges(-0.1, 0.0).is_err());
        assert!(SpectralDensity1D::new(f64::NAN, 0.0).is_err());
    }
}
