//! Cauchy and logarithmic transforms of ellipses, disks and the equilibrium
//! measures, plus their moments.
//!
//! Area integrals use the normalized measure `dA = d²z/π`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_containment, RationalMap, BOUNDARY_TOL};
use crate::potential::{unit_phase_conj, ModelParams};
use crate::quad::{laurent_at_infinity, periodic_mean};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceRegion {
    InsideSource,
    OutsideSource,
}

/// A Cauchy transform value together with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyValue {
    pub value: Complex64,
    pub region: SourceRegion,
}

fn check_axes(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParams(format!(
            "semi-axes must be positive, got {a}, {b}"
        )));
    }
    Ok(())
}

fn ellipse_form(a: f64, b: f64, zeta: Complex64) -> f64 {
    (zeta.re / a).powi(2) + (zeta.im / b).powi(2)
}

/// `∫_K dA(z)/(ζ − z)` for the centered ellipse `K` with semi-axes `a`
/// (real direction) and `b`.
pub fn ellipse_cauchy(a: f64, b: f64, zeta: Complex64) -> Result<CauchyValue> {
    check_axes(a, b)?;
    if ellipse_form(a, b, zeta) <= 1.0 {
        return Ok(CauchyValue {
            value: zeta.conj() - (a - b) / (a + b) * zeta,
            region: SourceRegion::InsideSource,
        });
    }
    // 2ab/(a²−b²)·(ζ − √(ζ²−a²+b²)), rationalized so that a = b needs no
    // special case and the branch decays at infinity
    let root = zeta * (1.0 - (a * a - b * b) / (zeta * zeta)).sqrt();
    Ok(CauchyValue {
        value: 2.0 * a * b / (zeta + root),
        region: SourceRegion::OutsideSource,
    })
}

/// `∫_{D(p,R)} dA(z)/(ζ − z)`.
pub fn disk_cauchy(radius: f64, center: Complex64, zeta: Complex64) -> Result<CauchyValue> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "radius must be nonnegative, got {radius}"
        )));
    }
    let u = zeta - center;
    if u.norm() <= radius {
        Ok(CauchyValue {
            value: u.conj(),
            region: SourceRegion::InsideSource,
        })
    } else {
        Ok(CauchyValue {
            value: radius * radius / u,
            region: SourceRegion::OutsideSource,
        })
    }
}

fn log_constant_cache() -> &'static Mutex<HashMap<(u64, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `∫_K log|z|² dA(z)`, the additive constant of the interior log potential.
///
/// Computed once per pair of axes by polar quadrature and memoized; the lock
/// is held during the computation so concurrent callers never duplicate it.
pub fn ellipse_log_constant(a: f64, b: f64) -> Result<f64> {
    check_axes(a, b)?;
    let key = (a.to_bits(), b.to_bits());
    let mut cache = log_constant_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    if let Some(v) = cache.get(&key) {
        return Ok(*v);
    }
    // (1/π)∫₀^{2π} ∫₀^{ρ(θ)} 2 log r · r dr dθ with ρ the boundary radius
    let mean = periodic_mean(
        |t| {
            let (s, c) = t.sin_cos();
            let rho2 = (a * b).powi(2) / ((b * c).powi(2) + (a * s).powi(2));
            0.5 * rho2 * rho2.ln() - 0.5 * rho2
        },
        1e-15 * (a * b).max(1.0),
        64,
        1 << 22,
    )?;
    let value = 2.0 * mean;
    cache.insert(key, value);
    Ok(value)
}

/// `∫_K log|ζ − z|² dA(z)` for `ζ ∈ K`.
pub fn ellipse_log_potential(a: f64, b: f64, zeta: Complex64) -> Result<f64> {
    check_axes(a, b)?;
    if ellipse_form(a, b, zeta) > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("{zeta} lies outside the ellipse")));
    }
    let c0 = ellipse_log_constant(a, b)?;
    Ok(zeta.norm_sqr() - (a - b) / (a + b) * (zeta * zeta).re + c0)
}

/// `∫_{D(p,R)} log|ζ − z| dA(z)`.
pub fn disk_log_potential(radius: f64, center: Complex64, zeta: Complex64) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParams(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let dist = (zeta - center).norm();
    let r2 = radius * radius;
    Ok(if dist >= radius {
        r2 * dist.ln()
    } else {
        r2 * radius.ln() - 0.5 * r2 + 0.5 * dist * dist
    })
}

/// Circle average `(1/2π)∫ log|ζ − r e^{iθ}| dθ = log max(r, |ζ|)`.
pub fn jensen_average(r: f64, zeta: Complex64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParams(format!(
            "radius must be positive, got {r}"
        )));
    }
    Ok(r.max(zeta.norm()).ln())
}

/// Generalized binomial coefficient `binom(1/2, n)`.
fn half_binomial(n: usize) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (0.5 - j as f64) / (j + 1) as f64)
}

/// `∫_K z^{2k} dA(z) = 2ab·binom(1/2, k+1)·(b² − a²)^k`. Odd powers integrate
/// to zero.
pub fn ellipse_power_moment(a: f64, b: f64, k: usize) -> Result<f64> {
    check_axes(a, b)?;
    Ok(2.0 * a * b * half_binomial(k + 1) * (b * b - a * a).powi(k as i32))
}

/// `m_k = ∫ z^k dμ` of the post-critical equilibrium measure.
pub fn equilibrium_moment(params: &ModelParams, k: usize) -> Result<Complex64> {
    params.validate()?;
    if !check_containment(params) {
        return Err(Error::Phase(
            "closed-form moments need the post-critical regime".into(),
        ));
    }
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let charge = -params.c * params.p.powu(k as u32);
    if k % 2 == 1 {
        return Ok(charge);
    }
    let j = k / 2;
    // 2(2j−1)!/((j−1)!(j+1)!) as a running product to stay exact for moderate j
    let mut coeff = 2.0;
    for i in 1..=(2 * j - 1) {
        coeff *= i as f64;
    }
    for i in 1..j {
        coeff /= i as f64;
    }
    for i in 1..=(j + 1) {
        coeff /= i as f64;
    }
    let s = 1.0 + params.c;
    Ok(charge + coeff * params.tau.powi(j as i32) * s.powi(j as i32 + 1))
}

fn s1_axes(params: &ModelParams) -> (f64, f64) {
    let s = (1.0 + params.c).sqrt();
    ((1.0 + params.tau) * s, (1.0 - params.tau) * s)
}

/// Cauchy transform of the post-critical equilibrium measure outside the
/// ellipse `S₁`.
pub fn postcritical_cauchy(params: &ModelParams, zeta: Complex64) -> Result<Complex64> {
    params.validate()?;
    let (a, b) = s1_axes(params);
    if ellipse_form(a, b, zeta) <= 1.0 {
        return Err(Error::Domain(format!(
            "{zeta} lies inside the outer ellipse"
        )));
    }
    if zeta == params.p {
        return Err(Error::Domain(
            "Cauchy transform is singular at the charge".into(),
        ));
    }
    // (1/2τ)(ζ − √(ζ² − 4τ(1+c))) written without the 1/τ prefactor
    let s = 1.0 + params.c;
    let root = zeta * (1.0 - 4.0 * params.tau * s / (zeta * zeta)).sqrt();
    Ok(2.0 * s / (zeta + root) - params.c / (zeta - params.p))
}

/// Cauchy transform of the post-critical equilibrium measure anywhere in the
/// plane, assembled from the ellipse and disk transforms.
pub fn postcritical_measure_cauchy(params: &ModelParams, zeta: Complex64) -> Result<Complex64> {
    params.validate()?;
    let (a, b) = s1_axes(params);
    let def = params.deficit();
    let outer = ellipse_cauchy(a, b, zeta)?.value;
    let hole = if params.c > 0.0 {
        disk_cauchy((def * params.c).sqrt(), params.p, zeta)?.value
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok((outer - hole) / def)
}

/// `h_ζ(w) = g(w)/(ζ − f(w))`, the pulled-back Green integrand of the
/// pre-critical Cauchy transform, with
/// `g(w) = √(f^♯(w)/f(w))·f′(w) = (w−a)(1−aτw)/((1−aw)(w−aτ))·f′(w)`.
pub fn cauchy_green_integrand(map: &RationalMap, zeta: Complex64, w: Complex64) -> Complex64 {
    let a = map.a;
    let at = a * map.tau;
    let g = (w - a) * (1.0 - at * w) / ((1.0 - a * w) * (w - at)) * map.derivative_unchecked(w);
    g / (zeta - map.eval_unchecked(w))
}

/// `Res_{w=w₀} h(w)` by the trapezoid rule on a circle of the given radius.
pub fn residue_by_circle(
    h: impl Fn(Complex64) -> Complex64,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let e = Complex64::from_polar(1.0, TAU * k as f64 / nodes as f64);
        acc += h(center + radius * e) * radius * e;
    }
    acc / nodes as f64
}

/// Residue of `h_ζ` at a root `w` of `f(w) = ζ`.
pub fn preimage_residue(map: &RationalMap, zeta: Complex64, w: Complex64) -> Complex64 {
    let at = map.a * map.tau;
    map.d / zeta * (at * w - (at * at + 1.0) + at / w)
}

fn reject_critical(map: &RationalMap) -> Result<()> {
    if map.is_critical() {
        return Err(Error::Phase(
            "the residue formula needs a strictly pre-critical map".into(),
        ));
    }
    Ok(())
}

/// Cauchy transform of the pre-critical measure `μ̂` in squared coordinates,
/// by residues of `h_ζ` at `0`, `a` and the preimages of `ζ` in the disk.
pub fn precritical_cauchy(map: &RationalMap, zeta: Complex64) -> Result<Complex64> {
    reject_critical(map)?;
    if zeta.norm() == 0.0 {
        return Err(Error::Domain(
            "the pre-critical transform is evaluated off 0".into(),
        ));
    }
    let roots = map.invert(zeta);
    if roots.iter().any(|w| (w.norm() - 1.0).abs() <= BOUNDARY_TOL) {
        return Err(Error::BoundaryAmbiguity(zeta, 0));
    }
    let inside: Vec<Complex64> = roots.iter().copied().filter(|w| w.norm() < 1.0).collect();
    let interior = match inside.len() {
        3 => true,
        2 => false,
        n => return Err(Error::BoundaryAmbiguity(zeta, n)),
    };
    // Res₀ = 1/τ, Res_a = 0
    let mut sum = Complex64::new(1.0 / map.tau, 0.0);
    for w in &inside {
        sum += preimage_residue(map, zeta, *w);
    }
    if interior {
        sum += unit_phase_conj(zeta);
    }
    Ok(sum / (1.0 - map.tau * map.tau))
}

/// `∂Q̂ − C` at `ζ = f(w)` for `|w| > 1`, using the known exterior preimage:
/// `(1−τ²)(∂Q̂ − C) = ζ̄/|ζ| + Res_w h_ζ`.
pub fn precritical_exterior_field(map: &RationalMap, w: Complex64) -> Result<Complex64> {
    reject_critical(map)?;
    if w.norm() <= 1.0 {
        return Err(Error::Domain(format!("{w} is not an exterior preimage")));
    }
    let zeta = map.eval_unchecked(w);
    Ok((unit_phase_conj(zeta) + preimage_residue(map, zeta, w)) / (1.0 - map.tau * map.tau))
}

/// Cauchy transform of the symmetric-coordinate pre-critical measure,
/// `C_S(ζ) = ζ·C_Ŝ(ζ²)`.
pub fn precritical_cauchy_symmetric(map: &RationalMap, zeta: Complex64) -> Result<Complex64> {
    Ok(zeta * precritical_cauchy(map, zeta * zeta)?)
}

/// Moments `m_0..m_kmax` of a measure from its Cauchy transform sampled on a
/// circle enclosing the support.
pub fn laurent_moments(
    cauchy: impl Fn(Complex64) -> Complex64,
    radius: f64,
    kmax: usize,
    nodes: usize,
) -> Vec<Complex64> {
    laurent_at_infinity(cauchy, radius, kmax, nodes)
}

/// Moments `∫ z^k dμ̂` of the pre-critical measure in squared coordinates.
pub fn precritical_moments(map: &RationalMap, kmax: usize) -> Result<Vec<Complex64>> {
    reject_critical(map)?;
    // the droplet lies in |ζ| ≤ f(1) + |f(−1)|
    let one = Complex64::new(1.0, 0.0);
    let reach = map.eval_unchecked(one).norm() + map.eval_unchecked(-one).norm();
    let radius = 2.0 * reach;
    let nodes = 16 * (kmax + 8);
    let failure = RefCell::new(None);
    let coeffs = laurent_at_infinity(
        |z| {
            precritical_cauchy(map, z).unwrap_or_else(|e| {
                *failure.borrow_mut() = Some(e);
                Complex64::new(0.0, 0.0)
            })
        },
        radius,
        kmax,
        nodes,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(coeffs),
    }
}

/// Symmetric-coordinate moments `∫ ζ^k dμ` from squared-coordinate ones:
/// even moments `m_{2j} = m̂_j`, odd moments vanish.
pub fn symmetric_moments_from_squared(squared: &[Complex64], kmax: usize) -> Vec<Complex64> {
    (0..=kmax)
        .map(|k| {
            if k % 2 == 0 {
                squared
                    .get(k / 2)
                    .copied()
                    .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_rational_map, contains, precritical_droplet, Coords, Membership};
    use crate::potential::wirtinger_dqhat;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `∫_K F dA` in elliptic polar coordinates `z = (a r cos φ, b r sin φ)`.
    fn ellipse_area_integral(a: f64, b: f64, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        integrate(
            |phi| {
                integrate(
                    |r| f(c(a * r * phi.cos(), b * r * phi.sin())) * r,
                    0.0,
                    1.0,
                    1e-13,
                    1e-12,
                )
                .unwrap()
            },
            0.0,
            TAU,
            1e-12,
            1e-11,
        )
        .unwrap()
            * (a * b / PI)
    }

    /// `∫_K log|ζ−z|² dA` in polar coordinates centered at an interior `ζ`.
    fn polar_log_oracle(a: f64, b: f64, zeta: Complex64) -> f64 {
        integrate(
            |phi| {
                // distance from ζ to the boundary along direction φ
                let (s, co) = phi.sin_cos();
                let qa = (co / a).powi(2) + (s / b).powi(2);
                let qb = 2.0 * (zeta.re * co / (a * a) + zeta.im * s / (b * b));
                let qc = ellipse_form(a, b, zeta) - 1.0;
                let rho = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
                rho * rho * rho.ln() - 0.5 * rho * rho
            },
            0.0,
            TAU,
            1e-13,
            1e-13,
        )
        .unwrap()
            / PI
    }

    #[test]
    fn disk_cauchy_values() {
        let inside = ellipse_cauchy(1.0, 1.0, c(0.5, 0.0)).unwrap();
        assert_eq!(inside.region, SourceRegion::InsideSource);
        assert_abs_diff_eq!(inside.value.re, 0.5, epsilon = 1e-15);
        let outside = ellipse_cauchy(1.0, 1.0, c(2.0, 0.0)).unwrap();
        assert_eq!(outside.region, SourceRegion::OutsideSource);
        assert_abs_diff_eq!(outside.value.re, 0.5, epsilon = 1e-15);
        assert!(ellipse_cauchy(0.0, 1.0, c(2.0, 0.0)).is_err());
    }

    #[test]
    fn ellipse_cauchy_matches_area_quadrature() {
        let (a, b) = (1.5, 0.5);
        for zeta in [c(2.0, 1.0), c(-0.3, 2.0), c(0.0, -0.6)] {
            let oracle = ellipse_area_integral(a, b, |z| 1.0 / (zeta - z));
            let v = ellipse_cauchy(a, b, zeta).unwrap().value;
            assert!((v - oracle).norm() < 1e-6, "{zeta}: {v} vs {oracle}");
        }
    }

    #[test]
    fn ellipse_cauchy_is_continuous_on_boundary() {
        for (a, b) in [(1.5, 0.5), (0.7, 1.9), (1.0, 1.0)] {
            for k in 0..32 {
                let t = TAU * k as f64 / 32.0;
                let z = c(a * t.cos(), b * t.sin());
                let inside = z.conj() - (a - b) / (a + b) * z;
                let outside = ellipse_cauchy(a, b, z * (1.0 + 1e-13)).unwrap();
                assert_eq!(outside.region, SourceRegion::OutsideSource);
                assert!((inside - outside.value).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn log_constant_matches_closed_form() {
        for (a, b) in [(1.0f64, 1.0f64), (1.5, 0.5), (2.0, 0.3), (0.4, 1.1)] {
            let closed = 2.0 * a * b * ((a + b) / 2.0).ln() - a * b;
            assert_abs_diff_eq!(ellipse_log_constant(a, b).unwrap(), closed, epsilon = 1e-12);
        }
        let r: f64 = 1.7;
        let v = ellipse_log_potential(r, r, c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v, 2.0 * r * r * r.ln() - r * r, epsilon = 1e-12);
    }

    #[test]
    fn log_potential_matches_polar_quadrature() {
        let (a, b) = (1.5, 0.5);
        for zeta in [
            c(0.3, 0.1),
            c(-1.0, 0.2),
            c(0.0, -0.45),
            c(1.2, 0.0),
            c(-0.5, -0.3),
        ] {
            let oracle = polar_log_oracle(a, b, zeta);
            assert_abs_diff_eq!(
                ellipse_log_potential(a, b, zeta).unwrap(),
                oracle,
                epsilon = 1e-6
            );
        }
        assert!(ellipse_log_potential(a, b, c(2.0, 0.0)).is_err());
    }

    #[test]
    fn log_potential_gradient_is_cauchy_transform() {
        let (a, b) = (1.5, 0.5);
        let h = 1e-5;
        for zeta in [c(0.3, 0.1), c(-0.8, -0.2)] {
            let f = |z: Complex64| ellipse_log_potential(a, b, z).unwrap();
            let dx = (f(zeta + h) - f(zeta - h)) / (2.0 * h);
            let dy = (f(zeta + c(0.0, h)) - f(zeta - c(0.0, h))) / (2.0 * h);
            let wirtinger = 0.5 * c(dx, -dy);
            let v = ellipse_cauchy(a, b, zeta).unwrap().value;
            assert!((wirtinger - v).norm() < 1e-6);
        }
    }

    #[test]
    fn disk_log_potential_branches() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(
            disk_log_potential(1.0, c(0.0, 0.0), c(e, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            disk_log_potential(1.0, c(0.0, 0.0), c(0.0, 0.0)).unwrap(),
            -0.5,
            epsilon = 1e-15
        );
        let (r, p) = (0.7, c(0.3, -0.2));
        let on = p + Complex64::from_polar(r, 1.1);
        let inside = r * r * r.ln() - 0.5 * r * r + 0.5 * (on - p).norm_sqr();
        let outside = r * r * (on - p).norm().ln();
        assert_abs_diff_eq!(inside, outside, epsilon = 1e-15);
        assert!(disk_log_potential(0.0, p, on).is_err());
    }

    #[test]
    fn jensen_matches_midpoint_rule() {
        assert_abs_diff_eq!(
            jensen_average(2.0, c(1.0, 0.0)).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            jensen_average(1.0, c(3.0, 0.0)).unwrap(),
            3f64.ln(),
            epsilon = 1e-15
        );
        for (r, zeta) in [(2.0, c(0.4, 1.1)), (0.5, c(-1.0, 0.3))] {
            let n = 10_000;
            let mid: f64 = (0..n)
                .map(|k| {
                    (zeta - Complex64::from_polar(r, TAU * (k as f64 + 0.5) / n as f64))
                        .norm()
                        .ln()
                })
                .sum::<f64>()
                / n as f64;
            assert_abs_diff_eq!(jensen_average(r, zeta).unwrap(), mid, epsilon = 1e-6);
        }
    }

    #[test]
    fn power_moments() {
        assert_abs_diff_eq!(
            ellipse_power_moment(1.5, 0.5, 0).unwrap(),
            0.75,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ellipse_power_moment(1.5, 0.5, 1).unwrap(),
            0.375,
            epsilon = 1e-15
        );
        assert_eq!(ellipse_power_moment(1.2, 1.2, 3).unwrap(), 0.0);
        for k in 0..4 {
            let oracle = ellipse_area_integral(1.5, 0.5, |z| z.powu(2 * k as u32));
            assert_abs_diff_eq!(
                ellipse_power_moment(1.5, 0.5, k).unwrap(),
                oracle.re,
                epsilon = 1e-9
            );
            let odd = ellipse_area_integral(1.5, 0.5, |z| z.powu(2 * k as u32 + 1));
            assert!(odd.norm() < 1e-9);
        }
    }

    #[test]
    fn moment_formula_examples() {
        let m = |t: f64, cc: f64, k: usize| {
            equilibrium_moment(&ModelParams::new(t, cc).unwrap(), k).unwrap()
        };
        assert_abs_diff_eq!(m(0.0, 1.0, 2).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m(0.3, 0.5, 0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m(0.2, 1.0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m(0.2, 1.0, 3).norm(), 0.0, epsilon = 1e-15);
        // c = 0: the k = 1 coefficient is τ(1+c)²
        assert_abs_diff_eq!(m(0.5, 0.0, 2).re, 0.5, epsilon = 1e-15);
        assert!(matches!(
            equilibrium_moment(&ModelParams::new(0.5, 1.0).unwrap(), 2),
            Err(Error::Phase(_))
        ));
    }

    #[test]
    fn postcritical_transform_reproduces_moments() {
        for params in [
            ModelParams::new(1.0 / 6.0, 1.0).unwrap(),
            ModelParams::new(0.0, 0.5).unwrap(),
            ModelParams::with_charge(1.0 / 3.0, 1.0 / 7.0, c(0.6, 0.2)).unwrap(),
        ] {
            let coeffs = laurent_moments(|z| postcritical_cauchy(&params, z).unwrap(), 6.0, 6, 256);
            for (k, got) in coeffs.iter().enumerate() {
                let want = equilibrium_moment(&params, k).unwrap();
                assert!((got - want).norm() < 1e-6, "k={k}: {got} vs {want}");
            }
            let far = c(3e6, 1e6);
            assert!((far * postcritical_cauchy(&params, far).unwrap() - 1.0).norm() < 1e-6);
        }
        let disk = ModelParams::new(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            postcritical_cauchy(&disk, c(2.0, 0.0)).unwrap().re,
            0.5,
            epsilon = 1e-15
        );
        assert!(postcritical_cauchy(&disk, c(0.5, 0.0)).is_err());
    }

    #[test]
    fn assembled_transform_agrees_outside() {
        let params = ModelParams::with_charge(1.0 / 3.0, 1.0 / 7.0, c(0.6, 0.2)).unwrap();
        for zeta in [c(3.0, 0.0), c(0.5, 2.0), c(-2.0, -1.5)] {
            let a = postcritical_cauchy(&params, zeta).unwrap();
            let b = postcritical_measure_cauchy(&params, zeta).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
    }

    /// `(1−τ²)C(ζ)` by trapezoid quadrature of the Green representation
    /// over the boundary `z = f(e^{iθ})`.
    fn green_contour_oracle(
        map: &RationalMap,
        zeta: Complex64,
        nodes: usize,
        interior: bool,
    ) -> Complex64 {
        let mut acc = c(0.0, 0.0);
        for k in 0..nodes {
            let w = Complex64::from_polar(1.0, TAU * k as f64 / nodes as f64);
            let z = map.eval(w).unwrap();
            acc += unit_phase_conj(z) / (zeta - z) * map.derivative(w).unwrap() * w;
        }
        let boundary = acc / nodes as f64;
        if interior {
            boundary + unit_phase_conj(zeta)
        } else {
            boundary
        }
    }

    #[test]
    fn precritical_transform_matches_contour_quadrature() {
        let params = ModelParams::new(0.5, 1.0).unwrap();
        let map = build_rational_map(&params).unwrap();
        let region = precritical_droplet(&params, Coords::Squared).unwrap();
        let points = [
            c(1.5, 0.3),
            c(2.0, -0.8),
            c(0.8, 0.1),
            c(3.0, 0.0),
            c(-0.5, 0.2),
            c(0.2, 1.5),
            c(5.0, 2.0),
            c(1.0, -1.2),
            c(-2.0, -2.0),
            c(2.5, 1.0),
        ];
        for zeta in points {
            let membership = contains(&region, zeta, BOUNDARY_TOL);
            let interior = membership == Membership::Interior;
            // stay off the boundary, where the trapezoid rule loses accuracy
            let dist = (0..4096)
                .map(|k| {
                    (map.eval(Complex64::from_polar(1.0, TAU * k as f64 / 4096.0))
                        .unwrap()
                        - zeta)
                        .norm()
                })
                .fold(f64::INFINITY, f64::min);
            if dist < 0.05 {
                continue;
            }
            let oracle = green_contour_oracle(&map, zeta, 4096, interior);
            let v = precritical_cauchy(&map, zeta).unwrap() * params.deficit();
            assert!((v - oracle).norm() < 1e-8, "{zeta}: {v} vs {oracle}");
        }
    }

    #[test]
    fn precritical_transform_is_gradient_inside() {
        let params = ModelParams::new(0.5, 1.0).unwrap();
        let map = build_rational_map(&params).unwrap();
        let region = precritical_droplet(&params, Coords::Squared).unwrap();
        let (lo, hi) = region.bounding_box();
        let mut checked = 0;
        for i in 0..20 {
            for j in 0..20 {
                let zeta = c(
                    lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / 20.0,
                    lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / 20.0,
                );
                if contains(&region, zeta, 1e-3) != Membership::Interior {
                    continue;
                }
                let v = precritical_cauchy(&map, zeta).unwrap();
                let grad = wirtinger_dqhat(&params, zeta).unwrap();
                assert!((v - grad).norm() <= 1e-9, "{zeta}");
                checked += 1;
            }
        }
        assert!(checked > 50);
        let far = c(1e6, 0.0);
        assert!((far * precritical_cauchy(&map, far).unwrap() - 1.0).norm() < 1e-5);
    }

    #[test]
    fn residues_at_zero_and_pole() {
        for (t, cc) in [(0.5, 1.0), (0.7, 0.3), (0.9, 2.0)] {
            let params = ModelParams::new(t, cc).unwrap();
            let map = build_rational_map(&params).unwrap();
            for zeta in [c(1.0, 0.5), c(-3.0, 0.1)] {
                let h = |w| cauchy_green_integrand(&map, zeta, w);
                let roots = map.invert(zeta);
                let nearest = |x: Complex64| {
                    roots
                        .iter()
                        .map(|w| (w - x).norm())
                        .fold(f64::INFINITY, f64::min)
                };
                let r0 = 0.25 * nearest(c(0.0, 0.0)).min(map.a.abs());
                let res0 = residue_by_circle(h, c(0.0, 0.0), r0, 256);
                assert!((res0 - 1.0 / t).norm() < 1e-12 * (1.0 / t), "{res0}");
                let ra = 0.25
                    * nearest(c(map.a, 0.0))
                        .min(map.a.abs())
                        .min((map.a - map.a * t).abs());
                let resa = residue_by_circle(h, c(map.a, 0.0), ra, 256);
                assert!(resa.norm() < 1e-12, "{resa}");
            }
        }
    }

    #[test]
    fn moments_of_precritical_measure() {
        let params = ModelParams::new(0.5, 1.0).unwrap();
        let map = build_rational_map(&params).unwrap();
        let m = precritical_moments(&map, 4).unwrap();
        assert_abs_diff_eq!(m[0].re, 1.0, epsilon = 1e-10);
        // first moment against ∫ z dμ̂ by Green: (1/(1−τ²))∫ z/(2|z|) dA
        let oracle = green_moment_oracle(&map, 1, params.deficit());
        assert!((m[1] - oracle).norm() < 1e-8, "{} vs {oracle}", m[1]);
        let sym = symmetric_moments_from_squared(&m, 4);
        assert_eq!(sym[1], c(0.0, 0.0));
        assert_eq!(sym[4], m[2]);
    }

    /// `∫ z^k dμ̂` through `∂_z̄ (z^k z̄/|z|·…)`: with `F = z^k·z̄^{1/2}z^{−1/2}`,
    /// `∂_z̄ F = z^k/(2|z|)`, so the moment is a boundary integral of `F`.
    fn green_moment_oracle(map: &RationalMap, k: u32, deficit: f64) -> Complex64 {
        let nodes = 8192;
        let mut acc = c(0.0, 0.0);
        for j in 0..nodes {
            let w = Complex64::from_polar(1.0, TAU * j as f64 / nodes as f64);
            let z = map.eval(w).unwrap();
            acc += z.powu(k) * unit_phase_conj(z) * map.derivative(w).unwrap() * w;
        }
        // (1/π)∫ ∂_z̄F d²z = (1/2πi)∮ F dz
        acc / nodes as f64 / deficit
    }

    #[test]
    fn exterior_field_agrees_with_root_selection() {
        let params = ModelParams::new(0.5, 1.0).unwrap();
        let map = build_rational_map(&params).unwrap();
        for w in [c(1.3, 0.2), c(-2.0, 1.0), c(0.1, -1.5)] {
            let zeta = map.eval(w).unwrap();
            let direct =
                wirtinger_dqhat(&params, zeta).unwrap() - precritical_cauchy(&map, zeta).unwrap();
            let known = precritical_exterior_field(&map, w).unwrap();
            assert!((direct - known).norm() < 1e-12);
        }
    }

    #[test]
    fn critical_map_is_rejected() {
        let map = build_rational_map(&ModelParams::new(1.0 / 3.0, 1.0).unwrap()).unwrap();
        assert!(matches!(
            precritical_cauchy(&map, c(1.0, 0.0)),
            Err(Error::Phase(_))
        ));
    }
}
