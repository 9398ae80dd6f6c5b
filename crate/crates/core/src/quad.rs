//! Quadrature rules shared by the transforms, the variational checks and the
//! one-dimensional densities.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Gauss–Kronrod panel: (kronrod estimate, |kronrod − gauss|).
pub fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

/// Adaptive Gauss–Kronrod integration over `[a, b]` by recursive bisection.
pub fn integrate<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<T> {
    const MAX_PANELS: usize = 20_000;
    let (whole, err) = gk15(&f, a, b);
    let mut panels = vec![(a, b, whole, err)];
    let mut total = whole;
    let mut total_err = err;
    for _ in 0..MAX_PANELS {
        if total_err <= abs_tol.max(rel_tol * total.magnitude()) {
            return Ok(total);
        }
        // split the panel with the largest error estimate
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            break;
        }
        let (lv, le) = gk15(&f, pa, mid);
        let (rv, re) = gk15(&f, mid, pb);
        total = total - pv + lv + rv;
        total_err = total_err - pe + le + re;
        panels.push((pa, mid, lv, le));
        panels.push((mid, pb, rv, re));
    }
    // recompute from scratch to shed accumulated cancellation in the running sums
    let err: f64 = panels.iter().map(|p| p.3).sum();
    if err <= abs_tol.max(rel_tol * total.magnitude()) {
        return Ok(panels.iter().fold(T::zero(), |acc, p| acc + p.2));
    }
    Err(Error::Quadrature(format!(
        "adaptive rule on [{a}, {b}] stalled with error estimate {err:e}"
    )))
}

/// Integral over `[a, b]` of an integrand with square-root behaviour at both
/// endpoints. Each half is mapped by `x = edge ± t²`, which makes the
/// transformed integrand smooth.
pub fn integrate_sqrt_edges(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mid = 0.5 * (a + b);
    let span = (mid - a).sqrt();
    let left = integrate(
        |t| 2.0 * t * f(a + t * t),
        0.0,
        span,
        abs_tol / 2.0,
        rel_tol,
    )?;
    let right = integrate(
        |t| 2.0 * t * f(b - t * t),
        0.0,
        span,
        abs_tol / 2.0,
        rel_tol,
    )?;
    Ok(left + right)
}

/// Mean of a `2π`-periodic function by the trapezoid rule, doubling the node
/// count until successive estimates agree to `tol`.
pub fn periodic_mean<T: QuadValue>(
    f: impl Fn(f64) -> T,
    tol: f64,
    min_nodes: usize,
    max_nodes: usize,
) -> Result<T> {
    let mut n = min_nodes.max(8);
    let mut sum = T::zero();
    for k in 0..n {
        sum = sum + f(std::f64::consts::TAU * k as f64 / n as f64);
    }
    let mut estimate = sum * (1.0 / n as f64);
    while n < max_nodes {
        // the new nodes are the midpoints of the old ones
        let mut extra = T::zero();
        for k in 0..n {
            extra = extra + f(std::f64::consts::TAU * (k as f64 + 0.5) / n as f64);
        }
        sum = sum + extra;
        n *= 2;
        let next = sum * (1.0 / n as f64);
        if (next - estimate).magnitude() <= tol {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Quadrature(format!(
        "periodic trapezoid did not settle within {max_nodes} nodes"
    )))
}

/// Coefficients `c_0..c_kmax` of `f(ζ) = Σ c_k ζ^{−(k+1)}` near infinity,
/// projected from `nodes` equispaced samples on the circle `|ζ| = radius`.
///
/// On equispaced nodes the discrete Fourier projection is the least-squares
/// fit onto the truncated Laurent basis; aliasing from the tail decays like
/// `(r_f / radius)^nodes` where `r_f` bounds the singularities of `f`.
pub fn laurent_at_infinity(
    f: impl Fn(Complex64) -> Complex64,
    radius: f64,
    kmax: usize,
    nodes: usize,
) -> Vec<Complex64> {
    let samples: Vec<(Complex64, Complex64)> = (0..nodes)
        .map(|j| {
            let z = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / nodes as f64);
            (z, f(z))
        })
        .collect();
    (0..=kmax)
        .map(|k| {
            let acc = samples
                .iter()
                .fold(Complex64::new(0.0, 0.0), |acc, (z, v)| {
                    acc + v * z.powu(k as u32 + 1)
                });
            acc / nodes as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_kronrod_polynomials_and_smooth() {
        let v = integrate(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_abs_diff_eq!(v, 64.0 / 6.0 - 4.0, epsilon = 1e-12);
        let v = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-14, 1e-14).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::E - 1.0, epsilon = 1e-13);
        let v = integrate(|x: f64| 1.0 / (1.0 + 1e4 * x * x), -1.0, 1.0, 1e-13, 1e-13).unwrap();
        assert_abs_diff_eq!(v, 2.0 * (100.0f64).atan() / 100.0, epsilon = 1e-12);
    }

    #[test]
    fn semicircle_with_edge_substitution() {
        let v = integrate_sqrt_edges(
            |x| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI),
            -2.0,
            2.0,
            1e-13,
            1e-13,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_mean_of_analytic_function() {
        // mean of 1/(2 - cos θ) is 1/√3
        let v = periodic_mean(|t: f64| 1.0 / (2.0 - t.cos()), 1e-15, 8, 1 << 12).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn laurent_recovers_known_coefficients() {
        // 1/(ζ − 1/2) = Σ 2^{-k} ζ^{-(k+1)}
        let coeffs = laurent_at_infinity(|z| 1.0 / (z - 0.5), 4.0, 5, 64);
        for (k, c) in coeffs.iter().enumerate() {
            assert_abs_diff_eq!(c.re, 0.5f64.powi(k as i32), epsilon = 1e-12);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-12);
        }
    }
}
