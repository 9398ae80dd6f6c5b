//! Fekete configurations: minimizers of the discrete Coulomb Hamiltonians,
//! and their comparison with the predicted droplets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_points, contains, Coords, DropletRegion, Membership, Phase, RegionShape, BOUNDARY_TOL,
};
use crate::potential::{
    eval_q, eval_qhat, wirtinger_dq, wirtinger_dqhat, ModelParams, PotentialKind, Symmetry,
};
use crate::transforms::{equilibrium_moment, precritical_moments, symmetric_moments_from_squared};

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_SEPARATION: f64 = 1e-12;
const REAL_AXIS_BAND: f64 = 1e-6;
const MOMENT_ORDER: usize = 4;
const ROUNDING_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeketeOptions {
    pub max_iter: usize,
    /// Stop once the gradient norm is at most `tol · n`.
    pub tol: f64,
    /// Evaluate the pair sums on the rayon pool. Results are bitwise
    /// identical either way: every per-point sum runs in a fixed order.
    pub parallel: bool,
    /// Draw half of the points and add their negatives (`n` even).
    pub mirror_init: bool,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-8,
            parallel: true,
            mirror_init: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeConfiguration {
    pub points: Vec<Complex64>,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub seed: u64,
    pub converged: bool,
    pub potential: PotentialKind,
    pub params: ModelParams,
}

fn confinement(params: &ModelParams, which: PotentialKind, z: Complex64) -> Result<f64> {
    match which {
        PotentialKind::Q => eval_q(params, z),
        PotentialKind::Qhat => eval_qhat(params, z),
    }
}

fn confinement_grad(params: &ModelParams, which: PotentialKind, z: Complex64) -> Result<Complex64> {
    match which {
        PotentialKind::Q => wirtinger_dq(params, z),
        PotentialKind::Qhat => wirtinger_dqhat(params, z),
    }
}

fn check_ensemble(params: &ModelParams, which: PotentialKind) -> Result<()> {
    params.validate()?;
    if which == PotentialKind::Qhat && !params.is_centered() {
        return Err(Error::InvalidParams(
            "Q̂ carries its charge at the origin".into(),
        ));
    }
    if params.symmetry == Symmetry::SymplecticEnsemble
        && which == PotentialKind::Q
        && params.p.im != 0.0
    {
        return Err(Error::InvalidParams(
            "the symplectic Hamiltonian needs a potential symmetric under conjugation".into(),
        ));
    }
    Ok(())
}

fn check_points(points: &[Complex64], symmetry: Symmetry) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidParams("empty configuration".into()));
    }
    for (j, z) in points.iter().enumerate() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {z}")));
        }
        if symmetry == Symmetry::SymplecticEnsemble && z.im == 0.0 {
            return Err(Error::Domain(format!("point {z} lies on the real axis")));
        }
        if points[..j].iter().any(|w| w == z) {
            return Err(Error::Domain(format!("coincident points at {z}")));
        }
    }
    Ok(())
}

fn map_indices<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn energy_impl(
    points: &[Complex64],
    params: &ModelParams,
    which: PotentialKind,
    parallel: bool,
) -> Result<f64> {
    let n = points.len();
    let symplectic = params.symmetry == Symmetry::SymplecticEnsemble;
    let weight = if symplectic { 2.0 * n as f64 } else { n as f64 };
    let rows: Vec<Result<f64>> = map_indices(n, parallel, |j| {
        let zj = points[j];
        let mut acc = weight * confinement(params, which, zj)?;
        for zk in &points[j + 1..] {
            acc -= (zj - zk).norm_sqr().ln();
            if symplectic {
                acc -= (zj - zk.conj()).norm_sqr().ln();
            }
        }
        if symplectic {
            acc -= (2.0 * zj.im).powi(2).ln();
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(total)
}

fn gradient_impl(
    points: &[Complex64],
    params: &ModelParams,
    which: PotentialKind,
    parallel: bool,
) -> Result<Vec<Complex64>> {
    let n = points.len();
    let symplectic = params.symmetry == Symmetry::SymplecticEnsemble;
    let weight = if symplectic { 2.0 * n as f64 } else { n as f64 };
    map_indices(n, parallel, |j| {
        let zj = points[j];
        let mut acc = weight * confinement_grad(params, which, zj)?.conj();
        for (k, zk) in points.iter().enumerate() {
            if k == j {
                continue;
            }
            acc -= 1.0 / (zj - zk).conj();
            if symplectic {
                acc -= 1.0 / (zj.conj() - zk);
            }
        }
        if symplectic {
            acc -= Complex64::new(0.0, 1.0 / zj.im);
        }
        Ok(acc)
    })
    .into_iter()
    .collect()
}

/// Discrete Hamiltonian of the configuration for the ensemble stored in
/// `params.symmetry`.
pub fn energy(points: &[Complex64], params: &ModelParams, which: PotentialKind) -> Result<f64> {
    check_ensemble(params, which)?;
    check_points(points, params.symmetry)?;
    energy_impl(points, params, which, false)
}

/// `∂E/∂ζ̄_j` for every point; the real gradient `(∂_x + i∂_y)E` is twice this.
pub fn gradient(
    points: &[Complex64],
    params: &ModelParams,
    which: PotentialKind,
) -> Result<Vec<Complex64>> {
    check_ensemble(params, which)?;
    check_points(points, params.symmetry)?;
    gradient_impl(points, params, which, false)
}

fn real_norm(grad: &[Complex64]) -> f64 {
    2.0 * grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt()
}

/// Sampling box `(center, half-widths)` of the predicted support.
fn sampling_box(params: &ModelParams, which: PotentialKind) -> (Complex64, f64, f64) {
    let (t, s) = (params.tau, 1.0 + params.c);
    match which {
        PotentialKind::Q => (
            Complex64::new(0.0, 0.0),
            (1.0 + t) * s.sqrt(),
            (1.0 - t) * s.sqrt(),
        ),
        PotentialKind::Qhat => (
            Complex64::new(2.0 * t * s, 0.0),
            (1.0 + t * t) * s,
            (1.0 - t * t) * s,
        ),
    }
}

fn initial_points(
    n: usize,
    params: &ModelParams,
    which: PotentialKind,
    seed: u64,
    mirror: bool,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (center, hx, hy) = sampling_box(params, which);
    let (hx, hy) = (1.2 * hx, 1.2 * hy);
    let charge = match which {
        PotentialKind::Q => params.p,
        PotentialKind::Qhat => Complex64::new(0.0, 0.0),
    };
    let avoid = 0.1 / (n as f64).sqrt();
    let symplectic = params.symmetry == Symmetry::SymplecticEnsemble;
    let mirror = mirror && n.is_multiple_of(2);
    let draws = if mirror { n / 2 } else { n };
    let mut points = Vec::with_capacity(n);
    while points.len() < draws {
        let z = center + Complex64::new(rng.random_range(-hx..hx), rng.random_range(-hy..hy));
        if (params.c > 0.0 && (z - charge).norm() < avoid)
            || (symplectic && z.im.abs() < REAL_AXIS_BAND)
        {
            continue;
        }
        points.push(z);
    }
    if mirror {
        let negated: Vec<Complex64> = points.iter().map(|z| -z).collect();
        points.extend(negated);
    }
    points
}

/// Whether a trial configuration is admissible for the line search.
fn admissible(trial: &[Complex64], current: &[Complex64], symplectic: bool) -> bool {
    if symplectic
        && trial
            .iter()
            .zip(current)
            .any(|(z, old)| z.im.abs() < REAL_AXIS_BAND || z.im.signum() != old.im.signum())
    {
        return false;
    }
    // the log singularity makes the energy infinite before points meet, but
    // guard explicitly against near-collisions
    for (j, z) in trial.iter().enumerate() {
        if trial[j + 1..]
            .iter()
            .any(|w| (z - w).norm() < MIN_SEPARATION)
        {
            return false;
        }
    }
    true
}

/// Gradient descent with Armijo backtracking; the first trial step of each
/// line search is the Barzilai–Borwein step of the previous iteration.
/// Accepted steps never raise the energy by more than its rounding error.
pub fn minimize(
    n: usize,
    params: &ModelParams,
    which: PotentialKind,
    seed: u64,
    opts: &FeketeOptions,
) -> Result<FeketeConfiguration> {
    if n == 0 {
        return Err(Error::InvalidParams("need at least one point".into()));
    }
    check_ensemble(params, which)?;
    let symplectic = params.symmetry == Symmetry::SymplecticEnsemble;
    let par = opts.parallel;
    let mut x = initial_points(n, params, which, seed, opts.mirror_init);
    let mut e = energy_impl(&x, params, which, par)?;
    let mut g = gradient_impl(&x, params, which, par)?;
    let mut gnorm = real_norm(&g);
    // real gradient components are 2g; step along −2g
    let mut step = 1.0 / (n as f64 * n as f64);
    let mut iterations = 0;
    while iterations < opts.max_iter && gnorm > opts.tol * n as f64 {
        iterations += 1;
        let descent = 4.0 * g.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<Complex64> =
                x.iter().zip(&g).map(|(z, v)| z - 2.0 * alpha * v).collect();
            if admissible(&trial, &x, symplectic) {
                if let Ok(et) = energy_impl(&trial, params, which, par) {
                    if et.is_finite() && et <= e - ARMIJO * alpha * descent {
                        let gt = gradient_impl(&trial, params, which, par)?;
                        accepted = Some((trial, et, gt));
                        break;
                    }
                    // Near the minimum the Armijo decrease drops below the
                    // rounding error of E; fall back to the approximate
                    // condition on the directional derivative.
                    if et.is_finite() && (et - e).abs() <= ROUNDING_SLACK * e.abs().max(1.0) {
                        let gt = gradient_impl(&trial, params, which, par)?;
                        let slope = -4.0
                            * gt.iter()
                                .zip(&g)
                                .map(|(a, b)| (a.conj() * b).re)
                                .sum::<f64>();
                        if slope <= (1.0 - 2.0 * ARMIJO) * descent {
                            accepted = Some((trial, et, gt));
                            break;
                        }
                    }
                }
            }
            alpha *= SHRINK;
        }
        let Some((trial, et, g_new)) = accepted else {
            break;
        };
        // Barzilai–Borwein (short) step on the real coordinates
        let (mut sy, mut yy) = (0.0, 0.0);
        for j in 0..n {
            let s = trial[j] - x[j];
            let y = 2.0 * (g_new[j] - g[j]);
            sy += s.re * y.re + s.im * y.im;
            yy += y.norm_sqr();
        }
        step = if sy > 0.0 && yy > 0.0 { sy / yy } else { alpha };
        x = trial;
        e = et;
        g = g_new;
        gnorm = real_norm(&g);
    }
    Ok(FeketeConfiguration {
        converged: gnorm <= opts.tol * n as f64,
        points: x,
        energy: e,
        grad_norm: gnorm,
        iterations,
        seed,
        potential: which,
        params: *params,
    })
}

/// Number of single-linkage clusters at the given merge distance.
pub fn cluster_count(points: &[Complex64], threshold: f64) -> usize {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for k in (j + 1)..n {
            if (points[j] - points[k]).norm() < threshold {
                let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// `(1/N) Σ ζ_j^k` for `k = 0..=kmax`.
pub fn empirical_moments(points: &[Complex64], kmax: usize) -> Vec<Complex64> {
    let n = points.len() as f64;
    (0..=kmax)
        .map(|k| points.iter().map(|z| z.powu(k as u32)).sum::<Complex64>() / n)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeDiagnostics {
    pub n: usize,
    /// Dilation `3/√N` used for the inside fraction.
    pub epsilon: f64,
    pub inside_fraction: f64,
    pub cluster_threshold: f64,
    pub clusters: usize,
    /// Whether the hole of a post-critical droplet is free of points.
    pub hole_empty: Option<bool>,
    pub empirical_moments: Vec<Complex64>,
    pub predicted_moments: Vec<Complex64>,
}

impl FeketeDiagnostics {
    /// `|m̂_k − m_k| / (1 + |m_k|)`.
    pub fn moment_error(&self, k: usize) -> f64 {
        let (m, p) = (self.empirical_moments[k], self.predicted_moments[k]);
        (m - p).norm() / (1.0 + p.norm())
    }
}

/// Moments `m_0..m_kmax` of the equilibrium measure in the region's
/// coordinates.
pub fn predicted_moments(region: &DropletRegion, kmax: usize) -> Result<Vec<Complex64>> {
    let params = &region.params;
    match (&region.shape, region.coords) {
        (RegionShape::PostCritical(_), Coords::Symmetric) => {
            (0..=kmax).map(|k| equilibrium_moment(params, k)).collect()
        }
        (RegionShape::PostCritical(_), Coords::Squared) => (0..=kmax)
            .map(|k| equilibrium_moment(params, 2 * k))
            .collect(),
        (RegionShape::PreCritical(map), Coords::Squared) => precritical_moments(map, kmax),
        (RegionShape::PreCritical(map), Coords::Symmetric) => Ok(symmetric_moments_from_squared(
            &precritical_moments(map, kmax / 2 + 1)?,
            kmax,
        )),
    }
}

pub fn empirical_diagnostics(
    config: &FeketeConfiguration,
    region: &DropletRegion,
) -> Result<FeketeDiagnostics> {
    let expected = match config.potential {
        PotentialKind::Q => Coords::Symmetric,
        PotentialKind::Qhat => Coords::Squared,
    };
    if region.coords != expected {
        return Err(Error::InvalidParams(
            "configuration and region use different coordinates".into(),
        ));
    }
    let n = config.points.len();
    let epsilon = 3.0 / (n as f64).sqrt();
    let samples: Vec<Complex64> = boundary_points(region, 4096)?
        .into_iter()
        .flatten()
        .collect();
    let inside = config
        .points
        .iter()
        .filter(|z| {
            contains(region, **z, BOUNDARY_TOL) != Membership::Exterior
                || samples.iter().any(|b| (b - **z).norm() <= epsilon)
        })
        .count();
    let cluster_threshold = 4.0 / (n as f64).sqrt();
    let hole_empty = match &region.shape {
        RegionShape::PostCritical(s)
            if s.hole_radius > 0.0 && region.phase() != Phase::PreCritical =>
        {
            Some(
                config
                    .points
                    .iter()
                    .all(|z| (z - s.hole_center).norm() >= 0.5 * s.hole_radius),
            )
        }
        _ => None,
    };
    Ok(FeketeDiagnostics {
        n,
        epsilon,
        inside_fraction: inside as f64 / n as f64,
        cluster_threshold,
        clusters: cluster_count(&config.points, cluster_threshold),
        hole_empty,
        empirical_moments: empirical_moments(&config.points, MOMENT_ORDER),
        predicted_moments: predicted_moments(region, MOMENT_ORDER)?,
    })
}
