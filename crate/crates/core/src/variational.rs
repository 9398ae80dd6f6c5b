//! Numerical certificates for the variational conditions of the equilibrium
//! problem, and the mass-one residue identities of the pre-critical map.
//!
//! With `H = U^μ + W`, where `U^μ(ζ) = ∫ log|ζ − z|⁻² dμ(z)`, the droplet is
//! certified when `∂H = ∂W − C` vanishes inside the support and `H` does not
//! drop below its boundary value outside.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    boundary_points, classify_phase, contains, Coords, DropletRegion, Membership, Phase,
    PostCriticalShape, RationalMap, RegionShape, BOUNDARY_TOL,
};
use crate::potential::{eval_q, wirtinger_dq, wirtinger_dqhat, ModelParams};
use crate::transforms::{
    disk_log_potential, ellipse_log_potential, postcritical_measure_cauchy, precritical_cauchy,
    precritical_exterior_field,
};

/// Largest tolerated drop of `H` below its boundary value.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Interior grid points keep this fraction of the diameter from the boundary.
pub const STANDOFF_FRACTION: f64 = 0.02;

const RAY_STEPS: usize = 240;
const HOLE_RAY_END: f64 = 1e-3;
const BOUNDARY_SAMPLES: usize = 2048;

// Gauss–Legendre nodes and weights on [0, 1]
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668_0,
    0.230_765_344_947_158_5,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_5,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_4,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_5,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub phase: Phase,
    pub coords: Coords,
    pub grid_size: usize,
    pub interior_points: usize,
    /// `max |∂H|` over the interior grid.
    pub interior_max_residual: Option<f64>,
    /// Spread of `H` across the interior grid, per connected component.
    pub constant_spread: Option<f64>,
    /// The value of `H` on the support, when it has a closed form.
    pub fitted_constant: Option<f64>,
    pub rays: usize,
    pub exterior_points: usize,
    /// `min (H − H(boundary))` over exterior samples.
    pub exterior_min_margin: Option<f64>,
    /// Smallest margin at the far end of the rays.
    pub far_field_margin: Option<f64>,
    /// `min |∂H|` over exterior samples away from the boundary.
    pub min_exterior_gradient: Option<f64>,
    pub mass_residual: Option<f64>,
}

impl VerificationReport {
    fn empty(phase: Phase, coords: Coords) -> Self {
        Self {
            phase,
            coords,
            grid_size: 0,
            interior_points: 0,
            interior_max_residual: None,
            constant_spread: None,
            fitted_constant: None,
            rays: 0,
            exterior_points: 0,
            exterior_min_margin: None,
            far_field_margin: None,
            min_exterior_gradient: None,
            mass_residual: None,
        }
    }

    /// Combines the defined fields of two reports on the same region.
    pub fn merge(mut self, other: &VerificationReport) -> Self {
        fn pick<T: Copy>(a: Option<T>, b: Option<T>) -> Option<T> {
            a.or(b)
        }
        self.grid_size = self.grid_size.max(other.grid_size);
        self.interior_points = self.interior_points.max(other.interior_points);
        self.interior_max_residual = pick(self.interior_max_residual, other.interior_max_residual);
        self.constant_spread = pick(self.constant_spread, other.constant_spread);
        self.fitted_constant = pick(self.fitted_constant, other.fitted_constant);
        self.rays = self.rays.max(other.rays);
        self.exterior_points = self.exterior_points.max(other.exterior_points);
        self.exterior_min_margin = pick(self.exterior_min_margin, other.exterior_min_margin);
        self.far_field_margin = pick(self.far_field_margin, other.far_field_margin);
        self.min_exterior_gradient = pick(self.min_exterior_gradient, other.min_exterior_gradient);
        self.mass_residual = pick(self.mass_residual, other.mass_residual);
        self
    }

    /// Flat `key=value` lines; undefined quantities print as `none`.
    pub fn to_kv(&self) -> String {
        fn num(v: Option<f64>) -> String {
            v.map_or_else(|| "none".to_string(), |x| format!("{x:.16e}"))
        }
        let phase = match self.phase {
            Phase::PostCritical => "post-critical",
            Phase::Critical => "critical",
            Phase::PreCritical => "pre-critical",
        };
        let coords = match self.coords {
            Coords::Symmetric => "symmetric",
            Coords::Squared => "squared",
        };
        [
            format!("phase={phase}"),
            format!("coords={coords}"),
            format!("grid_size={}", self.grid_size),
            format!("interior_points={}", self.interior_points),
            format!("interior_max_residual={}", num(self.interior_max_residual)),
            format!("constant_spread={}", num(self.constant_spread)),
            format!("fitted_constant={}", num(self.fitted_constant)),
            format!("rays={}", self.rays),
            format!("exterior_points={}", self.exterior_points),
            format!("exterior_min_margin={}", num(self.exterior_min_margin)),
            format!("far_field_margin={}", num(self.far_field_margin)),
            format!("min_exterior_gradient={}", num(self.min_exterior_gradient)),
            format!("mass_residual={}", num(self.mass_residual)),
        ]
        .join("\n")
            + "\n"
    }
}

fn same_params(a: &ModelParams, b: &ModelParams) -> bool {
    a.tau == b.tau && a.c == b.c && a.p == b.p
}

fn check_phase(params: &ModelParams, region: &DropletRegion) -> Result<Phase> {
    params.validate()?;
    if !same_params(params, &region.params) {
        return Err(Error::PhaseMismatch(
            "region was built for different parameters".into(),
        ));
    }
    let expected = if params.is_centered() {
        classify_phase(params)?
    } else {
        Phase::PostCritical
    };
    match (expected, &region.shape) {
        (Phase::Critical, _)
        | (Phase::PostCritical, RegionShape::PostCritical(_))
        | (Phase::PreCritical, RegionShape::PreCritical(_)) => Ok(expected),
        (phase, _) => Err(Error::PhaseMismatch(format!(
            "parameters are {phase:?} but the region has the other representation"
        ))),
    }
}

/// `∂_ζ H` in the coordinates of the region.
pub fn field(region: &DropletRegion, zeta: Complex64) -> Result<Complex64> {
    let params = &region.params;
    match (&region.shape, region.coords) {
        (RegionShape::PostCritical(_), Coords::Symmetric) => {
            Ok(wirtinger_dq(params, zeta)? - postcritical_measure_cauchy(params, zeta)?)
        }
        (RegionShape::PostCritical(_), Coords::Squared) => {
            // H_Ŝ(u) = 2 H_S(√u)
            let s = zeta.sqrt();
            Ok((wirtinger_dq(params, s)? - postcritical_measure_cauchy(params, s)?) / s)
        }
        (RegionShape::PreCritical(map), Coords::Squared) => {
            Ok(wirtinger_dqhat(params, zeta)? - precritical_cauchy(map, zeta)?)
        }
        (RegionShape::PreCritical(map), Coords::Symmetric) => {
            // H_S(ζ) = ½ H_Ŝ(ζ²)
            let u = zeta * zeta;
            Ok(zeta * (wirtinger_dqhat(params, u)? - precritical_cauchy(map, u)?))
        }
    }
}

/// `H` on the post-critical support from the ellipse and disk potentials.
fn postcritical_h(region: &DropletRegion, zeta: Complex64) -> Result<f64> {
    let params = &region.params;
    let symmetric = |z: Complex64| -> Result<f64> {
        let s = (1.0 + params.c).sqrt();
        let def = params.deficit();
        let outer = ellipse_log_potential((1.0 + params.tau) * s, (1.0 - params.tau) * s, z)?;
        let hole = if params.c > 0.0 {
            2.0 * disk_log_potential((def * params.c).sqrt(), params.p, z)?
        } else {
            0.0
        };
        Ok((hole - outer) / def + eval_q(params, z)?)
    };
    match region.coords {
        Coords::Symmetric => symmetric(zeta),
        Coords::Squared => Ok(2.0 * symmetric(zeta.sqrt())?),
    }
}

fn boundary_samples(region: &DropletRegion) -> Result<Vec<Complex64>> {
    Ok(boundary_points(region, BOUNDARY_SAMPLES)?
        .into_iter()
        .flatten()
        .collect())
}

fn distance_to(samples: &[Complex64], zeta: Complex64) -> f64 {
    samples
        .iter()
        .map(|z| (z - zeta).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Cell-centred `n × n` lattice over the bounding box; entries are the
/// interior points that keep the standoff from the boundary.
fn interior_grid(region: &DropletRegion, n: usize) -> Result<Vec<Option<Complex64>>> {
    if n == 0 {
        return Err(Error::InvalidParams("grid size must be positive".into()));
    }
    let (lo, hi) = region.bounding_box();
    let standoff = STANDOFF_FRACTION * region.diameter();
    let samples = boundary_samples(region)?;
    Ok((0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let z = Complex64::new(
                lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / n as f64,
                lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / n as f64,
            );
            let inside = contains(region, z, BOUNDARY_TOL) == Membership::Interior
                && distance_to(&samples, z) >= standoff;
            inside.then_some(z)
        })
        .collect())
}

fn segment_increment(region: &DropletRegion, from: Complex64, to: Complex64) -> Result<f64> {
    let delta = to - from;
    let mut acc = 0.0;
    for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * 2.0 * (field(region, from + delta * *t)? * delta).re;
    }
    Ok(acc)
}

/// Largest spread of path-integrated `H` within a connected set of grid
/// neighbours.
fn path_integrated_spread(
    region: &DropletRegion,
    grid: &[Option<Complex64>],
    n: usize,
) -> Result<f64> {
    let mut value: Vec<Option<f64>> = vec![None; grid.len()];
    let mut spread: f64 = 0.0;
    for start in 0..grid.len() {
        if grid[start].is_none() || value[start].is_some() {
            continue;
        }
        value[start] = Some(0.0);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut queue = VecDeque::from([start]);
        while let Some(idx) = queue.pop_front() {
            let (i, j) = (idx % n, idx / n);
            let here = grid[idx].expect("queued points are interior");
            let mut neighbours = Vec::with_capacity(4);
            if i > 0 {
                neighbours.push(idx - 1);
            }
            if i + 1 < n {
                neighbours.push(idx + 1);
            }
            if j > 0 {
                neighbours.push(idx - n);
            }
            if j + 1 < n {
                neighbours.push(idx + n);
            }
            for nb in neighbours {
                let Some(there) = grid[nb] else { continue };
                if value[nb].is_some() {
                    continue;
                }
                if contains(region, 0.5 * (here + there), BOUNDARY_TOL) != Membership::Interior {
                    continue;
                }
                let v = value[idx].expect("visited") + segment_increment(region, here, there)?;
                value[nb] = Some(v);
                lo = lo.min(v);
                hi = hi.max(v);
                queue.push_back(nb);
            }
        }
        spread = spread.max(hi - lo);
    }
    Ok(spread)
}

/// Variational equality on a `grid_n × grid_n` lattice of interior points.
pub fn verify_equality(
    params: &ModelParams,
    region: &DropletRegion,
    grid_n: usize,
) -> Result<VerificationReport> {
    let phase = check_phase(params, region)?;
    let grid = interior_grid(region, grid_n)?;
    let points: Vec<Complex64> = grid.iter().flatten().copied().collect();
    let residuals: Vec<f64> = points
        .par_iter()
        .map(|z| field(region, *z).map(|v| v.norm()))
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::empty(phase, region.coords);
    report.grid_size = grid_n;
    report.interior_points = points.len();
    report.interior_max_residual = residuals.iter().copied().reduce(f64::max);
    match region.shape {
        RegionShape::PostCritical(_) => {
            let values: Vec<f64> = points
                .par_iter()
                .map(|z| postcritical_h(region, *z))
                .collect::<Result<_>>()?;
            if !values.is_empty() {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                report.constant_spread = Some(hi - lo);
                report.fitted_constant = Some(values.iter().sum::<f64>() / values.len() as f64);
            }
        }
        RegionShape::PreCritical(_) => {
            report.constant_spread = Some(path_integrated_spread(region, &grid, grid_n)?);
        }
    }
    Ok(report)
}

/// Summary of `H − H(start)` along one ray.
#[derive(Debug, Clone, Copy)]
struct RayOutcome {
    min_margin: f64,
    min_point: Complex64,
    final_margin: f64,
    min_gradient: f64,
    samples: usize,
}

/// Integrates `dH/ds` over geometrically spaced steps from `s_start` to
/// `s_end`. `eval(s)` returns the point, `dH/ds` and `|∂H|` there.
fn integrate_ray(
    s_start: f64,
    s_end: f64,
    eval: impl Fn(f64) -> Result<(Complex64, f64, f64)>,
) -> Result<RayOutcome> {
    let ratio = (s_end / s_start).powf(1.0 / RAY_STEPS as f64);
    let mut margin = 0.0;
    let mut out = RayOutcome {
        min_margin: f64::INFINITY,
        min_point: Complex64::new(f64::NAN, f64::NAN),
        final_margin: 0.0,
        min_gradient: f64::INFINITY,
        samples: RAY_STEPS,
    };
    let mut s = s_start;
    for _ in 0..RAY_STEPS {
        let next = s * ratio;
        let h = next - s;
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            margin += w * h * eval(s + t * h)?.1;
        }
        let (point, _, grad) = eval(next)?;
        if margin < out.min_margin {
            out.min_margin = margin;
            out.min_point = point;
        }
        out.min_gradient = out.min_gradient.min(grad);
        s = next;
    }
    out.final_margin = margin;
    Ok(out)
}

fn far_reach(region: &DropletRegion) -> f64 {
    10.0 * region.diameter()
}

fn postcritical_rays(
    region: &DropletRegion,
    shape: &PostCriticalShape,
    rays: usize,
) -> Result<Vec<RayOutcome>> {
    let (a, b) = shape.semi_axes;
    let s_far = 1.0 + far_reach(region) / a.min(b);
    let outward = (0..rays).into_par_iter().map(|k| {
        let theta = TAU * (k as f64 + 0.5) / rays as f64;
        let dir = Complex64::new(a * theta.cos(), b * theta.sin());
        integrate_ray(1.0, s_far, |s| {
            let z = shape.center + s * dir;
            let g = field(region, z)?;
            Ok((z, 2.0 * (g * dir).re, g.norm()))
        })
    });
    let mut out: Vec<RayOutcome> = outward.collect::<Result<_>>()?;
    if shape.hole_radius > 0.0 {
        let inward: Vec<RayOutcome> = (0..rays)
            .into_par_iter()
            .map(|k| {
                let theta = TAU * (k as f64 + 0.5) / rays as f64;
                let dir = Complex64::from_polar(shape.hole_radius, theta);
                integrate_ray(1.0, HOLE_RAY_END, |s| {
                    let z = shape.hole_center + s * dir;
                    let g = field(region, z)?;
                    Ok((z, 2.0 * (g * dir).re, g.norm()))
                })
            })
            .collect::<Result<_>>()?;
        out.extend(inward);
    }
    Ok(out)
}

/// Rays `s ↦ f(s e^{iθ})` in the exterior disk; the angles are offset by half
/// a step so no ray runs into the zero of `f` at `1/a`.
fn precritical_rays(
    region: &DropletRegion,
    map: &RationalMap,
    rays: usize,
) -> Result<Vec<RayOutcome>> {
    let reach = far_reach(region);
    let (s_far, scale) = match region.coords {
        Coords::Squared => (1.0 + reach / map.r1, 1.0),
        // H_S = ½ H_Ŝ and |ζ|² = |f|
        Coords::Symmetric => (1.0 + reach * reach / map.r1, 0.5),
    };
    (0..rays)
        .into_par_iter()
        .map(|k| {
            let theta = TAU * (k as f64 + 0.5) / rays as f64;
            let e = Complex64::from_polar(1.0, theta);
            integrate_ray(1.0, s_far, |s| {
                let w = s * e;
                let zeta = map.eval_unchecked(w);
                let g = precritical_exterior_field(map, w)?;
                let slope = 2.0 * (g * map.derivative_unchecked(w) * e).re;
                let (point, grad) = match region.coords {
                    Coords::Squared => (zeta, g.norm()),
                    Coords::Symmetric => {
                        let root = zeta.sqrt();
                        (root, (root * g).norm())
                    }
                };
                Ok((point, scale * slope, grad))
            })
        })
        .collect()
}

/// Variational inequality along `rays` rays leaving the support.
pub fn verify_inequality(
    params: &ModelParams,
    region: &DropletRegion,
    rays: usize,
) -> Result<VerificationReport> {
    let phase = check_phase(params, region)?;
    if rays == 0 {
        return Err(Error::InvalidParams("ray count must be positive".into()));
    }
    let outcomes = match &region.shape {
        RegionShape::PostCritical(shape) => postcritical_rays(region, shape, rays)?,
        RegionShape::PreCritical(map) => precritical_rays(region, map, rays)?,
    };
    let worst = outcomes
        .iter()
        .min_by(|x, y| x.min_margin.total_cmp(&y.min_margin))
        .expect("at least one ray");
    if worst.min_margin < -INEQUALITY_TOL {
        return Err(Error::InequalityViolated {
            point: worst.min_point,
            margin: worst.min_margin,
        });
    }
    let mut report = VerificationReport::empty(phase, region.coords);
    report.rays = rays;
    report.exterior_points = outcomes.iter().map(|o| o.samples).sum();
    report.exterior_min_margin = Some(worst.min_margin);
    report.far_field_margin = outcomes
        .iter()
        .take(rays)
        .map(|o| o.final_margin)
        .reduce(f64::min);
    report.min_exterior_gradient = outcomes.iter().map(|o| o.min_gradient).reduce(f64::min);
    Ok(report)
}

/// Residue checks of the mass-one identity for a pre-critical map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassOneReport {
    /// `(1/2πi)∮_{|w|=1} √(f^♯ f)·f′/f dw`.
    pub contour_integral: Complex64,
    pub residue_at_zero: Complex64,
    pub residue_at_pole: Complex64,
    /// `|contour − (1−τ²)|`.
    pub residual: f64,
    /// `|Res₀ − (1+c)(1−τ²)|`.
    pub residue_zero_error: f64,
    /// `|Res_a + c(1−τ²)|`.
    pub residue_pole_error: f64,
    pub nodes: usize,
}

/// Follows `√v` continuously along a sampled path.
struct BranchTracker {
    current: Complex64,
}

impl BranchTracker {
    fn follow(&mut self, v: Complex64) -> Complex64 {
        let s = v.sqrt();
        self.current = if (s - self.current).norm() <= (s + self.current).norm() {
            s
        } else {
            -s
        };
        self.current
    }
}

fn mass_integrand(map: &RationalMap, w: Complex64, root: Complex64) -> Complex64 {
    root * map.derivative_unchecked(w) / map.eval_unchecked(w)
}

fn sqrt_argument(map: &RationalMap, w: Complex64) -> Complex64 {
    map.reflected(w) * map.eval_unchecked(w)
}

/// Carries the branch from `w = 1` (where `√(f^♯ f) = |f(1)| > 0`) along a
/// polyline.
fn track_along(map: &RationalMap, path: &[Complex64], tracker: &mut BranchTracker) {
    for pair in path.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let steps = ((to - from).norm() / 1e-3).ceil().max(1.0) as usize;
        for k in 1..=steps {
            tracker.follow(sqrt_argument(
                map,
                from + (to - from) * (k as f64 / steps as f64),
            ));
        }
    }
}

/// `(1/2πi)∮ φ dw` over the circle `|w − center| = radius`, starting at
/// `center + radius·e^{i start}` with the branch held by `tracker`.
fn tracked_circle(
    map: &RationalMap,
    center: Complex64,
    radius: f64,
    start: f64,
    nodes: usize,
    tracker: &BranchTracker,
) -> Complex64 {
    let mut local = BranchTracker {
        current: tracker.current,
    };
    let mut acc = Complex64::new(0.0, 0.0);
    // a fine sub-grid keeps the tracking continuous when `nodes` is small
    let sub = (TAU * radius / nodes as f64 / 1e-3).ceil().max(1.0) as usize;
    for k in 0..nodes {
        for j in 0..sub {
            let t = start + TAU * (k as f64 + j as f64 / sub as f64) / nodes as f64;
            let e = Complex64::from_polar(1.0, t);
            let root = local.follow(sqrt_argument(map, center + radius * e));
            if j == 0 {
                acc += mass_integrand(map, center + radius * e, root) * radius * e;
            }
        }
    }
    acc / nodes as f64
}

fn converged_circle(
    map: &RationalMap,
    center: Complex64,
    radius: f64,
    start: f64,
    tracker: &BranchTracker,
) -> Result<(Complex64, usize)> {
    let mut nodes = 128;
    let mut prev = tracked_circle(map, center, radius, start, nodes, tracker);
    while nodes < 1 << 16 {
        nodes *= 2;
        let next = tracked_circle(map, center, radius, start, nodes, tracker);
        if (next - prev).norm() <= 1e-13 * next.norm().max(1.0) {
            return Ok((next, nodes));
        }
        prev = next;
    }
    Err(Error::Quadrature(
        "contour quadrature did not settle".into(),
    ))
}

/// Checks `(1/2πi)∮ √(f̄(1/w̄) f(w)) f′(w)/f(w) dw = 1 − τ²` and its two
/// residues, with the square root continued along the integration paths.
pub fn mass_one_check(map: &RationalMap) -> Result<MassOneReport> {
    if map.is_critical() {
        return Err(Error::Phase(
            "the pole of the map lies on the contour at criticality".into(),
        ));
    }
    let one = Complex64::new(1.0, 0.0);
    let start = BranchTracker {
        current: sqrt_argument(map, one).sqrt(),
    };
    let def = 1.0 - map.tau * map.tau;

    let (contour, nodes) = converged_circle(map, Complex64::new(0.0, 0.0), 1.0, 0.0, &start)?;

    let at = (map.a * map.tau).abs();
    let r0 = 0.5 * at;
    let mut to_zero = BranchTracker {
        current: start.current,
    };
    track_along(map, &[one, Complex64::new(r0, 0.0)], &mut to_zero);
    let (res0, _) = converged_circle(map, Complex64::new(0.0, 0.0), r0, 0.0, &to_zero)?;

    let a = map.a;
    let ra = 0.5 * (a.abs() * (1.0 - map.tau)).min(1.0 - a.abs());
    let mut to_pole = BranchTracker {
        current: start.current,
    };
    let half_circle: Vec<Complex64> = (0..=256)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 / 256.0))
        .collect();
    track_along(map, &half_circle, &mut to_pole);
    track_along(
        map,
        &[Complex64::new(-1.0, 0.0), Complex64::new(a - ra, 0.0)],
        &mut to_pole,
    );
    let (res_a, _) = converged_circle(map, Complex64::new(a, 0.0), ra, PI, &to_pole)?;

    Ok(MassOneReport {
        contour_integral: contour,
        residue_at_zero: res0,
        residue_at_pole: res_a,
        residual: (contour - def).norm(),
        residue_zero_error: (res0 - (1.0 + map.c) * def).norm(),
        residue_pole_error: (res_a + map.c * def).norm(),
        nodes,
    })
}
