use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::map::{build_rational_map, RationalMap};
use super::{classify_phase, Phase};
use crate::error::{Error, Result};
use crate::potential::ModelParams;
use crate::quad::periodic_mean;

/// Default width of the boundary band, in `|w| − 1` for map-based regions and
/// in the value of the defining quadratic forms for post-critical regions.
pub const BOUNDARY_TOL: f64 = 1e-9;

const CONTAINMENT_SAMPLES: usize = 1024;
const CONTAINMENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coords {
    /// The droplet `S` of `Q`, in the variable `ζ`.
    Symmetric,
    /// The droplet `Ŝ` of `Q̂`, in the variable `ζ²`.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// A closed ellipse with an open disk removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostCriticalShape {
    /// Semi-axes along the real and imaginary directions.
    pub semi_axes: (f64, f64),
    pub center: Complex64,
    pub hole_center: Complex64,
    pub hole_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionShape {
    PostCritical(PostCriticalShape),
    /// Closure of the complement of `f(|w| > 1)`; in symmetric coordinates
    /// the preimage of that set under `ζ ↦ ζ²`.
    PreCritical(RationalMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletRegion {
    pub params: ModelParams,
    pub coords: Coords,
    pub shape: RegionShape,
}

/// Result of maximizing the ellipse quadratic form over the hole boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentProfile {
    /// Maximum of the ellipse form over the circle; `≤ 1` iff contained.
    pub max_form: f64,
    /// Points of the circle where the form attains a value within
    /// [`BOUNDARY_TOL`] of one (tangency points).
    pub tangent_points: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub components: usize,
    pub holes: usize,
    pub double_points: Vec<Complex64>,
    /// `|max form − 1|` for post-critical regions.
    pub tangency_residual: Option<f64>,
}

fn symmetric_shape(params: &ModelParams) -> PostCriticalShape {
    let s = (1.0 + params.c).sqrt();
    PostCriticalShape {
        semi_axes: ((1.0 + params.tau) * s, (1.0 - params.tau) * s),
        center: Complex64::new(0.0, 0.0),
        hole_center: params.p,
        hole_radius: (params.deficit() * params.c).sqrt(),
    }
}

fn squared_shape(params: &ModelParams) -> PostCriticalShape {
    let t2 = params.tau * params.tau;
    let s = 1.0 + params.c;
    PostCriticalShape {
        semi_axes: ((1.0 + t2) * s, (1.0 - t2) * s),
        center: Complex64::new(2.0 * params.tau * s, 0.0),
        hole_center: Complex64::new(0.0, 0.0),
        hole_radius: params.deficit() * params.c,
    }
}

impl PostCriticalShape {
    fn ellipse_form(&self, z: Complex64) -> f64 {
        let u = z - self.center;
        (u.re / self.semi_axes.0).powi(2) + (u.im / self.semi_axes.1).powi(2)
    }

    fn hole_form(&self, z: Complex64) -> f64 {
        if self.hole_radius == 0.0 {
            f64::INFINITY
        } else {
            (z - self.hole_center).norm_sqr() / (self.hole_radius * self.hole_radius)
        }
    }

    /// Ellipse form along the hole boundary and its first two derivatives
    /// in the boundary angle.
    fn form_on_circle(&self, theta: f64) -> (f64, f64, f64) {
        let (a, b) = self.semi_axes;
        let rho = self.hole_radius;
        let u = self.hole_center - self.center;
        let (s, c) = theta.sin_cos();
        let x = u.re + rho * c;
        let y = u.im + rho * s;
        let val = (x / a).powi(2) + (y / b).powi(2);
        let d1 = 2.0 * x * (-rho * s) / (a * a) + 2.0 * y * (rho * c) / (b * b);
        let d2 = 2.0 * ((rho * s).powi(2) - x * rho * c) / (a * a)
            + 2.0 * ((rho * c).powi(2) - y * rho * s) / (b * b);
        (val, d1, d2)
    }

    /// Dense sampling of the hole boundary followed by Newton refinement of
    /// every local maximum of the ellipse form.
    pub fn containment_profile(&self) -> ContainmentProfile {
        if self.hole_radius == 0.0 {
            return ContainmentProfile {
                max_form: self.ellipse_form(self.hole_center),
                tangent_points: Vec::new(),
            };
        }
        let n = CONTAINMENT_SAMPLES;
        let step = TAU / n as f64;
        let vals: Vec<f64> = (0..n)
            .map(|k| self.form_on_circle(k as f64 * step).0)
            .collect();
        let mut maxima: Vec<(f64, f64)> = Vec::new();
        for k in 0..n {
            let prev = vals[(k + n - 1) % n];
            let next = vals[(k + 1) % n];
            if vals[k] >= prev && vals[k] > next {
                let mut theta = k as f64 * step;
                let mut best = vals[k];
                for _ in 0..30 {
                    let (_, d1, d2) = self.form_on_circle(theta);
                    if d2 >= 0.0 {
                        break;
                    }
                    let delta = (-d1 / d2).clamp(-step, step);
                    let cand = theta + delta;
                    let v = self.form_on_circle(cand).0;
                    if v < best {
                        break;
                    }
                    theta = cand;
                    best = v;
                    if delta.abs() < 1e-15 {
                        break;
                    }
                }
                maxima.push((theta, best));
            }
        }
        let max_form = maxima
            .iter()
            .map(|m| m.1)
            .fold(vals.iter().cloned().fold(f64::MIN, f64::max), f64::max);
        let tangent_points = maxima
            .iter()
            .filter(|m| (m.1 - 1.0).abs() <= BOUNDARY_TOL)
            .map(|m| self.hole_center + Complex64::from_polar(self.hole_radius, m.0))
            .collect();
        ContainmentProfile {
            max_form,
            tangent_points,
        }
    }
}

/// Containment profile of the disk `S₂` in the ellipse `S₁` (symmetric
/// coordinates, general charge location).
pub fn containment_profile(params: &ModelParams) -> Result<ContainmentProfile> {
    params.validate()?;
    Ok(symmetric_shape(params).containment_profile())
}

/// Whether the closed disk `S₂` lies in the closed ellipse `S₁`.
pub fn check_containment(params: &ModelParams) -> bool {
    match containment_profile(params) {
        Ok(profile) => profile.max_form <= 1.0 + CONTAINMENT_SLACK,
        Err(_) => false,
    }
}

/// Ellipse minus disk. Squared coordinates require a centered charge.
pub fn postcritical_droplet(params: &ModelParams, coords: Coords) -> Result<DropletRegion> {
    params.validate()?;
    if !check_containment(params) {
        return Err(Error::ContainmentViolated);
    }
    let shape = match coords {
        Coords::Symmetric => symmetric_shape(params),
        Coords::Squared => {
            if !params.is_centered() {
                return Err(Error::InvalidParams(
                    "squared coordinates need a charge at the origin".into(),
                ));
            }
            squared_shape(params)
        }
    };
    Ok(DropletRegion {
        params: *params,
        coords,
        shape: RegionShape::PostCritical(shape),
    })
}

/// Region bounded by the image of the unit circle under the rational map.
pub fn precritical_droplet(params: &ModelParams, coords: Coords) -> Result<DropletRegion> {
    let map = build_rational_map(params)?;
    Ok(DropletRegion {
        params: *params,
        coords,
        shape: RegionShape::PreCritical(map),
    })
}

/// The droplet for any admissible parameters.
///
/// At `τ = τ_c` the ellipse-minus-disk form is returned: the map image at
/// criticality is the full ellipse and does not see the pinched-off hole.
pub fn droplet(params: &ModelParams, coords: Coords) -> Result<DropletRegion> {
    if !params.is_centered() {
        return postcritical_droplet(params, coords);
    }
    match classify_phase(params)? {
        Phase::PostCritical | Phase::Critical => postcritical_droplet(params, coords),
        Phase::PreCritical => precritical_droplet(params, coords),
    }
}

impl DropletRegion {
    pub fn phase(&self) -> Phase {
        match self.shape {
            RegionShape::PreCritical(_) => Phase::PreCritical,
            RegionShape::PostCritical(_) => {
                if self.params.is_centered() {
                    classify_phase(&self.params).unwrap_or(Phase::PostCritical)
                } else {
                    Phase::PostCritical
                }
            }
        }
    }

    pub fn map(&self) -> Option<&RationalMap> {
        match &self.shape {
            RegionShape::PreCritical(m) => Some(m),
            RegionShape::PostCritical(_) => None,
        }
    }

    /// Axis-aligned bounding box `(lower-left, upper-right)`.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        match &self.shape {
            RegionShape::PostCritical(s) => {
                let half = Complex64::new(s.semi_axes.0, s.semi_axes.1);
                (s.center - half, s.center + half)
            }
            RegionShape::PreCritical(_) => {
                let curves = boundary_points(self, 2048).expect("n >= 3");
                let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for z in curves.iter().flatten() {
                    lo.re = lo.re.min(z.re);
                    lo.im = lo.im.min(z.im);
                    hi.re = hi.re.max(z.re);
                    hi.im = hi.im.max(z.im);
                }
                (lo, hi)
            }
        }
    }

    /// Largest side of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi.re - lo.re).max(hi.im - lo.im)
    }
}

/// Membership with a boundary band of width `tol`.
pub fn contains(region: &DropletRegion, zeta: Complex64, tol: f64) -> Membership {
    match (&region.shape, region.coords) {
        (RegionShape::PostCritical(s), _) => {
            let e = s.ellipse_form(zeta);
            let g = s.hole_form(zeta);
            if e > 1.0 + tol || g < 1.0 - tol {
                Membership::Exterior
            } else if e >= 1.0 - tol || g <= 1.0 + tol {
                Membership::Boundary
            } else {
                Membership::Interior
            }
        }
        (RegionShape::PreCritical(map), Coords::Squared) => classify_by_preimages(map, zeta, tol),
        (RegionShape::PreCritical(map), Coords::Symmetric) => {
            classify_by_preimages(map, zeta * zeta, tol)
        }
    }
}

/// Interior iff every preimage lies in the open unit disk, exterior iff one
/// of them lies outside.
fn classify_by_preimages(map: &RationalMap, zeta: Complex64, tol: f64) -> Membership {
    let roots = map.proper_preimages(zeta);
    if roots.iter().any(|w| (w.norm() - 1.0).abs() <= tol) {
        return Membership::Boundary;
    }
    if roots.iter().all(|w| w.norm() < 1.0) {
        Membership::Interior
    } else {
        Membership::Exterior
    }
}

/// Square root tracked continuously along a sampled closed curve. Returns
/// the tracked values and whether the branch closes up after one loop.
pub(crate) fn continuous_sqrt(values: &[Complex64]) -> (Vec<Complex64>, bool) {
    let mut out = Vec::with_capacity(values.len());
    let mut prev = values[0].sqrt();
    out.push(prev);
    for v in &values[1..] {
        let s = v.sqrt();
        prev = if (s - prev).norm() <= (s + prev).norm() {
            s
        } else {
            -s
        };
        out.push(prev);
    }
    let first = values[0].sqrt();
    let closes = (first - prev).norm() <= (first + prev).norm();
    (out, closes)
}

fn map_circle(map: &RationalMap, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| map.eval_unchecked(Complex64::from_polar(1.0, TAU * k as f64 / n as f64)))
        .collect()
}

/// Boundary as a list of closed polylines (`n` samples per parametrization).
pub fn boundary_points(region: &DropletRegion, n: usize) -> Result<Vec<Vec<Complex64>>> {
    if n < 3 {
        return Err(Error::InvalidParams(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    let angles = (0..n).map(|k| TAU * k as f64 / n as f64);
    Ok(match (&region.shape, region.coords) {
        (RegionShape::PostCritical(s), _) => {
            let outer: Vec<Complex64> = angles
                .clone()
                .map(|t| {
                    s.center + Complex64::new(s.semi_axes.0 * t.cos(), s.semi_axes.1 * t.sin())
                })
                .collect();
            let mut curves = vec![outer];
            if s.hole_radius > 0.0 {
                curves.push(
                    angles
                        .map(|t| s.hole_center + Complex64::from_polar(s.hole_radius, t))
                        .collect(),
                );
            }
            curves
        }
        (RegionShape::PreCritical(map), Coords::Squared) => vec![map_circle(map, n)],
        (RegionShape::PreCritical(map), Coords::Symmetric) => {
            let (branch, closes) = continuous_sqrt(&map_circle(map, n));
            let negated: Vec<Complex64> = branch.iter().map(|z| -z).collect();
            if closes {
                vec![branch, negated]
            } else {
                vec![branch.into_iter().chain(negated).collect()]
            }
        }
    })
}

/// Lebesgue area of the region.
pub fn area(region: &DropletRegion) -> Result<f64> {
    const TOL: f64 = 1e-10;
    const MAX_NODES: usize = 1 << 22;
    match (&region.shape, region.coords) {
        (RegionShape::PostCritical(s), _) => {
            Ok(PI * (s.semi_axes.0 * s.semi_axes.1 - s.hole_radius * s.hole_radius))
        }
        (RegionShape::PreCritical(map), Coords::Squared) => {
            // (1/2i)∮ ζ̄ dζ with ζ = f(e^{iθ})
            let mean = periodic_mean(
                |t| {
                    let w = Complex64::from_polar(1.0, t);
                    map.eval_unchecked(w).conj() * map.derivative_unchecked(w) * w
                },
                TOL / PI,
                64,
                MAX_NODES,
            )?;
            Ok(PI * mean.re)
        }
        (RegionShape::PreCritical(map), Coords::Symmetric) => {
            // (1/2i)∮ ζ̄ dζ over ζ = ±√f(e^{iθ}); ζ̄ dζ = (|f|/f) f′ w i dθ / 2 on
            // either branch, and the two branches contribute equally.
            let mean = periodic_mean(
                |t| {
                    let w = Complex64::from_polar(1.0, t);
                    let f = map.eval_unchecked(w);
                    f.norm() / f * map.derivative_unchecked(w) * w
                },
                TOL / PI,
                64,
                MAX_NODES,
            )?;
            Ok(PI * mean.re)
        }
    }
}

/// Converts a squared-coordinate region to symmetric coordinates,
/// `S = {ζ : ζ² ∈ Ŝ}`.
pub fn square_region(region: &DropletRegion) -> Result<DropletRegion> {
    if region.coords != Coords::Squared {
        return Err(Error::InvalidParams(
            "square_region expects a squared-coordinate region".into(),
        ));
    }
    let shape = match region.shape {
        RegionShape::PostCritical(_) => RegionShape::PostCritical(symmetric_shape(&region.params)),
        RegionShape::PreCritical(map) => RegionShape::PreCritical(map),
    };
    Ok(DropletRegion {
        params: region.params,
        coords: Coords::Symmetric,
        shape,
    })
}

/// Connectivity data of the region.
pub fn topology(region: &DropletRegion) -> Result<Topology> {
    match (&region.shape, region.coords) {
        (RegionShape::PostCritical(s), _) => {
            if s.hole_radius == 0.0 {
                return Ok(Topology {
                    components: 1,
                    holes: 0,
                    double_points: Vec::new(),
                    tangency_residual: None,
                });
            }
            let profile = s.containment_profile();
            let k = profile.tangent_points.len();
            Ok(Topology {
                components: k.max(1),
                holes: usize::from(k == 0),
                double_points: profile.tangent_points,
                tangency_residual: Some((profile.max_form - 1.0).abs()),
            })
        }
        (RegionShape::PreCritical(_), Coords::Squared) => Ok(Topology {
            components: 1,
            holes: 0,
            double_points: Vec::new(),
            tangency_residual: None,
        }),
        (RegionShape::PreCritical(_), Coords::Symmetric) => {
            let curves = boundary_points(region, 1024)?;
            Ok(Topology {
                components: curves.len(),
                holes: 0,
                double_points: Vec::new(),
                tangency_residual: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annulus_at_tau_zero() {
        let params = ModelParams::new(0.0, 1.0).unwrap();
        let s = postcritical_droplet(&params, Coords::Symmetric).unwrap();
        let RegionShape::PostCritical(shape) = s.shape else {
            panic!()
        };
        assert_abs_diff_eq!(shape.semi_axes.0, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(shape.hole_radius, 1.0, epsilon = 1e-15);
        assert_eq!(
            contains(&s, c(1.5f64.sqrt(), 0.0), BOUNDARY_TOL),
            Membership::Interior
        );
        assert_eq!(
            contains(&s, c(0.0, 0.5f64.sqrt()), BOUNDARY_TOL),
            Membership::Exterior
        );
        assert_eq!(
            contains(&s, c(0.0, 3.0), BOUNDARY_TOL),
            Membership::Exterior
        );
    }

    #[test]
    fn elliptic_law_without_charge() {
        let params = ModelParams::new(1.0 / 6.0, 0.0).unwrap();
        let s = postcritical_droplet(&params, Coords::Symmetric).unwrap();
        let RegionShape::PostCritical(shape) = s.shape else {
            panic!()
        };
        assert_abs_diff_eq!(shape.semi_axes.0, 7.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(shape.semi_axes.1, 5.0 / 6.0, epsilon = 1e-15);
        assert_eq!(shape.hole_radius, 0.0);
        assert_eq!(topology(&s).unwrap().holes, 0);
    }

    #[test]
    fn off_center_charge_shape() {
        let p = c(0.6, 0.2);
        let params = ModelParams::with_charge(1.0 / 3.0, 1.0 / 7.0, p).unwrap();
        let s = postcritical_droplet(&params, Coords::Symmetric).unwrap();
        let RegionShape::PostCritical(shape) = s.shape else {
            panic!()
        };
        let k = (8.0f64 / 7.0).sqrt();
        assert_abs_diff_eq!(shape.semi_axes.0, 4.0 / 3.0 * k, epsilon = 1e-15);
        assert_abs_diff_eq!(shape.semi_axes.1, 2.0 / 3.0 * k, epsilon = 1e-15);
        assert_abs_diff_eq!(shape.hole_radius, (8.0f64 / 63.0).sqrt(), epsilon = 1e-15);
        assert_eq!(shape.hole_center, p);
        assert!(postcritical_droplet(&params, Coords::Squared).is_err());
    }

    #[test]
    fn containment_examples() {
        assert!(check_containment(
            &ModelParams::new(1.0 / 6.0, 1.0).unwrap()
        ));
        assert!(!check_containment(&ModelParams::new(0.5, 1.0).unwrap()));
        let p = 0.5;
        let threshold = (1.0 - p * p) * (1.0 - p * p) / (4.0 * p * p);
        let inside = ModelParams::with_charge(0.0, threshold - 1e-6, c(p, 0.0)).unwrap();
        assert!(check_containment(&inside));
        let outside = ModelParams::with_charge(0.0, threshold + 1e-3, c(p, 0.0)).unwrap();
        assert!(!check_containment(&outside));
        assert!(matches!(
            postcritical_droplet(&ModelParams::new(0.5, 1.0).unwrap(), Coords::Symmetric),
            Err(Error::ContainmentViolated)
        ));
    }

    #[test]
    fn critical_tangency_has_two_double_points() {
        let params = ModelParams::new(1.0 / 3.0, 1.0).unwrap();
        let s = droplet(&params, Coords::Symmetric).unwrap();
        let top = topology(&s).unwrap();
        assert_eq!(top.double_points.len(), 2);
        assert!(top.tangency_residual.unwrap() <= 1e-9);
        for z in &top.double_points {
            assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(z.im.abs(), (8.0f64 / 9.0).sqrt(), epsilon = 1e-9);
        }
        // one tangency point in squared coordinates, at −(1−τ²)c
        let hat = droplet(&params, Coords::Squared).unwrap();
        let top = topology(&hat).unwrap();
        assert_eq!(top.double_points.len(), 1);
        assert_abs_diff_eq!(top.double_points[0].re, -8.0 / 9.0, epsilon = 1e-9);
    }

    #[test]
    fn phase_topologies() {
        let post = droplet(
            &ModelParams::new(1.0 / 6.0, 1.0).unwrap(),
            Coords::Symmetric,
        )
        .unwrap();
        let t = topology(&post).unwrap();
        assert_eq!((t.components, t.holes), (1, 1));
        let pre = droplet(&ModelParams::new(0.5, 1.0).unwrap(), Coords::Symmetric).unwrap();
        let t = topology(&pre).unwrap();
        assert_eq!((t.components, t.holes), (2, 0));
    }

    #[test]
    fn precritical_membership() {
        let pre = droplet(&ModelParams::new(0.5, 1.0).unwrap(), Coords::Squared).unwrap();
        assert_eq!(
            contains(&pre, c(0.0, 0.0), BOUNDARY_TOL),
            Membership::Exterior
        );
        assert_eq!(
            contains(&pre, c(100.0, 0.0), BOUNDARY_TOL),
            Membership::Exterior
        );
        let map = *pre.map().unwrap();
        for k in 0..16 {
            let w = Complex64::from_polar(1.0, TAU * (k as f64 + 0.3) / 16.0);
            let z = map.eval(w).unwrap();
            assert_eq!(contains(&pre, z, BOUNDARY_TOL), Membership::Boundary);
            // slightly inside along the map's radial direction
            let inner = map.eval(w * 0.97).unwrap();
            let outer = map.eval(w * 1.03).unwrap();
            assert_eq!(contains(&pre, outer, BOUNDARY_TOL), Membership::Exterior);
            let _ = inner;
        }
        // the positive real interior point f(1) − small
        let right = map.eval(c(1.0, 0.0)).unwrap();
        assert_eq!(
            contains(&pre, right - 0.05, BOUNDARY_TOL),
            Membership::Interior
        );
    }

    #[test]
    fn critical_squared_extent() {
        let params = ModelParams::new(1.0 / 3.0, 1.0).unwrap();
        let region = precritical_droplet(&params, Coords::Squared).unwrap();
        let map = region.map().unwrap();
        assert_abs_diff_eq!(
            map.eval(c(1.0, 0.0)).unwrap().re,
            32.0 / 9.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            map.eval(c(-1.0, 0.0)).unwrap().re,
            -8.0 / 9.0,
            epsilon = 1e-13
        );
        let (lo, hi) = region.bounding_box();
        assert_abs_diff_eq!(lo.re, -8.0 / 9.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hi.re, 32.0 / 9.0, epsilon = 1e-9);
    }

    #[test]
    fn areas() {
        let disk = droplet(&ModelParams::new(0.0, 0.0).unwrap(), Coords::Symmetric).unwrap();
        assert_abs_diff_eq!(area(&disk).unwrap(), PI, epsilon = 1e-14);
        for (t, cc) in [(0.1, 1.0), (0.3, 0.2), (0.0, 2.0)] {
            let r = droplet(&ModelParams::new(t, cc).unwrap(), Coords::Symmetric).unwrap();
            assert_abs_diff_eq!(area(&r).unwrap(), PI * (1.0 - t * t), epsilon = 1e-12);
        }
        let pre = droplet(&ModelParams::new(0.5, 1.0).unwrap(), Coords::Symmetric).unwrap();
        assert_abs_diff_eq!(area(&pre).unwrap(), 0.75 * PI, epsilon = 1e-8);
    }

    #[test]
    fn symmetric_boundary_is_sign_invariant() {
        let pre = droplet(&ModelParams::new(0.5, 1.0).unwrap(), Coords::Symmetric).unwrap();
        let curves = boundary_points(&pre, 256).unwrap();
        assert_eq!(curves.len(), 2);
        for (a, b) in curves[0].iter().zip(&curves[1]) {
            assert!((a + b).norm() < 1e-14);
        }
        let hat =
            square_region(&precritical_droplet(&pre.params, Coords::Squared).unwrap()).unwrap();
        assert_eq!(hat, pre);
        assert!(square_region(&pre).is_err());
        assert!(boundary_points(&pre, 2).is_err());
    }

    #[test]
    fn squaring_the_annulus() {
        let params = ModelParams::new(0.0, 1.0).unwrap();
        let hat = postcritical_droplet(&params, Coords::Squared).unwrap();
        let sym = square_region(&hat).unwrap();
        let RegionShape::PostCritical(h) = hat.shape else {
            panic!()
        };
        let RegionShape::PostCritical(s) = sym.shape else {
            panic!()
        };
        assert_abs_diff_eq!(s.semi_axes.0, h.semi_axes.0.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.hole_radius, h.hole_radius.sqrt(), epsilon = 1e-15);
    }
}
