//! The rational conformal map of the pre-critical droplet in squared
//! coordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{classify_phase, Phase};
use crate::error::{Error, Result};
use crate::poly::cubic_roots;
use crate::potential::ModelParams;

/// Relative tolerance for the algebraic identities checked on construction.
pub const MAP_IDENTITY_TOL: f64 = 1e-10;

/// `f(w) = r1 w + r2 + r3/w + r4/(w−a)`, equivalently
/// `f(w) = d (1−aw)(w−aτ)² / (w(w−a))`.
///
/// `f` maps the exterior of the closed unit disk conformally onto the
/// exterior of the squared droplet, with `f(1/a) = 0` and a double zero at
/// `aτ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalMap {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub a: f64,
    pub d: f64,
    pub tau: f64,
    pub c: f64,
}

/// Relative residuals of the identities every map must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapIdentities {
    /// `r1 = −a d`.
    pub leading: f64,
    /// `f(1/a) = 0`.
    pub zero_at_inverse_pole: f64,
    /// `f(aτ) = 0`.
    pub zero_at_a_tau: f64,
    /// `f′(aτ) = 0`.
    pub critical_at_a_tau: f64,
    /// `r3 = r1 τ²`.
    pub r3_r1: f64,
    /// `r4 = a(1−τ²)(r2 − 2τ(1+c))`.
    pub r4_r2: f64,
    /// `r2` expressed through `r1`, `a`, `τ`, `c`.
    pub r2_r1: f64,
    /// `((2−a²+a⁴τ²) r1 + a r2)(r2 − 2τ(1+c)) = (1−τ²) c² a (a²−1)`.
    pub product: f64,
    /// `(a²−1) r1/a² − r2/a = 2 r1 τ`.
    pub double_zero: f64,
}

impl MapIdentities {
    pub fn max(&self) -> f64 {
        [
            self.leading,
            self.zero_at_inverse_pole,
            self.zero_at_a_tau,
            self.critical_at_a_tau,
            self.r3_r1,
            self.r4_r2,
            self.r2_r1,
            self.product,
            self.double_zero,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (lhs - rhs).abs() / scale.max(lhs.abs()).max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Builds the map from its closed-form coefficients and checks every
/// identity to [`MAP_IDENTITY_TOL`]. Requires `τ ≥ τ_c`, `c > 0`, `p = 0`.
pub fn build_rational_map(params: &ModelParams) -> Result<RationalMap> {
    params.validate()?;
    if !params.is_centered() {
        return Err(Error::InvalidParams(
            "the rational map is defined for a charge at the origin".into(),
        ));
    }
    if params.c <= 0.0 {
        return Err(Error::Phase("the rational map needs c > 0".into()));
    }
    if classify_phase(params)? == Phase::PostCritical {
        return Err(Error::Phase(format!(
            "tau = {} is below the critical value {}",
            params.tau,
            super::critical_tau(params.c)?
        )));
    }
    let map = RationalMap::from_params(params.tau, params.c);
    let ids = map.identities();
    if !(ids.max() <= MAP_IDENTITY_TOL) {
        return Err(Error::Invariant(format!(
            "rational map identities fail: {ids:?}"
        )));
    }
    Ok(map)
}

impl RationalMap {
    /// Closed-form coefficients, without validation.
    pub fn from_params(tau: f64, c: f64) -> Self {
        let s = 1.0 + 2.0 * c;
        let ts = tau * s;
        let rt = ts.sqrt();
        let r1 = 0.5 * (1.0 + tau) * (s / tau).sqrt();
        let r2 = (1.0 + tau) / (2.0 * tau) * (ts + 2.0 * tau - 1.0);
        let r3 = 0.5 * (1.0 + tau) * tau * rt;
        let r4 = (1.0 - tau).powi(2) * (1.0 + tau) * (1.0 - ts) / (2.0 * tau * rt);
        let a = -1.0 / rt;
        let d = 0.5 * (1.0 + tau) * s;
        Self {
            r1,
            r2,
            r3,
            r4,
            a,
            d,
            tau,
            c,
        }
    }

    /// True at `τ = τ_c`, where the pole at `a` cancels and `f` is a shifted
    /// Joukowsky map.
    pub fn is_critical(&self) -> bool {
        self.r4 == 0.0 || (self.a + 1.0).abs() <= 1e-14
    }

    fn check_pole(&self, w: Complex64) -> Result<()> {
        if w.norm() == 0.0 || (!self.is_critical() && (w - self.a).norm() == 0.0) {
            return Err(Error::Domain(format!("w = {w} is a pole of the map")));
        }
        Ok(())
    }

    fn pole_term(&self, w: Complex64) -> Complex64 {
        if self.r4 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.r4 / (w - self.a)
        }
    }

    /// `f(w)` in the partial-fraction form.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        self.check_pole(w)?;
        Ok(self.eval_unchecked(w))
    }

    pub(crate) fn eval_unchecked(&self, w: Complex64) -> Complex64 {
        self.r1 * w + self.r2 + self.r3 / w + self.pole_term(w)
    }

    /// `f(w)` in the factored form `d(1−aw)(w−aτ)²/(w(w−a))`.
    pub fn eval_factored(&self, w: Complex64) -> Result<Complex64> {
        self.check_pole(w)?;
        let at = self.a * self.tau;
        if self.is_critical() {
            // (1−aw)/(w−a) = 1 when a = −1
            return Ok(self.d * (w - at).powu(2) / w);
        }
        Ok(self.d * (1.0 - self.a * w) * (w - at).powu(2) / (w * (w - self.a)))
    }

    pub fn derivative(&self, w: Complex64) -> Result<Complex64> {
        self.check_pole(w)?;
        Ok(self.derivative_unchecked(w))
    }

    pub(crate) fn derivative_unchecked(&self, w: Complex64) -> Complex64 {
        let pole = if self.r4 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.r4 / (w - self.a).powu(2)
        };
        self.r1 - self.r3 / (w * w) - pole
    }

    /// `conj(f(1/w̄)) = r1/w + r2 + r3 w + r4 w/(1−aw)`.
    pub fn reflected(&self, w: Complex64) -> Complex64 {
        let pole = if self.r4 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.r4 * w / (1.0 - self.a * w)
        };
        self.r1 / w + self.r2 + self.r3 * w + pole
    }

    /// Coefficients `[w³, w², w, 1]` of the cubic whose roots solve
    /// `f(w) = ζ`.
    pub fn preimage_cubic(&self, zeta: Complex64) -> [Complex64; 4] {
        let (a, d, t) = (self.a, self.d, self.tau);
        let one = Complex64::new(1.0, 0.0);
        [
            one * (a * d),
            -(d + 2.0 * a * a * d * t - zeta),
            a * (2.0 * d * t + a * a * t * t * d - zeta),
            one * (-a * a * t * t * d),
        ]
    }

    /// The three solutions of `f(w) = ζ`, counted with multiplicity.
    ///
    /// At `τ = τ_c` the cubic carries the spurious root `w = a = −1`, which
    /// [`RationalMap::proper_preimages`] removes.
    pub fn invert(&self, zeta: Complex64) -> [Complex64; 3] {
        cubic_roots(self.preimage_cubic(zeta))
    }

    /// Preimages of `ζ` under `f` itself (two at criticality, three otherwise).
    pub fn proper_preimages(&self, zeta: Complex64) -> Vec<Complex64> {
        let roots = self.invert(zeta);
        if !self.is_critical() {
            return roots.to_vec();
        }
        let spurious = (0..3)
            .min_by(|&i, &j| {
                (roots[i] - self.a)
                    .norm()
                    .total_cmp(&(roots[j] - self.a).norm())
            })
            .expect("three roots");
        roots
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != spurious)
            .map(|(_, r)| *r)
            .collect()
    }

    pub fn identities(&self) -> MapIdentities {
        let Self {
            r1,
            r2,
            r3,
            r4,
            a,
            d,
            tau,
            c,
        } = *self;
        let def = 1.0 - tau * tau;
        let at = a * tau;
        let wa = Complex64::new(at, 0.0);

        // f(1/a) = r1/a + r2 + r3 a + a r4/(1−a²); at criticality 1/a = a and
        // the zero cancels against the pole
        let zero_at_inverse_pole = if self.is_critical() {
            0.0
        } else {
            let terms = [r1 / a, r2, r3 * a, a * r4 / (1.0 - a * a)];
            terms.iter().sum::<f64>().abs() / terms.iter().map(|t| t.abs()).sum::<f64>()
        };

        let pole_at = if r4 == 0.0 { 0.0 } else { r4 / (at - a) };
        let terms = [r1 * at, r2, r3 / at, pole_at];
        let zero_at_a_tau =
            terms.iter().sum::<f64>().abs() / terms.iter().map(|t| t.abs()).sum::<f64>();

        let dpole = if r4 == 0.0 {
            0.0
        } else {
            r4 / (at - a).powi(2)
        };
        let terms = [r1, -r3 / (at * at), -dpole];
        let critical_at_a_tau =
            self.derivative_unchecked(wa).norm() / terms.iter().map(|t| t.abs()).sum::<f64>();

        let k = 2.0 * tau * (1.0 + c);
        let r2_rhs = r1 * (1.0 + at * at) / (1.0 - at * at) * (a * a - 1.0) / a
            + 2.0 * a * a * def * tau * (1.0 + c) / (1.0 - at * at);
        let lhs = ((2.0 - a * a + a.powi(4) * tau * tau) * r1 + a * r2) * (r2 - k);
        let rhs = def * c * c * a * (a * a - 1.0);
        let product_scale = ((2.0 - a * a + a.powi(4) * tau * tau) * r1)
            .abs()
            .max((a * r2).abs())
            * r2.abs().max(k);

        MapIdentities {
            leading: rel(r1, -a * d, 0.0),
            zero_at_inverse_pole,
            zero_at_a_tau,
            critical_at_a_tau,
            r3_r1: rel(r3, r1 * tau * tau, 0.0),
            r4_r2: rel(r4, a * def * (r2 - k), r2.abs()),
            r2_r1: rel(r2, r2_rhs, 0.0),
            product: rel(lhs, rhs, product_scale),
            double_zero: rel((a * a - 1.0) / (a * a) * r1 - r2 / a, 2.0 * r1 * tau, r1),
        }
    }
}
