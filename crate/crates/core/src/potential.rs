//! External potentials and their derivatives.
//!
//! The potential in symmetric coordinates is
//!
//! ```text
//! Q(ζ) = (|ζ|² − τ Re ζ²)/(1−τ²) − 2c log|ζ−p|
//! ```
//!
//! and, for a charge at the origin, its squared-coordinate counterpart
//! `Q̂(ζ) = 2(|ζ| − τ Re ζ)/(1−τ²) − 2c log|ζ|`, so that `Q(ζ) = Q̂(ζ²)/2`.
//! Derivatives are Wirtinger derivatives `∂ = (∂x − i∂y)/2` and the
//! Laplacian is the quarter Laplacian `∂∂̄`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the complex plane.
pub type ComplexPoint = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Symmetry {
    /// Complex (unitary) ensemble, Hamiltonian without image charges.
    #[default]
    ComplexEnsemble,
    /// Symplectic ensemble, with image charges at the conjugate points.
    SymplecticEnsemble,
}

/// Parameters `(τ, c, p)` of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub tau: f64,
    pub c: f64,
    pub p: Complex64,
    pub symmetry: Symmetry,
}

impl ModelParams {
    /// Centered charge, complex ensemble.
    pub fn new(tau: f64, c: f64) -> Result<Self> {
        Self::with_charge(tau, c, Complex64::new(0.0, 0.0))
    }

    pub fn with_charge(tau: f64, c: f64, p: Complex64) -> Result<Self> {
        let params = Self {
            tau,
            c,
            p,
            symmetry: Symmetry::ComplexEnsemble,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn symplectic(mut self) -> Self {
        self.symmetry = Symmetry::SymplecticEnsemble;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() || !(0.0..1.0).contains(&self.tau) {
            return Err(Error::InvalidParams(format!(
                "tau must lie in [0, 1), got {}",
                self.tau
            )));
        }
        if !self.c.is_finite() || self.c < 0.0 {
            return Err(Error::InvalidParams(format!(
                "c must be finite and nonnegative, got {}",
                self.c
            )));
        }
        if !self.p.re.is_finite() || !self.p.im.is_finite() {
            return Err(Error::InvalidParams(
                "charge location must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn is_centered(&self) -> bool {
        self.p == Complex64::new(0.0, 0.0)
    }

    /// `1 − τ²`.
    pub fn deficit(&self) -> f64 {
        1.0 - self.tau * self.tau
    }
}

/// Which of the two potentials a derivative or Laplacian refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialKind {
    Q,
    Qhat,
}

fn check_point(zeta: Complex64) -> Result<()> {
    if zeta.re.is_finite() && zeta.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite point {zeta}")))
    }
}

/// `Q_p(ζ)`.
pub fn eval_q(params: &ModelParams, zeta: ComplexPoint) -> Result<f64> {
    params.validate()?;
    check_point(zeta)?;
    let dist = (zeta - params.p).norm();
    if params.c > 0.0 && dist == 0.0 {
        return Err(Error::Domain(format!(
            "Q is singular at the charge {}",
            params.p
        )));
    }
    let quad = (zeta.norm_sqr() - params.tau * (zeta * zeta).re) / params.deficit();
    let log_term = if params.c > 0.0 {
        2.0 * params.c * dist.ln()
    } else {
        0.0
    };
    Ok(quad - log_term)
}

/// `Q̂(ζ)`; the charge is always at the origin in squared coordinates.
pub fn eval_qhat(params: &ModelParams, zeta: ComplexPoint) -> Result<f64> {
    params.validate()?;
    check_point(zeta)?;
    let r = zeta.norm();
    if params.c > 0.0 && r == 0.0 {
        return Err(Error::Domain("Q̂ is singular at the origin".into()));
    }
    let lin = 2.0 * (r - params.tau * zeta.re) / params.deficit();
    let log_term = if params.c > 0.0 {
        2.0 * params.c * r.ln()
    } else {
        0.0
    };
    Ok(lin - log_term)
}

/// `∂_ζ Q_p(ζ) = (ζ̄ − τζ)/(1−τ²) − c/(ζ−p)`.
///
/// The real gradient is `(2 Re, −2 Im)` of the returned value.
pub fn wirtinger_dq(params: &ModelParams, zeta: ComplexPoint) -> Result<Complex64> {
    params.validate()?;
    check_point(zeta)?;
    let base = (zeta.conj() - params.tau * zeta) / params.deficit();
    if params.c == 0.0 {
        return Ok(base);
    }
    let shifted = zeta - params.p;
    if shifted.norm() == 0.0 {
        return Err(Error::Domain(format!(
            "∂Q is singular at the charge {}",
            params.p
        )));
    }
    Ok(base - params.c / shifted)
}

/// `√(ζ̄/ζ)` on the branch `exp(−i arg ζ)`, which equals `ζ̄/|ζ|`.
pub fn unit_phase_conj(zeta: Complex64) -> Complex64 {
    let r = zeta.norm();
    zeta.conj() / r
}

/// `∂_ζ Q̂(ζ) = (√(ζ̄/ζ) − τ)/(1−τ²) − c/ζ`.
pub fn wirtinger_dqhat(params: &ModelParams, zeta: ComplexPoint) -> Result<Complex64> {
    params.validate()?;
    check_point(zeta)?;
    if zeta.norm() == 0.0 {
        return Err(Error::Domain("∂Q̂ is singular at the origin".into()));
    }
    let base = (unit_phase_conj(zeta) - params.tau) / params.deficit();
    Ok(base - params.c / zeta)
}

/// Quarter Laplacian `∂∂̄` of `Q` (constant) or `Q̂` (`1/(2(1−τ²)|ζ|)`).
pub fn laplacian(params: &ModelParams, zeta: ComplexPoint, which: PotentialKind) -> Result<f64> {
    params.validate()?;
    check_point(zeta)?;
    match which {
        PotentialKind::Q => Ok(1.0 / params.deficit()),
        PotentialKind::Qhat => {
            let r = zeta.norm();
            if r == 0.0 {
                return Err(Error::Domain("ΔQ̂ is singular at the origin".into()));
            }
            Ok(1.0 / (2.0 * params.deficit() * r))
        }
    }
}
