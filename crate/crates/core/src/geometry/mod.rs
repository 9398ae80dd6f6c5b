//! Droplet geometry: phase classification, the two droplet representations
//! and membership, boundary, area and topology queries.

mod map;
mod offcenter;
mod region;

pub use map::{build_rational_map, MapIdentities, RationalMap, MAP_IDENTITY_TOL};
pub use offcenter::{offcenter_tau0_map, OffCenterMap};
pub use region::{
    area, boundary_points, check_containment, containment_profile, contains, droplet,
    postcritical_droplet, precritical_droplet, square_region, topology, ContainmentProfile, Coords,
    DropletRegion, Membership, PostCriticalShape, RegionShape, Topology, BOUNDARY_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::ModelParams;

/// Width of the band around `τ_c` reported as [`Phase::Critical`].
pub const PHASE_TIE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    PostCritical,
    Critical,
    PreCritical,
}

/// `τ_c = 1/(1+2c)`.
pub fn critical_tau(c: f64) -> Result<f64> {
    if !c.is_finite() || c < 0.0 {
        return Err(Error::InvalidParams(format!(
            "c must be nonnegative, got {c}"
        )));
    }
    Ok(1.0 / (1.0 + 2.0 * c))
}

/// Phase of a centered-charge model.
pub fn classify_phase(params: &ModelParams) -> Result<Phase> {
    params.validate()?;
    if !params.is_centered() {
        return Err(Error::InvalidParams(
            "the phase dichotomy is defined for a charge at the origin".into(),
        ));
    }
    let tc = critical_tau(params.c)?;
    let gap = params.tau - tc;
    Ok(if gap.abs() <= PHASE_TIE_TOL {
        Phase::Critical
    } else if gap < 0.0 {
        Phase::PostCritical
    } else {
        Phase::PreCritical
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn critical_tau_values() {
        assert_eq!(critical_tau(0.0).unwrap(), 1.0);
        assert_eq!(critical_tau(1.0).unwrap(), 1.0 / 3.0);
        assert_eq!(critical_tau(2.0).unwrap(), 0.2);
        assert!(critical_tau(-1.0).is_err());
    }

    #[test]
    fn phases_for_unit_charge() {
        let phase = |t: f64| classify_phase(&ModelParams::new(t, 1.0).unwrap()).unwrap();
        assert_eq!(phase(1.0 / 6.0), Phase::PostCritical);
        assert_eq!(phase(1.0 / 3.0), Phase::Critical);
        assert_eq!(phase(0.5), Phase::PreCritical);
        let off = ModelParams::with_charge(0.5, 1.0, Complex64::new(0.1, 0.0)).unwrap();
        assert!(classify_phase(&off).is_err());
    }
}
