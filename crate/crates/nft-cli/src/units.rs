//! Physical-to-normalized unit conversion.
//!
//! The library works on `j q_z = q_tt - 2 s |q|^2 q` in dimensionless units.
//! Writing the physical envelope as `E(t, z) = sqrt(P0) q(t / T0, z / Z0)`
//! with group-velocity dispersion `beta2` (ps^2/km, positive in the normal
//! regime) and Kerr coefficient `gamma` (1/W/km), matching coefficients
//! gives
//!
//! ```text
//!   Z0 = 2 T0^2 / beta2        [km]
//!   P0 = 2 / (gamma Z0)        [W]
//! ```
//!
//! The time scale `T0` (ps) is the free knob of the normalization triple.

use serde::{Deserialize, Serialize};

use crate::config::Fiber;

/// Speed of light in nm * GHz (nm/ns).
const C_NM_GHZ: f64 = 2.99792458e8;

/// Resolved normalization scales.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Normalization {
    pub time_scale_ps: f64,
    pub distance_scale_km: f64,
    pub power_scale_w: f64,
    pub beta2_ps2_km: f64,
}

impl Normalization {
    pub fn from_fiber(fiber: &Fiber) -> Result<Self, String> {
        if fiber.time_scale_ps <= 0.0 || fiber.gamma_per_w_km <= 0.0 {
            return Err("normalization scales must be positive".into());
        }
        // beta2 = -D lambda^2 / (2 pi c); D < 0 gives beta2 > 0 (defocusing)
        let beta2 = -fiber.dispersion_ps_nm_km * fiber.wavelength_nm * fiber.wavelength_nm
            / (2.0 * std::f64::consts::PI * C_NM_GHZ)
            * 1e3; // ps*nm/GHz -> ps^2, per km
        if beta2 <= 0.0 {
            return Err(format!(
                "dispersion {} ps/nm/km maps to the focusing regime",
                fiber.dispersion_ps_nm_km
            ));
        }
        let z0 = 2.0 * fiber.time_scale_ps * fiber.time_scale_ps / beta2;
        let p0 = 2.0 / (fiber.gamma_per_w_km * z0);
        Ok(Normalization {
            time_scale_ps: fiber.time_scale_ps,
            distance_scale_km: z0,
            power_scale_w: p0,
            beta2_ps2_km: beta2,
        })
    }

    pub fn distance_to_normalized(&self, km: f64) -> f64 {
        km / self.distance_scale_km
    }

    pub fn distance_to_km(&self, normalized: f64) -> f64 {
        normalized * self.distance_scale_km
    }

    pub fn power_to_normalized(&self, watts: f64) -> f64 {
        watts / self.power_scale_w
    }

    pub fn power_to_watts(&self, normalized: f64) -> f64 {
        normalized * self.power_scale_w
    }

    /// GHz to normalized (cycles per unit time).
    pub fn frequency_to_normalized(&self, ghz: f64) -> f64 {
        ghz * self.time_scale_ps * 1e-3
    }

    pub fn frequency_to_ghz(&self, normalized: f64) -> f64 {
        normalized / (self.time_scale_ps * 1e-3)
    }

    pub fn time_to_normalized(&self, ps: f64) -> f64 {
        ps / self.time_scale_ps
    }

    pub fn time_to_ps(&self, normalized: f64) -> f64 {
        normalized * self.time_scale_ps
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}
