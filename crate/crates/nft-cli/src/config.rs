//! Experiment configuration: a flat TOML file with nested sections,
//! schema-checked on load.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Nfdm,
    Wdm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub seed: u64,
    /// Monte-Carlo trials per sweep point.
    pub trials: usize,
    pub distance_km: f64,
    /// Average launch powers to sweep, dBm.
    pub power_dbm: Vec<f64>,
    pub users: Users,
    pub constellation: Constellation,
    pub pulse: Pulse,
    pub bandwidth: Bandwidth,
    pub grid: Grid,
    pub fiber: Fiber,
    #[serde(default)]
    pub channel: Channel,
    #[serde(default)]
    pub budget: Budget,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Users {
    pub count: usize,
    pub symbols: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constellation {
    pub rings: usize,
    pub phases: usize,
    pub r_min: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub rolloff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bandwidth {
    /// Total occupied bandwidth across all users, GHz.
    pub total_ghz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub time_samples: usize,
    pub spectral_samples: usize,
    /// Normalized time span of the simulation window.
    pub time_span: f64,
}

/// Fiber normalization triple plus noise level. Dispersion and nonlinearity
/// follow the usual single-mode constants; the time scale fixes the
/// normalized units. The noise density is normalized (per unit bandwidth
/// and distance) and is an externally sourced input, not a derived value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fiber {
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub time_scale_ps: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength_nm: f64,
    pub noise_psd: f64,
}

fn default_wavelength() -> f64 {
    1550.0
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    /// 0 selects the automatic step policy.
    #[serde(default)]
    pub z_steps: usize,
    /// 0 derives the noise band from the highest-energy signal.
    #[serde(default)]
    pub noise_bandwidth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    /// Refusal threshold on the estimated compute cost (arbitrary units of
    /// complex operations).
    pub max_cost: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_cost: 2e11 }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<(), String> {
        let c = self;
        let mut problems = Vec::new();
        if c.trials == 0 {
            problems.push("trials must be positive".to_string());
        }
        if c.power_dbm.is_empty() {
            problems.push("power_dbm sweep is empty".to_string());
        }
        if c.distance_km <= 0.0 {
            problems.push("distance_km must be positive".to_string());
        }
        if c.users.count == 0 || c.users.symbols == 0 {
            problems.push("users.count and users.symbols must be positive".to_string());
        }
        if c.constellation.rings == 0 || c.constellation.phases == 0 {
            problems.push("constellation needs rings and phases".to_string());
        }
        if c.constellation.r_min < 0.0 || c.constellation.r_min > c.constellation.r_max {
            problems.push("constellation radii interval is invalid".to_string());
        }
        if !(0.0..=1.0).contains(&c.pulse.rolloff) {
            problems.push("pulse.rolloff outside [0, 1]".to_string());
        }
        if c.bandwidth.total_ghz <= 0.0 {
            problems.push("bandwidth.total_ghz must be positive".to_string());
        }
        if c.grid.time_samples == 0
            || c.grid.spectral_samples < c.grid.time_samples
            || c.grid.time_span <= 0.0
        {
            problems.push(
                "grid needs time_samples >= 1, spectral_samples >= time_samples, time_span > 0"
                    .to_string(),
            );
        }
        if c.fiber.time_scale_ps <= 0.0
            || c.fiber.gamma_per_w_km <= 0.0
            || c.fiber.wavelength_nm <= 0.0
        {
            problems.push("fiber scales must be positive".to_string());
        }
        if c.fiber.dispersion_ps_nm_km >= 0.0 {
            problems.push(
                "dispersion must be negative (normal regime) for the defocusing channel"
                    .to_string(),
            );
        }
        if c.fiber.noise_psd < 0.0 {
            problems.push("fiber.noise_psd must be nonnegative".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// A small self-contained configuration suitable for tests and as a
/// starting point: 3 users, short reach, modest grids.
pub fn example_config() -> ExperimentConfig {
    ExperimentConfig {
        scheme: Scheme::Nfdm,
        seed: 7,
        trials: 60,
        distance_km: 50.0,
        power_dbm: vec![-6.0, -1.0, 4.0],
        users: Users {
            count: 3,
            symbols: 1,
        },
        constellation: Constellation {
            rings: 4,
            phases: 8,
            r_min: 0.25,
            r_max: 1.0,
        },
        pulse: Pulse { rolloff: 0.25 },
        bandwidth: Bandwidth { total_ghz: 60.0 },
        grid: Grid {
            time_samples: 1024,
            spectral_samples: 1024,
            time_span: 64.0,
        },
        fiber: Fiber {
            dispersion_ps_nm_km: -17.0,
            gamma_per_w_km: 1.27,
            time_scale_ps: 25.0,
            wavelength_nm: 1550.0,
            noise_psd: 5e-7,
        },
        channel: Channel::default(),
        budget: Budget::default(),
    }
}
