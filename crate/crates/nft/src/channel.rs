//! Stochastic nonlinear-Schrodinger fiber channel.
//!
//! Propagation model, in normalized units:
//!
//! ```text
//!   j dq/dz = d^2q/dt^2 - 2 s |q|^2 q + n(t, z)
//! ```
//!
//! with `n` white Gaussian noise of power spectral density `noise_psd` per
//! unit bandwidth and distance, bandlimited to `noise_bandwidth`. The
//! deterministic part is integrated by a symmetrized split-step scheme;
//! both split factors are unit-modulus multiplications, so the noise-free
//! integrator conserves energy to rounding and is exactly invertible by
//! negating the distance.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fourier::{bin_frequency, fft_in_place, ifft_in_place};
use crate::grid::{TimeGrid, TimeSignal};
use crate::zs::{Regime, ScatteringData};

/// Step-count policy for the split-step integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// Caller-chosen number of uniform steps; rejected with a suggestion if
    /// the per-step nonlinear phase is unsafe.
    Fixed(usize),
    /// `max(2000 per unit of the full span, nonlinear-phase bound)`.
    Auto,
}

/// Largest tolerated nonlinear phase rotation per step for [`StepPolicy::Auto`].
const AUTO_PHASE_PER_STEP: f64 = 1e-3;
/// Hard sanity bound for [`StepPolicy::Fixed`].
const MAX_PHASE_PER_STEP: f64 = 0.1;
/// Fraction of total energy tolerated in the outer 5% of the window on each
/// side after propagation.
const EDGE_LEAK_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy)]
pub struct ChannelConfig {
    pub regime: Regime,
    /// Normalized propagation distance.
    pub distance: f64,
    /// Noise power spectral density per unit bandwidth and distance.
    pub noise_psd: f64,
    /// One-sided total width of the injected-noise band (ordinary frequency).
    pub noise_bandwidth: f64,
    pub steps: StepPolicy,
    pub seed: u64,
}

impl ChannelConfig {
    /// Noise-free deterministic channel.
    pub fn noiseless(regime: Regime, distance: f64, steps: StepPolicy) -> Self {
        ChannelConfig {
            regime,
            distance,
            noise_psd: 0.0,
            noise_bandwidth: 0.0,
            steps,
            seed: 0,
        }
    }
}

fn resolve_steps(cfg: &ChannelConfig, peak_power: f64) -> Result<usize> {
    let dist = cfg.distance.abs();
    if dist == 0.0 {
        return Ok(1);
    }
    let phase_rate = 2.0 * peak_power; // nonlinear phase per unit distance
    match cfg.steps {
        StepPolicy::Fixed(n) => {
            if n == 0 {
                return Err(Error::Validation("z_steps must be at least 1".into()));
            }
            let dz = dist / n as f64;
            if phase_rate * dz > MAX_PHASE_PER_STEP {
                let suggested = (dist * phase_rate / AUTO_PHASE_PER_STEP).ceil() as usize;
                return Err(Error::StepPolicy {
                    why: format!(
                        "nonlinear phase per step {:.3} rad exceeds {MAX_PHASE_PER_STEP}",
                        phase_rate * dz
                    ),
                    suggested: suggested.max(1),
                });
            }
            Ok(n)
        }
        StepPolicy::Auto => {
            // dz = min(distance / 2000, phase bound)
            let by_phase = (dist * phase_rate / AUTO_PHASE_PER_STEP).ceil() as usize;
            Ok(by_phase.clamp(2000, 2_000_000))
        }
    }
}

struct SplitStep {
    dispersion_half: Vec<Complex64>,
    dz: f64,
    s: f64,
    inv_n: f64,
}

impl SplitStep {
    fn new(grid: &TimeGrid, dz: f64, s: f64) -> Self {
        let n = grid.len();
        let step = grid.step();
        let dispersion_half: Vec<Complex64> = (0..n)
            .map(|m| {
                let omega = 2.0 * std::f64::consts::PI * bin_frequency(m, n, step);
                Complex64::from_polar(1.0, omega * omega * dz / 2.0)
            })
            .collect();
        SplitStep {
            dispersion_half,
            dz,
            s,
            inv_n: 1.0 / n as f64,
        }
    }

    fn apply(&self, buf: &mut [Complex64]) {
        fft_in_place(buf);
        for (v, d) in buf.iter_mut().zip(&self.dispersion_half) {
            *v *= d * self.inv_n;
        }
        ifft_in_place(buf);
        for v in buf.iter_mut() {
            *v *= Complex64::from_polar(1.0, 2.0 * self.s * v.norm_sqr() * self.dz);
        }
        fft_in_place(buf);
        for (v, d) in buf.iter_mut().zip(&self.dispersion_half) {
            *v *= d * self.inv_n;
        }
        ifft_in_place(buf);
    }
}

fn inject_noise(
    buf: &mut [Complex64],
    grid: &TimeGrid,
    psd: f64,
    bandwidth: f64,
    dz: f64,
    rng: &mut ChaCha8Rng,
) {
    let n = grid.len();
    let step = grid.step();
    // synthesize in the frequency domain: in-band bins i.i.d. complex
    // Gaussian with variance psd * dz * n / step, zero elsewhere
    let var = psd * dz * n as f64 / step;
    let sigma = (var / 2.0).sqrt();
    let mut noise = vec![Complex64::default(); n];
    for (m, v) in noise.iter_mut().enumerate() {
        let f = bin_frequency(m, n, step);
        if f.abs() <= bandwidth / 2.0 {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            *v = Complex64::new(re * sigma, im * sigma);
        }
    }
    ifft_in_place(&mut noise);
    let inv_n = 1.0 / n as f64;
    for (q, nz) in buf.iter_mut().zip(&noise) {
        *q += nz * inv_n;
    }
}

/// Fraction of energy in the outer 5% of the window on each side, in excess
/// of what the injected noise is expected to deposit there (noise is
/// homogeneous over the window and does not indicate wrap-around).
fn edge_leak_fraction(samples: &[Complex64], step: f64, noise_energy_budget: f64) -> f64 {
    let n = samples.len();
    let guard = (n / 20).max(1);
    let total: f64 = step * samples.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if total == 0.0 {
        return 0.0;
    }
    let edges: f64 = step
        * samples[..guard]
            .iter()
            .chain(&samples[n - guard..])
            .map(|z| z.norm_sqr())
            .sum::<f64>();
    let expected_noise = noise_energy_budget * 2.0 * guard as f64 / n as f64;
    (edges - 2.0 * expected_noise).max(0.0) / total
}

fn propagate(q0: &TimeSignal, cfg: &ChannelConfig, signed_distance: f64) -> Result<TimeSignal> {
    let peak = q0.max_abs();
    let n_steps = resolve_steps(cfg, peak * peak)?;
    if signed_distance == 0.0 {
        return Ok(q0.clone());
    }
    let dz = signed_distance / n_steps as f64;
    let stepper = SplitStep::new(&q0.grid, dz, cfg.regime.sign());
    let with_noise = cfg.noise_psd > 0.0 && cfg.noise_bandwidth > 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut buf = q0.samples.clone();
    for _ in 0..n_steps {
        stepper.apply(&mut buf);
        if with_noise {
            inject_noise(
                &mut buf,
                &q0.grid,
                cfg.noise_psd,
                cfg.noise_bandwidth,
                dz.abs(),
                &mut rng,
            );
        }
    }

    if buf.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericFailure(
            "split-step produced non-finite samples".into(),
        ));
    }
    let noise_budget = if with_noise {
        cfg.noise_psd * cfg.noise_bandwidth * signed_distance.abs() * q0.grid.span()
    } else {
        0.0
    };
    let leak = edge_leak_fraction(&buf, q0.grid.step(), noise_budget);
    if leak > EDGE_LEAK_LIMIT {
        return Err(Error::NumericFailure(format!(
            "{:.2e} of the energy reached the window edges; widen the time grid",
            leak
        )));
    }
    TimeSignal::new(q0.grid, buf)
}

/// Split-step propagation over `cfg.distance`, with per-step bandlimited
/// noise injection when `noise_psd > 0`. Deterministic for a given seed.
pub fn ssfm_propagate(q0: &TimeSignal, cfg: &ChannelConfig) -> Result<TimeSignal> {
    propagate(q0, cfg, cfg.distance)
}

/// Noise-free split-step with negated distance; inverts the deterministic
/// channel exactly (up to rounding), regardless of injected noise.
pub fn backpropagate(q_received: &TimeSignal, cfg: &ChannelConfig) -> Result<TimeSignal> {
    propagate(q_received, cfg, -cfg.distance)
}

/// Deterministic channel action on scattering data: the spectral amplitude
/// picks up the unit-modulus factor `exp(-4 j lambda^2 distance)`; `a` is
/// invariant. Negate `distance` to invert the channel.
pub fn nft_channel_filter(scattering: &ScatteringData, distance: f64) -> ScatteringData {
    let b: Vec<Complex64> = scattering
        .b
        .iter()
        .zip(scattering.grid.positions())
        .map(|(&bv, lambda)| bv * Complex64::from_polar(1.0, -4.0 * lambda * lambda * distance))
        .collect();
    ScatteringData::new(scattering.grid, scattering.a.clone(), b, scattering.regime)
        .expect("same mesh")
}

/// Ideal brick-wall selection of the band `[center - width/2, center + width/2]`
/// (ordinary frequency) in the Fourier domain.
pub fn user_band_filter(signal: &TimeSignal, center: f64, width: f64) -> Result<TimeSignal> {
    let n = signal.grid.len();
    let step = signal.grid.step();
    let nyquist = 0.5 / step;
    let (lo, hi) = (center - width / 2.0, center + width / 2.0);
    if lo < -nyquist || hi > nyquist {
        return Err(Error::BandOutOfRange {
            lo,
            hi,
            grid_lo: -nyquist,
            grid_hi: nyquist,
        });
    }
    let mut buf = signal.samples.clone();
    fft_in_place(&mut buf);
    let inv_n = 1.0 / n as f64;
    for (m, v) in buf.iter_mut().enumerate() {
        let f = bin_frequency(m, n, step);
        if f >= lo && f <= hi {
            *v *= inv_n;
        } else {
            *v = Complex64::default();
        }
    }
    ifft_in_place(&mut buf);
    TimeSignal::new(signal.grid, buf)
}
