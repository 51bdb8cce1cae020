//! Monte-Carlo power sweeps over the stochastic channel.
//!
//! One sweep point: scale the ring constellation to the target launch power,
//! run seeded trials (transmit, propagate, receive), accumulate the
//! center-user transition histogram conditioned on the sent ring (received
//! symbols are referenced to the sent phase, which the rotationally
//! symmetric constellation allows), expand it to the full alphabet by
//! phase symmetry, and maximize mutual information under the average-power
//! constraint.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use nft::channel::{ssfm_propagate, ChannelConfig, StepPolicy};
use nft::measure::{bandwidth_99, duration_99, energy_time};
use nft::nfdm::{nfdm_receive, nfdm_transmit, NfdmPlan, SymbolMatrix};
use nft::pulse::PulseBank;
use nft::rate::{
    blahut_arimoto, estimate_transitions, time_bandwidth_factor, PolarBinning, RingConstellation,
    TimeBandwidthStats, TransitionHistogram,
};
use nft::wdm::{derotate, estimate_rotation, wdm_receive, wdm_transmit};
use nft::zs::Regime;
use nft::{TimeGrid, TimeSignal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Scheme};
use crate::units::{dbm_to_watts, watts_to_dbm, Normalization};

/// Failure classification for the process exit code.
#[derive(Debug)]
pub enum RunError {
    Validation(String),
    Numeric(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "validation: {m}"),
            RunError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

pub fn classify(err: nft::Error) -> RunError {
    use nft::Error::*;
    match err {
        Validation(_) | InvalidGrid(_) | Unsupported(_) | StepPolicy { .. } => {
            RunError::Validation(err.to_string())
        }
        _ => RunError::Numeric(err.to_string()),
    }
}

/// Deterministic per-trial seed derivation (splitmix64 over the key parts).
fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut x = master;
    for &p in parts {
        x = x.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(p);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        x = z ^ (z >> 31);
    }
    x
}

/// One sweep point of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct PowerPoint {
    pub target_dbm: f64,
    /// Average launch power actually achieved, normalized and in dBm.
    pub achieved_power: f64,
    pub achieved_dbm: f64,
    /// Constellation gain applied at this point.
    pub gain: f64,
    /// Bits per two real dimensions at the optimal input distribution.
    pub rate_bits: f64,
    /// Differential-entropy estimate of the received symbol given the sent
    /// one, bits, from the sweep histogram (inputs scale with power).
    pub conditional_entropy_bits: f64,
    /// Differential entropy of the received center symbol when the sent one
    /// is held at a fixed low amplitude across the sweep while the other
    /// degrees of freedom carry full-power data; the interference probe.
    pub probe_entropy_bits: f64,
    /// Time-bandwidth normalization factor.
    pub alpha: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
    #[serde(skip)]
    pub histogram: TransitionHistogram,
    /// Raw received clouds: (sent constellation index, received value).
    #[serde(skip)]
    pub clouds: Vec<(usize, Complex64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub normalization: Normalization,
    pub noise_bandwidth: f64,
    pub points: Vec<PowerPoint>,
    pub awgn_bits: Vec<f64>,
    /// Wall-clock duration of the sweep, seconds.
    pub runtime_seconds: f64,
    pub toolkit_version: String,
}

/// Shared per-run machinery: grids, banks and channel template.
struct Bench {
    cfg: ExperimentConfig,
    norm: Normalization,
    distance: f64,
    constellation: RingConstellation,
    plan: Option<NfdmPlan>,
    bank: Option<PulseBank>,
    noise_bandwidth: f64,
    center_row: usize,
    center_col: usize,
}

impl Bench {
    fn new(cfg: &ExperimentConfig) -> Result<Self, RunError> {
        cfg.validate().map_err(RunError::Validation)?;
        let norm = Normalization::from_fiber(&cfg.fiber).map_err(RunError::Validation)?;
        let distance = norm.distance_to_normalized(cfg.distance_km);
        let band_total = norm.frequency_to_normalized(cfg.bandwidth.total_ghz);
        let constellation = RingConstellation::new(
            cfg.constellation.rings,
            cfg.constellation.phases,
            cfg.constellation.r_min,
            cfg.constellation.r_max,
        )
        .map_err(|e| RunError::Validation(e.to_string()))?;

        let (plan, bank) = match cfg.scheme {
            Scheme::Nfdm => {
                // the nonlinear band sits at half the physical band
                let spacing = band_total / 2.0 / cfg.users.count as f64;
                let plan = NfdmPlan::new(
                    cfg.grid.time_samples,
                    cfg.grid.time_span,
                    cfg.grid.spectral_samples,
                    cfg.users.count,
                    cfg.users.symbols,
                    cfg.pulse.rolloff,
                    spacing,
                )
                .map_err(classify)?;
                (Some(plan), None)
            }
            Scheme::Wdm => {
                let grid = TimeGrid::new(
                    -cfg.grid.time_span / 2.0,
                    cfg.grid.time_span / 2.0,
                    cfg.grid.time_samples,
                )
                .map_err(classify)?;
                let spacing = band_total / cfg.users.count as f64;
                let bank = PulseBank::new(
                    grid,
                    cfg.users.count,
                    cfg.users.symbols,
                    cfg.pulse.rolloff,
                    spacing,
                )
                .map_err(classify)?;
                (None, Some(bank))
            }
        };

        Ok(Bench {
            cfg: cfg.clone(),
            norm,
            distance,
            constellation,
            plan,
            bank,
            noise_bandwidth: cfg.channel.noise_bandwidth,
            center_row: cfg.users.count / 2,
            center_col: cfg.users.symbols / 2,
        })
    }

    fn steps(&self) -> StepPolicy {
        if self.cfg.channel.z_steps == 0 {
            StepPolicy::Auto
        } else {
            StepPolicy::Fixed(self.cfg.channel.z_steps)
        }
    }

    fn transmit(&self, symbols: &SymbolMatrix) -> nft::Result<TimeSignal> {
        match self.cfg.scheme {
            Scheme::Nfdm => nfdm_transmit(symbols, self.plan.as_ref().unwrap(), Regime::Defocusing),
            Scheme::Wdm => wdm_transmit(symbols, self.bank.as_ref().unwrap()),
        }
    }

    /// Center-user symbol estimates after the scheme's receiver chain.
    fn receive_center(&self, received: &TimeSignal, cfg: &ChannelConfig) -> nft::Result<Complex64> {
        match self.cfg.scheme {
            Scheme::Nfdm => {
                let hat = nfdm_receive(
                    received,
                    self.plan.as_ref().unwrap(),
                    self.distance,
                    Regime::Defocusing,
                )?;
                Ok(hat.get(self.center_row, self.center_col))
            }
            Scheme::Wdm => {
                let row = wdm_receive(received, cfg, self.bank.as_ref().unwrap(), 0)?;
                Ok(row[self.center_col])
            }
        }
    }

    /// Deterministic calibration of the constellation gain that achieves the
    /// requested average launch power `energy / duration`.
    fn calibrate_gain(&self, target_power: f64) -> Result<f64, RunError> {
        let mean_sq: f64 =
            self.constellation.powers().iter().sum::<f64>() / self.constellation.len() as f64;
        let budget = (self.cfg.users.count * self.cfg.users.symbols) as f64 * mean_sq;
        let mut gain = (target_power * 8.0 / budget).sqrt(); // crude start: ~8 units duration
        for _ in 0..4 {
            let probe = self.reference_matrix(gain, 5150);
            let q = self.transmit(&probe).map_err(classify)?;
            let duration = duration_99(&q).map_err(classify)?;
            let achieved = energy_time(&q) / duration;
            gain *= (target_power / achieved).sqrt();
            if !gain.is_finite() || gain <= 0.0 {
                return Err(RunError::Numeric("gain calibration diverged".into()));
            }
        }
        Ok(gain)
    }

    /// Fixed pseudo-random draw used for calibration probes.
    fn reference_matrix(&self, gain: f64, seed: u64) -> SymbolMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.cfg.users.count * self.cfg.users.symbols;
        let pts = self.constellation.points();
        SymbolMatrix::new(
            (0..n)
                .map(|_| pts[rng.gen_range(0..pts.len())] * gain)
                .collect(),
            self.cfg.users.count,
            self.cfg.users.symbols,
        )
        .expect("sized correctly")
    }

    /// Noise band: the maximum of the input and output 99% bandwidths of the
    /// highest-energy signal, at the top sweep power.
    fn resolve_noise_bandwidth(&mut self, max_gain: f64) -> Result<(), RunError> {
        if self.noise_bandwidth > 0.0 {
            return Ok(());
        }
        let n = self.cfg.users.count * self.cfg.users.symbols;
        let top = self.constellation.points()[self.constellation.len() - 1] * max_gain;
        let all_top = SymbolMatrix::new(vec![top; n], self.cfg.users.count, self.cfg.users.symbols)
            .expect("sized");
        // the all-equal draw can trip the peak guard; fall back to a
        // random-phase draw at the top ring
        let q0 = self.transmit(&all_top).or_else(|_| {
            let mut rng = ChaCha8Rng::seed_from_u64(991);
            let draw = SymbolMatrix::new(
                (0..n)
                    .map(|_| {
                        Complex64::from_polar(top.norm(), rng.gen_range(0.0..std::f64::consts::TAU))
                    })
                    .collect(),
                self.cfg.users.count,
                self.cfg.users.symbols,
            )
            .expect("sized");
            self.transmit(&draw)
        });
        let q0 = q0.map_err(classify)?;
        let cfg = ChannelConfig::noiseless(Regime::Defocusing, self.distance, self.steps());
        let q_l = ssfm_propagate(&q0, &cfg).map_err(classify)?;
        let bw_in = bandwidth_99(&q0).map_err(classify)?;
        let bw_out = bandwidth_99(&q_l).map_err(classify)?;
        self.noise_bandwidth = bw_in.max(bw_out);
        Ok(())
    }
}

/// Estimated cost in complex operations, used for the refusal gate.
pub fn estimate_cost(cfg: &ExperimentConfig, norm: &Normalization) -> f64 {
    let n = cfg.grid.time_samples as f64;
    let m = cfg.grid.spectral_samples as f64;
    let distance = norm.distance_to_normalized(cfg.distance_km);
    let steps = if cfg.channel.z_steps > 0 {
        cfg.channel.z_steps as f64
    } else {
        2000f64.max(distance * 2.0 * 1.0 / 1e-3)
    };
    let per_prop = steps * n * n.log2() * 8.0;
    let per_nft = 2.0 * n * m;
    let chains = if cfg.scheme == Scheme::Wdm { 2.0 } else { 1.0 };
    cfg.power_dbm.len() as f64 * cfg.trials as f64 * (per_prop * chains + per_nft)
}

struct TrialOutput {
    ring: usize,
    point_index: usize,
    sent: Complex64,
    received: Complex64,
    measures: Option<(TimeSignal, TimeSignal)>,
}

/// Moment estimator of the differential entropy (bits) of a 2-d scatter:
/// `log2(2 pi e sqrt(det cov))`, exact for Gaussian clouds.
fn scatter_entropy_bits(samples: &[Complex64]) -> f64 {
    let n = samples.len() as f64;
    let mean: Complex64 = samples.iter().sum::<Complex64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for s in samples {
        let dx = s.re - mean.re;
        let dy = s.im - mean.im;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let det = (sxx * syy - sxy * sxy) / (n * n);
    (2.0 * std::f64::consts::PI * std::f64::consts::E * det.max(1e-300).sqrt()).log2()
}

/// Run the full sweep described by `cfg`. Deterministic for a given seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, RunError> {
    let started = std::time::Instant::now();
    let mut bench = Bench::new(cfg)?;
    let cost = estimate_cost(cfg, &bench.norm);
    if cost > cfg.budget.max_cost {
        return Err(RunError::Validation(format!(
            "estimated cost {cost:.2e} exceeds budget {:.2e}; shrink trials/grids or raise budget.max_cost",
            cfg.budget.max_cost
        )));
    }

    // calibrate every sweep point, then fix the noise band at the top power
    let mut gains = Vec::new();
    for &dbm in &cfg.power_dbm {
        let target = bench.norm.power_to_normalized(dbm_to_watts(dbm));
        gains.push(bench.calibrate_gain(target)?);
    }
    let max_gain = gains.iter().cloned().fold(0.0, f64::max);
    bench.resolve_noise_bandwidth(max_gain)?;

    let alpha_samples = cfg.trials.min(6);
    let probe_trials = cfg.trials.min(24);
    // fixed low-amplitude probe, constant across the sweep
    let min_gain = gains.iter().cloned().fold(f64::INFINITY, f64::min);
    let probe_symbol = Complex64::new(
        0.2 * min_gain * bench.constellation.radii[bench.constellation.radii.len() - 1],
        0.0,
    );
    let mut points = Vec::new();
    let mut awgn_bits = Vec::new();

    for (p_idx, (&dbm, &gain)) in cfg.power_dbm.iter().zip(&gains).enumerate() {
        let outcomes: Vec<Result<TrialOutput, nft::Error>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(&bench, p_idx, trial, gain, trial < alpha_samples, None))
            .collect();

        let mut ok = Vec::new();
        let mut failed = 0usize;
        for o in outcomes {
            match o {
                Ok(t) => ok.push(t),
                Err(_) => failed += 1,
            }
        }
        if ok.is_empty() {
            return Err(RunError::Numeric(format!(
                "all {} trials failed at {dbm} dBm",
                cfg.trials
            )));
        }

        // single-tap de-rotation before symbol decisions (linear receiver
        // shows a common rotation; the nonlinear receiver inverts it anyway)
        let received: Vec<Complex64> = {
            let raw: Vec<Complex64> = ok.iter().map(|t| t.received).collect();
            let sent: Vec<Complex64> = ok.iter().map(|t| t.sent).collect();
            if cfg.scheme == Scheme::Wdm {
                derotate(&raw, estimate_rotation(&raw, &sent))
            } else {
                raw
            }
        };

        // reference the received value to the sent phase, condition on the ring
        let pairs: Vec<(usize, Complex64)> = ok
            .iter()
            .zip(&received)
            .map(|(t, &y)| {
                let phase_ref = t.sent / t.sent.norm().max(1e-300);
                (t.ring, y * phase_ref.conj())
            })
            .collect();
        let binning = PolarBinning::covering(
            &pairs.iter().map(|&(_, y)| y).collect::<Vec<_>>(),
            cfg.constellation.rings,
            cfg.constellation.phases,
        );
        let histogram =
            estimate_transitions(&pairs, cfg.constellation.rings, binning).map_err(classify)?;

        let (rate_bits, mean_power) = full_alphabet_rate(&histogram, &bench.constellation, gain)?;
        let entropy = histogram.conditional_entropy_bits();

        let probe_cloud: Vec<Complex64> = (0..probe_trials)
            .into_par_iter()
            .filter_map(|trial| {
                run_trial(&bench, p_idx, trial, gain, false, Some(probe_symbol))
                    .ok()
                    .map(|t| t.received)
            })
            .collect();
        if probe_cloud.len() < 4 {
            return Err(RunError::Numeric(format!(
                "interference probe failed at {dbm} dBm"
            )));
        }
        let probe_entropy = scatter_entropy_bits(&probe_cloud);

        let mut stats = TimeBandwidthStats::default();
        for t in &ok {
            if let Some((input, output)) = &t.measures {
                stats.add(input, output).map_err(classify)?;
            }
        }
        let alpha =
            time_bandwidth_factor(&stats, cfg.users.count, cfg.users.symbols).map_err(classify)?;

        let clouds: Vec<(usize, Complex64)> = ok
            .iter()
            .zip(&received)
            .map(|(t, &y)| (t.point_index, y))
            .collect();

        awgn_bits.push(nft::rate::awgn_capacity(
            mean_power,
            cfg.fiber.noise_psd,
            bench.noise_bandwidth,
            bench.distance,
        ));

        points.push(PowerPoint {
            target_dbm: dbm,
            achieved_power: mean_power,
            achieved_dbm: watts_to_dbm(bench.norm.power_to_watts(mean_power)),
            gain,
            rate_bits,
            conditional_entropy_bits: entropy,
            probe_entropy_bits: probe_entropy,
            alpha,
            trials_ok: ok.len(),
            trials_failed: failed,
            histogram,
            clouds,
        });
    }

    Ok(ExperimentResult {
        config: cfg.clone(),
        normalization: bench.norm,
        noise_bandwidth: bench.noise_bandwidth,
        points,
        awgn_bits,
        runtime_seconds: started.elapsed().as_secs_f64(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

fn run_trial(
    bench: &Bench,
    p_idx: usize,
    trial: usize,
    gain: f64,
    measure: bool,
    probe: Option<Complex64>,
) -> Result<TrialOutput, nft::Error> {
    let cfg = &bench.cfg;
    let lane = if probe.is_some() { 2u64 } else { 0 };
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[p_idx as u64, trial as u64, lane]));
    let pts = bench.constellation.points();
    let n = cfg.users.count * cfg.users.symbols;
    let draw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..pts.len())).collect();
    let center = bench.center_row * cfg.users.symbols + bench.center_col;
    let center_idx = draw[center];
    let mut data: Vec<Complex64> = draw.iter().map(|&i| pts[i] * gain).collect();
    if let Some(fixed) = probe {
        data[center] = fixed;
    }
    let symbols = SymbolMatrix::new(data, cfg.users.count, cfg.users.symbols)?;

    let q0 = bench.transmit(&symbols)?;
    let channel = ChannelConfig {
        regime: Regime::Defocusing,
        distance: bench.distance,
        noise_psd: cfg.fiber.noise_psd,
        noise_bandwidth: bench.noise_bandwidth,
        steps: bench.steps(),
        seed: derive_seed(cfg.seed, &[p_idx as u64, trial as u64, lane + 1]),
    };
    let q_l = ssfm_propagate(&q0, &channel)?;
    let received = bench.receive_center(&q_l, &channel)?;

    Ok(TrialOutput {
        ring: center_idx / cfg.constellation.phases,
        point_index: center_idx,
        sent: symbols.data[center],
        received,
        measures: if measure { Some((q0, q_l)) } else { None },
    })
}

/// Expand the ring-conditioned histogram to the full constellation by phase
/// symmetry and maximize the rate under the average-power constraint.
/// Returns the rate and the optimal distribution's mean power.
fn full_alphabet_rate(
    histogram: &TransitionHistogram,
    constellation: &RingConstellation,
    gain: f64,
) -> Result<(f64, f64), RunError> {
    let n_phases = constellation.n_phases;
    let nb = histogram.binning.n_bins();
    let n_phase_bins = histogram.binning.n_phase;

    let (ring_rows, used) = histogram.to_stochastic_matrix();
    // rebuild dense ring rows over all bins for shifting
    let mut dense: Vec<Vec<f64>> = vec![vec![0.0; nb]; ring_rows.len()];
    for (r, row) in ring_rows.iter().enumerate() {
        for (j, &b) in used.iter().enumerate() {
            dense[r][b] = row[j];
        }
    }

    // full alphabet: input (ring, phase m) shifts the phase bins by m
    // (bin counts equal the constellation phase count)
    let shift_bins = n_phase_bins as isize;
    let per_input = (shift_bins as usize) / n_phases.max(1);
    let mut w = Vec::with_capacity(dense.len() * n_phases);
    let mut powers = Vec::with_capacity(dense.len() * n_phases);
    for (ring, base) in dense.iter().enumerate() {
        let p = constellation.radii[ring] * gain;
        for m in 0..n_phases {
            let mut row = vec![0.0; nb];
            let shift = (m * per_input) as isize;
            for (b, &v) in base.iter().enumerate() {
                if v > 0.0 {
                    let radial = b / n_phase_bins;
                    let phase = b % n_phase_bins;
                    let new_phase = ((phase as isize + shift).rem_euclid(shift_bins)) as usize;
                    row[radial * n_phase_bins + new_phase] = v;
                }
            }
            w.push(row);
            powers.push(p * p);
        }
    }

    let mean_uniform: f64 = powers.iter().sum::<f64>() / powers.len() as f64;
    let result = blahut_arimoto(&w, &powers, Some(mean_uniform)).map_err(classify)?;
    Ok((result.bits_per_2d, result.mean_power))
}

/// One deterministic loopback trial at a given launch power; used by the
/// `nfdm-loopback` / `wdm-loopback` subcommands and the acceptance suite.
pub struct LoopbackReport {
    pub symbol_error: f64,
    pub sent: Vec<Complex64>,
    pub received: Vec<Complex64>,
    pub achieved_power: f64,
}

pub fn run_loopback(
    cfg: &ExperimentConfig,
    dbm: f64,
    noisy: bool,
) -> Result<LoopbackReport, RunError> {
    let mut bench = Bench::new(cfg)?;
    let target = bench.norm.power_to_normalized(dbm_to_watts(dbm));
    let gain = bench.calibrate_gain(target)?;
    if noisy {
        bench.resolve_noise_bandwidth(gain)?;
    }
    let symbols = bench.reference_matrix(gain, derive_seed(cfg.seed, &[77]));
    let q0 = bench.transmit(&symbols).map_err(classify)?;
    let channel = ChannelConfig {
        regime: Regime::Defocusing,
        distance: bench.distance,
        noise_psd: if noisy { cfg.fiber.noise_psd } else { 0.0 },
        noise_bandwidth: bench.noise_bandwidth,
        steps: bench.steps(),
        seed: derive_seed(cfg.seed, &[78]),
    };
    let q_l = ssfm_propagate(&q0, &channel).map_err(classify)?;
    let achieved = energy_time(&q0) / duration_99(&q0).map_err(classify)?;

    let received: Vec<Complex64> = match cfg.scheme {
        Scheme::Nfdm => {
            nfdm_receive(
                &q_l,
                bench.plan.as_ref().unwrap(),
                bench.distance,
                Regime::Defocusing,
            )
            .map_err(classify)?
            .data
        }
        Scheme::Wdm => {
            let bank = bench.bank.as_ref().unwrap();
            let (u1, u2) = bank.user_range();
            let mut all = Vec::new();
            for user in u1..=u2 {
                all.extend(wdm_receive(&q_l, &channel, bank, user).map_err(classify)?);
            }
            let rot = estimate_rotation(&all, &symbols.data);
            derotate(&all, rot)
        }
    };
    let symbol_error = nft::relative_l2(&received, &symbols.data);
    Ok(LoopbackReport {
        symbol_error,
        sent: symbols.data,
        received,
        achieved_power: achieved,
    })
}
