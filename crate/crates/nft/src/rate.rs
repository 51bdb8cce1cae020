//! Achievable-rate estimation: ring constellations, Monte-Carlo transition
//! histograms over polar output bins, power-constrained Blahut-Arimoto
//! mutual information, the additive-Gaussian baseline, and the
//! time-bandwidth normalization factor.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeSignal;
use crate::measure::{bandwidth_99, duration_99};

/// Multi-ring constellation: `n_rings` uniformly spaced radii in
/// `[r_min, r_max]` times `n_phases` uniformly spaced phases.
#[derive(Debug, Clone)]
pub struct RingConstellation {
    pub radii: Vec<f64>,
    pub n_phases: usize,
    points: Vec<Complex64>,
}

impl RingConstellation {
    pub fn new(n_rings: usize, n_phases: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if n_rings == 0 || n_phases == 0 {
            return Err(Error::Validation(
                "need at least one ring and one phase".into(),
            ));
        }
        if r_min < 0.0 || r_min > r_max {
            return Err(Error::Validation(format!(
                "radius interval [{r_min}, {r_max}] is invalid"
            )));
        }
        let spacing = if n_rings > 1 {
            (r_max - r_min) / (n_rings - 1) as f64
        } else {
            0.0
        };
        let radii: Vec<f64> = (0..n_rings).map(|i| r_min + i as f64 * spacing).collect();
        let mut points = Vec::with_capacity(n_rings * n_phases);
        for &r in &radii {
            for m in 0..n_phases {
                let phase = std::f64::consts::TAU * m as f64 / n_phases as f64;
                points.push(Complex64::from_polar(r, phase));
            }
        }
        Ok(Self {
            radii,
            n_phases,
            points,
        })
    }

    pub fn ring_spacing(&self) -> f64 {
        if self.radii.len() > 1 {
            self.radii[1] - self.radii[0]
        } else {
            0.0
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-point average power constraint values `|x|^2`.
    pub fn powers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.norm_sqr()).collect()
    }

    /// Constellation with every radius scaled by `gain`.
    pub fn scaled(&self, gain: f64) -> RingConstellation {
        RingConstellation {
            radii: self.radii.iter().map(|r| r * gain).collect(),
            n_phases: self.n_phases,
            points: self.points.iter().map(|p| p * gain).collect(),
        }
    }
}

/// Ring radii whose disk-map energies are uniformly spaced:
/// `r_n = (1 - exp(-c (n-1)^2))^(1/2)` with `c = (spacing)^2 / 2`, so
/// `-log(1 - r_n^2) = c (n-1)^2` exactly and all radii stay below one.
pub fn geometric_radii(spacing: f64, n: usize) -> Vec<f64> {
    let c = 0.5 * spacing * spacing;
    (1..=n)
        .map(|i| {
            let k = (i - 1) as f64;
            (1.0 - (-c * k * k).exp()).sqrt()
        })
        .collect()
}

/// Polar binning of the received plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarBinning {
    pub n_radial: usize,
    pub n_phase: usize,
    pub r_max: f64,
}

impl PolarBinning {
    /// Binning scaled to the observed support, with the radial count padded
    /// by eight bins over the constellation's ring count.
    pub fn covering(samples: &[Complex64], n_rings: usize, n_phases: usize) -> Self {
        let r_obs = samples.iter().map(|y| y.norm()).fold(0.0, f64::max);
        PolarBinning {
            n_radial: n_rings + 8,
            n_phase: n_phases,
            r_max: r_obs * (1.0 + 1e-9) + f64::MIN_POSITIVE,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.n_radial * self.n_phase
    }

    pub fn bin_of(&self, y: Complex64) -> usize {
        let r = y.norm();
        let ri = ((r / self.r_max * self.n_radial as f64) as usize).min(self.n_radial - 1);
        let mut phase = y.arg();
        if phase < 0.0 {
            phase += std::f64::consts::TAU;
        }
        let pi_ =
            ((phase / std::f64::consts::TAU * self.n_phase as f64) as usize).min(self.n_phase - 1);
        ri * self.n_phase + pi_
    }

    /// Area of bin `index` (annulus sector).
    pub fn bin_area(&self, index: usize) -> f64 {
        let ri = index / self.n_phase;
        let dr = self.r_max / self.n_radial as f64;
        let (r0, r1) = (ri as f64 * dr, (ri + 1) as f64 * dr);
        std::f64::consts::PI * (r1 * r1 - r0 * r0) / self.n_phase as f64
    }
}

/// Empirical conditional histogram input symbol -> polar output bin.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionHistogram {
    pub n_inputs: usize,
    pub binning: PolarBinning,
    /// Row-major `n_inputs x n_bins` counts.
    pub counts: Vec<u64>,
    pub trials: u64,
}

impl TransitionHistogram {
    pub fn row(&self, input: usize) -> &[u64] {
        let nb = self.binning.n_bins();
        &self.counts[input * nb..(input + 1) * nb]
    }

    /// Row-normalized transition matrix, dropping output bins that were
    /// never hit (they carry no information).
    pub fn to_stochastic_matrix(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        let nb = self.binning.n_bins();
        let used: Vec<usize> = (0..nb)
            .filter(|&b| (0..self.n_inputs).any(|i| self.row(i)[b] > 0))
            .collect();
        let rows = (0..self.n_inputs)
            .map(|i| {
                let total: u64 = self.row(i).iter().sum();
                used.iter()
                    .map(|&b| self.row(i)[b] as f64 / total as f64)
                    .collect()
            })
            .collect();
        (rows, used)
    }

    /// Average conditional differential entropy estimate in bits: discrete
    /// conditional entropy corrected by the log bin areas, uniform over the
    /// inputs that were observed.
    pub fn conditional_entropy_bits(&self) -> f64 {
        let nb = self.binning.n_bins();
        let mut acc = 0.0;
        let mut rows = 0usize;
        for i in 0..self.n_inputs {
            let total: u64 = self.row(i).iter().sum();
            if total == 0 {
                continue;
            }
            rows += 1;
            for b in 0..nb {
                let c = self.row(i)[b];
                if c > 0 {
                    let p = c as f64 / total as f64;
                    acc += -p * (p / self.binning.bin_area(b)).log2();
                }
            }
        }
        if rows == 0 {
            0.0
        } else {
            acc / rows as f64
        }
    }
}

/// Accumulate `(input index, received value)` pairs into a histogram.
/// Every input in `0..n_inputs` must be observed at least once.
pub fn estimate_transitions(
    pairs: &[(usize, Complex64)],
    n_inputs: usize,
    binning: PolarBinning,
) -> Result<TransitionHistogram> {
    let nb = binning.n_bins();
    let mut counts = vec![0u64; n_inputs * nb];
    for &(input, y) in pairs {
        if input >= n_inputs {
            return Err(Error::Validation(format!(
                "input index {input} out of range {n_inputs}"
            )));
        }
        counts[input * nb + binning.bin_of(y)] += 1;
    }
    let missing: Vec<usize> = (0..n_inputs)
        .filter(|&i| counts[i * nb..(i + 1) * nb].iter().all(|&c| c == 0))
        .collect();
    if !missing.is_empty() {
        return Err(Error::EmptyInputRow(missing));
    }
    Ok(TransitionHistogram {
        n_inputs,
        binning,
        counts,
        trials: pairs.len() as u64,
    })
}

/// Result of a mutual-information maximization.
#[derive(Debug, Clone)]
pub struct RateResult {
    /// Bits per two real dimensions (one complex symbol).
    pub bits_per_2d: f64,
    pub input_distribution: Vec<f64>,
    /// Average power of the optimal distribution.
    pub mean_power: f64,
    /// Power cap that was enforced, if any.
    pub power_constraint: Option<f64>,
    pub iterations: usize,
}

fn ba_iterate(w: &[Vec<f64>], weights: &[f64], tol: f64) -> (f64, Vec<f64>, usize) {
    let k = w.len();
    let nb = w[0].len();
    let mut p = vec![1.0 / k as f64; k];
    let mut rate_prev = f64::NEG_INFINITY;
    let mut iter = 0;
    loop {
        iter += 1;
        // output distribution
        let mut qy = vec![0.0f64; nb];
        for (x, row) in w.iter().enumerate() {
            for (y, &wxy) in row.iter().enumerate() {
                qy[y] += p[x] * wxy;
            }
        }
        // per-input divergence D(W(.|x) || q)
        let mut d = vec![0.0f64; k];
        for (x, row) in w.iter().enumerate() {
            let mut acc = 0.0;
            for (y, &wxy) in row.iter().enumerate() {
                if wxy > 0.0 {
                    acc += wxy * (wxy / qy[y]).ln();
                }
            }
            d[x] = acc;
        }
        let rate: f64 = p
            .iter()
            .zip(&d)
            .map(|(&px, &dx)| if px > 0.0 { px * dx } else { 0.0 })
            .sum();

        // multiplicative update with the power-weight penalty
        let log_upd: Vec<f64> = d.iter().zip(weights).map(|(&dx, &wx)| dx - wx).collect();
        let max_log = log_upd
            .iter()
            .zip(&p)
            .filter(|(_, &px)| px > 0.0)
            .map(|(&l, _)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut p_next = vec![0.0; k];
        for x in 0..k {
            if p[x] > 0.0 {
                p_next[x] = p[x] * (log_upd[x] - max_log).exp();
                z += p_next[x];
            }
        }
        for v in &mut p_next {
            *v /= z;
        }
        p = p_next;

        if (rate - rate_prev).abs() < tol || iter >= 50_000 {
            return (rate / std::f64::consts::LN_2, p, iter);
        }
        rate_prev = rate;
    }
}

/// Blahut-Arimoto capacity of a discrete memoryless channel given by a
/// row-stochastic transition matrix, optionally under an average-power
/// constraint `sum p_x |x|^2 <= power_limit` (solved by bisection on the
/// Lagrange multiplier). Converges when the rate moves by less than 1e-9
/// bits.
pub fn blahut_arimoto(
    transitions: &[Vec<f64>],
    symbol_powers: &[f64],
    power_limit: Option<f64>,
) -> Result<RateResult> {
    let k = transitions.len();
    if k == 0 || symbol_powers.len() != k {
        return Err(Error::Validation(
            "empty channel or mismatched powers".into(),
        ));
    }
    let nb = transitions[0].len();
    for (i, row) in transitions.iter().enumerate() {
        if row.len() != nb {
            return Err(Error::NonStochastic(format!("ragged row {i}")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&v| v < 0.0) {
            return Err(Error::NonStochastic(format!("row {i} sums to {sum:.12}")));
        }
    }
    let tol = 1e-9 * std::f64::consts::LN_2; // in nats internally

    let zero_w = vec![0.0; k];
    let (rate0, p0, it0) = ba_iterate(transitions, &zero_w, tol);
    let mean_power =
        |p: &[f64]| -> f64 { p.iter().zip(symbol_powers).map(|(&px, &ex)| px * ex).sum() };
    let unconstrained_ok = match power_limit {
        None => true,
        Some(cap) => mean_power(&p0) <= cap * (1.0 + 1e-12),
    };
    if unconstrained_ok {
        return Ok(RateResult {
            bits_per_2d: rate0,
            mean_power: mean_power(&p0),
            input_distribution: p0,
            power_constraint: power_limit,
            iterations: it0,
        });
    }
    let cap = power_limit.unwrap();

    // bisection on the multiplier: larger gamma pushes power down
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let power_at = |gamma: f64| {
        let w: Vec<f64> = symbol_powers.iter().map(|&e| gamma * e).collect();
        let (r, p, it) = ba_iterate(transitions, &w, tol);
        (mean_power(&p), r, p, it)
    };
    while power_at(hi).0 > cap {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NumericFailure("power constraint unreachable".into()));
        }
    }
    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (pw, r, p, it) = power_at(mid);
        if pw > cap {
            lo = mid;
        } else {
            hi = mid;
            best = Some((r, p, it, pw));
        }
        if (hi - lo) < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    let (rate, p, iterations, pw) = best.unwrap_or_else(|| {
        let (pw, r, p, it) = power_at(hi);
        (r, p, it, pw)
    });
    Ok(RateResult {
        bits_per_2d: rate,
        input_distribution: p,
        mean_power: pw,
        power_constraint: power_limit,
        iterations,
    })
}

/// Additive-Gaussian baseline `log2(1 + P / (psd * bandwidth * distance))`
/// in bits per two real dimensions.
pub fn awgn_capacity(power: f64, noise_psd: f64, bandwidth: f64, distance: f64) -> f64 {
    (1.0 + power / (noise_psd * bandwidth * distance)).log2()
}

/// Running statistics for the time-bandwidth normalization factor.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimeBandwidthStats {
    sum_duration_in: f64,
    max_width: f64,
    count: usize,
}

impl TimeBandwidthStats {
    /// Fold in one transmitted/received signal pair.
    pub fn add(&mut self, input: &TimeSignal, output: &TimeSignal) -> Result<()> {
        let d = duration_99(input)?;
        let w_in = bandwidth_99(input)?;
        let w_out = bandwidth_99(output)?;
        self.sum_duration_in += d;
        self.max_width = self.max_width.max(w_in).max(w_out);
        self.count += 1;
        Ok(())
    }

    pub fn mean_duration(&self) -> f64 {
        self.sum_duration_in / self.count.max(1) as f64
    }

    pub fn max_bandwidth(&self) -> f64 {
        self.max_width
    }
}

/// Time-bandwidth factor
/// `alpha = mean duration(0) * max over signals of max(width(0), width(L)) / (n_users n_symbols)`:
/// the cost in Nyquist units of one complex degree of freedom.
pub fn time_bandwidth_factor(
    stats: &TimeBandwidthStats,
    n_users: usize,
    n_symbols: usize,
) -> Result<f64> {
    if stats.count == 0 {
        return Err(Error::Validation("no signals accumulated".into()));
    }
    Ok(stats.mean_duration() * stats.max_bandwidth() / (n_users * n_symbols) as f64)
}

/// Write a histogram as delimited text: a metadata header, then one
/// `input<TAB>radial<TAB>phase<TAB>count` row per nonzero bin.
pub fn write_histogram(h: &TransitionHistogram, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "# inputs={} radial={} phase={} r_max={:.17e} trials={}",
        h.n_inputs, h.binning.n_radial, h.binning.n_phase, h.binning.r_max, h.trials
    )?;
    writeln!(out, "input\tradial\tphase\tcount")?;
    let nb = h.binning.n_bins();
    for i in 0..h.n_inputs {
        for b in 0..nb {
            let c = h.counts[i * nb + b];
            if c > 0 {
                writeln!(
                    out,
                    "{i}\t{}\t{}\t{c}",
                    b / h.binning.n_phase,
                    b % h.binning.n_phase
                )?;
            }
        }
    }
    Ok(())
}

/// Read a histogram written by [`write_histogram`].
pub fn read_histogram(input: impl BufRead) -> Result<TransitionHistogram> {
    let mut meta: Option<(usize, usize, usize, f64, u64)> = None;
    let mut counts: Vec<u64> = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| Error::Validation(format!("read failure: {e}")))?;
        if let Some(rest) = line.strip_prefix('#') {
            let mut vals = std::collections::HashMap::new();
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    vals.insert(k.to_string(), v.to_string());
                }
            }
            let get = |k: &str| -> Result<f64> {
                vals.get(k)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Validation(format!("missing header field {k}")))
            };
            let (ni, nr, np) = (
                get("inputs")? as usize,
                get("radial")? as usize,
                get("phase")? as usize,
            );
            meta = Some((ni, nr, np, get("r_max")?, get("trials")? as u64));
            counts = vec![0; ni * nr * np];
        } else if !line.is_empty() && !line.starts_with("input") {
            let (ni, nr, np, _, _) =
                meta.ok_or_else(|| Error::Validation("data before header".into()))?;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::Validation(format!("bad row: {line}")));
            }
            let parse = |s: &str| -> Result<u64> {
                s.parse()
                    .map_err(|_| Error::Validation(format!("bad integer {s}")))
            };
            let (i, r, p, c) = (
                parse(cols[0])? as usize,
                parse(cols[1])? as usize,
                parse(cols[2])? as usize,
                parse(cols[3])?,
            );
            if i >= ni || r >= nr || p >= np {
                return Err(Error::Validation(format!("indices out of range: {line}")));
            }
            counts[i * nr * np + r * np + p] = c;
        }
    }
    let (ni, nr, np, r_max, trials) =
        meta.ok_or_else(|| Error::Validation("missing header".into()))?;
    Ok(TransitionHistogram {
        n_inputs: ni,
        binning: PolarBinning {
            n_radial: nr,
            n_phase: np,
            r_max,
        },
        counts,
        trials,
    })
}
