//! Inverse scattering: recover the time signal from its spectral amplitude.
//!
//! In the defocusing regime `a(lambda)` is zero-free in the closed upper
//! half-plane, so it is the minimum-phase (outer) function determined by its
//! modulus: `|a|` follows from the unimodularity relation and the phase from
//! a Hilbert transform of `log |a|`. With `a` and `b = qhat * a` in hand, the
//! signal is peeled off cell by cell, either on polynomial coefficients
//! (discrete layer peeling, exact in coefficient space) or per-frequency
//! (continuous layer peeling).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{fft_in_place, hilbert_circular, ifft_in_place};
use crate::grid::{SpectralGrid, SpectralSignal, TimeGrid, TimeSignal};
use crate::zs::types::{CellPropagator, CoefficientPolynomials, Regime, ScatteringData};

/// Global sign relating the retrieved phase to the Hilbert transform of the
/// log-magnitude, fixed once by the calibration test against the forward
/// transform (`calibration_pins_phase_sign`).
pub const PHASE_RETRIEVAL_SIGN: f64 = 1.0;

/// `|a| = (1 - s |qhat|^2)^(-1/2)` from unimodularity.
pub fn magnitude_a(qhat: &[Complex64], regime: Regime) -> Result<Vec<f64>> {
    let s = regime.sign();
    qhat.iter()
        .enumerate()
        .map(|(m, qh)| {
            let arg = 1.0 - s * qh.norm_sqr();
            if arg <= 0.0 {
                return Err(Error::Domain {
                    what: format!("|qhat| = {:.6} >= 1 in the defocusing regime", qh.norm()),
                    index: m,
                });
            }
            Ok(1.0 / arg.sqrt())
        })
        .collect()
}

/// Phase of `a` from its magnitude by minimum-phase retrieval.
///
/// The samples are treated as one period of the mesh, which is exact for
/// polynomial scattering coefficients on their canonical mesh; `log |a|` then
/// has a one-sided coefficient series and the circular Hilbert transform
/// recovers the phase without wrap-around error.
pub fn phase_a(magnitude: &[f64]) -> Result<Vec<f64>> {
    for (m, &v) in magnitude.iter().enumerate() {
        if !v.is_finite() || v < 1.0 - 1e-9 {
            return Err(Error::Domain {
                what: format!("|a| = {v:.9} < 1; log a is not outer"),
                index: m,
            });
        }
    }
    let log_mag: Vec<f64> = magnitude.iter().map(|&v| v.max(1.0).ln()).collect();
    let mut phase = hilbert_circular(&log_mag);
    if PHASE_RETRIEVAL_SIGN < 0.0 {
        for p in &mut phase {
            *p = -*p;
        }
    }
    Ok(phase)
}

/// Rebuild the full scattering pair from the spectral amplitude alone:
/// `a = |a| exp(j angle(a))`, `b = qhat * a`. Unimodularity holds by
/// construction. Defocusing only.
pub fn ab_from_qhat(qhat: &SpectralSignal, regime: Regime) -> Result<ScatteringData> {
    if regime != Regime::Defocusing {
        return Err(Error::Unsupported(
            "phase retrieval requires the defocusing regime".into(),
        ));
    }
    let mag = magnitude_a(&qhat.samples, regime)?;
    let phase = phase_a(&mag)?;
    let a: Vec<Complex64> = mag
        .iter()
        .zip(&phase)
        .map(|(&m, &p)| Complex64::from_polar(m, p))
        .collect();
    let b: Vec<Complex64> = qhat
        .samples
        .iter()
        .zip(&a)
        .map(|(qh, av)| qh * av)
        .collect();
    ScatteringData::new(qhat.grid, a, b, regime)
}

/// Fourier coefficients of a periodic function sampled on one full period:
/// `coef[m] = exp(-2 j L1 step m) / M * DFT(samples)[m]`.
pub(crate) fn polynomial_coefficients(
    samples: &[Complex64],
    grid: &SpectralGrid,
    step: f64,
) -> Vec<Complex64> {
    let m_len = samples.len();
    let mut buf = samples.to_vec();
    fft_in_place(&mut buf);
    buf.iter()
        .enumerate()
        .map(|(m, &v)| {
            v * Complex64::from_polar(1.0, -2.0 * grid.start() * step * m as f64) / m_len as f64
        })
        .collect()
}

/// Diagnostics accumulated by an inverse run.
#[derive(Debug, Clone, Copy, Default)]
pub struct InversionReport {
    /// Largest drift of the unimodularity invariant observed during the
    /// peeling (lag-0 coefficient identity for the discrete variant, excess
    /// of `|qhat|` over the unit disk for the continuous one).
    pub invariant_drift: f64,
    /// Set when the drift exceeds 1e-6: the accumulated map has moved off
    /// its conservation law and the recovery is ill-conditioned.
    pub conditioning_warning: bool,
}

impl InversionReport {
    fn record(&mut self, drift: f64) {
        if drift > self.invariant_drift {
            self.invariant_drift = drift;
        }
        if drift > 1e-6 {
            self.conditioning_warning = true;
        }
    }
}

fn check_canonical(scattering: &ScatteringData, time: &TimeGrid) -> Result<()> {
    let period = std::f64::consts::PI / time.step();
    if (scattering.grid.span() - period).abs() > 1e-6 * period {
        return Err(Error::GridMismatch(format!(
            "spectral mesh spans {:.6} but the {}-cell time grid requires one full period {:.6}",
            scattering.grid.span(),
            time.len(),
            period
        )));
    }
    if scattering.grid.len() < time.len() {
        return Err(Error::GridMismatch(format!(
            "{} spectral samples cannot carry {} cells",
            scattering.grid.len(),
            time.len()
        )));
    }
    Ok(())
}

/// Discrete layer peeling: recover the time samples from scattering data on
/// the canonical (one-period) spectral mesh.
///
/// The coefficient vectors of `A[N] = a` and `B[N] = exp(2 j lambda (t_end -
/// step/2)) b` are extracted by DFT; then for each cell, from last to first,
///
/// ```text
///   Q*[k] = s B_0 / A_0,   q[k] = Q[k] / step
///   A <- c_k (A - Q[k] B)
///   B <- c_k shift(-s Q*[k] A + B)        (shift = drop the zero constant term)
/// ```
pub fn dlp_inverse(
    scattering: &ScatteringData,
    time: &TimeGrid,
) -> Result<(TimeSignal, InversionReport)> {
    check_canonical(scattering, time)?;
    let s = scattering.regime.sign();
    let n = time.len();
    let eps = time.step();
    let grid = &scattering.grid;

    let mut a = polynomial_coefficients(&scattering.a, grid, eps);
    let b_samples: Vec<Complex64> = scattering
        .b
        .iter()
        .zip(grid.positions())
        .map(|(&bv, lambda)| {
            bv * Complex64::from_polar(1.0, 2.0 * lambda * (time.end() - eps / 2.0))
        })
        .collect();
    let mut b = polynomial_coefficients(&b_samples, grid, eps);

    let m_len = a.len();
    let mut samples = vec![Complex64::default(); n];
    let mut report = InversionReport::default();
    let check_every = (n / 16).max(1);

    for k in (0..n).rev() {
        let a0 = a[0];
        if !a0.is_finite() || a0.norm() < 1e-150 {
            return Err(Error::SingularRecovery { cell: k });
        }
        let q_step = (s * b[0] / a0).conj();
        let mag2 = q_step.norm_sqr();
        if !mag2.is_finite() || (scattering.regime == Regime::Defocusing && mag2 >= 1.0) {
            return Err(Error::Applicability(format!(
                "recovered |step * q| = {:.4} at cell {k}",
                mag2.sqrt()
            )));
        }
        samples[k] = q_step / eps;
        let c = 1.0 / (1.0 - s * mag2).sqrt();
        let neg_sqc = -s * q_step.conj();
        for i in 0..m_len - 1 {
            let ai = a[i];
            a[i] = c * (ai - q_step * b[i]);
            b[i] = c * (neg_sqc * a[i + 1] + b[i + 1]);
        }
        let a_top = a[m_len - 1];
        a[m_len - 1] = c * (a_top - q_step * b[m_len - 1]);
        b[m_len - 1] = Complex64::default();

        if k % check_every == 0 {
            let lag0: f64 = a.iter().map(|v| v.norm_sqr()).sum::<f64>()
                - s * b.iter().map(|v| v.norm_sqr()).sum::<f64>();
            report.record((lag0 - 1.0).abs());
        }
        if a[0].norm() > 1e30 {
            return Err(Error::Applicability(format!(
                "coefficient overflow while peeling cell {k}"
            )));
        }
    }

    Ok((TimeSignal::new(*time, samples)?, report))
}

/// Alternate recovery of the last folded cell from the top-degree
/// coefficients: `Q = A_top / B_top` with `top = cells - 1`. Used as a
/// consistency check against the constant-term recovery.
pub fn q_recovery_alternate(poly: &CoefficientPolynomials) -> Result<Complex64> {
    if poly.cells == 0 {
        return Err(Error::SingularRecovery { cell: 0 });
    }
    let top = poly.cells - 1;
    if top >= poly.a.len() {
        return Err(Error::GridMismatch(
            "coefficient vectors shorter than the cell count".into(),
        ));
    }
    let denom = poly.b[top];
    if denom.norm() < 1e-150 || !denom.is_finite() {
        return Err(Error::SingularRecovery { cell: top });
    }
    Ok(poly.a[top] / denom)
}

/// Continuous layer peeling run backwards: at each cell the signal sample is
/// read from the reconstruction integral
///
/// ```text
///   q*[k] = (2 s / pi) integral qhat[k](lambda) exp(2 j lambda t_right) d lambda
/// ```
///
/// (the factor 2 averages the jump of the truncated signal at `t_right`),
/// then the cell is stripped from the ratio by the inverse Moebius update.
/// Accumulated mesh-truncation error makes this variant diverge for large
/// amplitudes; `divergence_bound` aborts the run when the recovered
/// amplitude passes it.
pub fn clp_inverse(
    scattering: &ScatteringData,
    time: &TimeGrid,
    divergence_bound: f64,
) -> Result<(TimeSignal, InversionReport)> {
    let s = scattering.regime.sign();
    let n = time.len();
    let eps = time.step();
    let grid = &scattering.grid;
    let mu = grid.step();
    let scale = 2.0 * s / std::f64::consts::PI * mu;

    let mut qhat = scattering.qhat.clone();
    // phase[m] = exp(2 j lambda t_right), stepped down one cell at a time
    let mut phase: Vec<Complex64> = grid
        .positions()
        .map(|l| Complex64::from_polar(1.0, 2.0 * l * time.end()))
        .collect();
    let rot: Vec<Complex64> = grid
        .positions()
        .map(|l| Complex64::from_polar(1.0, -2.0 * l * eps))
        .collect();

    let mut samples = vec![Complex64::default(); n];
    let mut report = InversionReport::default();

    for k in (0..n).rev() {
        let mut acc = Complex64::default();
        for (qh, ph) in qhat.iter().zip(&phase) {
            acc += qh * ph;
        }
        let q_k = (acc * scale).conj();
        if !q_k.is_finite() || q_k.norm() > divergence_bound {
            return Err(Error::Divergence {
                cell: k,
                amplitude: q_k.norm(),
            });
        }
        samples[k] = q_k;

        let t_left = time.at(k);
        let mut drift = 0.0f64;
        for (qh, l) in qhat.iter_mut().zip(grid.positions()) {
            let cell = CellPropagator::new(q_k, l, t_left, eps, scattering.regime);
            *qh = cell
                .invert_ratio(*qh)
                .map_err(|_| Error::SingularUpdate { cell: k })?;
            if scattering.regime == Regime::Defocusing {
                drift = drift.max(qh.norm() - 1.0);
            }
        }
        report.record(drift.max(0.0));
        for (ph, r) in phase.iter_mut().zip(&rot) {
            *ph *= r;
        }
    }

    Ok((TimeSignal::new(*time, samples)?, report))
}

/// Max deviation of the coefficient-space unimodularity identity
/// `A (*) flip(A*) - s B (*) flip(B*) = delta[m]`, i.e. the autocorrelation
/// of `A` minus `s` times the autocorrelation of `B` must be the unit
/// impulse. Diagnostic; exact in exact arithmetic for forward outputs.
pub fn check_discrete_unimodularity(poly: &CoefficientPolynomials) -> f64 {
    let m_len = poly.a.len();
    let padded = (2 * m_len).next_power_of_two();
    let s = poly.regime.sign();
    let spectrum = |coef: &[Complex64]| -> Vec<f64> {
        let mut buf = vec![Complex64::default(); padded];
        buf[..m_len].copy_from_slice(coef);
        fft_in_place(&mut buf);
        buf.iter().map(|v| v.norm_sqr()).collect()
    };
    let pa = spectrum(&poly.a);
    let pb = spectrum(&poly.b);
    let mut corr: Vec<Complex64> = pa
        .iter()
        .zip(&pb)
        .map(|(&x, &y)| Complex64::new(x - s * y, 0.0))
        .collect();
    ifft_in_place(&mut corr);
    corr.iter()
        .enumerate()
        .map(|(d, v)| {
            let want = if d == 0 { padded as f64 } else { 0.0 };
            (v - want).norm() / padded as f64
        })
        .fold(0.0, f64::max)
}
