//! Multi-user transceiver multiplexing in the nonlinear spectrum.
//!
//! The transmit chain maps a symbol matrix onto a bandlimited envelope in a
//! generalized time `tau`, Fourier-transforms it into the spectral envelope
//! `U`, compresses `U` into the unit disk by
//!
//! ```text
//!   qhat = (1 - exp(-|U|^2))^(1/2) exp(j angle U)
//! ```
//!
//! and synthesizes the time signal by inverse scattering. The receive chain
//! is the reverse: forward scattering, deterministic channel inversion, the
//! disk-to-plane map, and projection onto the basis spectra. The disk map
//! makes the symbol energy, the spectral-domain energy and the time-domain
//! energy coincide.
//!
//! Grid plan: a time grid of `n` samples over `span` pairs with the
//! canonical spectral mesh of `m >= n` nodes spanning one full period
//! `pi / step`; the generalized-time mesh is the Fourier dual of that
//! spectral mesh (it covers twice the time span, matching `tau ~ 2t` at low
//! power).

use num_complex::Complex64;

use crate::channel::nft_channel_filter;
use crate::error::{Error, Result};
use crate::fourier::{fourier_transform, frequency_mesh, inverse_fourier_transform};
use crate::grid::{SpectralGrid, SpectralSignal, TimeGrid, TimeSignal};
use crate::pulse::PulseBank;
use crate::zs::{ab_from_qhat, al_forward, dlp_inverse, evaluate_polynomials, Regime};

/// Complex symbols for `n_users x n_symbols` degrees of freedom, row-major
/// by user.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub data: Vec<Complex64>,
    pub n_users: usize,
    pub n_symbols: usize,
}

impl SymbolMatrix {
    pub fn new(data: Vec<Complex64>, n_users: usize, n_symbols: usize) -> Result<Self> {
        if data.len() != n_users * n_symbols {
            return Err(Error::Validation(format!(
                "{} symbols for {n_users} x {n_symbols}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            n_users,
            n_symbols,
        })
    }

    pub fn zeros(n_users: usize, n_symbols: usize) -> Self {
        Self {
            data: vec![Complex64::default(); n_users * n_symbols],
            n_users,
            n_symbols,
        }
    }

    /// Signed user index range `(-floor(n/2), ceil(n/2)-1)`.
    pub fn user_range(&self) -> (isize, isize) {
        let n = self.n_users as isize;
        (-(n / 2), (n + 1) / 2 - 1)
    }

    /// Signed symbol index range, same convention as users.
    pub fn symbol_range(&self) -> (isize, isize) {
        let n = self.n_symbols as isize;
        (-(n / 2), (n + 1) / 2 - 1)
    }

    pub fn get(&self, user_row: usize, symbol: usize) -> Complex64 {
        self.data[user_row * self.n_symbols + symbol]
    }

    pub fn total_energy(&self) -> f64 {
        self.data.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Relative recovery error `||other - self|| / ||self||`.
    pub fn relative_error(&self, other: &SymbolMatrix) -> f64 {
        crate::grid::relative_l2(&other.data, &self.data)
    }
}

/// Matched grids and basis for one NFDM configuration.
#[derive(Debug, Clone)]
pub struct NfdmPlan {
    /// Physical-time mesh the transmitted signal lives on.
    pub time: TimeGrid,
    /// Canonical spectral mesh (angular), one full period of the discrete
    /// scattering coefficients.
    pub lambda: SpectralGrid,
    /// The same mesh in ordinary generalized frequency (`lambda / 2 pi`).
    pub ell: SpectralGrid,
    /// Generalized-time mesh, Fourier dual of `ell`.
    pub tau: TimeGrid,
    /// Root-raised-cosine bank on the `tau` mesh.
    pub bank: PulseBank,
    /// Basis spectra on `ell`: `F(waveform)/sqrt(2)`, row-major by user.
    basis_spectra: Vec<Vec<Complex64>>,
}

impl NfdmPlan {
    pub fn new(
        n_time: usize,
        time_span: f64,
        n_spectral: usize,
        n_users: usize,
        n_symbols: usize,
        rolloff: f64,
        band_spacing: f64,
    ) -> Result<Self> {
        if n_spectral < n_time {
            return Err(Error::Validation(format!(
                "spectral size {n_spectral} must be at least the time size {n_time}"
            )));
        }
        let time = TimeGrid::new(-time_span / 2.0, time_span / 2.0, n_time)?;
        let eps = time.step();
        let tau_span = 2.0 * eps * n_spectral as f64;
        let tau = TimeGrid::new(-tau_span / 2.0, tau_span / 2.0, n_spectral)?;
        let ell = frequency_mesh(&tau);
        let lambda = ell.scaled(2.0 * std::f64::consts::PI);

        // simulation band at least 4x the occupied nonlinear band
        let occupied = n_users as f64 * band_spacing;
        if occupied * 4.0 > ell.span() {
            return Err(Error::Validation(format!(
                "occupied band {occupied:.3} needs 4x oversampling; mesh spans only {:.3}",
                ell.span()
            )));
        }

        let bank = PulseBank::new(tau, n_users, n_symbols, rolloff, band_spacing)?;
        let (u1, u2) = bank.user_range();
        let mut basis_spectra = Vec::with_capacity(n_users * n_symbols);
        let root2 = std::f64::consts::SQRT_2;
        for user in u1..=u2 {
            for l in 0..n_symbols {
                let w = TimeSignal::new(tau, bank.waveform(user, l))?;
                let spec = fourier_transform(&w);
                basis_spectra.push(spec.samples.iter().map(|v| v / root2).collect());
            }
        }

        Ok(NfdmPlan {
            time,
            lambda,
            ell,
            tau,
            bank,
            basis_spectra,
        })
    }
}

/// Synthesize the generalized-time envelope `u(tau)` from the symbol matrix.
/// The bank waveforms are normalized so that `energy(u)` equals the total
/// symbol energy.
pub fn build_u(symbols: &SymbolMatrix, plan: &NfdmPlan) -> Result<TimeSignal> {
    if symbols.n_users != plan.bank.n_users || symbols.n_symbols != plan.bank.n_symbols {
        return Err(Error::Validation(
            "symbol matrix does not match the plan".into(),
        ));
    }
    plan.bank.synthesize(&symbols.data, 1.0)
}

/// Spectral envelope `U = F(u) / sqrt(2)` on the generalized-frequency mesh.
pub fn waveform_to_spectrum(u: &TimeSignal) -> SpectralSignal {
    let mut spec = fourier_transform(u);
    let root2 = std::f64::consts::SQRT_2;
    for v in &mut spec.samples {
        *v /= root2;
    }
    spec
}

/// Inverse of [`waveform_to_spectrum`].
pub fn spectrum_to_waveform(spectrum: &SpectralSignal, tau: &TimeGrid) -> Result<TimeSignal> {
    let scaled = SpectralSignal::new(
        spectrum.grid,
        spectrum
            .samples
            .iter()
            .map(|v| v * std::f64::consts::SQRT_2)
            .collect(),
    )?;
    inverse_fourier_transform(&scaled, tau)
}

/// Disk map `qhat = (1 - exp(-|U|^2))^(1/2) exp(j angle U)`, relabeling the
/// mesh to angular frequency. `|qhat| < 1` always.
pub fn qhat_from_spectrum(spectrum: &SpectralSignal) -> SpectralSignal {
    let samples: Vec<Complex64> = spectrum
        .samples
        .iter()
        .map(|u| {
            let p = u.norm_sqr();
            if p == 0.0 {
                Complex64::default()
            } else {
                let mag = (1.0 - (-p).exp()).sqrt();
                u * (mag / p.sqrt())
            }
        })
        .collect();
    SpectralSignal {
        grid: spectrum.grid.scaled(2.0 * std::f64::consts::PI),
        samples,
    }
}

/// Plane map `|U| = (-log(1 - |qhat|^2))^(1/2)` with the phase kept; exact
/// inverse of [`qhat_from_spectrum`]. Rejects `|qhat| >= 1`.
pub fn spectrum_from_qhat(qhat: &SpectralSignal) -> Result<SpectralSignal> {
    let samples: Vec<Complex64> = qhat
        .samples
        .iter()
        .enumerate()
        .map(|(m, qh)| {
            let p = qh.norm_sqr();
            if p >= 1.0 {
                return Err(Error::Domain {
                    what: format!("|qhat| = {:.6} >= 1", p.sqrt()),
                    index: m,
                });
            }
            if p == 0.0 {
                return Ok(Complex64::default());
            }
            let mag = (-(1.0 - p).ln()).sqrt();
            Ok(qh * (mag / p.sqrt()))
        })
        .collect::<Result<_>>()?;
    Ok(SpectralSignal {
        grid: qhat.grid.scaled(1.0 / (2.0 * std::f64::consts::PI)),
        samples,
    })
}

/// Full transmit chain: symbols -> `u` -> `U` -> `qhat` -> inverse
/// scattering -> `q(t, 0)`.
pub fn nfdm_transmit(
    symbols: &SymbolMatrix,
    plan: &NfdmPlan,
    regime: Regime,
) -> Result<TimeSignal> {
    if regime != Regime::Defocusing {
        return Err(Error::Unsupported(
            "nonlinear multiplexing is implemented for the defocusing regime".into(),
        ));
    }
    let u = build_u(symbols, plan)?;
    let spectrum = waveform_to_spectrum(&u);
    let peak = spectrum.max_abs();
    if (-peak * peak).exp() < 2e-12 {
        return Err(Error::PeakPower(format!(
            "peak |U| = {peak:.3} drives 1 - |qhat| below 1e-12; reduce the peak-to-average ratio"
        )));
    }
    let qhat = qhat_from_spectrum(&spectrum);
    let scattering = ab_from_qhat(&qhat, regime)?;
    let (q, _report) = dlp_inverse(&scattering, &plan.time)?;
    Ok(q)
}

/// Full receive chain: forward scattering, channel inversion over
/// `distance`, the plane map, and projection onto the basis spectra.
///
/// Out-of-band content needs no pre-filtering; the projection discards it.
pub fn nfdm_receive(
    received: &TimeSignal,
    plan: &NfdmPlan,
    distance: f64,
    regime: Regime,
) -> Result<SymbolMatrix> {
    if regime != Regime::Defocusing {
        return Err(Error::Unsupported(
            "nonlinear multiplexing is implemented for the defocusing regime".into(),
        ));
    }
    let poly = al_forward(received, plan.lambda.len(), regime)?;
    let scattering = evaluate_polynomials(&poly, &plan.lambda)?;
    let inverted = nft_channel_filter(&scattering, -distance);
    let qhat = SpectralSignal::new(plan.lambda, inverted.qhat)?;
    let spectrum = spectrum_from_qhat(&qhat)?;

    let df = plan.ell.step();
    let data: Vec<Complex64> = plan
        .basis_spectra
        .iter()
        .map(|phi| {
            let mut acc = Complex64::default();
            for (u, p) in spectrum.samples.iter().zip(phi) {
                acc += u * p.conj();
            }
            acc * 2.0 * df
        })
        .collect();
    SymbolMatrix::new(data, plan.bank.n_users, plan.bank.n_symbols)
}
