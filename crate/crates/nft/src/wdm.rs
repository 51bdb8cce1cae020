//! Linear-multiplexing baseline: users occupy disjoint Fourier bands of the
//! physical signal, the receiver drops one band, back-propagates it and
//! matched-filters. Mirrors the nonlinear transceiver so the two can be
//! compared under identical power and bandwidth constraints.

use num_complex::Complex64;

use crate::channel::{backpropagate, user_band_filter, ChannelConfig};
use crate::error::{Error, Result};
use crate::grid::TimeSignal;
use crate::nfdm::SymbolMatrix;
use crate::pulse::PulseBank;

/// Time-domain superposition `sum_{u,l} s * phi_l(t) exp(2 pi j f_u t)` with
/// per-user band `bank.band_spacing`.
pub fn wdm_transmit(symbols: &SymbolMatrix, bank: &PulseBank) -> Result<TimeSignal> {
    if symbols.n_users != bank.n_users || symbols.n_symbols != bank.n_symbols {
        return Err(Error::Validation(
            "symbol matrix does not match the bank".into(),
        ));
    }
    bank.synthesize(&symbols.data, 1.0)
}

/// Receive one user: ideal add-drop band filter, digital back-propagation of
/// the dropped band, matched filter. Returns that user's raw symbol
/// estimates (no de-rotation applied).
pub fn wdm_receive(
    received: &TimeSignal,
    cfg: &ChannelConfig,
    bank: &PulseBank,
    user: isize,
) -> Result<Vec<Complex64>> {
    let (u1, u2) = bank.user_range();
    if user < u1 || user > u2 {
        return Err(Error::Validation(format!(
            "user {user} outside [{u1}, {u2}]"
        )));
    }
    let center = bank.user_center(user);
    let dropped = user_band_filter(received, center, bank.band_spacing)?;
    let equalized = backpropagate(&dropped, cfg)?;
    let all = bank.project(&equalized, 1.0)?;
    let row = (user - u1) as usize;
    Ok(all[row * bank.n_symbols..(row + 1) * bank.n_symbols].to_vec())
}

/// Mean phase rotation of received symbols against a reference, weighted by
/// reference magnitude.
pub fn estimate_rotation(received: &[Complex64], reference: &[Complex64]) -> f64 {
    let acc: Complex64 = received
        .iter()
        .zip(reference)
        .map(|(r, s)| r * s.conj())
        .sum();
    acc.arg()
}

/// Remove a common phase rotation before symbol decisions.
pub fn derotate(symbols: &[Complex64], angle: f64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, -angle);
    symbols.iter().map(|s| s * rot).collect()
}
