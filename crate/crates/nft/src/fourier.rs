//! Discrete Fourier and Hilbert transforms.
//!
//! The Fourier pair used throughout is the rectangle-rule approximation of
//!
//! ```text
//!   Q(f) = integral q(t) exp(-2 pi j f t) dt
//!   q(t) = integral Q(f) exp(+2 pi j f t) df
//! ```
//!
//! on matched meshes: a time grid of `n` samples with spacing `step` maps to
//! the centered frequency mesh `f[m] = (m - n/2) / (n * step)`. With these
//! scalings the discrete pair is exactly unitary: the round trip is the
//! identity and `sum |Q|^2 df = sum |q|^2 dt` holds to rounding.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{SpectralGrid, SpectralSignal, TimeGrid, TimeSignal};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized in-place FFT, kernel `exp(-2 pi j n m / N)`.
pub(crate) fn fft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// Unnormalized in-place inverse FFT, kernel `exp(+2 pi j n m / N)`.
pub(crate) fn ifft_in_place(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Frequency of FFT bin `m` in cycles per unit, for `n` samples with spacing
/// `step`, in the natural (unshifted) bin order.
pub(crate) fn bin_frequency(m: usize, n: usize, step: f64) -> f64 {
    let m = m as isize;
    let n_i = n as isize;
    let signed = if m <= (n_i - 1) / 2 { m } else { m - n_i };
    signed as f64 / (n as f64 * step)
}

/// Centered frequency mesh matched to `grid` by the transform pair above.
pub fn frequency_mesh(grid: &TimeGrid) -> SpectralGrid {
    let n = grid.len();
    let df = 1.0 / (n as f64 * grid.step());
    let f0 = -((n / 2) as f64) * df;
    SpectralGrid::new(f0, f0 + n as f64 * df, n).expect("valid by construction")
}

/// Forward transform onto the centered frequency mesh.
pub fn fourier_transform(signal: &TimeSignal) -> SpectralSignal {
    let n = signal.grid.len();
    let step = signal.grid.step();
    let freq = frequency_mesh(&signal.grid);

    // Q[m] = step * sum_k q[k] exp(-2 pi j f[m] t[k]) with t[k] = t0 + k step
    // and f[m] = (m - n/2) df; the half-shift of the centered mesh becomes a
    // per-sample phase ramp exp(+2 pi j k (n/2) / n) folded in before the FFT.
    let half = n / 2;
    let mut buf: Vec<Complex64> = signal
        .samples
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            q * Complex64::from_polar(1.0, 2.0 * PI * (k as f64) * (half as f64) / n as f64)
        })
        .collect();
    fft_in_place(&mut buf);
    let t0 = signal.grid.start();
    let samples: Vec<Complex64> = buf
        .iter()
        .enumerate()
        .map(|(m, &v)| {
            let f = freq.at(m);
            v * step * Complex64::from_polar(1.0, -2.0 * PI * f * t0)
        })
        .collect();
    SpectralSignal {
        grid: freq,
        samples,
    }
}

/// Inverse transform back onto `time`; `time` must be the mesh the spectrum
/// was produced from (matched length and spacing).
pub fn inverse_fourier_transform(spectrum: &SpectralSignal, time: &TimeGrid) -> Result<TimeSignal> {
    let n = spectrum.grid.len();
    if time.len() != n {
        return Err(Error::GridMismatch(format!(
            "spectrum has {} bins, time grid {} samples",
            n,
            time.len()
        )));
    }
    let df = spectrum.grid.step();
    if ((df * time.step() * n as f64) - 1.0).abs() > 1e-9 {
        return Err(Error::GridMismatch(
            "frequency spacing is not the reciprocal of the time span".into(),
        ));
    }
    let t0 = time.start();
    // q[k] = df * sum_m Q[m] exp(+2 pi j f[m] t[k])
    let mut buf: Vec<Complex64> = spectrum
        .samples
        .iter()
        .enumerate()
        .map(|(m, &v)| {
            let f = spectrum.grid.at(m);
            v * Complex64::from_polar(1.0, 2.0 * PI * f * t0)
        })
        .collect();
    ifft_in_place(&mut buf);
    let half = n / 2;
    let samples: Vec<Complex64> = buf
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let phase = -2.0 * PI * (k as f64) * (half as f64) / n as f64;
            v * df * Complex64::from_polar(1.0, phase)
        })
        .collect();
    TimeSignal::new(*time, samples)
}

/// Multiplier table for the Hilbert transform: `-j` on positive bins, `+j`
/// on negative bins, zero at DC and Nyquist.
fn apply_hilbert_multiplier(buf: &mut [Complex64]) {
    let n = buf.len();
    buf[0] = Complex64::default();
    let half = n / 2;
    for (m, v) in buf.iter_mut().enumerate().skip(1) {
        if n.is_multiple_of(2) && m == half {
            *v = Complex64::default();
        } else if m < half || (!n.is_multiple_of(2) && m == half) {
            *v *= Complex64::new(0.0, -1.0);
        } else {
            *v *= Complex64::new(0.0, 1.0);
        }
    }
}

/// Circular Hilbert transform on the sample's own period (no padding).
///
/// Exact for functions that are genuinely periodic on the mesh, e.g. the
/// log-magnitude of polynomial scattering coefficients.
pub(crate) fn hilbert_circular(samples: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut buf);
    apply_hilbert_multiplier(&mut buf);
    ifft_in_place(&mut buf);
    let scale = 1.0 / samples.len() as f64;
    buf.iter().map(|z| z.re * scale).collect()
}

/// Discrete Hilbert transform of a real, decaying signal on a uniform mesh.
///
/// Implemented in the discrete Fourier domain with 4x zero padding so the
/// circular wrap-around of the slowly decaying kernel stays below the
/// quadrature error. The sign convention pairs with the phase retrieval in
/// the inverse scattering module: for `f = 1/(1 + x^2)` the transform is
/// `+x/(1 + x^2)`, and `H(H(f)) = -f` up to the removed DC component.
pub fn hilbert_transform(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InvalidGrid("empty input".into()));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::ContractViolation("non-finite sample".into()));
    }
    let n = samples.len();
    let padded = (4 * n).next_power_of_two();
    let mut buf = vec![Complex64::default(); padded];
    for (b, &x) in buf.iter_mut().zip(samples) {
        *b = Complex64::new(x, 0.0);
    }
    fft_in_place(&mut buf);
    apply_hilbert_multiplier(&mut buf);
    ifft_in_place(&mut buf);
    let scale = 1.0 / padded as f64;
    Ok(buf[..n].iter().map(|z| z.re * scale).collect())
}
