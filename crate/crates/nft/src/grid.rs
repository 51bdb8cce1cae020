//! Uniform sampling meshes in time and generalized frequency, and the
//! sampled-signal container shared by every other module.
//!
//! A [`TimeGrid`] holds `len` samples at `t[k] = start + k * step`; sample `k`
//! represents the signal on the cell `[t[k], t[k] + step)`, so the grid spans
//! `[start, end)` with `step = (end - start) / len`. A [`SpectralGrid`] is the
//! same construction on a generalized-frequency axis. All quantities are in
//! normalized (dimensionless) units; physical-unit conversion lives in the
//! experiment CLI.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform time mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    len: usize,
}

impl TimeGrid {
    /// Build a mesh of `len` samples covering `[start, end)`.
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if end <= start || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "time span [{start}, {end}] is not positive"
            )));
        }
        if len == 0 {
            return Err(Error::InvalidGrid("zero samples".into()));
        }
        Ok(Self { start, end, len })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        self.end - self.start
    }

    /// Sample spacing `step = span / len`.
    pub fn step(&self) -> f64 {
        self.span() / self.len as f64
    }

    /// Position of sample `k`.
    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.at(k))
    }
}

/// Uniform generalized-frequency mesh.
///
/// The same container serves ordinary Fourier frequency (cycles per unit
/// time) and the angular spectral parameter of the scattering transform;
/// which one is in play is fixed by the operation that produced the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    start: f64,
    end: f64,
    len: usize,
}

impl SpectralGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if end <= start || !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "spectral span [{start}, {end}] is not positive"
            )));
        }
        if len == 0 {
            return Err(Error::InvalidGrid("zero samples".into()));
        }
        Ok(Self { start, end, len })
    }

    /// Centered mesh matching the spectral periodicity of a discretized
    /// scattering problem on `time`: span `pi / step` with `len` samples.
    ///
    /// Polynomial scattering coefficients are periodic with exactly this
    /// period, so coefficient extraction by DFT is exact on this mesh.
    pub fn nft_canonical(time: &TimeGrid, len: usize) -> Result<Self> {
        let period = std::f64::consts::PI / time.step();
        Self::new(-period / 2.0, period / 2.0, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> f64 {
        self.end - self.start
    }

    pub fn step(&self) -> f64 {
        self.span() / self.len as f64
    }

    pub fn at(&self, m: usize) -> f64 {
        self.start + m as f64 * self.step()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |m| self.at(m))
    }

    /// Grid with every node scaled by `factor` (e.g. angular <-> ordinary
    /// frequency relabeling).
    pub fn scaled(&self, factor: f64) -> SpectralGrid {
        if factor >= 0.0 {
            SpectralGrid {
                start: self.start * factor,
                end: self.end * factor,
                len: self.len,
            }
        } else {
            SpectralGrid {
                start: self.end * factor,
                end: self.start * factor,
                len: self.len,
            }
        }
    }
}

/// Complex samples attached to a time mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub grid: TimeGrid,
    pub samples: Vec<Complex64>,
}

/// Complex samples attached to a spectral mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSignal {
    pub grid: SpectralGrid,
    pub samples: Vec<Complex64>,
}

fn check_samples(n: usize, samples: &[Complex64]) -> Result<()> {
    if samples.len() != n {
        return Err(Error::GridMismatch(format!(
            "{} samples on a {}-point grid",
            samples.len(),
            n
        )));
    }
    if let Some(k) = samples
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::NumericFailure(format!(
            "non-finite sample at index {k}"
        )));
    }
    Ok(())
}

impl TimeSignal {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        check_samples(grid.len(), &samples)?;
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        let samples = vec![Complex64::default(); grid.len()];
        Self { grid, samples }
    }

    /// Sample the function `f` on `grid`.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.positions().map(f).collect();
        Self { grid, samples }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl SpectralSignal {
    pub fn new(grid: SpectralGrid, samples: Vec<Complex64>) -> Result<Self> {
        check_samples(grid.len(), &samples)?;
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        let samples = vec![Complex64::default(); grid.len()];
        Self { grid, samples }
    }

    pub fn from_fn(grid: SpectralGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.positions().map(f).collect();
        Self { grid, samples }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Relative L2 distance `||a - b|| / ||b||`.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
