use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

/// Sign of the nonlinearity in `j q_z = q_tt - 2 s |q|^2 q`.
///
/// In the defocusing regime (`s = +1`) the scattering operator is
/// self-adjoint: the spectrum is purely continuous and real, `|a| >= 1` on
/// the real line and `|b/a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Defocusing,
    Focusing,
}

impl Regime {
    pub fn sign(self) -> f64 {
        match self {
            Regime::Defocusing => 1.0,
            Regime::Focusing => -1.0,
        }
    }
}

/// Default cap on the coefficient growth exponent; beyond it the polynomial
/// recursions manipulate numbers around `exp(25)` and accuracy degrades.
pub const DEFAULT_P_MAX: f64 = 25.0;

/// Threshold below which a per-cell step amplitude `|step * q|` is considered
/// small enough that the inverse recursion is well conditioned.
pub const WELL_CONDITIONED_LIMIT: f64 = 0.1;

/// Exact transfer matrix of one constant-amplitude cell `[t_left, t_left+step)`
/// acting on the normalized eigenvector `u = (a, b)`:
///
/// ```text
///   u(t_left + step) = [ x   y_bar ] u(t_left)
///                      [ y   x_bar ]
/// ```
///
/// With `delta^2 = lambda^2 - s |q|^2` the entries are
///
/// ```text
///   x     = exp( j lambda step) (cos(delta step) - j lambda sin(delta step)/delta)
///   x_bar = exp(-j lambda step) (cos(delta step) + j lambda sin(delta step)/delta)
///   y     = s q* sin(delta step)/delta * exp(-j lambda (t_left + t_right))
///   y_bar =   q  sin(delta step)/delta * exp(+j lambda (t_left + t_right))
/// ```
///
/// `sin(delta step)/delta` and `cos(delta step)` are even in `delta`, so the
/// branch of the square root is immaterial; for `delta^2 < 0` they continue
/// to `sinh`/`cosh` and at `delta = 0` to their limits. `det = 1` identically
/// and `y_bar = s y*` on the real line.
#[derive(Debug, Clone, Copy)]
pub struct CellPropagator {
    pub x: Complex64,
    pub x_bar: Complex64,
    pub y: Complex64,
    pub y_bar: Complex64,
    pub delta_sq: f64,
}

/// cos(delta*step) and sin(delta*step)/delta as functions of delta^2.
pub(crate) fn cell_trig(delta_sq: f64, step: f64) -> (f64, f64) {
    let w = delta_sq * step * step;
    if w.abs() < 1e-6 {
        let c = 1.0 - w / 2.0 + w * w / 24.0;
        let s = step * (1.0 - w / 6.0 + w * w / 120.0);
        (c, s)
    } else if delta_sq > 0.0 {
        let d = delta_sq.sqrt();
        ((d * step).cos(), (d * step).sin() / d)
    } else {
        let g = (-delta_sq).sqrt();
        ((g * step).cosh(), (g * step).sinh() / g)
    }
}

impl CellPropagator {
    pub fn new(q: Complex64, lambda: f64, t_left: f64, step: f64, regime: Regime) -> Self {
        let s = regime.sign();
        let delta_sq = lambda * lambda - s * q.norm_sqr();
        let (c, sl) = cell_trig(delta_sq, step);
        let diag = Complex64::new(c, -lambda * sl);
        let edge = Complex64::from_polar(1.0, lambda * step);
        let mid = Complex64::from_polar(1.0, lambda * (2.0 * t_left + step));
        CellPropagator {
            x: edge * diag,
            x_bar: diag.conj() / edge,
            y: s * q.conj() * sl / mid,
            y_bar: q * sl * mid,
            delta_sq,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.x * self.x_bar - self.y * self.y_bar
    }

    /// Forward step `u -> M u`.
    pub fn apply(&self, u: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.x * u.0 + self.y_bar * u.1,
            self.y * u.0 + self.x_bar * u.1,
        )
    }

    /// Forward step of the ratio `b/a`.
    pub fn apply_ratio(&self, r: Complex64) -> Result<Complex64> {
        let den = self.x + self.y_bar * r;
        if den.norm() < 1e-300 {
            return Err(Error::SingularUpdate { cell: usize::MAX });
        }
        Ok((self.y + self.x_bar * r) / den)
    }

    /// Inverse step of the ratio: recovers the ratio before this cell.
    pub fn invert_ratio(&self, r: Complex64) -> Result<Complex64> {
        let den = self.x_bar - self.y_bar * r;
        if den.norm() < 1e-300 {
            return Err(Error::SingularUpdate { cell: usize::MAX });
        }
        Ok((self.x * r - self.y) / den)
    }
}

/// Nonlinear Fourier coefficients on a spectral mesh.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub grid: SpectralGrid,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    /// Spectral amplitude `b / a`.
    pub qhat: Vec<Complex64>,
    pub regime: Regime,
}

impl ScatteringData {
    pub fn new(
        grid: SpectralGrid,
        a: Vec<Complex64>,
        b: Vec<Complex64>,
        regime: Regime,
    ) -> Result<Self> {
        if a.len() != grid.len() || b.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} / {} coefficients on a {}-point mesh",
                a.len(),
                b.len(),
                grid.len()
            )));
        }
        let qhat = a.iter().zip(&b).map(|(&a, &b)| b / a).collect();
        Ok(Self {
            grid,
            a,
            b,
            qhat,
            regime,
        })
    }

    /// Max deviation of `|a|^2 - s |b|^2` from 1 over the mesh.
    pub fn unimodularity_residual(&self) -> f64 {
        let s = self.regime.sign();
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a.norm_sqr() - s * b.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Polynomial scattering state after a number of cells: Fourier coefficient
/// vectors of `A` and `B` in the basis `(1, z^-1, ..., z^-(M-1))`.
#[derive(Debug, Clone)]
pub struct CoefficientPolynomials {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    /// Number of cells folded in so far; the polynomial degree is at most
    /// `cells - 1`.
    pub cells: usize,
    pub t_start: f64,
    pub step: f64,
    pub regime: Regime,
    /// Running product of the per-cell normalization constants `c_k`.
    pub scale: f64,
}

impl CoefficientPolynomials {
    /// Mesh offset `t_start / step`.
    pub fn k0(&self) -> f64 {
        self.t_start / self.step
    }

    /// Period of the scattering coefficients in the spectral parameter.
    pub fn spectral_period(&self) -> f64 {
        std::f64::consts::PI / self.step
    }

    /// Right edge of the covered time span.
    pub fn t_end(&self) -> f64 {
        self.t_start + self.cells as f64 * self.step
    }
}

/// Diagnostics for the polynomial recursions: growth exponent and step-size
/// flags that decide whether the discrete layer peeling is trustworthy.
#[derive(Debug, Clone, Copy)]
pub struct ApplicabilityReport {
    /// Growth exponent `P = -1/2 sum log(1 - |step * q[k]|^2)`; coefficient
    /// magnitudes scale like `exp(P)`.
    pub growth: f64,
    /// Largest per-cell amplitude `|step * q[k]|`.
    pub max_step_amplitude: f64,
    /// `growth < p_max`
    pub growth_ok: bool,
    /// `|step * q[k]| < 1` everywhere
    pub sub_unit: bool,
    /// `|step * q[k]| < 0.1` everywhere, so the inverse recursion is not
    /// noise-amplifying
    pub well_conditioned: bool,
}

impl ApplicabilityReport {
    pub fn admissible(&self) -> bool {
        self.growth_ok && self.sub_unit
    }
}
