//! Energy, duration and bandwidth measures.

use crate::error::{Error, Result};
use crate::fourier::fourier_transform;
use crate::grid::{SpectralSignal, TimeSignal};

/// Rectangle-rule energy `step * sum |q|^2` of a time-domain signal.
pub fn energy_time(signal: &TimeSignal) -> f64 {
    signal.grid.step() * signal.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Rectangle-rule energy of a spectral-domain signal.
pub fn energy_spectral(signal: &SpectralSignal) -> f64 {
    signal.grid.step() * signal.samples.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Length of the interval containing `fraction` of the energy, trimming
/// equal energy from both ends of the mesh. Each sample's mass is treated
/// as uniformly spread over its cell, so the trim points interpolate within
/// cells (a rectangle of duration T yields exactly `fraction * T`).
fn concentration_interval(mass: &[f64], step: f64, fraction: f64) -> Result<f64> {
    let total: f64 = mass.iter().sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMeasure);
    }
    let trim = total * (1.0 - fraction) / 2.0;

    // position (in cells) where the cumulative mass from one end reaches `trim`
    let edge = |iter: &mut dyn Iterator<Item = &f64>| -> f64 {
        let mut acc = 0.0;
        for (i, &m) in iter.enumerate() {
            if acc + m >= trim {
                let frac = if m > 0.0 { (trim - acc) / m } else { 0.0 };
                return i as f64 + frac;
            }
            acc += m;
        }
        mass.len() as f64
    };

    let left = edge(&mut mass.iter());
    let right = edge(&mut mass.iter().rev());
    let width = (mass.len() as f64 - left - right).max(0.0);
    Ok(width * step)
}

/// Duration of the smallest symmetric-trim interval containing 99% of the
/// signal energy.
pub fn duration_99(signal: &TimeSignal) -> Result<f64> {
    let mass: Vec<f64> = signal.samples.iter().map(|z| z.norm_sqr()).collect();
    concentration_interval(&mass, signal.grid.step(), 0.99)
}

/// 99%-energy width of the Fourier spectrum, in cycles per unit time.
pub fn bandwidth_99(signal: &TimeSignal) -> Result<f64> {
    let spec = fourier_transform(signal);
    let mass: Vec<f64> = spec.samples.iter().map(|z| z.norm_sqr()).collect();
    concentration_interval(&mass, spec.grid.step(), 0.99)
}

/// 99%-energy width measured directly on a spectral signal.
pub fn spectral_width_99(signal: &SpectralSignal) -> Result<f64> {
    let mass: Vec<f64> = signal.samples.iter().map(|z| z.norm_sqr()).collect();
    concentration_interval(&mass, signal.grid.step(), 0.99)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use num_complex::Complex64;

    #[test]
    fn zero_energy() {
        let g = TimeGrid::new(0.0, 2.0, 32).unwrap();
        assert_eq!(energy_time(&TimeSignal::zeros(g)), 0.0);
    }

    #[test]
    fn rectangle_energy() {
        // height 1 over length 2
        let g = TimeGrid::new(0.0, 2.0, 64).unwrap();
        let q = TimeSignal::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!((energy_time(&q) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_energy_closed_form() {
        // integral exp(-2 t^2) dt = sqrt(pi/2)
        let g = TimeGrid::new(-12.0, 12.0, 4096).unwrap();
        let q = TimeSignal::from_fn(g, |t| Complex64::new((-t * t).exp(), 0.0));
        let want = (std::f64::consts::PI / 2.0).sqrt();
        let got = energy_time(&q);
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    }

    #[test]
    fn energy_scales_quadratically() {
        let g = TimeGrid::new(-4.0, 4.0, 128).unwrap();
        let q = TimeSignal::from_fn(g, |t| Complex64::new((-t * t).exp(), 0.3 * t.sin()));
        let c = Complex64::new(1.7, -0.4);
        let scaled = TimeSignal::new(g, q.samples.iter().map(|z| z * c).collect()).unwrap();
        let ratio = energy_time(&scaled) / energy_time(&q);
        assert!((ratio - c.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn rectangle_duration_is_099_t() {
        let g = TimeGrid::new(-3.0, 5.0, 256).unwrap();
        let q = TimeSignal::from_fn(g, |_| Complex64::new(0.5, 0.0));
        let d = duration_99(&q).unwrap();
        assert!((d - 0.99 * 8.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn gaussian_duration_bisection_oracle() {
        // Oracle: bisect d such that integral of exp(-2t^2) over [-d/2, d/2]
        // equals 0.99 of the total, using fine Simpson quadrature.
        let density = |t: f64| (-2.0 * t * t).exp();
        let simpson = |a: f64, b: f64| {
            let n = 20_000;
            let h = (b - a) / n as f64;
            let mut s = density(a) + density(b);
            for i in 1..n {
                s += density(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let total = simpson(-20.0, 20.0);
        let (mut lo, mut hi) = (0.0, 20.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if simpson(-mid / 2.0, mid / 2.0) / total < 0.99 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);

        let g = TimeGrid::new(-16.0, 16.0, 8192).unwrap();
        let q = TimeSignal::from_fn(g, |t| Complex64::new((-t * t).exp(), 0.0));
        let d = duration_99(&q).unwrap();
        assert!((d - oracle).abs() < 2e-3 * oracle, "{d} vs {oracle}");
    }

    #[test]
    fn duration_invariant_under_scaling() {
        let g = TimeGrid::new(-8.0, 8.0, 1024).unwrap();
        let q = TimeSignal::from_fn(g, |t| Complex64::new((-t * t).exp(), 0.0));
        let c = Complex64::new(0.0, -3.25);
        let scaled = TimeSignal::new(g, q.samples.iter().map(|z| z * c).collect()).unwrap();
        let (d1, d2) = (duration_99(&q).unwrap(), duration_99(&scaled).unwrap());
        assert_eq!(d1, d2);
        let (b1, b2) = (bandwidth_99(&q).unwrap(), bandwidth_99(&scaled).unwrap());
        assert!((b1 - b2).abs() < 1e-12 * b1);
    }

    #[test]
    fn zero_signal_measure_undefined() {
        let g = TimeGrid::new(0.0, 1.0, 16).unwrap();
        assert!(matches!(
            duration_99(&TimeSignal::zeros(g)),
            Err(Error::UndefinedMeasure)
        ));
    }
}
