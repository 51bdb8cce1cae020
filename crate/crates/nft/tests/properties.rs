//! Property tests for the transform-layer invariants.

use nft::fourier::{fourier_transform, inverse_fourier_transform};
use nft::measure::energy_time;
use nft::nfdm::{qhat_from_spectrum, spectrum_from_qhat};
use nft::zs::{al_forward, check_discrete_unimodularity, clp_forward, Regime};
use nft::{relative_l2, Complex, SpectralGrid, SpectralSignal, TimeGrid, TimeSignal};
use proptest::prelude::*;

fn signal_strategy(n: usize) -> impl Strategy<Value = TimeSignal> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |pairs| {
        let grid = TimeGrid::new(-4.0, 4.0, n).unwrap();
        // taper toward the mesh ends so the signal decays
        let samples = pairs
            .into_iter()
            .zip(grid.positions())
            .map(|((re, im), t)| Complex::new(re, im) * (-t * t / 4.0).exp())
            .collect();
        TimeSignal::new(grid, samples).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_round_trip_is_identity(q in signal_strategy(64)) {
        let spec = fourier_transform(&q);
        let back = inverse_fourier_transform(&spec, &q.grid).unwrap();
        prop_assert!(relative_l2(&back.samples, &q.samples) < 1e-12);
    }

    #[test]
    fn plancherel_holds(q in signal_strategy(64)) {
        let spec = fourier_transform(&q);
        let e_f: f64 = spec.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * spec.grid.step();
        let e_t = energy_time(&q);
        prop_assert!((e_f - e_t).abs() <= 1e-12 * e_t.max(1e-12));
    }

    #[test]
    fn energy_scales_with_modulus_squared(q in signal_strategy(32), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let c = Complex::new(re, im);
        let scaled = TimeSignal::new(q.grid, q.samples.iter().map(|z| z * c).collect()).unwrap();
        let want = c.norm_sqr() * energy_time(&q);
        prop_assert!((energy_time(&scaled) - want).abs() <= 1e-12 * want.max(1e-12));
    }

    #[test]
    fn unimodularity_on_random_signals(q in signal_strategy(48)) {
        let grid = SpectralGrid::new(-3.0, 3.0, 17).unwrap();
        let sc = clp_forward(&q, &grid, Regime::Defocusing).unwrap();
        prop_assert!(sc.unimodularity_residual() < 1e-6);
        // and the coefficient-domain identity for the discrete pass
        let poly = al_forward(&q, 48, Regime::Defocusing).unwrap();
        prop_assert!(check_discrete_unimodularity(&poly) < 1e-10);
    }

    #[test]
    fn disk_plane_maps_are_mutually_inverse(vals in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 16)) {
        let grid = SpectralGrid::new(-1.0, 1.0, 16).unwrap();
        let spec = SpectralSignal::new(
            grid,
            vals.iter().map(|&(re, im)| Complex::new(re, im)).collect(),
        ).unwrap();
        let qh = qhat_from_spectrum(&spec);
        prop_assert!(qh.samples.iter().all(|v| v.norm() < 1.0));
        let back = spectrum_from_qhat(&qh).unwrap();
        for (b, w) in back.samples.iter().zip(&spec.samples) {
            prop_assert!((b - w).norm() < 1e-9 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn forward_inverse_cells_are_exact(vals in prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6), 12)) {
        // random admissible cell sequence: peel exactly inverts the forward pass
        let n = vals.len();
        let grid = TimeGrid::new(0.0, n as f64, n).unwrap();
        let q = TimeSignal::new(
            grid,
            vals.iter().map(|&(re, im)| Complex::new(re, im)).collect(),
        ).unwrap();
        let poly = al_forward(&q, n, Regime::Defocusing).unwrap();
        let lambda = SpectralGrid::nft_canonical(&grid, n).unwrap();
        let sc = nft::zs::evaluate_polynomials(&poly, &lambda).unwrap();
        let (rec, _) = nft::zs::dlp_inverse(&sc, &grid).unwrap();
        for (g, w) in rec.samples.iter().zip(&q.samples) {
            prop_assert!((g - w).norm() < 1e-10);
        }
    }
}
