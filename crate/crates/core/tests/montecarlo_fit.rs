use spectra_core::montecarlo::{ks_distance, sample_draws, sample_min, TabulatedCdf};
use spectra_core::{Beta, EnsembleParams};

#[test]
fn wishart_sample_matches_edelman_density() {
    let p = EnsembleParams::wl(4, 3, Beta::One).unwrap();
    let batch = sample_min(&p, 100_000, 7).unwrap();
    let table = TabulatedCdf::wishart(&p, 30.0, 600).unwrap();
    assert!((table.total() - 1.0).abs() < 1e-8);
    let ks = ks_distance(&batch, |x| table.eval(x)).unwrap();
    assert!(ks < 0.01, "KS = {ks}");
}

#[test]
fn fixed_trace_samples_stay_in_support() {
    for nu in 0..=3 {
        let p = EnsembleParams::ft(7, nu, Beta::One).unwrap();
        let b = sample_min(&p, 5_000, 99).unwrap();
        assert!(b.values.iter().all(|&v| v > 0.0 && v <= 1.0 / 7.0));
    }
}

#[test]
fn complex_fixed_trace_in_support() {
    let p = EnsembleParams::ft(5, 2, Beta::Two).unwrap();
    let b = sample_min(&p, 5_000, 3).unwrap();
    assert!(b.values.iter().all(|&v| v > 0.0 && v <= 0.2));
}

#[test]
fn independent_of_worker_count() {
    let p = EnsembleParams::ft(5, 1, Beta::One).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_draws(&p, 10_000, 1234).unwrap())
    };
    assert_eq!(run(1), run(4));
}
