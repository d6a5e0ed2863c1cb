use invq::ensembles::{
    calibrated_dimension, concentration_check, draw, expected_normalized_trace, hoeffding_tail, sample_traces,
    trace_gap_check, EnsembleKind, EnsembleSpec,
};
use invq::par::Exec;
use invq::phase;
use invq::rng;

#[test]
fn biased_mean_trace_lies_in_half_eps_window() {
    let spec = EnsembleSpec::new(EnsembleKind::Biased1, 10_000, 257, 0.2).unwrap();
    let tr = sample_traces(&spec, 1000, 31, Exec::Parallel).unwrap();
    let mean = tr.iter().map(|z| z.re).sum::<f64>() / tr.len() as f64;
    assert!(mean > 0.1 + 0.01 && mean < 0.2 - 0.01, "mean {mean}");
    // agrees with the per-entry mean; std error is about 1/sqrt(2·10^7)
    let want = phase::mean(0.2, 257).unwrap().re;
    assert!((mean - want).abs() < 1e-3, "{mean} vs {want}");
    assert_eq!(expected_normalized_trace(&spec).unwrap().re, want);
}

#[test]
fn concentration_examples() {
    let s0 = EnsembleSpec::new(EnsembleKind::Unbiased0, 10_000, 257, 0.0).unwrap();
    assert!(concentration_check(&s0, 0.1, 1000, 32, Exec::Parallel).unwrap() <= 0.01);

    let s1 = EnsembleSpec::new(EnsembleKind::Biased1, 10_000, 257, 0.2).unwrap();
    let tail = concentration_check(&s1, 0.02, 1000, 33, Exec::Parallel).unwrap();
    assert!(tail <= 0.05, "tail {tail}");
    // the Hoeffding bound is far above at this t, and binding where it is small
    assert!(tail <= hoeffding_tail(10_000, 0.02));
    let th = (8.0 * 400f64.ln() / 10_000.0).sqrt();
    assert!(concentration_check(&s1, th, 1000, 34, Exec::Parallel).unwrap() <= hoeffding_tail(10_000, th));

    assert_eq!(concentration_check(&s1, 2.0, 100, 35, Exec::Parallel).unwrap(), 0.0);
}

#[test]
fn trace_gap_at_calibrated_and_tiny_dimension() {
    let g = trace_gap_check(0.1, 100_000, 257, 1000, 36, Exec::Parallel).unwrap();
    assert!(g.unbiased_below >= 0.99 && g.biased_above >= 0.99, "{g:?}");
    assert!(calibrated_dimension(0.1) <= 100_000);

    // d far below C/ε²: still returns raw fractions, the biased event is rare
    let g = trace_gap_check(0.1, 10, 257, 1000, 37, Exec::Parallel).unwrap();
    assert!((0.0..=1.0).contains(&g.unbiased_below) && (0.0..=1.0).contains(&g.biased_above));
    assert!(g.unbiased_below < 0.99, "{g:?}");
}

#[test]
fn zero_bias_traces_coincide_under_shared_seed() {
    let s0 = EnsembleSpec::new(EnsembleKind::Unbiased0, 300, 257, 0.0).unwrap();
    let s1 = EnsembleSpec::new(EnsembleKind::Biased1, 300, 257, 0.0).unwrap();
    assert_eq!(
        sample_traces(&s0, 200, 38, Exec::Parallel).unwrap(),
        sample_traces(&s1, 200, 38, Exec::Sequential).unwrap()
    );
}

#[test]
fn sec4_untwisted_trace_matches_v_under_shared_seed() {
    for t in 0..20u64 {
        let v = draw(&EnsembleSpec::new(EnsembleKind::Sec4V, 97, 257, 0.3).unwrap(), &mut rng::stream(t)).unwrap();
        let dv = draw(&EnsembleSpec::new(EnsembleKind::Sec4DV, 97, 257, 0.3).unwrap(), &mut rng::stream(t)).unwrap();
        assert_eq!(dv.twisted(-1).normalized_trace(), v.normalized_trace());
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn phase_randomization_leaves_modulus_distribution_alone() {
    let n = 10_000;
    let base = EnsembleSpec::new(EnsembleKind::Biased1, 64, 257, 0.3).unwrap();
    let rand = base.clone().with_phase_randomization(true);
    let a: Vec<f64> = sample_traces(&base, n, 39, Exec::Parallel).unwrap().iter().map(|z| z.norm()).collect();
    let b: Vec<f64> = sample_traces(&rand, n, 40, Exec::Parallel).unwrap().iter().map(|z| z.norm()).collect();
    // c(α) = sqrt(−ln(α/2)/2) at α = 0.001
    let crit = (-(0.001f64 / 2.0).ln() / 2.0).sqrt() * (2.0 / n as f64).sqrt();
    let d = ks_statistic(a, b);
    assert!(d < crit, "KS statistic {d} >= {crit}");
    assert_eq!(expected_normalized_trace(&rand).unwrap().norm(), 0.0);
}
