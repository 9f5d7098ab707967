use fxpca::diagnostics::{default_test_functions, hill, hill_plot, moment_bound, moment_stability, pareto_qq};
use fxpca::experiments::{
    binomial_lower_p_value, concentration_coverage, reconstruction_cv, CoverageConfig, CvConfig, CvMode,
    OracleCovariance,
};
use fxpca::linalg::{hs_norm, SymmetricOperator};
use fxpca::polar::{l2_inner, polar_decompose, select_extremes};
use fxpca::sim::{
    pareto, sample_curves, sample_mixture, sample_mixture_above, sample_multiplicative, tail_mass_beyond,
    CurveSampler, MixtureModel, MixtureWeights, MultiplicativeModel, Seed,
};
use rand::Rng;

fn pareto_radii(n: usize, alpha: f64, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n).map(|_| pareto(&mut rng, alpha, 1.0)).collect()
}

/// `P[I = j | R ≥ t]` for the mixture model, by summing over `⌊R⌋ = m`.
/// The last entry is the mass beyond `d_trunc`.
fn exact_mixture_angle_law(model: &MixtureModel, t: f64) -> Vec<f64> {
    let alpha = model.alpha;
    let w = model.weights.exponent() as i32;
    let d = model.d_trunc;
    let m0 = (t.floor() as usize).max(1);
    let cap = 2_000_000usize;
    let mut h_m: f64 = (1..m0).map(|i| (i as f64).powi(-w)).sum();
    let mut law = vec![0.0; d + 1];
    for m in m0..cap {
        h_m += (m as f64).powi(-w);
        let lo = (m as f64).max(t);
        let pm = (lo / t).powf(-alpha) - ((m + 1) as f64 / t).powf(-alpha);
        for j in 1..=d.min(m) {
            law[j - 1] += pm * (j as f64).powi(-w) / h_m;
        }
    }
    // beyond the cap the conditional law has converged to its m → ∞ form
    let tail = (cap as f64 / t).powf(-alpha);
    for j in 1..=d {
        law[j - 1] += tail * (j as f64).powi(-w) / h_m;
    }
    law[d] = 1.0 - law[..d].iter().sum::<f64>();
    law
}

#[test]
fn pareto_tail_frequencies() {
    let n = 1_000_000;
    let alpha = 1.5;
    let radii = pareto_radii(n, alpha, Seed::new(100, 0));
    for t in [2.0f64, 5.0, 10.0] {
        let p = t.powf(-alpha);
        let hits = radii.iter().filter(|&&r| r >= t).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits - p).abs() <= 4.0 * se, "t = {t}: {hits} vs {p}");
    }
}

#[test]
fn generators_are_deterministic_and_streams_disjoint() {
    let model = MultiplicativeModel::six_factor(48).unwrap();
    let a = sample_multiplicative(&model, 200, Seed::new(5, 3)).unwrap();
    let b = sample_multiplicative(&model, 200, Seed::new(5, 3)).unwrap();
    assert_eq!(a.values(), b.values());
    let mut r0 = Seed::new(5, 0).rng();
    let mut r1 = Seed::new(5, 1).rng();
    let x: std::collections::HashSet<u64> = (0..10_000).map(|_| r0.random()).collect();
    assert!((0..10_000).all(|_| !x.contains(&r1.random::<u64>())));
}

#[test]
fn mixture_index_weights_given_floor() {
    for weights in [MixtureWeights::Harmonic, MixtureWeights::InverseSquare] {
        let m = 6usize;
        let model = MixtureModel::new(2.0, weights, 10).unwrap();
        let s = sample_mixture_above(&model, 400_000, m as f64, Seed::new(8, 0)).unwrap();
        let mut counts = vec![0usize; m];
        let mut total = 0usize;
        for (r, &i) in s.radii.iter().zip(&s.indices) {
            if r.floor() as usize == m {
                counts[i as usize - 1] += 1;
                total += 1;
            }
        }
        let expected = model.conditional_weights(m);
        for (c, p) in counts.iter().zip(&expected) {
            let freq = *c as f64 / total as f64;
            let se = (p * (1.0 - p) / total as f64).sqrt();
            assert!((freq - p).abs() <= 4.0 * se, "{weights:?}: {freq} vs {p}");
        }
    }
}

#[test]
fn six_factor_extremes_follow_breiman_weights() {
    let model = MultiplicativeModel::six_factor(48).unwrap();
    let support = model.limit_support();
    let weight = model.extreme_factor_weights()[0];
    let closest_to_first = |n: usize, seed: Seed| -> (f64, f64) {
        let x = sample_multiplicative(&model, n, seed).unwrap();
        let p = polar_decompose(&x);
        let k = n / 100;
        let top = select_extremes(&p, k).unwrap();
        let hits = top
            .indices
            .iter()
            .filter(|&&i| {
                let th = p.angle(i).unwrap();
                let a = l2_inner(th, &support[0], 1.0).unwrap().abs() / support[0].iter().map(|v| v * v).sum::<f64>().sqrt();
                let b = l2_inner(th, &support[1], 1.0).unwrap().abs() / support[1].iter().map(|v| v * v).sum::<f64>().sqrt();
                a > b
            })
            .count();
        (hits as f64 / k as f64, k as f64)
    };
    // brute-force oracle at a high threshold, then the small-sample check
    let (oracle, ko) = closest_to_first(1_000_000, Seed::new(21, 0));
    let se_o = (weight * (1.0 - weight) / ko).sqrt();
    assert!((oracle - weight).abs() <= 3.0 * se_o, "oracle {oracle} vs {weight}");
    let (small, ks) = closest_to_first(10_000, Seed::new(21, 1));
    let se = (weight * (1.0 - weight) / ks).sqrt();
    assert!((small - oracle).abs() <= 3.0 * (se * se + se_o * se_o).sqrt(), "{small} vs {oracle}");
}

#[test]
fn six_factor_norm_is_regularly_varying() {
    let model = MultiplicativeModel::six_factor(48).unwrap();
    let n = 100_000;
    let x = sample_multiplicative(&model, n, Seed::new(33, 0)).unwrap();
    let h = hill(&x.norms(), (n as f64).sqrt() as usize, 0.95).unwrap();
    assert!(h.alpha_ci.0 <= 0.5 && 0.5 <= h.alpha_ci.1, "{h:?}");
}

#[test]
fn mixture_limit_probabilities_at_high_threshold() {
    let model = MixtureModel::new(1.0, MixtureWeights::InverseSquare, 10).unwrap();
    let n = 200_000;
    let s = sample_mixture_above(&model, n, 1e6, Seed::new(2, 0)).unwrap();
    for j in 1..=2u64 {
        let p = model.limit_probability(j as usize).unwrap();
        let freq = s.indices.iter().filter(|&&i| i == j).count() as f64 / n as f64;
        assert!((freq - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt(), "j = {j}: {freq} vs {p}");
    }
}

#[test]
fn inverse_square_tail_mass_stays_bounded() {
    let d_cut = 5;
    let model = MixtureModel::new(1.0, MixtureWeights::InverseSquare, 30).unwrap();
    let limit_tail: f64 = 1.0 - (1..=d_cut).map(|j| model.limit_probability(j).unwrap()).sum::<f64>();
    for t in [10.0, 1e3, 1e5] {
        let s = sample_mixture_above(&model, 20_000, t, Seed::new(4, t as u64)).unwrap();
        let p = polar_decompose(&s.sample);
        let value = tail_mass_beyond(&p, d_cut, 20_000).unwrap();
        let se = (limit_tail * (1.0 - limit_tail) / 20_000.0).sqrt();
        assert!(value <= limit_tail + 4.0 * se, "t = {t}: {value} vs {limit_tail}");
    }
}

#[test]
fn harmonic_tail_mass_grows_with_threshold() {
    let model = MixtureModel::new(1.0, MixtureWeights::Harmonic, 20).unwrap();
    let mut last = 0.0;
    for (s, t) in [10.0, 1e3, 1e5].into_iter().enumerate() {
        let sample = sample_mixture_above(&model, 20_000, t, Seed::new(6, s as u64)).unwrap();
        let value = tail_mass_beyond(&polar_decompose(&sample.sample), 5, 20_000).unwrap();
        assert!(value > last, "t = {t}: {value} <= {last}");
        last = value;
    }
}

#[test]
fn hill_is_unbiased_on_exact_pareto() {
    let alpha = 2.0;
    let reps = 2000;
    let gammas: Vec<f64> = (0..reps)
        .map(|r| hill(&pareto_radii(10_000, alpha, Seed::new(9, r)), 500, 0.95).unwrap().gamma_hat)
        .collect();
    let mean = gammas.iter().sum::<f64>() / reps as f64;
    let var = gammas.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    assert!((mean - 1.0 / alpha).abs() <= 3.0 * (var / reps as f64).sqrt(), "{mean}");
}

#[test]
fn hill_plot_covers_true_index() {
    let radii = pareto_radii(10_000, 2.0, Seed::new(12, 0));
    let series = hill_plot(&radii, 50, 500, 0.95).unwrap();
    let covered = series.iter().filter(|h| h.alpha_ci.0 <= 2.0 && 2.0 <= h.alpha_ci.1).count();
    assert!(covered as f64 >= 0.9 * series.len() as f64, "{covered} of {}", series.len());
}

#[test]
fn qq_slope_agrees_with_hill() {
    for (s, alpha) in [(0u64, 0.5), (1, 2.0), (2, 5.0)] {
        // at k = 200 the two estimators routinely differ by more than 10%
        let radii = pareto_radii(20_000, alpha, Seed::new(13, s));
        for k in [1000, 2000] {
            let h = hill(&radii, k, 0.95).unwrap().gamma_hat;
            let q = pareto_qq(&radii, k).unwrap().slope;
            assert!((q - h).abs() <= 0.1 * h, "alpha {alpha}, k {k}: {q} vs {h}");
        }
    }
}

#[test]
fn moment_stability_on_mixture() {
    let model = MixtureModel::new(1.0, MixtureWeights::InverseSquare, 47).unwrap();
    let s = sample_mixture(&model, 100_000, Seed::new(14, 0)).unwrap();
    let p = polar_decompose(&s.sample);
    let mut e1 = vec![0.0; 48];
    e1[0] = 1.0;
    let series = moment_stability(&p, &e1, 10, 1000).unwrap();
    let limit = model.limit_probability(1).unwrap();
    let (_, last) = series[series.len() - 1];
    assert!((last - limit).abs() <= 3.0 * (limit * (1.0 - limit) / 1000.0).sqrt(), "{last}");
    for h in default_test_functions(48).unwrap() {
        let bound = moment_bound(&h, 1.0);
        for (_, v) in moment_stability(&p, &h, 1, 500).unwrap() {
            assert!((0.0..=bound + 1e-12).contains(&v));
        }
    }
}

#[test]
fn independent_centered_sums_add_in_square() {
    // A_i = e_J e_Jᵀ − diag(q) with P[J = j] = q_j; E‖A‖² is known exactly.
    let q = [0.5, 0.3, 0.2];
    let c = SymmetricOperator::diagonal(&q).unwrap();
    let e_sq: f64 = q
        .iter()
        .enumerate()
        .map(|(j, &qj)| qj * ((1.0 - qj).powi(2) + q.iter().enumerate().filter(|&(l, _)| l != j).map(|(_, x)| x * x).sum::<f64>()))
        .sum();
    let m = 12;
    let reps = 20_000;
    let mut rng = Seed::new(15, 0).rng();
    let values: Vec<f64> = (0..reps)
        .map(|_| {
            let mut sum = SymmetricOperator::zeros(3).unwrap();
            for _ in 0..m {
                let u: f64 = rng.random();
                let j = if u < 0.5 { 0 } else if u < 0.8 { 1 } else { 2 };
                let mut e = vec![0.0; 3];
                e[j] = 1.0;
                sum = sum.add(&SymmetricOperator::outer(&e).unwrap().sub(&c).unwrap()).unwrap();
            }
            hs_norm(&sum).powi(2)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let expected = m as f64 * e_sq;
    assert!((mean - expected).abs() <= 5.0 * (var / reps as f64).sqrt(), "{mean} vs {expected}");
}

fn mixture_oracle(model: &MixtureModel, t: f64) -> OracleCovariance {
    let law = exact_mixture_angle_law(model, t);
    OracleCovariance {
        threshold: t,
        operator: SymmetricOperator::diagonal(&law).unwrap(),
        exceedances: usize::MAX,
        draws: 0,
        budget: 0.0,
    }
}

#[test]
fn exact_mixture_law_sums_to_one_and_matches_limit() {
    let model = MixtureModel::new(1.0, MixtureWeights::InverseSquare, 20).unwrap();
    let law = exact_mixture_angle_law(&model, 1e5);
    assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((law[0] - model.limit_probability(1).unwrap()).abs() < 1e-4);
}

#[test]
fn threshold_and_total_bounds_cover_on_mixture() {
    // ‖X‖ = R exactly, so t_{n,k} = (n/k)^{1/α} and C_t is diagonal.
    let model = MixtureModel::new(1.0, MixtureWeights::InverseSquare, 20).unwrap();
    let (n, k, delta) = (5000, 100, 0.1);
    let t = n as f64 / k as f64;
    let oracle = mixture_oracle(&model, t);
    let cfg = CoverageConfig {
        n,
        k,
        delta,
        reps: 2000,
        seed: 16,
    };
    let report = concentration_coverage(&model, &cfg, &oracle).unwrap();
    let p_threshold = binomial_lower_p_value(report.threshold_hits(), cfg.reps, 1.0 - delta / 2.0).unwrap();
    assert!(p_threshold >= 0.001, "threshold hits {}", report.threshold_hits());
    let p_total = binomial_lower_p_value(report.total_hits(), cfg.reps, 1.0 - delta).unwrap();
    assert!(p_total >= 0.001, "total hits {}", report.total_hits());
    assert!(report.mean_sampling_error() <= 1.0 / (k as f64).sqrt());
}

#[test]
fn expected_sampling_deviation_below_inverse_root_k() {
    let model = MixtureModel::new(1.0, MixtureWeights::InverseSquare, 20).unwrap();
    let n = 5000;
    for k in [25, 100, 400] {
        let oracle = mixture_oracle(&model, n as f64 / k as f64);
        let cfg = CoverageConfig {
            n,
            k,
            delta: 0.1,
            reps: 500,
            seed: 17,
        };
        let report = concentration_coverage(&model, &cfg, &oracle).unwrap();
        assert!(report.mean_sampling_error() <= 1.0 / (k as f64).sqrt(), "k = {k}");
    }
}

#[test]
fn cv_errors_are_in_unit_interval_and_in_sample_is_optimistic() {
    let model = MultiplicativeModel::six_factor(48).unwrap();
    let x = sample_curves(&model, 5000, Seed::new(18, 0)).unwrap();
    let p = polar_decompose(&x);
    let cfg = CvConfig {
        k: 100,
        p: 2,
        v: 30,
        reps: 50,
        mode: CvMode::RandomCv,
        seed: 19,
    };
    let res = reconstruction_cv(&p, &cfg).unwrap();
    assert!(res.replication_errors.iter().flatten().all(|e| (0.0..=1.0).contains(e)));

    // in-sample error of the top-k fit never exceeds its held-out error on average
    use fxpca::cov::{empirical_extreme_cov, leading_subspace, reconstruction_error};
    let top = select_extremes(&p, 100).unwrap();
    let fit = leading_subspace(&empirical_extreme_cov(&p, 100).unwrap(), 2).unwrap().subspace;
    let in_sample = reconstruction_error(p.angles_of(&top.indices).unwrap(), 1.0, &fit).unwrap();
    let held_out = res.summaries[0].mean;
    assert!(in_sample <= held_out, "{in_sample} vs {held_out}");
    assert_eq!(model.d(), 48);
}

#[test]
fn cv_disjoint_validation_sets_agree() {
    let model = MultiplicativeModel::six_factor(48).unwrap();
    let p = polar_decompose(&sample_curves(&model, 5000, Seed::new(20, 0)).unwrap());
    let run = |seed| {
        let cfg = CvConfig {
            k: 100,
            p: 2,
            v: 30,
            reps: 200,
            mode: CvMode::RandomCv,
            seed,
        };
        let res = reconstruction_cv(&p, &cfg).unwrap();
        let e: Vec<f64> = res.replication_errors.iter().map(|r| r[0]).collect();
        let m = e.iter().sum::<f64>() / e.len() as f64;
        let v = e.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (e.len() as f64 - 1.0);
        (m, v / e.len() as f64)
    };
    let (m1, v1) = run(1);
    let (m2, v2) = run(2);
    assert!((m1 - m2).abs() <= 3.0 * (v1 + v2).sqrt(), "{m1} vs {m2}");
}

#[test]
fn cv_variance_ordering_on_simulated_model() {
    let model = MultiplicativeModel::six_factor(48).unwrap();
    let p = polar_decompose(&sample_curves(&model, 10_000, Seed::new(22, 0)).unwrap());
    let cfg = CvConfig {
        k: 100,
        p: 2,
        v: 30,
        reps: 300,
        mode: CvMode::RandomCv,
        seed: 23,
    };
    let res = reconstruction_cv(&p, &cfg).unwrap();
    assert!(res.summaries[0].median < res.summaries[2].median);
    assert!(res.summaries[1].median < res.summaries[2].median);
}
