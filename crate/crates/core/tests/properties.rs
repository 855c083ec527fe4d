use num_complex::Complex;
use num_rational::Ratio;
use proptest::prelude::*;

use overlap_shuffle::analysis::check_gamma_bounds;
use overlap_shuffle::chain::{build_matrix, char_fn, char_fn_deriv, evolve, trace, DistVector};
use overlap_shuffle::gamma::{gamma_min, gamma_min_cf, gamma_term, search_bound};
use overlap_shuffle::mixsim::{fit_relaxation, simulate_card, tv_exact, FitWindow, SimConfig, TVSeries};
use overlap_shuffle::spectra::{full_spectrum_oracle, newton_refine, seeds_circles, seeds_near_one, spectral_gap};
use overlap_shuffle::ShuffleParams;

fn deck(max_n: usize) -> impl Strategy<Value = ShuffleParams> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), 1..n))
        .prop_map(|(n, k)| ShuffleParams::new(n, k).unwrap())
}

proptest! {
    #[test]
    fn matrix_is_exactly_doubly_stochastic(pr in deck(40)) {
        let m = build_matrix::<Ratio<i64>>(pr);
        let one = Ratio::from_integer(1);
        for i in 0..pr.n() {
            prop_assert_eq!(m[i].iter().sum::<Ratio<i64>>(), one);
            prop_assert_eq!(m.iter().map(|row| row[i]).sum::<Ratio<i64>>(), one);
        }
        let t: Ratio<i64> = trace(pr);
        let extra = if pr.k() == pr.n() - 1 { Ratio::new(1, 2) } else { Ratio::from_integer(0) };
        prop_assert_eq!(t, Ratio::new(pr.k() as i64, 2) + extra);
    }

    #[test]
    fn zero_root_iff_k_odd(pr in deck(200)) {
        let g0 = char_fn(pr, Complex::new(0.0f64, 0.0));
        let want = if pr.k() % 2 == 1 { 0.0 } else { -2.0 };
        prop_assert!((g0 - Complex::new(want, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sparse_step_matches_dense(pr in deck(64), seed in 0u64..1000) {
        let n = pr.n();
        let raw: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 101 + 1) as f64).collect();
        let s: f64 = raw.iter().sum();
        let d = DistVector::new(raw.iter().map(|x| x / s).collect()).unwrap();
        let m = build_matrix::<f64>(pr);
        let got = evolve(pr, &d, 1).unwrap();
        for (j, &g) in got.as_slice().iter().enumerate() {
            let dense: f64 = (0..n).map(|i| d.as_slice()[i] * m[i][j]).sum();
            prop_assert!((dense - g).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_is_even_in_m(pr in deck(1_000_000), m in 1i64..5000) {
        let a = gamma_term::<f64>(pr, m).unwrap();
        let b = gamma_term::<f64>(pr, -m).unwrap();
        prop_assert_eq!(a.numerator, b.numerator);
    }

    #[test]
    fn cf_shortlist_finds_the_minimum(pr in deck(200_000)) {
        let a = gamma_min::<f64>(pr);
        let b = gamma_min_cf::<f64>(pr);
        prop_assert_eq!(a.numerator, b.numerator);
    }

    #[test]
    fn gamma_bounds_hold(pr in deck(1_000_000)) {
        let n = pr.n() as f64;
        let g = gamma_min::<f64>(pr);
        let pi2 = std::f64::consts::PI.powi(2);
        prop_assert!(g.value <= 2.0 * pi2 * (pr.k() as f64).sqrt() / (n * n) * (1.0 + 1e-12));
        if pr.n() >= 11 {
            prop_assert!(g.numerator >= 8);
        }
    }

    #[test]
    fn tv_is_bounded_and_nonincreasing(pr in deck(60), start_frac in 0.0f64..1.0) {
        let start = 1 + (start_frac * (pr.n() - 1) as f64) as usize;
        let s = tv_exact(pr, start, 300).unwrap();
        let top = 1.0 - 1.0 / pr.n() as f64;
        prop_assert!((s.values[0] - top).abs() < 1e-12, "{} vs {}", s.values[0], top);
        for w in s.values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
            prop_assert!(w[1] <= top + 1e-12);
        }
    }

    #[test]
    fn geometric_series_fits_exactly(g in 0.001f64..0.5, block in 1usize..20) {
        let values: Vec<f64> = (0..200).map(|t| 0.2 * (1.0 - g).powi(t)).collect();
        let end = values.iter().rposition(|&v| v >= 1e-9).unwrap();
        let rate = fit_relaxation(&TVSeries { values }, FitWindow { start: 0, end, block }).unwrap();
        prop_assert!((rate / -(1.0 - g).ln() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn simulation_is_reproducible(pr in deck(30), seed in any::<u64>()) {
        let cfg = SimConfig::new(pr, 1, 5000, 20, seed).unwrap();
        let a = simulate_card(&cfg, &[5, 20]).unwrap();
        prop_assert_eq!(&a, &simulate_card(&cfg, &[5, 20]).unwrap());
        prop_assert!(a.counts.iter().all(|row| row.iter().sum::<u64>() == 5000));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oracle_spectrum_is_consistent(pr in deck(128)) {
        let n = pr.n();
        let s = full_spectrum_oracle::<f64>(pr).unwrap();
        prop_assert_eq!(s.len(), n);
        let want: f64 = trace(pr);
        prop_assert!((s.sum() - Complex::new(want, 0.0)).norm() < 1e-9 * n as f64);
        let one = Complex::new(1.0, 0.0);
        for e in &s.eigs {
            let z = e.lambda;
            prop_assert!(s.eigs.iter().any(|o| (o.lambda - z.conj()).norm() < 1e-8));
            let at_one = (z - one).norm() < 1e-10;
            prop_assert!(z.norm() <= 1.0 + 1e-12);
            prop_assert!(at_one || z.norm() < 1.0, "{} has modulus {}", z, z.norm());
        }
        prop_assert_eq!(s.eigs.iter().filter(|e| (e.lambda - one).norm() < 1e-10).count(), 1);
    }

    #[test]
    fn seeded_roots_are_oracle_roots(pr in deck(128)) {
        let s = full_spectrum_oracle::<f64>(pr).unwrap();
        let m_max = search_bound(pr);
        let mut seeds = seeds_near_one::<f64>(pr, m_max);
        seeds.extend(seeds_circles::<f64>(pr, m_max));
        for seed in seeds {
            if let Ok(e) = newton_refine(pr, seed) {
                let z = e.lambda;
                let d = s.eigs.iter().map(|o| (o.lambda - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-8, "{} is {} from the oracle", z, d);
                let ratio = char_fn(pr, z) / char_fn_deriv(pr, z);
                prop_assert!(ratio.norm() < 1e-12 * z.norm().max(1.0), "|g/g'| = {}", ratio.norm());
            }
        }
    }

    #[test]
    fn seeded_gap_matches_oracle(pr in deck(128)) {
        let s = full_spectrum_oracle::<f64>(pr).unwrap();
        let one = Complex::new(1.0, 0.0);
        let best = s.eigs.iter()
            .filter(|e| (e.lambda - one).norm() >= 1e-10)
            .map(|e| 1.0 - e.lambda.norm())
            .fold(f64::INFINITY, f64::min);
        let gap = spectral_gap::<f64>(pr).unwrap().gap;
        prop_assert!((gap / best - 1.0).abs() < 1e-8, "{} vs {}", gap, best);
    }
}

#[test]
fn bound_report_passes_at_100_and_1000() {
    for n in [100, 1000] {
        let r = check_gamma_bounds(n, &[0.01, 0.1]).unwrap();
        assert!(r.passed(), "n = {n}");
    }
}
