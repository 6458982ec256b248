use nalgebra::DMatrix;
use proptest::prelude::*;
use siasim_core::experiments::{emit_records, parse_records, Estimate};
use siasim_core::outage::{self, TopForm};
use siasim_core::receivers::{nicm, post_sinr_eigenform, post_sinr_mmse, sinr_lower_bound, weighted_gram, Eigensystem};
use siasim_core::rng::substream;
use siasim_core::scheduler::{sequential_indices, SchedulerMode};
use siasim_core::wishart::{MevDensity, WishartKind};
use siasim_core::{db_to_linear, draw_channel, Encoding, ResultRecord, SystemConfig};

fn cqi_table() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..10)
        .prop_flat_map(|l| (Just(l), 1..=l.min(4)))
        .prop_flat_map(|(l, t)| prop::collection::vec(0.0f64..50.0, l * t).prop_map(move |v| DMatrix::from_vec(l, t, v)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scheduler_picks_distinct_maxima(cqi in cqi_table()) {
        let users = sequential_indices(&cqi, SchedulerMode::Distinct).unwrap();
        prop_assert_eq!(users.len(), cqi.ncols());
        for (i, &u) in users.iter().enumerate() {
            prop_assert!(!users[..i].contains(&u));
            let best = (0..cqi.nrows())
                .filter(|v| !users[..i].contains(v))
                .map(|v| cqi[(v, i)])
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(cqi[(u, i)], best);
        }
    }

    #[test]
    fn repeat_mode_takes_column_maxima(cqi in cqi_table()) {
        let users = sequential_indices(&cqi, SchedulerMode::AllowRepeat).unwrap();
        for (i, &u) in users.iter().enumerate() {
            let best = cqi.column(i).max();
            prop_assert_eq!(cqi[(u, i)], best);
        }
    }

    #[test]
    fn receiver_forms_agree(seed in any::<u64>(), k in 2usize..6, nr in 1usize..5, snr_db in 0.0f64..30.0) {
        let cfg = SystemConfig::new(k, nr, 1).with_snr_db(snr_db);
        let sample = draw_channel(&cfg, &mut substream(seed, 0));
        let h = sample.h.column(0).into_owned();
        let g = DMatrix::from_fn(nr, k - 1, |r, c| sample.g[c][(r, 0)]);
        let eig = Eigensystem::new(&weighted_gram(&g, &vec![cfg.i0; k - 1])).unwrap();
        let gamma = post_sinr_mmse(&h, &nicm(&sample, &cfg), cfg.s).unwrap();
        let eigen = post_sinr_eigenform(&h, &eig, cfg.s, cfg.n0).unwrap();
        prop_assert!((gamma - eigen).abs() <= 1e-9 * eigen);
        prop_assert!(sinr_lower_bound(&h, &eig, cfg.s, cfg.n0) <= eigen);
    }

    #[test]
    fn complex_cdf_is_monotone_in_beta(b1 in -10.0f64..35.0, step in 0.01f64..10.0, snr in 0.0f64..40.0) {
        let cfg = SystemConfig::new(3, 2, 10).with_snr_db(snr);
        let f1 = outage::cdf_f_complex(db_to_linear(b1), &cfg).unwrap();
        let f2 = outage::cdf_f_complex(db_to_linear(b1 + step), &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!(f2 >= f1 - 1e-14);
    }

    #[test]
    fn top_falls_with_more_users(beta_db in 0.0f64..30.0, l in 1usize..200) {
        let cfg = SystemConfig::new(6, 2, l).with_encoding(Encoding::Real);
        let beta = db_to_linear(beta_db);
        let a = outage::top_closed_form(beta, &cfg, TopForm::RealEvenExact).unwrap();
        let b = outage::top_closed_form(beta, &SystemConfig { l: l + 1, ..cfg.clone() }, TopForm::RealEvenExact).unwrap();
        prop_assert!(b <= a);
    }

    #[test]
    fn users_required_meets_target(target in 0.01f64..0.5, beta_db in 5.0f64..30.0) {
        let cfg = SystemConfig::new(3, 2, 10);
        let beta = db_to_linear(beta_db);
        let l = outage::users_required(target, beta, &cfg, TopForm::ComplexExact).unwrap().exact;
        let f = outage::cdf_f_complex(beta, &cfg).unwrap();
        if l > 1.0 {
            prop_assert!((outage::top_ub(f, l) / target - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mev_cdf_scales_with_i0(x in 0.001f64..5.0, c in 0.1f64..10.0) {
        for (kind, m, n) in [(WishartKind::Complex, 2, 4), (WishartKind::Real, 4, 4), (WishartKind::Real, 2, 4)] {
            let unit = MevDensity::new(kind, m, n, 1.0).unwrap();
            let scaled = MevDensity::new(kind, m, n, c).unwrap();
            let (a, b) = (unit.cdf(x), scaled.cdf(c * x));
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - b).abs() < 1e-8, "{kind} ({m},{n}): {a} vs {b}");
        }
    }

    #[test]
    fn records_round_trip(mc in prop::option::of(0.0f64..1.0), analytic in prop::option::of(-1e3f64..1e3), beta in prop::option::of(-5.0f64..40.0)) {
        let cfg = SystemConfig::new(3, 2, 10);
        let mut r = ResultRecord::new("top_lb_sinr", &cfg);
        if let Some(v) = mc {
            r = r.with_mc(&Estimate { value: v, stderr: v / 7.0, trials: 1000 });
        }
        if let Some(v) = analytic {
            r = r.with_analytic(v, "complex_exact");
        }
        if let Some(b) = beta {
            r = r.with_beta_db(b);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_records(std::slice::from_ref(&r), &path).unwrap();
        prop_assert_eq!(parse_records(&path).unwrap(), vec![r]);
    }
}
