mod common;

use common::{random_config, random_single_source};
use dlsched::simulate::{simulate, SIM_TOL};
use dlsched::{solve, solve_single_source, Error, Mode, SystemConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn solve_or_skip(cfg: &SystemConfig) -> Option<dlsched::SolveResult> {
    match solve(cfg) {
        Ok(r) => Some(r),
        Err(Error::InfeasibleSchedule(_)) => None,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_source_lp_matches_closed_form(seed in any::<u64>()) {
        let cfg = random_single_source(&mut rng(seed), 8);
        let lp = solve(&cfg).unwrap();
        let cf = solve_single_source(cfg.sources[0].g, &cfg.processors, cfg.job).unwrap();
        prop_assert!((lp.t_f - cf.t_f).abs() <= 1e-6 * cf.t_f.max(1.0));
        for (x, y) in lp.allocation.alpha.iter().zip(&cf.allocation.alpha) {
            prop_assert!((x - y).abs() <= 1e-6 * cfg.job.max(1.0));
        }
    }

    #[test]
    fn frontend_single_source_matches_closed_form(seed in any::<u64>()) {
        // With one source released at time zero the front-end optimum
        // coincides with the store-and-forward recursion.
        let cfg = random_single_source(&mut rng(seed), 8).with_mode(Mode::FrontEnd);
        let lp = solve(&cfg).unwrap();
        let cf = solve_single_source(cfg.sources[0].g, &cfg.processors, cfg.job).unwrap();
        prop_assert!(lp.t_f <= cf.t_f + 1e-6 * cf.t_f.max(1.0));
    }

    #[test]
    fn storeforward_solutions_replay_cleanly(seed in any::<u64>()) {
        let cfg = random_config(&mut rng(seed), 4, 8, Mode::StoreForward);
        if let Some(res) = solve_or_skip(&cfg) {
            let report = simulate(&cfg, &res).unwrap();
            prop_assert!(report.is_clean(), "{:?}", report.violations);
            prop_assert!((report.achieved_finish - res.t_f).abs() <= SIM_TOL * res.t_f.max(1.0));
        }
    }

    #[test]
    fn frontend_solutions_replay_cleanly(seed in any::<u64>()) {
        let cfg = random_config(&mut rng(seed), 4, 8, Mode::FrontEnd);
        if let Some(res) = solve_or_skip(&cfg) {
            let report = simulate(&cfg, &res).unwrap();
            prop_assert!(report.is_clean(), "{:?}", report.violations);
            prop_assert!(report.achieved_finish <= res.t_f + SIM_TOL * res.t_f.max(1.0));
        }
    }

    #[test]
    fn allocation_conserves_job(seed in any::<u64>(), fe in any::<bool>()) {
        let mode = if fe { Mode::FrontEnd } else { Mode::StoreForward };
        let cfg = random_config(&mut rng(seed), 4, 8, mode);
        if let Some(res) = solve_or_skip(&cfg) {
            prop_assert!((res.allocation.total() - cfg.job).abs() <= 1e-7 * cfg.job);
            prop_assert!(res.allocation.beta.iter().flatten().all(|&b| b >= -1e-9));
            let by_processor: f64 = res.allocation.processor_loads().iter().sum();
            prop_assert!((by_processor - cfg.job).abs() <= 1e-7 * cfg.job);
        }
    }

    #[test]
    fn node_order_does_not_change_optimum(seed in any::<u64>(), fe in any::<bool>()) {
        let mode = if fe { Mode::FrontEnd } else { Mode::StoreForward };
        let mut r = rng(seed);
        let cfg = random_config(&mut r, 3, 6, mode);
        let mut shuffled = cfg.clone();
        use rand::seq::SliceRandom;
        shuffled.sources.shuffle(&mut r);
        shuffled.processors.shuffle(&mut r);
        match (solve_or_skip(&cfg), solve_or_skip(&shuffled)) {
            (Some(a), Some(b)) => prop_assert!((a.t_f - b.t_f).abs() <= 1e-7 * a.t_f.max(1.0)),
            (None, None) => {}
            _ => prop_assert!(false, "feasibility depends on input order"),
        }
    }

    #[test]
    fn original_order_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cfg = random_config(&mut r, 3, 6, Mode::StoreForward);
        if let Some(res) = solve_or_skip(&cfg) {
            let back = res.clone().into_original_order().into_sorted_order();
            prop_assert_eq!(back, res.clone());
            // Loads land on the caller's nodes.
            let orig = res.clone().into_original_order();
            for (k, &i) in res.permutations.sources.0.iter().enumerate() {
                prop_assert!((orig.allocation.alpha[i] - res.allocation.alpha[k]).abs() <= 1e-9 * cfg.job);
            }
            let (sorted_loads, orig_loads) =
                (res.allocation.processor_loads(), orig.allocation.processor_loads());
            for (k, &j) in res.permutations.processors.0.iter().enumerate() {
                prop_assert!((orig_loads[j] - sorted_loads[k]).abs() <= 1e-9 * cfg.job);
            }
        }
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>()) {
        let cfg = random_config(&mut rng(seed), 4, 8, Mode::FrontEnd);
        let (once, _) = cfg.validate_and_normalize().unwrap();
        let (twice, perms) = once.validate_and_normalize().unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(perms.sources.is_identity() && perms.processors.is_identity());
        prop_assert!(once.is_sorted());
    }

    #[test]
    fn finish_time_scales_with_job(seed in any::<u64>(), k in 1.5f64..6.0, fe in any::<bool>()) {
        let mode = if fe { Mode::FrontEnd } else { Mode::StoreForward };
        let mut cfg = random_config(&mut rng(seed), 3, 6, mode);
        cfg.sources.iter_mut().for_each(|s| s.r = 0.0);
        let base = solve(&cfg).unwrap();
        let scaled = solve(&cfg.clone().with_job(k * cfg.job)).unwrap();
        prop_assert!((scaled.t_f - k * base.t_f).abs() <= 1e-9 * k * base.t_f.max(1.0) * 10.0);
    }

    #[test]
    fn more_processors_never_hurt(seed in any::<u64>(), fe in any::<bool>()) {
        let mode = if fe { Mode::FrontEnd } else { Mode::StoreForward };
        let cfg = random_config(&mut rng(seed), 3, 6, mode);
        let (pool, _) = cfg.validate_and_normalize().unwrap();
        let mut prev: Option<f64> = None;
        for m in 1..=pool.n_processors() {
            if let Some(res) = solve_or_skip(&pool.prefix(pool.n_sources(), m).unwrap()) {
                if let Some(p) = prev {
                    prop_assert!(res.t_f <= p + 1e-7 * p.max(1.0), "m={m}: {} > {p}", res.t_f);
                }
                prev = Some(res.t_f);
            }
        }
    }
}
