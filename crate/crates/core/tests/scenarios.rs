use lap_core::mech::{expected_revenue, Lap, Lookahead, PoolSchedule};
use lap_core::scenarios::{
    build_correlated, build_example1, correlated_opt_benchmark, gen_corpus, gen_random_instance,
    interval_simulation, lap_interval_bound, lap_interval_revenue_closed_form, CorpusSpec,
};
use lap_core::verify::{brute_force_search, ScheduleFamily};

#[test]
fn example1_formulas_across_eps() {
    for eps in [0.5, 0.2, 0.1, 0.01, 0.001] {
        let inst = build_example1(eps).unwrap();
        let la = expected_revenue(&inst, &Lookahead::new(&inst));
        assert!((la - (1.0 + eps)).abs() < 1e-12, "eps {eps}");
        // pooling beats the lookahead price once 1.5 - eps/2 > 1 + eps
        let best = brute_force_search(&inst, &ScheduleFamily::exhaustive(&inst, 1));
        let expect = (1.5 - eps / 2.0).max(1.0 + eps);
        assert!((best.revenue - expect).abs() < 1e-12, "eps {eps}: {best:?}");
    }
}

#[test]
fn correlated_decoder_and_marginal() {
    for (e1, e2) in [(0.1, 0.25), (0.02, 0.05), (0.1, 0.05)] {
        let c = build_correlated(e1, e2, None).unwrap();
        assert_eq!(c.decoder_failures(), 0);
        let m = c.instance.marginal(0);
        assert_eq!(m.len() as u64, c.k1);
        for &p in m.support() {
            assert!((p * m.quantile(p) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn correlated_slices_earn_two_minus_eps2() {
    let c = build_correlated(0.02, 0.05, None).unwrap();
    let opt = c.opt_mechanism();
    let mut by_slice = std::collections::BTreeMap::<u64, (f64, f64)>::new();
    for p in c.instance.profiles() {
        let e = by_slice.entry(p.values[0] as u64).or_default();
        e.0 += p.mass;
        e.1 += p.mass * lap_core::mech::Mechanism::outcome(&opt, &p.values).revenue();
    }
    for (w, (mass, rev)) in by_slice {
        assert!((rev / mass - (2.0 - 0.05) * w as f64).abs() < 1e-9 * w as f64);
    }
    let h: f64 = (1..=50).map(|k| 1.0 / k as f64).sum();
    assert!((correlated_opt_benchmark(&c) - 1.95 * h).abs() < 1e-9);
}

#[test]
fn correlated_rejects_bad_parameters() {
    assert!(build_correlated(0.05, 0.05, None).is_err());
    assert!(build_correlated(0.1, 0.25, Some(0.2)).is_err());
    assert!(build_correlated(0.1, 0.3, None).is_err());
}

#[test]
fn lookahead_on_correlated_is_about_half() {
    let c = build_correlated(0.02, 0.05, None).unwrap();
    let la = expected_revenue(&c.instance, &Lookahead::new(&c.instance));
    let opt = correlated_opt_benchmark(&c);
    // lookahead sells to bidder 2 at roughly v1
    assert!((la / opt - 1.0 / 1.95).abs() < 1e-3);
}

#[test]
fn closed_form_bound() {
    for s in [0.1, 0.5, 1.0, 3.0] {
        for f in [1.01, 1.5, 2.0, 10.0, 1000.0] {
            let t = s * f;
            assert!(lap_interval_revenue_closed_form(s, t).unwrap() <= lap_interval_bound(s, t));
        }
    }
    let near = lap_interval_revenue_closed_form(2.0, 2.0 + 1e-9).unwrap();
    assert!(near.abs() < 1e-8);
}

#[test]
fn interval_simulation_converges() {
    let mut prev = f64::INFINITY;
    for n in [50, 200, 800] {
        let sim = interval_simulation(1.0, 4.0, n).unwrap();
        let rev = expected_revenue(
            &sim.instance,
            &Lap::new(&sim.instance, sim.schedule.clone()),
        );
        let err = (rev * sim.scale - lap_interval_revenue_closed_form(1.0, sim.t).unwrap()).abs();
        assert!(err < prev);
        prev = err;
    }
    assert_eq!(
        interval_simulation(1.0, 4.0, 10)
            .unwrap()
            .schedule
            .jumps()
            .len(),
        1
    );
    let _ = PoolSchedule::empty();
}

#[test]
fn corpus_is_reproducible() {
    let a = gen_corpus(3, 5, CorpusSpec::default());
    let b = gen_corpus(3, 5, CorpusSpec::default());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.seed, y.seed);
        assert_eq!(x.instance.profiles(), y.instance.profiles());
        assert!((2..=3).contains(&x.instance.bidders()));
    }
    assert!(gen_random_instance(1, 5, 3, (1.0, 10.0)).is_err());
}
