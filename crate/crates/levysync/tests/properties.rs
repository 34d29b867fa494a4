use levysync::analytic::{chi_general_inf, chi_markov_inf, chi_markov_t};
use levysync::levy::LevySpec;
use levysync::limits_stats::{empirical_cf, rescale, RescaleRule};
use levysync::me_dist::MeDistribution;
use levysync::polyrat::{Polynomial, RationalFunction};
use levysync::simulator::{
    chi_mc, contraction_oracle, sample_differences, v_statistic, v_statistic_pairwise, ClockMode, DifferenceSample,
    ScriptedClock, SenderRule, SyncSystemConfig,
};
use levysync::{k_n, l_n, Complex64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_round_trip(rs in prop::collection::vec(-4.0f64..-0.1, 1..6)) {
        let mut sorted = rs.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.05));
        let p = Polynomial::from_roots(&sorted.iter().map(|&r| c(r, 0.0)).collect::<Vec<_>>());
        let mut found: Vec<f64> = p.roots().unwrap().iter().map(|z| z.re).collect();
        found.sort_by(f64::total_cmp);
        for (a, b) in found.iter().zip(&sorted) {
            prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn partial_fractions_reconstruct(poles in prop::collection::vec(-5.0f64..-0.2, 1..5), num in prop::collection::vec(-2.0f64..2.0, 1..3), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let mut sorted = poles.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.1));
        prop_assume!(num.len() <= sorted.len());
        let den = Polynomial::from_roots(&sorted.iter().map(|&r| c(r, 0.0)).collect::<Vec<_>>());
        let f = RationalFunction::new(Polynomial::from_real(&num), den).unwrap();
        let z = c(x, y);
        prop_assume!(sorted.iter().all(|&r| (z - r).norm() > 0.2));
        let pf = f.partial_fractions().unwrap();
        let (a, b) = (f.eval(z).unwrap(), pf.eval(z).unwrap());
        prop_assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()));
    }

    #[test]
    fn real_rational_conjugate_symmetry(stages in 1usize..5, mean in 0.2f64..5.0, x in 0.0f64..4.0, y in -4.0f64..4.0) {
        let d = MeDistribution::erlang(stages, mean).unwrap();
        let z = c(x, y);
        let (a, b) = (d.p_star_eval(z.conj()).unwrap(), d.p_star_eval(z).unwrap().conj());
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn erlang_moments_and_mass(stages in 1usize..=8, mean in 0.2f64..5.0) {
        let d = MeDistribution::erlang(stages, mean).unwrap();
        prop_assert!((d.p_star_eval(c(0.0, 0.0)).unwrap().re - 1.0).abs() < 1e-12);
        prop_assert!((d.mean() - mean).abs() < 1e-10 * mean);
        let m2 = mean * mean * (stages as f64 + 1.0) / stages as f64;
        prop_assert!((d.moment(2).unwrap() - m2).abs() < 1e-9 * m2);
    }

    #[test]
    fn markov_chi_is_monotone_in_eta(n in 2usize..200, m in 0.1f64..10.0, e1 in 0.0f64..50.0, de in 1e-3f64..10.0) {
        let (a, b) = (chi_markov_inf(n, m, e1), chi_markov_inf(n, m, e1 + de));
        prop_assert!(a > b && b > 0.0 && a <= 1.0);
    }

    #[test]
    fn markov_chi_t_interpolates(n in 2usize..50, eta in 0.0f64..5.0, chi0 in 0.0f64..1.0, t in 0.0f64..30.0) {
        let inf = chi_markov_inf(n, 1.0, eta);
        let v = chi_markov_t(n, 1.0, eta, t, chi0);
        prop_assert!((chi_markov_t(n, 1.0, eta, 0.0, chi0) - chi0).abs() < 1e-12);
        prop_assert!(v >= chi0.min(inf) - 1e-12 && v <= chi0.max(inf) + 1e-12);
    }

    #[test]
    fn contraction_holds(x in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 2..7), l in prop::collection::vec(-3.0f64..3.0, 2)) {
        let (avg, expect) = contraction_oracle(&x, &l).unwrap();
        prop_assert!((avg - expect).abs() < 1e-12);
    }

    #[test]
    fn v_statistic_forms_agree(x in prop::collection::vec(-5.0f64..5.0, 4..24), l in -3.0f64..3.0) {
        let n = x.len() / 2;
        let x = &x[..2 * n];
        let lam = [l, 0.5 * l];
        let (a, b) = (v_statistic(x, n, 2, &lam), v_statistic_pairwise(x, n, 2, &lam));
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn unit_rescale_is_identity(v in prop::collection::vec(-10.0f64..10.0, 2..40), n in 2usize..50) {
        let s = DifferenceSample::from_values(v.clone(), 1);
        let r = rescale(&s, &RescaleRule::Scalar { b: 1.0 }, n).unwrap();
        prop_assert_eq!(&r.values, &v);
        let id = RescaleRule::Matrix { exponent: vec![vec![0.5]] };
        let r = rescale(&s, &id, 1).unwrap();
        for (a, b) in r.values.iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrized_sample_has_real_cf(v in prop::collection::vec(-10.0f64..10.0, 50..120), l in 0.0f64..4.0) {
        let mut both = v.clone();
        both.extend(v.iter().map(|x| -x));
        let t = empirical_cf(&DifferenceSample::from_values(both, 1), &[vec![l]]).unwrap();
        prop_assert!(t.points[0].im.abs() < 1e-12);
        prop_assert!(t.points[0].re.abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn general_chi_decreases_in_eta() {
    let d = MeDistribution::erlang(2, 1.0).unwrap();
    let vals: Vec<f64> = [0.01, 0.1, 0.5, 1.0, 3.0, 10.0].iter().map(|&e| chi_general_inf(&d, 10, e).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn scripted_epochs_follow_the_one_step_recurrence() {
    // uniform senders on a fixed epoch sequence: E V contracts by k_N then gains l_N
    let n = 4;
    let epochs = vec![0.4, 0.9, 1.0, 1.7];
    let horizon = 2.2;
    let sys = SyncSystemConfig::new(n, LevySpec::brownian(1.0), MeDistribution::exponential(1.0).unwrap(), horizon)
        .with_clock(ClockMode::Scripted(ScriptedClock { epochs: epochs.clone(), senders: None }));
    let lam = 0.8;
    let eta = lam * lam;
    let mut chi = 1.0;
    let mut last = 0.0;
    for &t in &epochs {
        chi = k_n(n) * chi * (-(t - last) * eta).exp() + l_n(n);
        last = t;
    }
    chi *= (-(horizon - last) * eta).exp();
    let rows = chi_mc(&sys, &[vec![lam]], 40_000, 77, &[horizon]).unwrap();
    let r = &rows[0];
    assert!((r.estimate - chi).abs() < 4.0 * r.se, "{} vs {chi} (se {})", r.estimate, r.se);
}

#[test]
fn equal_seeds_give_equal_samples() {
    let sys = SyncSystemConfig::new(6, LevySpec::brownian(1.0), MeDistribution::erlang(2, 1.0).unwrap(), 20.0);
    let a = sample_differences(&sys, (0, 1), 300, 5).unwrap();
    let b = sample_differences(&sys, (0, 1), 300, 5).unwrap();
    let c = sample_differences(&sys, (0, 1), 300, 6).unwrap();
    assert_eq!(a.values, b.values);
    assert_ne!(a.values, c.values);
}

#[test]
fn binary_round_trip() {
    let sys = SyncSystemConfig::new(3, LevySpec::brownian(1.0), MeDistribution::exponential(1.0).unwrap(), 5.0);
    let s = sample_differences(&sys, (0, 2), 50, 1).unwrap();
    let mut buf = Vec::new();
    s.write_binary(&mut buf).unwrap();
    let back = DifferenceSample::read_binary(&mut buf.as_slice()).unwrap();
    assert_eq!(back.values, s.values);
    assert_eq!(back.dim, 1);
}

#[test]
fn sender_rules_agree_for_exponential_clocks() {
    let (n, t, lam) = (5, 3.0, 1.0);
    let base = SyncSystemConfig::new(n, LevySpec::brownian(1.0), MeDistribution::exponential(1.0).unwrap(), t);
    let expect = chi_markov_t(n, 1.0, lam * lam, t, 1.0);
    for rule in [SenderRule::ClockOwner, SenderRule::UniformPair] {
        let sys = base.clone().with_sender(rule);
        let r = &chi_mc(&sys, &[vec![lam]], 20_000, 3, &[t]).unwrap()[0];
        assert!((r.estimate - expect).abs() < 4.0 * r.se, "{rule:?}: {} vs {expect}", r.estimate);
    }
}
