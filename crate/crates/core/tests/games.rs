use proptest::prelude::*;

use gtprob::distributions::{DiscreteDistribution, OutcomeSpace};
use gtprob::forecasters::{
    daltonism_forecast, ClassicalForecaster, DaltonismContext, DaltonismForecaster, DeviceSet, FixedForecaster,
    PerturbedForecaster, RandomForecaster,
};
use gtprob::futures::{
    run_two_step_session_with_margin, MarginRule, RandomPositions, RandomPrices, UniformReality,
};
use gtprob::protocol::{run_session, ConstantReality, HonestReality};
use gtprob::rng::session_rng;
use gtprob::sceptics::{
    forcing_dichotomy_check, kolmogorov_strategy, run_forcing_session, run_team_session, ClassicalForcingSceptic,
    JeffreysTeam, LaplaceSceptic, RandomBetSceptic,
};

use rand::Rng;

fn daltonism_births(n: usize, seed: u64) -> (Vec<DaltonismContext>, Vec<usize>) {
    let all = DaltonismContext::all();
    let mut rng = session_rng(seed);
    let contexts: Vec<_> = (0..n).map(|_| all[rng.gen_range(0..all.len())]).collect();
    let outcomes = contexts
        .iter()
        .map(|&c| usize::from(rng.gen::<f64>() < daltonism_forecast(c)))
        .collect();
    (contexts, outcomes)
}

#[test]
fn daltonism_frequencies_are_forced() {
    let n = 400;
    let (contexts, outcomes) = daltonism_births(n, 3);
    let forecasts: Vec<f64> = contexts.iter().map(|&c| daltonism_forecast(c)).collect();
    let y: Vec<f64> = outcomes.iter().map(|&o| o as f64).collect();
    let t = run_forcing_session(&mut kolmogorov_strategy(n), n, &forecasts, &y).unwrap();
    assert!(t.min_capital() >= 0.0);
    assert!(forcing_dichotomy_check(&t, 0.25));
    // Honest births keep the gap small, so no fortune is made.
    assert!(t.final_capital() < 4.0);
}

#[test]
fn daltonism_forecaster_plays_the_one_step_game() {
    let (contexts, outcomes) = daltonism_births(60, 9);
    let t = run_session(
        &OutcomeSpace::binary(),
        &mut DaltonismForecaster::new(contexts),
        &mut LaplaceSceptic,
        &mut gtprob::protocol::ScriptedReality::new(outcomes),
        60,
        9,
    )
    .unwrap();
    assert_eq!(t.steps.len(), 60);
    assert!(t.final_capital() > 0.0);
}

#[test]
fn a_colour_blind_son_of_normal_parents_is_punished() {
    // The forecast for NNB is 0; a Sceptic staking on 1 wins with no risk.
    let space = OutcomeSpace::binary();
    let t = run_session(
        &space,
        &mut FixedForecaster(DiscreteDistribution::bernoulli(0.0).unwrap()),
        &mut LaplaceSceptic,
        &mut ConstantReality(1),
        1,
        0,
    )
    .unwrap();
    assert!(t.final_capital() >= 1.0);
}

#[test]
fn classical_forcing_keeps_capital_nonnegative() {
    let devices = DeviceSet::default();
    for &m in devices.sizes() {
        let n = 300;
        let mut forecaster = ClassicalForecaster::new(&devices, vec![m; n]).unwrap();
        let space = forecaster.space().clone();
        let t = run_session(
            &space,
            &mut forecaster,
            &mut ClassicalForcingSceptic::kolmogorov(n),
            &mut HonestReality,
            n,
            m as u64,
        )
        .unwrap();
        assert!(t.capital.values().iter().all(|&k| k >= 0.0), "m = {m}");
    }
}

#[test]
fn classical_forcing_profits_from_a_loaded_device() {
    let devices = DeviceSet::default();
    let n = 200;
    let mut forecaster = ClassicalForecaster::new(&devices, vec![6; n]).unwrap();
    let space = forecaster.space().clone();
    let t = run_session(
        &space,
        &mut forecaster,
        &mut ClassicalForcingSceptic::kolmogorov(n),
        &mut ConstantReality(5),
        n,
        1,
    )
    .unwrap();
    assert!(t.final_capital() > 20.0);
}

#[test]
fn margin_rule_keeps_market_capital_nonnegative() {
    let margin = MarginRule { lower: 0.0, upper: 1.0 };
    let mut refused = 0;
    for seed in 0..50 {
        match run_two_step_session_with_margin(
            &mut RandomPrices::default(),
            &mut RandomPositions { scale: 0.2 },
            &mut UniformReality,
            30,
            seed,
            Some(margin),
        ) {
            Ok(t) => assert!(t.steps.iter().all(|s| s.capital_mid >= -1e-12)),
            Err(_) => refused += 1,
        }
    }
    assert!(refused < 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_reality_never_bankrupts_bounded_bets(seed in any::<u64>(), m in 2usize..6) {
        let space = OutcomeSpace::numeric(m).unwrap();
        let t = run_session(
            &space,
            &mut RandomForecaster::new(space.clone()),
            &mut RandomBetSceptic,
            &mut HonestReality,
            50,
            seed,
        )
        .unwrap();
        prop_assert!(t.capital.values().iter().all(|&k| k >= 0.0));
    }

    #[test]
    fn team_geometric_mean_never_falls(seed in any::<u64>(), spread in 0.0f64..0.9) {
        let base = DiscreteDistribution::bernoulli(0.5).unwrap();
        let space = base.space().clone();
        let t = run_team_session(
            &space,
            &mut FixedForecaster(base.clone()),
            &mut PerturbedForecaster::new(base, spread).unwrap(),
            &mut JeffreysTeam,
            &mut HonestReality,
            40,
            seed,
        )
        .unwrap();
        let means = t.log_geometric_means();
        prop_assert!(means.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn kolmogorov_capital_matches_closed_form(
        gaps in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..40)
    ) {
        let n = gaps.len();
        let (a, y): (Vec<f64>, Vec<f64>) = gaps.into_iter().unzip();
        let t = run_forcing_session(&mut kolmogorov_strategy(n), n, &a, &y).unwrap();
        let s: f64 = a.iter().zip(&y).map(|(a, y)| y - a).sum();
        let q: f64 = a.iter().zip(&y).map(|(a, y)| (y - a).powi(2)).sum();
        prop_assert!((t.final_capital() - (1.0 + (s * s - q) / n as f64)).abs() < 1e-9);
        prop_assert!(t.min_capital() >= 0.0);
    }
}
