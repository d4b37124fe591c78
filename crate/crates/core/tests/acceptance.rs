//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use gtprob::decision::{
    regret_experiment, ConstantDecision, DecisionSpace, DecisionStrategy, IidTruth, LossFunction, LossSchedule,
    StrategyFactory, UniformDecision,
};
use gtprob::distributions::{DiscreteDistribution, OutcomeSpace};
use gtprob::forecasters::{
    classical_forecast, daltonism_forecast, DaltonismContext, DeviceSet, FixedForecaster, JointMeasure,
    RandomForecaster,
};
use gtprob::futures::{run_two_step_session, RandomPositions, RandomPrices, UniformReality};
use gtprob::harness::{
    ingest_forecast_stream, mean_gap_event, monte_carlo_ville, replay_stream,
    run_experiment, upper_probability_certificate, write_forecast_stream, ExperimentConfig, ExperimentKind,
    ForecastStream, ForecasterKind, InstanceFamily, RealityKind, ScepticKind, SpaceSpec,
};
use gtprob::protocol::{jeffreys_verdict, run_session, EvidenceLevel, HonestReality};
use gtprob::rng::session_rng;
use gtprob::sceptics::{
    kolmogorov_strategy, run_forcing_session, run_team_session, run_tracking_session, AdditiveSceptic,
    JeffreysTeam, LaplaceSceptic, RandomBetSceptic,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn hellinger(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

fn chi2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| b * b / a).sum()
}

fn jeffreys_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut monotone = true;
    for session in 0..1000u64 {
        let space = OutcomeSpace::numeric(2 + (session % 4) as usize).unwrap();
        let t = run_team_session(
            &space,
            &mut RandomForecaster::new(space.clone()),
            &mut RandomForecaster::new(space.clone()),
            &mut JeffreysTeam,
            &mut HonestReality,
            200,
            session,
        )
        .unwrap();
        let mut expected = 0.0;
        let l1 = t.capital_1.log_values();
        let l2 = t.capital_2.log_values();
        for (n, s) in t.steps.iter().enumerate() {
            expected -= hellinger(s.forecast_1.probs(), s.forecast_2.probs()).ln();
            let mean = 0.5 * (l1[n + 1] + l2[n + 1]);
            worst = worst.max((mean - expected).abs());
            let prev = 0.5 * (l1[n] + l2[n]);
            monotone &= mean >= prev;
        }
    }
    outcome(
        worst <= 1e-9 && monotone,
        format!("max residual {worst:.3e}, geometric mean nondecreasing: {monotone}"),
    )
}

fn constant_gap_growth() -> Outcome {
    let p1 = DiscreteDistribution::bernoulli(0.9).unwrap();
    let p2 = DiscreteDistribution::bernoulli(0.1).unwrap();
    let space = p1.space().clone();
    let n = 50;
    let t = run_team_session(
        &space,
        &mut FixedForecaster(p1),
        &mut FixedForecaster(p2),
        &mut JeffreysTeam,
        &mut HonestReality,
        n,
        11,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for k in 0..=n {
        let g = (t.capital_1.values()[k] * t.capital_2.values()[k]).sqrt();
        let expected = (1.0 / 0.6f64).powi(k as i32);
        worst = worst.max((g - expected).abs() / expected);
    }
    let at10 = (t.capital_1.values()[10] * t.capital_2.values()[10]).sqrt();
    let best = t.capital_1.values()[10].max(t.capital_2.values()[10]);
    let decisive = jeffreys_verdict(best).unwrap().level == EvidenceLevel::Decisive;
    outcome(
        worst <= 1e-9 && at10 > 100.0 && decisive,
        format!("max relative error {worst:.3e}; sqrt(K1 K2) at n=10 is {at10:.2}, best capital {best:.2}"),
    )
}

fn tracking_guarantee() -> Outcome {
    let mut tight_fail = 0;
    let mut crude_fail = 0;
    let mut worst_tight = f64::INFINITY;
    for session in 0..1000u64 {
        let space = OutcomeSpace::numeric(2 + (session % 4) as usize).unwrap();
        let t = run_tracking_session(
            &space,
            &mut RandomForecaster::new(space.clone()),
            &mut RandomForecaster::new(space.clone()),
            &mut RandomBetSceptic,
            &mut HonestReality,
            200,
            session,
        )
        .unwrap();
        let k1 = t.capital_1.values();
        let k2 = t.capital_2.values();
        let mut chi_product = 1.0;
        let mut rho_sum = 0.0;
        for (n, s) in t.steps.iter().enumerate() {
            let c = chi2(s.forecast_1.probs(), s.forecast_2.probs());
            chi_product *= 1.0 / c;
            let rho: f64 = s
                .forecast_1
                .probs()
                .iter()
                .zip(s.forecast_2.probs())
                .map(|(p, q)| (p - q) * (p - q) / p)
                .sum();
            rho_sum += rho;
            let bound = (k1[n + 1] * chi_product).sqrt();
            let scale = bound.max(1.0);
            worst_tight = worst_tight.min((k2[n + 1] - bound) / scale);
            if k2[n + 1] < bound - 1e-9 * scale {
                tight_fail += 1;
            }
            if k1[n + 1] > 0.0 {
                let lhs = k2[n + 1].ln();
                let rhs = 0.5 * k1[n + 1].ln() - 0.5 * rho_sum;
                if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
                    crude_fail += 1;
                }
            }
        }
    }
    outcome(
        tight_fail == 0 && crude_fail == 0,
        format!("violations: tight {tight_fail}, crude {crude_fail}; smallest scaled slack {worst_tight:.3e}"),
    )
}

/// `1 + (S² − Q)/N` from the raw gaps.
fn kolmogorov_closed_form(forecasts: &[f64], outcomes: &[f64], horizon: usize) -> f64 {
    let s: f64 = forecasts.iter().zip(outcomes).map(|(a, y)| y - a).sum();
    let q: f64 = forecasts.iter().zip(outcomes).map(|(a, y)| (y - a) * (y - a)).sum();
    1.0 + (s * s - q) / horizon as f64
}

fn forcing_dichotomy() -> Outcome {
    let mut checked = 0usize;
    let mut failures = 0usize;
    let mut negative = 0usize;
    let mut mismatch = 0.0f64;
    let mut check = |delta: f64, a: &[f64], y: &[f64]| {
        let n = a.len();
        let t = run_forcing_session(&mut kolmogorov_strategy(n), n, a, y).unwrap();
        let k_n = kolmogorov_closed_form(a, y, n);
        mismatch = mismatch.max((k_n - t.final_capital()).abs());
        let mean_gap = a.iter().zip(y).map(|(a, y)| y - a).sum::<f64>() / n as f64;
        if !(t.final_capital() >= 1.0 / delta || mean_gap < (delta * n as f64).powf(-0.5)) {
            failures += 1;
        }
        if t.steps.iter().any(|s| s.capital < 0.0) {
            negative += 1;
        }
        checked += 1;
    };
    let mut rng = session_rng(2024);
    for &delta in &[0.04, 0.25, 1.0] {
        let mut sequences: Vec<Vec<f64>> = vec![vec![0.0; 8], vec![0.5; 8], vec![1.0; 8]];
        for _ in 0..20 {
            sequences.push((0..8).map(|_| rng.gen()).collect());
        }
        for a in &sequences {
            for bits in 0u32..256 {
                let y: Vec<f64> = (0..8).map(|i| f64::from((bits >> (7 - i)) & 1)).collect();
                check(delta, a, &y);
            }
        }
        for &n in &[64usize, 256] {
            for path in 0..10_000 {
                let theta: f64 = rng.gen();
                let a: Vec<f64> = if path % 2 == 0 {
                    (0..n).map(|_| rng.gen()).collect()
                } else {
                    vec![rng.gen(); n]
                };
                let y: Vec<f64> = if path % 3 == 0 {
                    (0..n).map(|_| rng.gen()).collect()
                } else {
                    (0..n).map(|_| f64::from(rng.gen::<f64>() < theta)).collect()
                };
                check(delta, &a, &y);
            }
            for level in [0.0, 0.5, 1.0] {
                for target in [0.0, 1.0] {
                    check(delta, &vec![level; n], &vec![target; n]);
                }
            }
        }
    }
    outcome(
        failures == 0 && negative == 0 && mismatch <= 1e-9,
        format!(
            "{checked} transcripts, {failures} dichotomy failures, {negative} negative, closed-form gap {mismatch:.1e}"
        ),
    )
}

fn ville() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::Ville, 77, 1000);
    c.paths = 10_000;
    c.sceptic = ScepticKind::Team;
    c.forecaster = ForecasterKind::Uniform;
    c.second_forecaster = Some(ForecasterKind::Perturbed(0.3));
    c.thresholds = vec![10.0, 100.0];
    let r = monte_carlo_ville(&c).unwrap();
    let m = r.paths as f64;
    let mut ok = true;
    let mut parts = Vec::new();
    for e in &r.estimates {
        let bound = 1.0 / e.threshold;
        let sigma = (bound * (1.0 - bound) / m).sqrt();
        let freq = e.exceedances as f64 / m;
        ok &= freq <= bound + 3.0 * sigma;
        parts.push(format!("c={}: {freq:.4} vs {:.4}", e.threshold, bound + 3.0 * sigma));
    }
    outcome(ok, parts.join(", "))
}

fn tables() -> Outcome {
    let mut ok = true;
    let devices = DeviceSet::default();
    for m in [2usize, 6, 37] {
        let f = classical_forecast(devices.device(m).unwrap());
        ok &= f.len() == m && f.probs().iter().all(|&p| p == 1.0 / m as f64);
    }
    let table = [
        ("NNB", 0.0),
        ("NNG", 0.0),
        ("NCG", 0.0),
        ("NAG", 0.0),
        ("ANB", 0.0),
        ("ANG", 0.0),
        ("NCB", 0.5),
        ("ACB", 0.5),
        ("ACG", 0.5),
        ("NAB", 1.0),
        ("AAB", 1.0),
        ("AAG", 1.0),
    ];
    let contexts = DaltonismContext::all();
    ok &= contexts.len() == 12;
    for ctx in contexts {
        let expected = table.iter().find(|(code, _)| *code == ctx.code()).map(|e| e.1);
        ok &= expected == Some(daltonism_forecast(ctx));
    }
    outcome(ok, "uniform 1/m for m in {2, 6, 37}; twelve daltonism contexts")
}

fn conditioning() -> Outcome {
    let mut rng = session_rng(7);
    let mut worst = 0.0f64;
    let mut paths = 0usize;
    for _ in 0..100 {
        let size = rng.gen_range(2..=3usize);
        let horizon = rng.gen_range(1..=6usize);
        let space = OutcomeSpace::numeric(size).unwrap();
        let total = size.pow(horizon as u32);
        let raw: Vec<f64> = (0..total).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let measure = JointMeasure::new(space, horizon, weights.clone()).unwrap();
        for (index, &weight) in weights.iter().enumerate() {
            let mut path = vec![0usize; horizon];
            let mut rest = index;
            for slot in path.iter_mut().rev() {
                *slot = rest % size;
                rest /= size;
            }
            let mut product = 1.0;
            for k in 0..horizon {
                product *= measure.condition(&path[..k]).unwrap().prob(path[k]);
            }
            worst = worst.max((product - weight).abs());
            paths += 1;
        }
    }
    outcome(worst <= 1e-12, format!("{paths} paths, max deviation {worst:.2e}"))
}

fn futures() -> Outcome {
    let mut worst = 0.0f64;
    let mut inexact = 0usize;
    let mut rng = session_rng(5);
    for session in 0..1000u64 {
        let n = rng.gen_range(1..=100usize);
        let mut prices = RandomPrices {
            consistent: session % 4 == 0,
        };
        let t = run_two_step_session(
            &mut prices,
            &mut RandomPositions { scale: 5.0 },
            &mut UniformReality,
            n,
            session,
        )
        .unwrap();
        let mut k = 1.0;
        let mut legs = Vec::new();
        for (i, s) in t.steps.iter().enumerate() {
            if i > 0 {
                let prev = &t.steps[i - 1];
                let leg = prev.position_b * (s.a - prev.b);
                k += leg;
                legs.push(leg);
                worst = worst.max((k - prev.capital.unwrap()).abs());
            }
            let leg = s.position_a * (s.y - s.a);
            k += leg;
            legs.push(leg);
            worst = worst.max((k - s.capital_mid).abs());
        }
        let d = gtprob::futures::settlement_decomposition(&t);
        if d.accumulated_capital() != t.final_capital() {
            inexact += 1;
        }
        let pairs: Vec<f64> = d
            .contracts
            .iter()
            .flat_map(|c| c.intermediate.into_iter().chain([c.final_leg]))
            .collect();
        if pairs != legs || d.unsettled.map(|u| u.profit) != Some(0.0) {
            inexact += 1;
        }
    }
    outcome(
        worst <= 1e-9 && inexact == 0,
        format!("max reconstruction error {worst:.2e}; {inexact} inexact decompositions"),
    )
}

fn regret() -> Outcome {
    let space = OutcomeSpace::binary();
    let truth = IidTruth::new(DiscreteDistribution::bernoulli(0.6).unwrap(), 2).unwrap();
    let always_0: &StrategyFactory = &|| Box::new(ConstantDecision(0)) as Box<dyn DecisionStrategy>;
    let always_1: &StrategyFactory = &|| Box::new(ConstantDecision(1)) as Box<dyn DecisionStrategy>;
    let random: &StrategyFactory = &|| Box::new(UniformDecision) as Box<dyn DecisionStrategy>;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1usize, 2] {
        let loss = LossFunction::from_fn(DecisionSpace::from_outcomes(&space), space.clone(), k, |d, w| {
            (d as f64 - w[k - 1] as f64).abs()
        })
        .unwrap();
        let schedule = LossSchedule::Constant(Arc::new(loss));
        let r = regret_experiment(
            &truth,
            &schedule,
            &[always_0, always_1, random],
            k,
            2000,
            10_000,
            &[0.3],
            900 + k as u64,
        )
        .unwrap();
        let bound = (-2000.0 * 0.09 / (8.0 * (k * k) as f64)).exp();
        let sigma = (bound * (1.0 - bound) / 10_000.0).sqrt();
        for alt in &r.alternatives {
            let freq = alt.tails[0].frequency;
            ok &= freq <= bound + 3.0 * sigma;
            parts.push(format!("K={k} {}: {freq}", alt.strategy));
        }
    }
    outcome(ok, parts.join(", "))
}

fn certificate() -> Outcome {
    let strategy = || Box::new(kolmogorov_strategy(8)) as Box<dyn AdditiveSceptic>;
    let c = upper_probability_certificate(
        &strategy,
        &mean_gap_event(0.25),
        0.25,
        &InstanceFamily::exhaustive_binary(8),
    )
    .unwrap();
    outcome(
        c.holds && c.transcripts_checked == 256,
        format!("holds: {}, transcripts checked: {}", c.holds, c.transcripts_checked),
    )
}

fn determinism() -> Outcome {
    let mut configs = Vec::new();
    let mut session = ExperimentConfig::new(ExperimentKind::Session, 3, 300);
    session.space = SpaceSpec::Numeric(3);
    session.forecaster = ForecasterKind::Random;
    session.sceptic = ScepticKind::RandomBet;
    configs.push(session);
    let mut team = ExperimentConfig::new(ExperimentKind::Team, 4, 300);
    team.second_forecaster = Some(ForecasterKind::Perturbed(0.4));
    configs.push(team);
    let mut tracking = ExperimentConfig::new(ExperimentKind::Tracking, 5, 300);
    tracking.forecaster = ForecasterKind::Random;
    tracking.second_forecaster = Some(ForecasterKind::Random);
    tracking.sceptic = ScepticKind::Tracking;
    configs.push(tracking);
    let mut ville = ExperimentConfig::new(ExperimentKind::Ville, 6, 200);
    ville.paths = 100;
    ville.sceptic = ScepticKind::Team;
    ville.second_forecaster = Some(ForecasterKind::Perturbed(0.3));
    configs.push(ville);
    let mut regret = ExperimentConfig::new(ExperimentKind::Regret, 7, 200);
    regret.paths = 100;
    regret.forecaster = ForecasterKind::Fixed(vec![0.4, 0.6]);
    configs.push(regret);
    configs.push(ExperimentConfig::new(ExperimentKind::Market, 8, 100));
    let mut biased = ExperimentConfig::new(ExperimentKind::Session, 9, 100);
    biased.reality = RealityKind::Biased(vec![0.2, 0.8]);
    biased.sceptic = ScepticKind::Laplace;
    configs.push(biased);

    let mut identical = 0;
    for c in &configs {
        let a = run_experiment(c).unwrap().to_json().unwrap();
        let b = run_experiment(c).unwrap().to_json().unwrap();
        identical += usize::from(a == b);
    }

    let space = OutcomeSpace::numeric(3).unwrap();
    let original = run_session(
        &space,
        &mut RandomForecaster::new(space.clone()),
        &mut LaplaceSceptic,
        &mut HonestReality,
        500,
        12,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stream.csv");
    let stream = ForecastStream::from_transcript(&original);
    write_forecast_stream(&path, &stream).unwrap();
    let ingested = ingest_forecast_stream(&path, Some(&space)).unwrap();
    let replayed = replay_stream(&ingested, &mut LaplaceSceptic, 12, 1e-9).unwrap();
    let worst = original
        .capital
        .values()
        .iter()
        .zip(replayed.capital.values())
        .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let outcomes_match = ingested.outcomes == stream.outcomes && ingested.forecasts.len() == stream.forecasts.len();
    outcome(
        identical == configs.len() && worst <= 1e-9 && outcomes_match,
        format!(
            "{identical}/{} reports byte-identical; replay relative error {worst:.2e}",
            configs.len()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("1 team identity over 1000 sessions", jeffreys_identity),
        ("2 constant-gap growth", constant_gap_growth),
        ("3 tracking guarantee over 1000 sessions", tracking_guarantee),
        ("4 forcing dichotomy", forcing_dichotomy),
        ("5 Ville inequality", ville),
        ("6 classical and daltonism tables", tables),
        ("7 conditioning coherence", conditioning),
        ("8 futures settlement", futures),
        ("9 regret tails", regret),
        ("10 exhaustive certificate", certificate),
        ("11 determinism and replay", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let r = run();
        let status = if r.ok { "PASS" } else { "FAIL" };
        println!(
            "acceptance {status} [{name}] {} ({:.1}s)",
            r.detail,
            started.elapsed().as_secs_f64()
        );
        failed += usize::from(!r.ok);
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
