//! Two-steps-ahead point prediction with futures settlement.
//!
//! ```text
//! K_0 := 1
//! Forecaster announces a_1, b_1;  Sceptic announces A_1, B_1;  Reality announces y_1
//! K'_1 := K_0 + A_1 (y_1 − a_1)
//! FOR n = 2, 3, …:
//!     Forecaster announces a_n, b_n
//!     K_{n-1} := K'_{n-1} + B_{n-1} (a_n − b_{n-1})        intermediate settlement of Φ_n
//!     Sceptic announces A_n, B_n
//!     Reality announces y_n
//!     K'_n := K_{n-1} + A_n (y_n − a_n)                     final settlement of Φ_n
//! ```
//!
//! Contract `Φ_n` pays `y_n`; it is first priced at `b_{n-1}` and revised to
//! `a_n`. Positions are unconstrained reals, so capital may go negative
//! unless a [`MarginRule`] is installed. The contract `Φ_{N+1}` bought at the
//! last step expires unsettled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{session_rng, SessionRng};
use rand::Rng;

/// One step of a market session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketStep {
    pub index: usize,
    /// Revised price `F_n = a_n` of `Φ_n`.
    pub a: f64,
    /// Initial price `F⁻_{n+1} = b_n` of `Φ_{n+1}`.
    pub b: f64,
    pub position_a: f64,
    pub position_b: f64,
    pub y: f64,
    /// `K'_n`, after final settlement of `Φ_n`.
    pub capital_mid: f64,
    /// `K_n`, after intermediate settlement of `Φ_{n+1}`; `None` until
    /// `a_{n+1}` is announced.
    pub capital: Option<f64>,
}

/// Position in `Φ_{N+1}` left open when a session ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PendingContract {
    pub contract: usize,
    pub price: f64,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketTranscript {
    pub steps: Vec<MarketStep>,
    pub pending: Option<PendingContract>,
    pub seed: Option<u64>,
    pub forecaster: String,
    pub sceptic: String,
    pub reality: String,
}

impl MarketTranscript {
    /// Latest defined capital: `K'_N`, or `1` for an empty session.
    pub fn final_capital(&self) -> f64 {
        self.steps.last().map_or(1.0, |s| s.capital_mid)
    }

    /// `(K'_n, K_n)` recomputed from the raw moves.
    pub fn reconstruct(&self) -> Vec<(f64, Option<f64>)> {
        let mut out: Vec<(f64, Option<f64>)> = Vec::with_capacity(self.steps.len());
        let mut capital = 1.0;
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                let prev = &self.steps[i - 1];
                capital += prev.position_b * (s.a - prev.b);
                if let Some(last) = out.last_mut() {
                    last.1 = Some(capital);
                }
            }
            capital += s.position_a * (s.y - s.a);
            out.push((capital, None));
        }
        out
    }

    /// Largest deviation between stored and reconstructed capital.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruct()
            .iter()
            .zip(&self.steps)
            .map(|(&(mid, k), s)| {
                let e = (mid - s.capital_mid).abs();
                match (k, s.capital) {
                    (Some(x), Some(y)) => e.max((x - y).abs()),
                    (None, None) => e,
                    _ => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Refuses positions whose worst case over prices and observations in
/// `[lower, upper]` leaves negative capital.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginRule {
    pub lower: f64,
    pub upper: f64,
}

impl MarginRule {
    fn worst_leg(&self, position: f64, price: f64) -> f64 {
        (position * (self.lower - price)).min(position * (self.upper - price))
    }

    pub fn worst_case(&self, capital: f64, a: f64, b: f64, position_a: f64, position_b: f64) -> f64 {
        capital + self.worst_leg(position_a, a) + self.worst_leg(position_b, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Prices,
    Positions,
    Outcome,
}

/// Move-by-move state machine enforcing the order of play.
#[derive(Debug, Clone)]
pub struct MarketSession {
    phase: Phase,
    capital: f64,
    prices: (f64, f64),
    positions: (f64, f64),
    margin: Option<MarginRule>,
    steps: Vec<MarketStep>,
}

impl Default for MarketSession {
    fn default() -> Self {
        Self::new(None)
    }
}

fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Config(format!("{what} must be finite, got {value}")))
    }
}

impl MarketSession {
    pub fn new(margin: Option<MarginRule>) -> Self {
        Self {
            phase: Phase::Prices,
            capital: 1.0,
            prices: (0.0, 0.0),
            positions: (0.0, 0.0),
            margin,
            steps: Vec::new(),
        }
    }

    /// Current capital: `K_{n-1}`, or `K'_n` between observation and the next prices.
    pub fn capital(&self) -> f64 {
        self.capital
    }

    pub fn steps(&self) -> &[MarketStep] {
        &self.steps
    }

    /// Forecaster's `(a_n, b_n)`; settles the intermediate leg of `Φ_n`.
    pub fn announce_prices(&mut self, a: f64, b: f64) -> Result<()> {
        if self.phase != Phase::Prices {
            return Err(Error::OutOfTurn("prices"));
        }
        let (a, b) = (finite("a", a)?, finite("b", b)?);
        if let Some(prev) = self.steps.last_mut() {
            self.capital += prev.position_b * (a - prev.b);
            prev.capital = Some(self.capital);
        }
        self.prices = (a, b);
        self.phase = Phase::Positions;
        Ok(())
    }

    /// Sceptic's positions `(A_n, B_n)` in `Φ_n` and `Φ_{n+1}`.
    pub fn take_positions(&mut self, position_a: f64, position_b: f64) -> Result<()> {
        if self.phase != Phase::Positions {
            return Err(Error::OutOfTurn("positions"));
        }
        let (pa, pb) = (finite("A", position_a)?, finite("B", position_b)?);
        if let Some(rule) = &self.margin {
            let worst = rule.worst_case(self.capital, self.prices.0, self.prices.1, pa, pb);
            if worst < 0.0 {
                return Err(Error::MarginViolation { worst_case: worst });
            }
        }
        self.positions = (pa, pb);
        self.phase = Phase::Outcome;
        Ok(())
    }

    /// Reality's `y_n`; settles the final leg of `Φ_n`.
    pub fn observe(&mut self, y: f64) -> Result<()> {
        if self.phase != Phase::Outcome {
            return Err(Error::OutOfTurn("observation"));
        }
        let y = finite("y", y)?;
        let (a, b) = self.prices;
        let (pa, pb) = self.positions;
        self.capital += pa * (y - a);
        self.steps.push(MarketStep {
            index: self.steps.len() + 1,
            a,
            b,
            position_a: pa,
            position_b: pb,
            y,
            capital_mid: self.capital,
            capital: None,
        });
        self.phase = Phase::Prices;
        Ok(())
    }

    /// Ends the session at a step boundary.
    pub fn finish(self) -> Result<MarketTranscript> {
        if self.phase != Phase::Prices {
            return Err(Error::OutOfTurn("finish"));
        }
        let pending = self.steps.last().map(|s| PendingContract {
            contract: s.index + 1,
            price: s.b,
            position: s.position_b,
        });
        Ok(MarketTranscript {
            steps: self.steps,
            pending,
            seed: None,
            forecaster: String::new(),
            sceptic: String::new(),
            reality: String::new(),
        })
    }
}

/// What the players see: completed steps and current capital.
#[derive(Debug, Clone, Copy)]
pub struct MarketView<'a> {
    pub steps: &'a [MarketStep],
    pub capital: f64,
}

pub trait PointForecaster {
    fn name(&self) -> String;
    fn prices(&mut self, view: &MarketView<'_>, rng: &mut SessionRng) -> Result<(f64, f64)>;
}

pub trait PositionSceptic {
    fn name(&self) -> String;
    fn positions(&mut self, view: &MarketView<'_>, a: f64, b: f64, rng: &mut SessionRng) -> Result<(f64, f64)>;
}

pub trait PointReality {
    fn name(&self) -> String;
    fn outcome(&mut self, view: &MarketView<'_>, a: f64, b: f64, rng: &mut SessionRng) -> Result<f64>;
}

/// Replays a fixed list of moves.
#[derive(Debug, Clone)]
pub struct Scripted<T> {
    moves: Vec<T>,
    cursor: usize,
}

impl<T: Copy> Scripted<T> {
    pub fn new(moves: Vec<T>) -> Self {
        Self { moves, cursor: 0 }
    }

    fn next(&mut self) -> Result<T> {
        let m = *self.moves.get(self.cursor).ok_or(Error::StreamExhausted(self.cursor))?;
        self.cursor += 1;
        Ok(m)
    }
}

impl PointForecaster for Scripted<(f64, f64)> {
    fn name(&self) -> String {
        "scripted-prices".into()
    }

    fn prices(&mut self, _: &MarketView<'_>, _: &mut SessionRng) -> Result<(f64, f64)> {
        self.next()
    }
}

/// Scripted positions; a separate type so one script can't play two roles.
#[derive(Debug, Clone)]
pub struct ScriptedPositions(pub Scripted<(f64, f64)>);

impl ScriptedPositions {
    pub fn new(moves: Vec<(f64, f64)>) -> Self {
        Self(Scripted::new(moves))
    }
}

impl PositionSceptic for ScriptedPositions {
    fn name(&self) -> String {
        "scripted-positions".into()
    }

    fn positions(&mut self, _: &MarketView<'_>, _: f64, _: f64, _: &mut SessionRng) -> Result<(f64, f64)> {
        self.0.next()
    }
}

impl PointReality for Scripted<f64> {
    fn name(&self) -> String {
        "scripted-outcomes".into()
    }

    fn outcome(&mut self, _: &MarketView<'_>, _: f64, _: f64, _: &mut SessionRng) -> Result<f64> {
        self.next()
    }
}

/// Prices uniform on `[0, 1)`; with `consistent`, `a_{n+1} = b_n`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPrices {
    pub consistent: bool,
}

impl PointForecaster for RandomPrices {
    fn name(&self) -> String {
        if self.consistent { "random-consistent-prices" } else { "random-prices" }.into()
    }

    fn prices(&mut self, view: &MarketView<'_>, rng: &mut SessionRng) -> Result<(f64, f64)> {
        let a = match (self.consistent, view.steps.last()) {
            (true, Some(prev)) => prev.b,
            _ => rng.gen(),
        };
        Ok((a, rng.gen()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPositions;

impl PositionSceptic for ZeroPositions {
    fn name(&self) -> String {
        "zero-positions".into()
    }

    fn positions(&mut self, _: &MarketView<'_>, _: f64, _: f64, _: &mut SessionRng) -> Result<(f64, f64)> {
        Ok((0.0, 0.0))
    }
}

/// Positions uniform on `[-scale, scale)`.
#[derive(Debug, Clone, Copy)]
pub struct RandomPositions {
    pub scale: f64,
}

impl PositionSceptic for RandomPositions {
    fn name(&self) -> String {
        format!("random-positions[{}]", self.scale)
    }

    fn positions(&mut self, _: &MarketView<'_>, _: f64, _: f64, rng: &mut SessionRng) -> Result<(f64, f64)> {
        Ok((rng.gen_range(-self.scale..self.scale), rng.gen_range(-self.scale..self.scale)))
    }
}

/// Observations uniform on `[0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformReality;

impl PointReality for UniformReality {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn outcome(&mut self, _: &MarketView<'_>, _: f64, _: f64, rng: &mut SessionRng) -> Result<f64> {
        Ok(rng.gen())
    }
}

pub fn run_two_step_session(
    forecaster: &mut dyn PointForecaster,
    sceptic: &mut dyn PositionSceptic,
    reality: &mut dyn PointReality,
    n_steps: usize,
    seed: u64,
) -> Result<MarketTranscript> {
    run_two_step_session_with_margin(forecaster, sceptic, reality, n_steps, seed, None)
}

pub fn run_two_step_session_with_margin(
    forecaster: &mut dyn PointForecaster,
    sceptic: &mut dyn PositionSceptic,
    reality: &mut dyn PointReality,
    n_steps: usize,
    seed: u64,
    margin: Option<MarginRule>,
) -> Result<MarketTranscript> {
    let mut rng = session_rng(seed);
    let mut session = MarketSession::new(margin);
    for _ in 0..n_steps {
        let view = MarketView { steps: session.steps(), capital: session.capital() };
        let (a, b) = forecaster.prices(&view, &mut rng)?;
        session.announce_prices(a, b)?;
        let view = MarketView { steps: session.steps(), capital: session.capital() };
        let (pa, pb) = sceptic.positions(&view, a, b, &mut rng)?;
        session.take_positions(pa, pb)?;
        let view = MarketView { steps: session.steps(), capital: session.capital() };
        let y = reality.outcome(&view, a, b, &mut rng)?;
        session.observe(y)?;
    }
    let mut t = session.finish()?;
    t.seed = Some(seed);
    t.forecaster = forecaster.name();
    t.sceptic = sceptic.name();
    t.reality = reality.name();
    Ok(t)
}

/// Profit from one contract `Φ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractSettlement {
    pub contract: usize,
    /// `B_{n-1}(F_n − F⁻_n)`; `None` for `Φ_1`.
    pub intermediate: Option<f64>,
    /// `A_n(F⁺_n − F_n)`.
    pub final_leg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnsettledContract {
    pub contract: usize,
    pub position: f64,
    pub profit: f64,
    pub unsettled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettlementDecomposition {
    pub contracts: Vec<ContractSettlement>,
    pub unsettled: Option<UnsettledContract>,
}

impl SettlementDecomposition {
    pub fn total_profit(&self) -> f64 {
        self.contracts
            .iter()
            .map(|c| c.intermediate.unwrap_or(0.0) + c.final_leg)
            .sum()
    }

    /// `1` plus every leg, added in settlement order; equals `K'_N` bit for bit.
    pub fn accumulated_capital(&self) -> f64 {
        self.contracts.iter().fold(1.0, |k, c| match c.intermediate {
            Some(i) => k + i + c.final_leg,
            None => k + c.final_leg,
        })
    }
}

/// Splits capital growth into one intermediate and one final leg per contract.
pub fn settlement_decomposition(transcript: &MarketTranscript) -> SettlementDecomposition {
    let steps = &transcript.steps;
    let contracts = steps
        .iter()
        .enumerate()
        .map(|(i, s)| ContractSettlement {
            contract: s.index,
            intermediate: (i > 0).then(|| steps[i - 1].position_b * (s.a - steps[i - 1].b)),
            final_leg: s.position_a * (s.y - s.a),
        })
        .collect();
    let unsettled = transcript.pending.map(|p| UnsettledContract {
        contract: p.contract,
        position: p.position,
        profit: 0.0,
        unsettled: true,
    });
    SettlementDecomposition { contracts, unsettled }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> MarketTranscript {
        let mut s = MarketSession::default();
        s.announce_prices(1.0, 2.0).unwrap();
        s.take_positions(1.0, 1.0).unwrap();
        s.observe(3.0).unwrap();
        assert_eq!(s.capital(), 3.0);
        s.announce_prices(2.5, 0.0).unwrap();
        assert_eq!(s.capital(), 3.5);
        s.take_positions(0.0, 0.0).unwrap();
        s.observe(0.0).unwrap();
        s.finish().unwrap()
    }

    #[test]
    fn worked_example_capitals() {
        let t = worked_example();
        assert_eq!(t.steps[0].capital_mid, 3.0);
        assert_eq!(t.steps[0].capital, Some(3.5));
        assert_eq!(t.steps[1].capital, None);
        assert_eq!(t.reconstruction_error(), 0.0);
    }

    #[test]
    fn worked_example_decomposition() {
        let d = settlement_decomposition(&worked_example());
        assert_eq!(d.contracts[0].intermediate, None);
        assert_eq!(d.contracts[0].final_leg, 2.0);
        assert_eq!(d.contracts[1].intermediate, Some(0.5));
        assert_eq!(d.total_profit(), 2.5);
        assert_eq!(d.unsettled.unwrap().contract, 3);
        assert_eq!(d.unsettled.unwrap().profit, 0.0);
    }

    #[test]
    fn out_of_turn_moves_are_rejected() {
        let mut s = MarketSession::default();
        assert_eq!(s.take_positions(1.0, 1.0), Err(Error::OutOfTurn("positions")));
        assert_eq!(s.observe(1.0), Err(Error::OutOfTurn("observation")));
        s.announce_prices(0.5, 0.5).unwrap();
        assert_eq!(s.announce_prices(0.5, 0.5), Err(Error::OutOfTurn("prices")));
        assert!(matches!(s.clone().finish(), Err(Error::OutOfTurn("finish"))));
        s.take_positions(0.0, 0.0).unwrap();
        assert_eq!(s.take_positions(0.0, 0.0), Err(Error::OutOfTurn("positions")));
    }

    #[test]
    fn zero_positions_keep_capital() {
        let t = run_two_step_session(&mut RandomPrices::default(), &mut ZeroPositions, &mut UniformReality, 50, 3).unwrap();
        assert!(t.steps.iter().all(|s| s.capital_mid == 1.0 && s.capital.is_none_or(|k| k == 1.0)));
        let d = settlement_decomposition(&t);
        assert!(d.contracts.iter().all(|c| c.final_leg == 0.0 && c.intermediate.unwrap_or(0.0) == 0.0));
    }

    #[test]
    fn consistent_revisions_have_zero_intermediate_legs() {
        let mut f = RandomPrices { consistent: true };
        let t = run_two_step_session(&mut f, &mut RandomPositions { scale: 2.0 }, &mut UniformReality, 100, 9).unwrap();
        for w in t.steps.windows(2) {
            assert_eq!(w[0].capital, Some(w[0].capital_mid));
            assert_eq!(w[1].a, w[0].b);
        }
    }

    #[test]
    fn random_sessions_decompose() {
        for seed in 0..20 {
            let t = run_two_step_session(
                &mut RandomPrices::default(),
                &mut RandomPositions { scale: 3.0 },
                &mut UniformReality,
                100,
                seed,
            )
            .unwrap();
            assert!(t.reconstruction_error() <= 1e-9);
            let d = settlement_decomposition(&t);
            assert_eq!(d.accumulated_capital(), t.final_capital());
            assert!((d.total_profit() - (t.final_capital() - 1.0)).abs() <= 1e-9);
        }
    }

    #[test]
    fn margin_rule_blocks_ruinous_positions() {
        let rule = MarginRule { lower: 0.0, upper: 1.0 };
        let mut s = MarketSession::new(Some(rule));
        s.announce_prices(0.5, 0.5).unwrap();
        assert!(matches!(s.take_positions(3.0, 0.0), Err(Error::MarginViolation { .. })));
        s.take_positions(1.0, 1.0).unwrap();
    }

    #[test]
    fn capital_may_go_negative_without_margin() {
        let t = run_two_step_session(
            &mut Scripted::new(vec![(0.0, 0.0)]),
            &mut ScriptedPositions::new(vec![(-5.0, 0.0)]),
            &mut Scripted::new(vec![1.0]),
            1,
            0,
        )
        .unwrap();
        assert_eq!(t.final_capital(), -4.0);
    }
}
