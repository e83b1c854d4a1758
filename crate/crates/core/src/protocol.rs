//! The BB84-style commitment run between an honest or EPR-cheating Alice and
//! a Bob who depolarizes every qubit he receives.
//!
//! All randomness is drawn from [`SessionRng`], a counter-based ChaCha
//! stream addressed by (round, role, purpose), so a session is a pure
//! function of its config and the order in which rounds or trials are
//! evaluated never matters.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{self, DepolarizingChannel, NoiseLocation, QubitChannel};
use crate::entanglement;
use crate::error::{Error, Result};
use crate::qmat::Subsystem;
use crate::security::CheatStrategy;
use crate::states::{
    self, Bb84Basis, Bb84Symbol, Bit, DensityMatrix, ProjectiveBasis, SteeredBranch,
};

pub const DEFAULT_ACCEPT_SIGMA: f64 = 3.0;

/// Tolerance used when classifying stored joint states as separable.
const SEPARABLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub q: f64,
    pub rounds: usize,
    pub noise_location: NoiseLocation,
    pub accept_sigma: f64,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(q: f64, rounds: usize, seed: u64) -> Result<Self> {
        let config = Self {
            q,
            rounds,
            noise_location: NoiseLocation::default(),
            accept_sigma: DEFAULT_ACCEPT_SIGMA,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        states::check_unit_interval("q", self.q)?;
        if self.rounds == 0 {
            return Err(Error::OutOfRange {
                name: "rounds",
                value: 0.0,
                range: "[1, ∞)",
            });
        }
        if !(self.accept_sigma >= 0.0) || !self.accept_sigma.is_finite() {
            return Err(Error::OutOfRange {
                name: "accept_sigma",
                value: self.accept_sigma,
                range: "[0, ∞)",
            });
        }
        Ok(())
    }

    pub fn channel(&self) -> DepolarizingChannel {
        DepolarizingChannel::new(self.q).expect("validated q")
    }

    /// Probability that a sifted round matches for an honest Alice.
    pub fn expected_match_fraction(&self) -> f64 {
        (1.0 + self.q) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Variant,
    Basis,
    Outcome,
    Steer,
}

/// Counter-based random source. Each (role, purpose) pair is its own ChaCha
/// stream and each round owns one 64-byte block of it.
#[derive(Debug, Clone)]
pub struct SessionRng {
    key: [u8; 32],
}

impl SessionRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut key);
        Self { key }
    }

    fn block(&self, round: u64, role: Role, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((role as u64) << 8) | purpose as u64);
        rng.set_word_pos(u128::from(round) * 16);
        rng
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&self, round: u64, role: Role, purpose: Purpose) -> f64 {
        self.block(round, role, purpose).gen::<f64>()
    }

    pub fn coin(&self, round: u64, role: Role, purpose: Purpose) -> Bit {
        Bit::from_bool(self.uniform(round, role, purpose) >= 0.5)
    }
}

/// What Alice did in one round.
#[derive(Debug, Clone, PartialEq)]
pub enum AliceRound {
    Honest {
        symbol: Bb84Symbol,
    },
    Cheat {
        /// Joint state after Bob's depolarizing noise, before anyone measures.
        joint: Arc<DensityMatrix>,
        /// Alice's retained qubit once Bob has measured his half.
        retained: Arc<DensityMatrix>,
        /// Filled in by [`open_and_steer`].
        steering: Option<SteeringRecord>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringRecord {
    pub alice_outcome: Bit,
    /// Bob's qubit conditioned on Alice's outcome (as it was before Bob's
    /// own measurement).
    pub bob_conditional: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub alice: AliceRound,
    /// The qubit Bob measured: post-channel, marginal over Alice's side.
    pub state_received: Arc<DensityMatrix>,
    pub bob_basis: Bb84Basis,
    pub bob_outcome: Bit,
    pub announced_variant: Option<Bit>,
    pub sifted: bool,
    /// `Some` only for sifted rounds.
    pub matched: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceKind {
    Honest,
    Epr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub kind: AliceKind,
    pub records: Vec<RoundRecord>,
    /// The bit Alice committed to (for an EPR Alice, her initial intent).
    pub committed_bit: Bit,
    pub opened_bit: Option<Bit>,
}

impl Transcript {
    /// Fraction of rounds whose stored joint state is PPT, and the mean
    /// concurrence of those states. Honest rounds carry no joint state and
    /// count as separable with zero concurrence.
    pub fn entanglement_stats(&self) -> Result<(f64, f64)> {
        let mut separable = 0usize;
        let mut concurrence_sum = 0.0;
        let mut cache: Option<(Arc<DensityMatrix>, bool, f64)> = None;
        for record in &self.records {
            let (sep, c) = match &record.alice {
                AliceRound::Honest { .. } => (true, 0.0),
                AliceRound::Cheat { joint, .. } => match &cache {
                    Some((seen, sep, c)) if Arc::ptr_eq(seen, joint) => (*sep, *c),
                    _ => {
                        let sep = entanglement::is_separable(joint, SEPARABLE_TOL)?;
                        let c = entanglement::concurrence(joint)?.value;
                        cache = Some((Arc::clone(joint), sep, c));
                        (sep, c)
                    }
                },
            };
            separable += sep as usize;
            concurrence_sum += c;
        }
        let n = self.records.len() as f64;
        Ok((separable as f64 / n, concurrence_sum / n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationReport {
    pub sifted_count: usize,
    pub match_count: usize,
    pub match_fraction: f64,
    pub expected_fraction: f64,
    pub threshold: f64,
    pub accepted: bool,
    /// Set when no round was sifted; the report then always rejects.
    pub no_sifted_rounds: bool,
}

/// Honest commitment: every round sends a random variant of `bit`'s encoding.
pub fn commit_honest(config: &ProtocolConfig, bit: Bit, rng: &SessionRng) -> Result<Transcript> {
    config.validate()?;
    let channel = config.channel();

    // both possible received states, shared across rounds
    let mut received = Vec::with_capacity(2);
    for variant in [Bit::ZERO, Bit::ONE] {
        let symbol = Bb84Symbol { bit, variant };
        let sent = DensityMatrix::pure(&states::bb84_state(symbol));
        let out = channel.apply(sent.mat())?;
        received.push(Arc::new(DensityMatrix::from_trusted(out, vec![2])));
    }

    let records = (0..config.rounds as u64)
        .map(|round| -> Result<RoundRecord> {
            let variant = rng.coin(round, Role::Alice, Purpose::Variant);
            let state = Arc::clone(&received[variant.value() as usize]);
            let bob_basis = bob_basis(rng, round);
            let m = states::measure(&state, &bob_basis.projective(), rng.uniform(round, Role::Bob, Purpose::Outcome))?;
            Ok(RoundRecord {
                alice: AliceRound::Honest {
                    symbol: Bb84Symbol { bit, variant },
                },
                state_received: state,
                bob_basis,
                bob_outcome: m.outcome,
                announced_variant: None,
                sifted: false,
                matched: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Transcript {
        config: *config,
        kind: AliceKind::Honest,
        records,
        committed_bit: bit,
        opened_bit: None,
    })
}

/// EPR commitment: each round Alice prepares the strategy's entangled pair
/// and sends Bob his half, which he depolarizes and measures.
pub fn commit_cheating(
    config: &ProtocolConfig,
    strategy: &CheatStrategy,
    intended_bit: Bit,
    rng: &SessionRng,
) -> Result<Transcript> {
    config.validate()?;
    let prepared = strategy.joint_state()?;
    let joint = Arc::new(channels::lift_apply(&config.channel(), &prepared)?);
    let bob_marginal = Arc::new(joint.reduced(Subsystem::B)?);

    // Bob's measurement of his half, per basis; Alice's retained states are shared.
    let mut ensembles = Vec::with_capacity(2);
    for basis in [Bb84Basis::Rectilinear, Bb84Basis::Diagonal] {
        let branches = states::steering_ensemble(&joint, Subsystem::B, &basis.projective())?;
        let retained: Vec<Option<Arc<DensityMatrix>>> = branches
            .iter()
            .map(|b| b.conditional.clone().map(Arc::new))
            .collect();
        ensembles.push((branches, retained));
    }

    let records = (0..config.rounds as u64)
        .map(|round| -> Result<RoundRecord> {
            let bob_basis = bob_basis(rng, round);
            let (branches, retained) = &ensembles[basis_index(bob_basis)];
            let outcome = states::sample_branch(branches, rng.uniform(round, Role::Bob, Purpose::Outcome))?;
            let retained = retained[outcome.value() as usize].clone().expect("sampled branch is possible");
            Ok(RoundRecord {
                alice: AliceRound::Cheat {
                    joint: Arc::clone(&joint),
                    retained,
                    steering: None,
                },
                state_received: Arc::clone(&bob_marginal),
                bob_basis,
                bob_outcome: outcome,
                announced_variant: None,
                sifted: false,
                matched: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Transcript {
        config: *config,
        kind: AliceKind::Epr,
        records,
        committed_bit: intended_bit,
        opened_bit: None,
    })
}

/// Honest opening: announce the committed bit and each round's variant.
pub fn open_honest(mut transcript: Transcript) -> Result<Transcript> {
    let bit = transcript.committed_bit;
    for record in &mut transcript.records {
        match &record.alice {
            AliceRound::Honest { symbol } => record.announced_variant = Some(symbol.variant),
            AliceRound::Cheat { .. } => {
                return Err(Error::InvalidDensity(
                    "honest opening of an EPR transcript; use open_and_steer".into(),
                ))
            }
        }
    }
    transcript.opened_bit = Some(bit);
    sift(&mut transcript);
    Ok(transcript)
}

/// EPR opening: Alice measures every retained qubit in `steer_basis`,
/// announces her outcome as the round's variant, and claims `target_bit`.
/// Bob's records are not touched.
pub fn open_and_steer(
    mut transcript: Transcript,
    target_bit: Bit,
    steer_basis: &ProjectiveBasis,
    rng: &SessionRng,
) -> Result<Transcript> {
    if transcript.kind == AliceKind::Honest {
        return Err(Error::HonestTranscript);
    }
    let mut ensemble: Option<(Arc<DensityMatrix>, [SteeredBranch; 2])> = None;
    for (round, record) in transcript.records.iter_mut().enumerate() {
        let AliceRound::Cheat {
            joint,
            retained,
            steering,
        } = &mut record.alice
        else {
            return Err(Error::HonestTranscript);
        };
        let u = rng.uniform(round as u64, Role::Alice, Purpose::Steer);
        let alice_outcome = states::measure(retained, steer_basis, u)?.outcome;

        let fresh = !matches!(&ensemble, Some((seen, _)) if Arc::ptr_eq(seen, joint));
        if fresh {
            let branches = states::steering_ensemble(joint, Subsystem::A, steer_basis)?;
            ensemble = Some((Arc::clone(joint), branches));
        }
        let branches = &ensemble.as_ref().expect("filled above").1;
        let bob_conditional = branches[alice_outcome.value() as usize]
            .conditional
            .clone()
            .ok_or_else(|| Error::InvalidDensity("steered into an impossible branch".into()))?;

        *steering = Some(SteeringRecord {
            alice_outcome,
            bob_conditional,
        });
        record.announced_variant = Some(alice_outcome);
    }
    transcript.opened_bit = Some(target_bit);
    sift(&mut transcript);
    Ok(transcript)
}

fn sift(transcript: &mut Transcript) {
    let Some(bit) = transcript.opened_bit else { return };
    let basis = Bb84Basis::for_bit(bit);
    for record in &mut transcript.records {
        record.sifted = record.bob_basis == basis;
        record.matched = if record.sifted {
            record.announced_variant.map(|v| v == record.bob_outcome)
        } else {
            None
        };
    }
}

/// Bob's decision: accept iff the sifted match fraction is no more than
/// `accept_sigma` binomial standard deviations below (1 + q)/2.
pub fn verify(transcript: &Transcript) -> Result<VerificationReport> {
    if transcript.opened_bit.is_none() {
        return Err(Error::NotOpened);
    }
    let sifted_count = transcript.records.iter().filter(|r| r.sifted).count();
    let match_count = transcript
        .records
        .iter()
        .filter(|r| r.matched == Some(true))
        .count();
    let expected_fraction = transcript.config.expected_match_fraction();
    if sifted_count == 0 {
        return Ok(VerificationReport {
            sifted_count,
            match_count,
            match_fraction: 0.0,
            expected_fraction,
            threshold: expected_fraction,
            accepted: false,
            no_sifted_rounds: true,
        });
    }
    let match_fraction = match_count as f64 / sifted_count as f64;
    let spread = (expected_fraction * (1.0 - expected_fraction) / sifted_count as f64).sqrt();
    let threshold = expected_fraction - transcript.config.accept_sigma * spread;
    Ok(VerificationReport {
        sifted_count,
        match_count,
        match_fraction,
        expected_fraction,
        threshold,
        accepted: match_fraction >= threshold,
        no_sifted_rounds: false,
    })
}

/// Which Alice takes part in a session.
#[derive(Debug, Clone, PartialEq)]
pub enum AliceMode {
    Honest,
    /// Commit entangled halves, then steer towards `target_bit` at opening
    /// by measuring in that bit's encoding basis.
    Epr {
        strategy: CheatStrategy,
        target_bit: Bit,
    },
}

impl AliceMode {
    pub fn kind(&self) -> AliceKind {
        match self {
            AliceMode::Honest => AliceKind::Honest,
            AliceMode::Epr { .. } => AliceKind::Epr,
        }
    }
}

/// Commit, open and verify in one go. Deterministic in `config.seed`.
pub fn run_session(
    config: &ProtocolConfig,
    alice: &AliceMode,
    bit: Bit,
) -> Result<(Transcript, VerificationReport)> {
    let rng = SessionRng::new(config.seed);
    let opened = match alice {
        AliceMode::Honest => open_honest(commit_honest(config, bit, &rng)?)?,
        AliceMode::Epr {
            strategy,
            target_bit,
        } => {
            let committed = commit_cheating(config, strategy, bit, &rng)?;
            let basis = Bb84Basis::for_bit(*target_bit).projective();
            open_and_steer(committed, *target_bit, &basis, &rng)?
        }
    };
    let report = verify(&opened)?;
    Ok((opened, report))
}

/// A session recipe for [`monte_carlo`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub alice: AliceMode,
    pub bit: Bit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    pub seed: u64,
    pub report: VerificationReport,
    pub separable_fraction: f64,
    pub mean_concurrence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub match_fraction_mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub match_fraction_std: f64,
    pub acceptance_rate: f64,
    pub separable_fraction: f64,
    pub mean_concurrence_post_channel: f64,
    pub results: Vec<TrialResult>,
}

/// Seed of trial `index` under master seed `master`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

/// Runs `trials` independent sessions. Trials may execute in parallel on the
/// current rayon pool; each derives its seed from its index, and the summary
/// is reduced in index order, so the result does not depend on the pool size.
pub fn monte_carlo(config: &ProtocolConfig, scenario: &Scenario, trials: usize) -> Result<MonteCarloSummary> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::OutOfRange {
            name: "trials",
            value: 0.0,
            range: "[1, ∞)",
        });
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<TrialResult> {
            let trial_config = ProtocolConfig {
                seed: trial_seed(config.seed, i),
                ..*config
            };
            let (transcript, report) = run_session(&trial_config, &scenario.alice, scenario.bit)?;
            let (separable_fraction, mean_concurrence) = transcript.entanglement_stats()?;
            Ok(TrialResult {
                seed: trial_config.seed,
                report,
                separable_fraction,
                mean_concurrence,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = trials as f64;
    let mean = |f: &dyn Fn(&TrialResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    let match_fraction_mean = mean(&|r| r.report.match_fraction);
    let match_fraction_std = if trials > 1 {
        let ss: f64 = results
            .iter()
            .map(|r| (r.report.match_fraction - match_fraction_mean).powi(2))
            .sum();
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloSummary {
        trials,
        match_fraction_mean,
        match_fraction_std,
        acceptance_rate: mean(&|r| r.report.accepted as u8 as f64),
        separable_fraction: mean(&|r| r.separable_fraction),
        mean_concurrence_post_channel: mean(&|r| r.mean_concurrence),
        results,
    })
}

fn bob_basis(rng: &SessionRng, round: u64) -> Bb84Basis {
    if rng.coin(round, Role::Bob, Purpose::Basis) == Bit::ZERO {
        Bb84Basis::Rectilinear
    } else {
        Bb84Basis::Diagonal
    }
}

fn basis_index(basis: Bb84Basis) -> usize {
    match basis {
        Bb84Basis::Rectilinear => 0,
        Bb84Basis::Diagonal => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{ComplexMatrix, StateVector};
    use approx::assert_abs_diff_eq;

    fn config(q: f64, rounds: usize, seed: u64) -> ProtocolConfig {
        ProtocolConfig::new(q, rounds, seed).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::new(1.2, 10, 0).is_err());
        assert!(ProtocolConfig::new(0.5, 0, 0).is_err());
        let mut c = config(0.5, 10, 0);
        c.accept_sigma = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rng_streams_are_independent_of_call_order() {
        let rng = SessionRng::new(9);
        let a = rng.uniform(17, Role::Bob, Purpose::Basis);
        let _ = rng.uniform(3, Role::Alice, Purpose::Variant);
        assert_eq!(a, rng.uniform(17, Role::Bob, Purpose::Basis));
        assert_ne!(a, rng.uniform(17, Role::Bob, Purpose::Outcome));
        assert_ne!(a, rng.uniform(18, Role::Bob, Purpose::Basis));
        assert_ne!(a, SessionRng::new(10).uniform(17, Role::Bob, Purpose::Basis));
    }

    #[test]
    fn noiseless_honest_rectilinear_rounds_always_match() {
        let t = open_honest(commit_honest(&config(1.0, 2000, 3), Bit::ZERO, &SessionRng::new(3)).unwrap()).unwrap();
        let rect: Vec<_> = t.records.iter().filter(|r| r.bob_basis == Bb84Basis::Rectilinear).collect();
        assert!(!rect.is_empty());
        assert!(rect.iter().all(|r| r.sifted && r.matched == Some(true)));
        let report = verify(&t).unwrap();
        assert_eq!(report.match_fraction, 1.0);
        assert!(report.accepted);
    }

    #[test]
    fn fully_depolarized_rounds_are_coin_flips() {
        let (_, report) = run_session(&config(0.0, 100_000, 5), &AliceMode::Honest, Bit::ONE).unwrap();
        let sigma = (0.25 / report.sifted_count as f64).sqrt();
        assert!((report.match_fraction - 0.5).abs() < 4.0 * sigma, "{report:?}");
    }

    #[test]
    fn sifting_follows_opened_basis() {
        let t = open_honest(commit_honest(&config(0.7, 500, 1), Bit::ONE, &SessionRng::new(1)).unwrap()).unwrap();
        for r in &t.records {
            assert_eq!(r.sifted, r.bob_basis == Bb84Basis::Diagonal);
            assert_eq!(r.matched.is_some(), r.sifted);
        }
    }

    #[test]
    fn verify_requires_opening_and_sifted_rounds() {
        let rng = SessionRng::new(2);
        let committed = commit_honest(&config(0.5, 10, 2), Bit::ZERO, &rng).unwrap();
        assert!(matches!(verify(&committed), Err(Error::NotOpened)));

        let mut opened = open_honest(committed).unwrap();
        for r in &mut opened.records {
            r.sifted = false;
            r.matched = None;
        }
        let report = verify(&opened).unwrap();
        assert!(report.no_sifted_rounds);
        assert!(!report.accepted);
    }

    #[test]
    fn steering_an_honest_transcript_is_an_error() {
        let rng = SessionRng::new(4);
        let t = commit_honest(&config(0.5, 10, 4), Bit::ZERO, &rng).unwrap();
        let r = open_and_steer(t, Bit::ONE, &ProjectiveBasis::diagonal(), &rng);
        assert!(matches!(r, Err(Error::HonestTranscript)));
    }

    #[test]
    fn noiseless_bell_commitment_is_maximally_entangled() {
        let rng = SessionRng::new(6);
        let t = commit_cheating(&config(1.0, 50, 6), &CheatStrategy::bell(), Bit::ZERO, &rng).unwrap();
        let (sep, c) = t.entanglement_stats().unwrap();
        assert_eq!(sep, 0.0);
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn commitment_at_one_third_is_separable_and_at_half_is_not() {
        let rng = SessionRng::new(8);
        let t = commit_cheating(&config(1.0 / 3.0, 50, 8), &CheatStrategy::bell(), Bit::ZERO, &rng).unwrap();
        for r in &t.records {
            let AliceRound::Cheat { joint, .. } = &r.alice else { panic!() };
            assert!(entanglement::is_separable(joint, 1e-10).unwrap());
        }
        let t = commit_cheating(&config(0.5, 50, 8), &CheatStrategy::bell(), Bit::ZERO, &rng).unwrap();
        let (sep, c) = t.entanglement_stats().unwrap();
        assert_eq!(sep, 0.0);
        assert_abs_diff_eq!(c, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn noiseless_steering_predicts_bobs_state() {
        let rng = SessionRng::new(11);
        let t = commit_cheating(&config(1.0, 200, 11), &CheatStrategy::bell(), Bit::ONE, &rng).unwrap();
        let t = open_and_steer(t, Bit::ZERO, &ProjectiveBasis::computational(), &rng).unwrap();
        for r in &t.records {
            let AliceRound::Cheat { steering: Some(s), .. } = &r.alice else { panic!() };
            let expected = StateVector::basis(2, s.alice_outcome.value() as usize).projector();
            assert!(s.bob_conditional.mat().max_abs_diff(&expected) < 1e-12);
            if r.sifted {
                assert_eq!(r.matched, Some(true));
            }
        }
        assert!(verify(&t).unwrap().accepted);
    }

    #[test]
    fn product_commitment_gives_no_steering() {
        let k0 = StateVector::basis(2, 0);
        let strategy = CheatStrategy::new(k0.clone(), k0, (2, 2)).unwrap();
        let rng = SessionRng::new(12);
        let t = commit_cheating(&config(0.6, 100, 12), &strategy, Bit::ZERO, &rng).unwrap();
        let t = open_and_steer(t, Bit::ZERO, &ProjectiveBasis::new(0.9, 1.1).unwrap(), &rng).unwrap();
        let AliceRound::Cheat { joint, .. } = &t.records[0].alice else { panic!() };
        let marginal = joint.reduced(Subsystem::B).unwrap();
        for r in &t.records {
            let AliceRound::Cheat { steering: Some(s), .. } = &r.alice else { panic!() };
            assert!(s.bob_conditional.mat().max_abs_diff(marginal.mat()) < 1e-12);
        }
    }

    #[test]
    fn steering_average_is_bobs_marginal() {
        for q in [0.0, 0.2, 1.0 / 3.0, 0.7, 1.0] {
            let rng = SessionRng::new(13);
            let strategy = CheatStrategy::new(StateVector::from_bloch(0.3, 0.1), StateVector::from_bloch(2.0, 2.0), (2, 2)).unwrap();
            let t = commit_cheating(&config(q, 1, 13), &strategy, Bit::ZERO, &rng).unwrap();
            let AliceRound::Cheat { joint, .. } = &t.records[0].alice else { panic!() };
            let basis = ProjectiveBasis::new(1.4, 5.0).unwrap();
            let branches = states::steering_ensemble(joint, Subsystem::A, &basis).unwrap();
            let mut avg = ComplexMatrix::zeros(2);
            for b in &branches {
                if let Some(c) = &b.conditional {
                    avg = &avg + &c.mat().scale_re(b.probability);
                }
            }
            assert!(avg.max_abs_diff(t.records[0].state_received.mat()) < 1e-10);
        }
    }

    #[test]
    fn sessions_are_deterministic() {
        let c = config(0.6, 3000, 42);
        assert_eq!(run_session(&c, &AliceMode::Honest, Bit::ZERO).unwrap(), run_session(&c, &AliceMode::Honest, Bit::ZERO).unwrap());
        let epr = AliceMode::Epr {
            strategy: CheatStrategy::bell(),
            target_bit: Bit::ONE,
        };
        assert_eq!(run_session(&c, &epr, Bit::ZERO).unwrap(), run_session(&c, &epr, Bit::ZERO).unwrap());
    }

    #[test]
    fn single_trial_matches_run_session() {
        let c = config(0.8, 2000, 77);
        let scenario = Scenario {
            alice: AliceMode::Honest,
            bit: Bit::ONE,
        };
        let summary = monte_carlo(&c, &scenario, 1).unwrap();
        let (_, report) = run_session(&c, &scenario.alice, scenario.bit).unwrap();
        assert_eq!(summary.results[0].report, report);
        assert_eq!(summary.match_fraction_mean, report.match_fraction);
        assert_eq!(summary.match_fraction_std, 0.0);
        assert!(monte_carlo(&c, &scenario, 0).is_err());
    }
}
