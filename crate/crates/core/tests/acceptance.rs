//! Acceptance criteria. Runs without the libtest harness so that each
//! `criterion N: PASS|FAIL` line reaches the console; exits non-zero if any
//! criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use ebcommit::channels::{self, DepolarizingChannel};
use ebcommit::entanglement::{self, concurrence, eb_threshold, is_separable, min_partial_transpose_eigenvalue};
use ebcommit::protocol::{self, AliceMode, ProtocolConfig, Scenario};
use ebcommit::qmat::{self, StateVector};
use ebcommit::security::{self, CheatStrategy};
use ebcommit::states::{self, Bit, DensityMatrix};

type Outcome = (bool, String);

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        criterion_1_separability_threshold,
        criterion_2_factorization_law,
        criterion_3_disentangling,
        criterion_4_honest_statistics,
        criterion_5_perfect_hiding,
        criterion_6_binding_curve,
        criterion_7_determinism,
        criterion_8_numerical_core,
    ];
    let mut failed = 0;
    for (i, criterion) in criteria.iter().enumerate() {
        let (pass, detail) = criterion();
        println!("criterion {}: {} ({detail})", i + 1, if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn q_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn criterion_1_separability_threshold() -> Outcome {
    let start = Instant::now();
    let q_star = eb_threshold(DepolarizingChannel::new, 0.0, 1.0, 1e-9).unwrap();
    let threshold_err = (q_star - 1.0 / 3.0).abs();
    let pt_err = q_grid(101)
        .into_iter()
        .map(|q| {
            let got = min_partial_transpose_eigenvalue(&states::isotropic(q).unwrap()).unwrap();
            (got - (1.0 - 3.0 * q) / 4.0).abs()
        })
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    (
        threshold_err <= 1e-9 && pt_err <= 1e-10 && elapsed < Duration::from_secs(1),
        format!("q*={q_star:.12}, |q*-1/3|={threshold_err:.2e}, max PT err={pt_err:.2e}, {elapsed:?}"),
    )
}

fn criterion_2_factorization_law() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let x = common::random_pure(&mut rng, 4);
        for q in q_grid(11) {
            let c = DepolarizingChannel::new(q).unwrap();
            worst = worst.max(entanglement::factorization_residual(&x, &c).unwrap());
        }
    }
    let elapsed = start.elapsed();
    (
        worst <= 1e-9 && elapsed < Duration::from_secs(5),
        format!("max |C(out) - C(in) C(iso)| = {worst:.2e} over 2200 cases, {elapsed:?}"),
    )
}

fn criterion_3_disentangling() -> Outcome {
    let mut rng = common::rng(3);
    let mut max_c: f64 = 0.0;
    let mut all_ppt = true;
    for _ in 0..100 {
        let a0 = common::random_pure(&mut rng, 2);
        let a1 = common::random_pure(&mut rng, 2);
        let rho = states::cheat_state(&a0, &a1).unwrap();
        for q in [0.1, 0.2, 0.3, 1.0 / 3.0] {
            let out = channels::lift_apply(&DepolarizingChannel::new(q).unwrap(), &rho).unwrap();
            max_c = max_c.max(concurrence(&out).unwrap().value);
            all_ppt &= is_separable(&out, 1e-10).unwrap();
        }
    }
    let bell = states::cheat_state(&StateVector::basis(2, 0), &StateVector::basis(2, 1)).unwrap();
    let bell_err = [0.4, 0.7, 1.0]
        .into_iter()
        .map(|q| {
            let out = channels::lift_apply(&DepolarizingChannel::new(q).unwrap(), &bell).unwrap();
            (concurrence(&out).unwrap().value - (3.0 * q - 1.0) / 2.0).abs()
        })
        .fold(0.0, f64::max);
    (
        max_c <= 1e-10 && all_ppt && bell_err <= 1e-9,
        format!("EB regime max C = {max_c:.2e}, all PPT = {all_ppt}, Bell |C - (3q-1)/2| = {bell_err:.2e}"),
    )
}

fn criterion_4_honest_statistics() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for q in [0.2, 0.5, 0.8] {
        let expected = (1.0 + q) / 2.0;
        let mut within = 0;
        let mut above_bound = 0;
        for seed in 1..=20u64 {
            let config = ProtocolConfig::new(q, 100_000, seed).unwrap();
            let bit = Bit::new((seed % 2) as u8).unwrap();
            let (_, r) = protocol::run_session(&config, &AliceMode::Honest, bit).unwrap();
            let sigma = (expected * (1.0 - expected) / r.sifted_count as f64).sqrt();
            if (r.match_fraction - expected).abs() <= 3.0 * sigma {
                within += 1;
            }
            if r.match_fraction >= q / 2.0 {
                above_bound += 1;
            }
        }
        pass &= within >= 19 && above_bound == 20;
        detail.push(format!("q={q}: {within}/20 within 3σ, {above_bound}/20 ≥ q/2"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    (pass, format!("{}; {elapsed:?}", detail.join("; ")))
}

fn criterion_5_perfect_hiding() -> Outcome {
    let s0 = security::bb84_commitment_state(Bit::ZERO);
    let s1 = security::bb84_commitment_state(Bit::ONE);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for q in q_grid(11) {
        let h = security::bob_cheat_probability(&s0, &s1, &DepolarizingChannel::new(q).unwrap()).unwrap();
        worst = worst.max(h.delta_raw).max(h.delta_channel);
        pass &= h.p_bcheat == 0.5 && h.delta_raw <= 1e-12 && h.delta_channel <= 1e-12;
    }
    (pass, format!("p_bcheat = 0.5 at every q, max Δ = {worst:.2e}"))
}

fn criterion_6_binding_curve() -> Outcome {
    let strategy = CheatStrategy::bell();
    let target = DensityMatrix::pure(&StateVector::basis(2, 0));
    let attack =
        |q: f64| security::alice_binding_attack(&strategy, &DepolarizingChannel::new(q).unwrap(), &target).unwrap();

    let curve: Vec<_> = q_grid(11).into_iter().map(|q| (q, attack(q))).collect();
    let at0 = curve[0].1.best_fidelity_sq;
    let at1 = curve[10].1.best_fidelity_sq;
    let monotone = curve
        .windows(2)
        .all(|w| w[1].1.best_fidelity_sq >= w[0].1.best_fidelity_sq);

    let mut ns_residual = curve
        .iter()
        .filter(|(q, _)| *q <= 1.0 / 3.0)
        .map(|(_, r)| r.max_no_signalling_residual())
        .fold(0.0, f64::max);
    ns_residual = ns_residual.max(attack(1.0 / 3.0).max_no_signalling_residual());

    let pass = (at0 - 0.5).abs() <= 1e-9 && (at1 - 1.0).abs() <= 1e-9 && monotone && ns_residual <= 1e-10;
    let values: Vec<String> = curve
        .iter()
        .map(|(_, r)| format!("{:.4}", r.best_fidelity_sq))
        .collect();
    (pass,
        format!(
            "F²(q=0)={at0:.12}, F²(q=1)={at1:.12}, nondecreasing={monotone} [{}], no-signalling residual={ns_residual:.2e}",
            values.join(" ")
        ),
    )
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ebcommit"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_7_determinism() -> Outcome {
    let invocations: [&[&str]; 6] = [
        &["run", "--q", "0.5", "--rounds", "2000", "--bit", "1", "--seed", "7"],
        &[
            "run", "--q", "0.5", "--rounds", "2000", "--alice", "epr", "--seed", "7", "--format", "json",
        ],
        &[
            "sweep",
            "--q-steps",
            "4",
            "--rounds",
            "500",
            "--trials",
            "6",
            "--seed",
            "3",
            "--alice",
            "epr",
        ],
        &[
            "sweep",
            "--q-steps",
            "3",
            "--rounds",
            "500",
            "--trials",
            "4",
            "--seed",
            "3",
            "--format",
            "json",
        ],
        &["threshold", "--format", "json"],
        &["binding", "--q-grid", "0,0.5,1", "--grid", "16"],
    ];
    let mut cli_identical = true;
    for args in invocations {
        let first = cli(args);
        let second = cli(args);
        cli_identical &= first == second && !first.1.is_empty();
    }

    let config = ProtocolConfig::new(0.6, 2000, 11).unwrap();
    let scenarios = [
        Scenario {
            alice: AliceMode::Honest,
            bit: Bit::ONE,
        },
        Scenario {
            alice: AliceMode::Epr {
                strategy: CheatStrategy::bell(),
                target_bit: Bit::ONE,
            },
            bit: Bit::ZERO,
        },
    ];
    let mut pool_independent = true;
    for scenario in &scenarios {
        let run_on = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| protocol::monte_carlo(&config, scenario, 12).unwrap())
        };
        let one = run_on(1);
        pool_independent &= one == run_on(4) && one == run_on(3);
    }
    (
        cli_identical && pool_independent,
        format!("CLI byte-identical = {cli_identical}, monte_carlo equal on 1/3/4 threads = {pool_independent}"),
    )
}

fn criterion_8_numerical_core() -> Outcome {
    let mut rng = common::rng(8);
    let mut eig_residual: f64 = 0.0;
    let mut fvdg_violation: f64 = 0.0;
    for i in 0..1000 {
        let dim = if i % 2 == 0 { 2 } else { 4 };
        let a = common::random_density(&mut rng, dim);
        let b = common::random_density(&mut rng, dim);
        for m in [a.mat(), b.mat()] {
            let e = qmat::eigh(m).unwrap();
            eig_residual = eig_residual.max(e.reconstruct().max_abs_diff(m));
        }
        let d = a.trace_distance(&b).unwrap();
        let f = a.fidelity(&b).unwrap();
        let lower = (1.0 - f) - d;
        let upper = d - (1.0 - f * f).max(0.0).sqrt();
        fvdg_violation = fvdg_violation.max(lower).max(upper);
    }
    (
        eig_residual <= 1e-10 && fvdg_violation <= 1e-9,
        format!("max eigen residual = {eig_residual:.2e}, max Fuchs-van de Graaf violation = {fvdg_violation:.2e}"),
    )
}
