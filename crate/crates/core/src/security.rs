//! Security metrics for the commitment: Bob's hiding bound and Alice's
//! best steering attack against a depolarized EPR commitment.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{self, DepolarizingChannel, QubitChannel};
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, StateVector, Subsystem};
use crate::states::{self, DensityMatrix, ProjectiveBasis};

pub const DEFAULT_STEER_GRID: usize = 64;

/// Alice's entangling amplitudes for |a₀⟩|0⟩ + |a₁⟩|1⟩ and the resolution of
/// the (θ, φ) grid searched for her steering measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CheatStrategy {
    a0: StateVector,
    a1: StateVector,
    steer_grid: (usize, usize),
}

impl CheatStrategy {
    pub fn new(a0: StateVector, a1: StateVector, steer_grid: (usize, usize)) -> Result<Self> {
        for a in [&a0, &a1] {
            if a.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: a.dim(),
                });
            }
            StateVector::new(a.amplitudes().to_vec())?;
        }
        if steer_grid.0 < 2 || steer_grid.1 < 2 {
            return Err(Error::OutOfRange {
                name: "steer_grid",
                value: steer_grid.0.min(steer_grid.1) as f64,
                range: "≥ 2 per axis",
            });
        }
        Ok(Self { a0, a1, steer_grid })
    }

    /// a₀ = |0⟩, a₁ = |1⟩: Alice commits half of |ψ⁺⟩.
    pub fn bell() -> Self {
        Self {
            a0: StateVector::basis(2, 0),
            a1: StateVector::basis(2, 1),
            steer_grid: (DEFAULT_STEER_GRID, DEFAULT_STEER_GRID),
        }
    }

    pub fn with_grid(mut self, n_theta: usize, n_phi: usize) -> Result<Self> {
        self.steer_grid = (n_theta, n_phi);
        Self::new(self.a0, self.a1, self.steer_grid)
    }

    pub fn a0(&self) -> &StateVector {
        &self.a0
    }

    pub fn a1(&self) -> &StateVector {
        &self.a1
    }

    pub fn steer_grid(&self) -> (usize, usize) {
        self.steer_grid
    }

    pub fn joint_state(&self) -> Result<DensityMatrix> {
        states::cheat_state(&self.a0, &self.a1)
    }

    /// θ on [0, π] inclusive, φ on [0, 2π) exclusive; row-major in θ.
    pub fn grid_bases(&self) -> Vec<ProjectiveBasis> {
        let (nt, np) = self.steer_grid;
        let mut out = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let theta = PI * i as f64 / (nt - 1) as f64;
            for k in 0..np {
                let phi = 2.0 * PI * k as f64 / np as f64;
                out.push(ProjectiveBasis::new(theta, phi).expect("grid stays in range"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HidingReport {
    pub delta_raw: f64,
    pub delta_channel: f64,
    pub p_bcheat: f64,
}

/// Bob's best guessing probability for the committed bit:
/// ½ + max(Δ(σ₀, σ₁), Δ(S[σ₀], S[σ₁]))/2.
pub fn bob_cheat_probability(
    sigma0: &DensityMatrix,
    sigma1: &DensityMatrix,
    channel: &impl QubitChannel,
) -> Result<HidingReport> {
    sigma0.require_qubit()?;
    sigma1.require_qubit()?;
    let delta_raw = sigma0.trace_distance(sigma1)?;
    let delta_channel = crate::qmat::trace_distance(&channel.apply(sigma0.mat())?, &channel.apply(sigma1.mat())?)?;
    Ok(HidingReport {
        delta_raw,
        delta_channel,
        p_bcheat: 0.5 + delta_raw.max(delta_channel) / 2.0,
    })
}

/// Bob's view of a BB84 commitment to `bit`: the even mixture of its two
/// encodings.
pub fn bb84_commitment_state(bit: states::Bit) -> DensityMatrix {
    let parts: Vec<DensityMatrix> = [states::Bit::ZERO, states::Bit::ONE]
        .into_iter()
        .map(|variant| DensityMatrix::pure(&states::bb84_state(states::Bb84Symbol { bit, variant })))
        .collect();
    DensityMatrix::mixture(&[(0.5, &parts[0]), (0.5, &parts[1])]).expect("valid mixture")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub fidelity_sq: f64,
    /// max |Σⱼ pⱼ ρ_B|ⱼ − ρ_B| over entries for this basis.
    pub no_signalling_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingReport {
    pub best_basis: ProjectiveBasis,
    pub best_fidelity_sq: f64,
    pub fidelity_grid: Vec<GridPoint>,
}

impl BindingReport {
    pub fn max_no_signalling_residual(&self) -> f64 {
        self.fidelity_grid
            .iter()
            .map(|p| p.no_signalling_residual)
            .fold(0.0, f64::max)
    }

    pub fn objective_spread(&self) -> f64 {
        let (lo, hi) = self
            .fidelity_grid
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.fidelity_sq), hi.max(p.fidelity_sq))
            });
        hi - lo
    }
}

/// Alice's steering attack. For every grid basis she measures her half of
/// (I⊗ε)[cheat_state(a₀, a₁)], and, knowing her outcome j, announces
/// whichever of `target` or its complement I − `target` Bob's conditional
/// state ρ_B|ⱼ is closer to. The objective is Σⱼ pⱼ · max F²(ρ_B|ⱼ, ·); the
/// report keeps the best basis (first in grid order on ties).
pub fn alice_binding_attack(
    strategy: &CheatStrategy,
    channel: &DepolarizingChannel,
    target: &DensityMatrix,
) -> Result<BindingReport> {
    target.require_qubit()?;
    let complement = DensityMatrix::qubit(&ComplexMatrix::identity(2) - target.mat())?;
    let joint = channels::lift_apply(channel, &strategy.joint_state()?)?;
    let marginal = joint.reduced(Subsystem::B)?;

    let bases = strategy.grid_bases();
    let fidelity_grid = bases
        .par_iter()
        .map(|basis| -> Result<GridPoint> {
            let branches = states::steering_ensemble(&joint, Subsystem::A, basis)?;
            let mut objective = 0.0;
            let mut average = ComplexMatrix::zeros(2);
            for branch in &branches {
                let Some(cond) = &branch.conditional else { continue };
                let best = cond.fidelity(target)?.powi(2).max(cond.fidelity(&complement)?.powi(2));
                objective += branch.probability * best;
                average = &average + &cond.mat().scale_re(branch.probability);
            }
            Ok(GridPoint {
                theta: basis.theta(),
                phi: basis.phi(),
                fidelity_sq: objective,
                no_signalling_residual: average.max_abs_diff(marginal.mat()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, point) in fidelity_grid.iter().enumerate() {
        if point.fidelity_sq > fidelity_grid[best].fidelity_sq {
            best = i;
        }
    }
    Ok(BindingReport {
        best_basis: bases[best],
        best_fidelity_sq: fidelity_grid[best].fidelity_sq,
        fidelity_grid,
    })
}

/// Best attack value at each q.
pub fn binding_curve(
    strategy: &CheatStrategy,
    q_grid: &[f64],
    target: &DensityMatrix,
) -> Result<Vec<(f64, f64)>> {
    q_grid
        .iter()
        .map(|&q| {
            let report = alice_binding_attack(strategy, &DepolarizingChannel::new(q)?, target)?;
            Ok((q, report.best_fidelity_sq))
        })
        .collect()
}
