//! Qubit channels: Kraus maps, the depolarizing channel, its two-qubit lift
//! I ⊗ ε, Choi states and the entanglement-breaking test.

use serde::{Deserialize, Serialize};

use crate::entanglement;
use crate::error::{Error, Result};
use crate::qmat::{self, ComplexMatrix};
use crate::states::{self, DensityMatrix};

pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Default tolerance on the smallest partial-transpose eigenvalue.
pub const EB_TOL: f64 = 1e-10;

/// Where Bob's depolarizing noise is physically applied. Both placements
/// produce the same map on the transmitted qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLocation {
    #[default]
    BobApparatus,
    TransmissionChannel,
}

/// Anything acting on a single qubit that has a Kraus representation.
pub trait QubitChannel {
    fn kraus(&self) -> KrausChannel;

    /// ε(X) for a 2×2 operator.
    fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.kraus().apply(x)
    }
}

/// CPTP map on a qubit given by Kraus operators with Σ K†K = I.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidDensity("channel needs at least one Kraus operator".into()));
        }
        let mut sum = ComplexMatrix::zeros(2);
        for k in &ops {
            k.require_dim(2)?;
            sum = &sum + &(&k.adjoint() * k);
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(2));
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidDensity(format!(
                "Kraus operators are not trace preserving (residual {residual:.3e})"
            )));
        }
        Ok(Self { ops })
    }

    pub fn identity() -> Self {
        Self {
            ops: vec![ComplexMatrix::identity(2)],
        }
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Σ K X K†.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        x.require_dim(2)?;
        Ok(conjugate_sum(&self.ops, x))
    }

    /// Σ (I ⊗ K) ρ (I ⊗ K)†.
    pub fn apply_lifted(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        x.require_dim(4)?;
        let id = ComplexMatrix::identity(2);
        let lifted: Vec<_> = self.ops.iter().map(|k| qmat::kron(&id, k)).collect();
        Ok(conjugate_sum(&lifted, x))
    }
}

impl QubitChannel for KrausChannel {
    fn kraus(&self) -> KrausChannel {
        self.clone()
    }
}

fn conjugate_sum(ops: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.dim());
    for k in ops {
        out = &out + &(&(k * x) * &k.adjoint());
    }
    out
}

/// ε(X) = qX + (1 − q) tr(X) I/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingChannel {
    q: f64,
}

impl DepolarizingChannel {
    pub fn new(q: f64) -> Result<Self> {
        states::check_unit_interval("q", q)?;
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Pauli-twirl Kraus form. Operators with zero weight are dropped, so
    /// q = 1 yields the single operator I.
    pub fn as_kraus(&self) -> KrausChannel {
        let q = self.q;
        let w_id = (q + (1.0 - q) / 4.0).sqrt();
        let w_pauli = ((1.0 - q) / 4.0).sqrt();
        let mut ops = vec![ComplexMatrix::identity(2).scale_re(w_id)];
        if w_pauli > 0.0 {
            for p in [
                ComplexMatrix::pauli_x(),
                ComplexMatrix::pauli_y(),
                ComplexMatrix::pauli_z(),
            ] {
                ops.push(p.scale_re(w_pauli));
            }
        }
        KrausChannel { ops }
    }
}

impl QubitChannel for DepolarizingChannel {
    fn kraus(&self) -> KrausChannel {
        self.as_kraus()
    }

    fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        depolarize_apply(self, x)
    }
}

/// Closed-form depolarizing map on any 2×2 operator.
pub fn depolarize_apply(c: &DepolarizingChannel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.require_dim(2)?;
    let mixed = ComplexMatrix::identity(2).scale(x.trace() * (0.5 * (1.0 - c.q)));
    Ok(&x.scale_re(c.q) + &mixed)
}

/// (I ⊗ ε)[ρ] for a two-qubit state; Alice's half is untouched.
pub fn lift_apply(channel: &impl QubitChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.require_two_qubit()?;
    let out = channel.kraus().apply_lifted(rho.mat())?;
    Ok(DensityMatrix::from_trusted(out, vec![2, 2]))
}

/// Choi state (I ⊗ ε)[|ψ⁺⟩⟨ψ⁺|].
pub fn choi(channel: &impl QubitChannel) -> DensityMatrix {
    let bell = DensityMatrix::pure(&states::bell_psi_plus());
    lift_apply(channel, &bell).expect("Bell state is two-qubit")
}

/// A qubit channel is entanglement breaking iff its Choi state is separable,
/// which at 2⊗2 is decided exactly by the PPT test.
pub fn is_entanglement_breaking(channel: &impl QubitChannel, tol: f64) -> bool {
    entanglement::is_separable(&choi(channel), tol).expect("Choi state is a valid two-qubit state")
}
