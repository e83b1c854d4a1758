//! Two-qubit entanglement: Wootters concurrence, PPT separability, the
//! concurrence factorization law for I ⊗ S, and bisection for the
//! entanglement-breaking threshold of a channel family.

use serde::Serialize;

use crate::channels::{self, QubitChannel, EB_TOL};
use crate::error::{Error, Result};
use crate::qmat::{self, ComplexMatrix, StateVector, Subsystem, C64};
use crate::states::DensityMatrix;

/// Eigenvalues of ρ at or below this are treated as exact zeros.
const RANK_TOL: f64 = 1e-13;

/// Concurrence together with the Wootters λ values it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// Descending, nonnegative.
    pub lambdas: [f64; 4],
}

/// σy ⊗ σy
fn spin_flip() -> ComplexMatrix {
    let y = ComplexMatrix::pauli_y();
    qmat::kron(&y, &y)
}

/// Wootters concurrence C = max(0, λ₁ − λ₂ − λ₃ − λ₄).
///
/// Writes ρ = W W† with W = V√Λ over the numerically nonzero spectrum, then
/// takes the λᵢ as singular values of the symmetric τ = Wᵀ (σy⊗σy) W. The
/// singular values come from the spectrum of the Hermitian dilation
/// [[0, τ], [τ†, 0]], so no eigenvalue is square-rooted after the solve and
/// zero λᵢ stay at roundoff level instead of √roundoff.
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    rho.require_two_qubit()?;
    let eig = qmat::eigh(rho.mat())?;
    let kept: Vec<usize> = (0..4).filter(|&k| eig.values[k] > RANK_TOL).collect();
    let r = kept.len();
    if r == 0 {
        return Err(Error::InvalidDensity("state has no support".into()));
    }
    // columns w_k = √λ_k v_k and their spin flips (σy⊗σy) w_k*
    let flip = spin_flip();
    let w: Vec<Vec<C64>> = kept
        .iter()
        .map(|&k| {
            let s = eig.values[k].sqrt();
            (0..4).map(|i| eig.vectors[(i, k)] * s).collect()
        })
        .collect();
    let w_tilde: Vec<Vec<C64>> = w
        .iter()
        .map(|col| (0..4).map(|i| (0..4).map(|j| flip[(i, j)] * col[j].conj()).sum()).collect())
        .collect();

    // τ_ij = ⟨w̃_i | w_j⟩ = w_iᵀ (σy⊗σy) w_j
    let mut dilation = ComplexMatrix::zeros(2 * r);
    for i in 0..r {
        for j in 0..r {
            let tau: C64 = (0..4).map(|k| w_tilde[i][k].conj() * w[j][k]).sum();
            dilation[(i, r + j)] = tau;
            dilation[(r + j, i)] = tau.conj();
        }
    }
    let values = qmat::eig_hermitian(&dilation.hermitian_part())?;

    let mut lambdas = [0.0; 4];
    for (slot, &v) in lambdas.iter_mut().zip(&values[..r]) {
        *slot = v.max(0.0);
    }
    let value = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(ConcurrenceResult { value, lambdas })
}

/// PPT test: the smallest eigenvalue of ρ^{T_B} is ≥ −tol. Exact at 2⊗2.
pub fn is_separable(rho: &DensityMatrix, tol: f64) -> Result<bool> {
    Ok(min_partial_transpose_eigenvalue(rho)? >= -tol)
}

pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    rho.require_two_qubit()?;
    let pt = qmat::partial_transpose(rho.mat(), Subsystem::B)?;
    let values = qmat::eig_hermitian(&pt)?;
    Ok(*values.last().expect("4 eigenvalues"))
}

/// |C((I⊗S)[|x⟩⟨x|]) − C(|x⟩⟨x|) · C((I⊗S)[|ψ⁺⟩⟨ψ⁺|])|.
pub fn factorization_residual(x: &StateVector, channel: &impl QubitChannel) -> Result<f64> {
    if x.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: x.dim(),
        });
    }
    let rho = DensityMatrix::pure(x);
    let lhs = concurrence(&channels::lift_apply(channel, &rho)?)?.value;
    let rhs = concurrence(&rho)?.value * concurrence(&channels::choi(channel))?.value;
    Ok((lhs - rhs).abs())
}

/// Bisects `[lo, hi]` for the parameter where `family(q)` switches between
/// entanglement breaking and not, stopping once the bracket is ≤ `width`.
pub fn eb_threshold<C, F>(family: F, lo: f64, hi: f64, width: f64) -> Result<f64>
where
    C: QubitChannel,
    F: Fn(f64) -> Result<C>,
{
    if !(lo < hi) || !(width > 0.0) {
        return Err(Error::OutOfRange {
            name: "bracket",
            value: hi - lo,
            range: "lo < hi and width > 0",
        });
    }
    let classify = |q: f64| -> Result<bool> { Ok(channels::is_entanglement_breaking(&family(q)?, EB_TOL)) };
    let at_lo = classify(lo)?;
    if at_lo == classify(hi)? {
        return Err(Error::NoSignChange { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > width {
        let mid = 0.5 * (a + b);
        if classify(mid)? == at_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
