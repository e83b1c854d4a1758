//! State constructors and projective measurement.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{self, ComplexMatrix, StateVector, Subsystem, C64, HERMITIAN_TOL};

/// Probabilities below this are treated as impossible outcomes.
pub const MIN_OUTCOME_PROB: f64 = 1e-12;

/// Hermitian, unit-trace, PSD operator with its tensor structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    subsystems: Vec<usize>,
}

impl DensityMatrix {
    /// Validates `mat` (Hermitian, trace 1, PSD, all within 1e-10) and
    /// stores its Hermitian part.
    pub fn new(mat: ComplexMatrix, subsystems: Vec<usize>) -> Result<Self> {
        let product: usize = subsystems.iter().product();
        if subsystems.is_empty() || product != mat.dim() {
            return Err(Error::DimensionMismatch {
                expected: mat.dim(),
                found: product,
            });
        }
        let residual = mat.hermiticity_error();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let mat = mat.hermitian_part();
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("trace is {trace}")));
        }
        if !qmat::is_psd(&mat, HERMITIAN_TOL)? {
            return Err(Error::InvalidDensity("matrix is not positive semidefinite".into()));
        }
        Ok(Self { mat, subsystems })
    }

    /// Single qubit.
    pub fn qubit(mat: ComplexMatrix) -> Result<Self> {
        Self::new(mat, vec![2])
    }

    /// Two qubits, Alice's factor first.
    pub fn two_qubit(mat: ComplexMatrix) -> Result<Self> {
        Self::new(mat, vec![2, 2])
    }

    pub fn pure(v: &StateVector) -> Self {
        let subsystems = if v.dim() == 4 { vec![2, 2] } else { vec![v.dim()] };
        Self {
            mat: v.projector(),
            subsystems,
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let subsystems = if dim == 4 { vec![2, 2] } else { vec![dim] };
        Self {
            mat: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
            subsystems,
        }
    }

    /// Callers guarantee the density-matrix invariants; used where they hold by construction.
    pub(crate) fn from_trusted(mat: ComplexMatrix, subsystems: Vec<usize>) -> Self {
        Self {
            mat: mat.hermitian_part(),
            subsystems,
        }
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn subsystems(&self) -> &[usize] {
        &self.subsystems
    }

    pub fn is_two_qubit(&self) -> bool {
        self.subsystems == [2, 2]
    }

    pub(crate) fn require_two_qubit(&self) -> Result<()> {
        if !self.is_two_qubit() {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn require_qubit(&self) -> Result<()> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub fn reduced(&self, keep: Subsystem) -> Result<DensityMatrix> {
        self.require_two_qubit()?;
        Ok(Self::from_trusted(qmat::partial_trace(&self.mat, keep)?, vec![2]))
    }

    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        qmat::trace_distance(&self.mat, &other.mat)
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        qmat::fidelity(&self.mat, &other.mat)
    }

    /// Probability-weighted mixture; weights must sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidDensity("empty mixture".into()))?;
        let mut acc = ComplexMatrix::zeros(first.1.dim());
        for (w, rho) in parts {
            acc = &acc + &rho.mat.scale_re(*w);
        }
        Self::new(acc, first.1.subsystems.clone())
    }
}

/// A bit value, 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bit(u8);

impl Bit {
    pub const ZERO: Bit = Bit(0);
    pub const ONE: Bit = Bit(1);

    pub fn new(value: u8) -> Result<Self> {
        match value {
            0 | 1 => Ok(Bit(value)),
            _ => Err(Error::OutOfRange {
                name: "bit",
                value: value as f64,
                range: "{0, 1}",
            }),
        }
    }

    pub fn from_bool(b: bool) -> Self {
        Bit(b as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn flip(self) -> Self {
        Bit(1 - self.0)
    }
}

/// The two BB84 measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bb84Basis {
    Rectilinear,
    Diagonal,
}

impl Bb84Basis {
    /// Bit 0 is encoded rectilinearly, bit 1 diagonally.
    pub fn for_bit(bit: Bit) -> Self {
        if bit == Bit::ZERO {
            Bb84Basis::Rectilinear
        } else {
            Bb84Basis::Diagonal
        }
    }

    pub fn projective(self) -> ProjectiveBasis {
        match self {
            Bb84Basis::Rectilinear => ProjectiveBasis::computational(),
            Bb84Basis::Diagonal => ProjectiveBasis::diagonal(),
        }
    }
}

/// One of the four BB84 preparations: the committed bit selects the basis,
/// the variant selects the state within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bb84Symbol {
    pub bit: Bit,
    pub variant: Bit,
}

impl Bb84Symbol {
    pub fn new(bit: u8, variant: u8) -> Result<Self> {
        Ok(Self {
            bit: Bit::new(bit)?,
            variant: Bit::new(variant)?,
        })
    }

    pub fn basis(self) -> Bb84Basis {
        Bb84Basis::for_bit(self.bit)
    }
}

/// Orthonormal qubit basis whose first vector sits at Bloch angles (θ, φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveBasis {
    theta: f64,
    phi: f64,
}

impl ProjectiveBasis {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                range: "[0, π]",
            });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                range: "[0, 2π)",
            });
        }
        Ok(Self { theta, phi })
    }

    /// {|0⟩, |1⟩}
    pub fn computational() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    /// {|+⟩, |−⟩}
    pub fn diagonal() -> Self {
        Self {
            theta: FRAC_PI_2,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// b₀ = cos(θ/2)|0⟩ + e^{iφ}sin(θ/2)|1⟩, b₁ = −e^{−iφ}sin(θ/2)|0⟩ + cos(θ/2)|1⟩.
    pub fn vectors(&self) -> [StateVector; 2] {
        let (c, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let b0 = StateVector::from_bloch(self.theta, self.phi);
        let b1 = StateVector::new(vec![-C64::from_polar(s, -self.phi), C64::new(c, 0.0)])
            .expect("unit vector by construction");
        [b0, b1]
    }

    pub fn vector(&self, outcome: Bit) -> StateVector {
        let [b0, b1] = self.vectors();
        if outcome == Bit::ZERO {
            b0
        } else {
            b1
        }
    }
}

/// |0⟩, |1⟩ for bit 0; |+⟩, |−⟩ for bit 1.
pub fn bb84_state(symbol: Bb84Symbol) -> StateVector {
    symbol.basis().projective().vector(symbol.variant)
}

/// (|00⟩ + |11⟩)/√2.
pub fn bell_psi_plus() -> StateVector {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    StateVector::new(vec![h, z, z, h]).expect("normalized")
}

/// q|ψ⁺⟩⟨ψ⁺| + (1 − q)/4 · I₄.
pub fn isotropic(q: f64) -> Result<DensityMatrix> {
    check_unit_interval("q", q)?;
    let bell = bell_psi_plus().projector().scale_re(q);
    let noise = ComplexMatrix::identity(4).scale_re((1.0 - q) / 4.0);
    Ok(DensityMatrix::from_trusted(&bell + &noise, vec![2, 2]))
}

/// Pure state of the normalized joint vector |a₀⟩_A|0⟩_B + |a₁⟩_A|1⟩_B.
pub fn cheat_state(a0: &StateVector, a1: &StateVector) -> Result<DensityMatrix> {
    Ok(DensityMatrix::pure(&cheat_vector(a0, a1)?))
}

pub fn cheat_vector(a0: &StateVector, a1: &StateVector) -> Result<StateVector> {
    for a in [a0, a1] {
        if a.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: a.dim(),
            });
        }
    }
    let (x, y) = (a0.amplitudes(), a1.amplitudes());
    StateVector::normalized(vec![x[0], y[0], x[1], y[1]])
}

/// Outcome of a single-qubit projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: Bit,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Born-rule measurement driven by an external uniform draw in [0, 1).
pub fn measure(rho: &DensityMatrix, basis: &ProjectiveBasis, uniform: f64) -> Result<Measurement> {
    rho.require_qubit()?;
    let [b0, b1] = basis.vectors();
    let p0 = rho.mat().expectation(&b0).re.clamp(0.0, 1.0);
    let outcome = Bit::from_bool(uniform >= p0);
    let (probability, post_state) = if outcome == Bit::ZERO {
        (p0, b0)
    } else {
        (1.0 - p0, b1)
    };
    Ok(Measurement {
        outcome,
        probability,
        post_state,
    })
}

/// One branch of a local measurement on one half of a 2⊗2 state.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeredBranch {
    pub probability: f64,
    /// State of the unmeasured qubit given this outcome; `None` when the
    /// outcome is impossible.
    pub conditional: Option<DensityMatrix>,
}

/// Both branches of measuring `side` of `rho` in `basis`.
pub fn steering_ensemble(
    rho: &DensityMatrix,
    side: Subsystem,
    basis: &ProjectiveBasis,
) -> Result<[SteeredBranch; 2]> {
    rho.require_two_qubit()?;
    let vectors = basis.vectors();
    let branch = |v: &StateVector| -> Result<SteeredBranch> {
        let local = v.projector();
        let id = ComplexMatrix::identity(2);
        let proj = match side {
            Subsystem::A => qmat::kron(&local, &id),
            Subsystem::B => qmat::kron(&id, &local),
        };
        let projected = &(&proj * rho.mat()) * &proj;
        let probability = projected.trace().re.max(0.0);
        let conditional = if probability < MIN_OUTCOME_PROB {
            None
        } else {
            let reduced = qmat::partial_trace(&projected, side.other())?;
            Some(DensityMatrix::from_trusted(reduced.scale_re(1.0 / probability), vec![2]))
        };
        Ok(SteeredBranch {
            probability,
            conditional,
        })
    };
    Ok([branch(&vectors[0])?, branch(&vectors[1])?])
}

/// Outcome of measuring one half of a two-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasurement {
    pub outcome: Bit,
    pub probability: f64,
    /// Post-measurement state of the other qubit.
    pub conditional: DensityMatrix,
}

/// Measures `side` of `rho` in `basis`. Outcomes with probability below
/// [`MIN_OUTCOME_PROB`] are never returned.
pub fn measure_joint(
    rho: &DensityMatrix,
    side: Subsystem,
    basis: &ProjectiveBasis,
    uniform: f64,
) -> Result<JointMeasurement> {
    let branches = steering_ensemble(rho, side, basis)?;
    let outcome = sample_branch(&branches, uniform)?;
    let [b0, b1] = branches;
    let branch = if outcome == Bit::ZERO { b0 } else { b1 };
    Ok(JointMeasurement {
        outcome,
        probability: branch.probability,
        conditional: branch.conditional.expect("sampled branch is possible"),
    })
}

/// Picks a branch with the Born rule, never returning an impossible one.
pub fn sample_branch(branches: &[SteeredBranch; 2], uniform: f64) -> Result<Bit> {
    match (&branches[0].conditional, &branches[1].conditional) {
        (None, None) => Err(Error::InvalidDensity("both outcomes have zero probability".into())),
        (Some(_), None) => Ok(Bit::ZERO),
        (None, Some(_)) => Ok(Bit::ONE),
        _ => Ok(Bit::from_bool(uniform >= branches[0].probability)),
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn qubit(entries: [f64; 4]) -> DensityMatrix {
        DensityMatrix::qubit(ComplexMatrix::from_real(2, &entries).unwrap()).unwrap()
    }

    #[test]
    fn bb84_encodings() {
        let zero = bb84_state(Bb84Symbol::new(0, 0).unwrap());
        assert_eq!(zero.amplitudes(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let plus = bb84_state(Bb84Symbol::new(1, 0).unwrap());
        assert_abs_diff_eq!(plus.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(plus.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let minus = bb84_state(Bb84Symbol::new(1, 1).unwrap());
        assert_abs_diff_eq!(minus.inner(&plus).norm(), 0.0, epsilon = 1e-15);
        assert!(Bb84Symbol::new(2, 0).is_err());
    }

    #[test]
    fn bb84_pairs_average_to_maximally_mixed() {
        let half = ComplexMatrix::identity(2).scale_re(0.5);
        for bit in 0..2 {
            let avg = &bb84_state(Bb84Symbol::new(bit, 0).unwrap()).projector().scale_re(0.5)
                + &bb84_state(Bb84Symbol::new(bit, 1).unwrap()).projector().scale_re(0.5);
            assert!(avg.max_abs_diff(&half) < 1e-15, "bit {bit}: {avg:?}");
        }
    }

    #[test]
    fn bell_state_amplitudes_and_marginal() {
        let bell = bell_psi_plus();
        let a = bell.amplitudes();
        assert_eq!(a[0].re, FRAC_1_SQRT_2);
        assert_eq!(a[3].re, FRAC_1_SQRT_2);
        assert_eq!(a[1], C64::new(0.0, 0.0));
        let reduced = DensityMatrix::pure(&bell).reduced(Subsystem::B).unwrap();
        assert!(reduced.mat().max_abs_diff(&ComplexMatrix::diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn isotropic_endpoints_and_range() {
        let one = isotropic(1.0).unwrap();
        assert!(one.mat().max_abs_diff(&bell_psi_plus().projector()) < 1e-15);
        let zero = isotropic(0.0).unwrap();
        assert!(zero.mat().max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.25)) < 1e-15);
        assert!(matches!(isotropic(1.5), Err(Error::OutOfRange { .. })));
        assert!(isotropic(-0.1).is_err());
        for k in 0..=10 {
            let rho = isotropic(k as f64 / 10.0).unwrap();
            DensityMatrix::two_qubit(rho.mat().clone()).unwrap();
        }
    }

    #[test]
    fn cheat_state_bell_and_product_cases() {
        let k0 = StateVector::basis(2, 0);
        let k1 = StateVector::basis(2, 1);
        let bell = cheat_state(&k0, &k1).unwrap();
        assert!(bell.mat().max_abs_diff(&bell_psi_plus().projector()) < 1e-15);

        // a0 = a1 = |0⟩ gives |0⟩ ⊗ |+⟩
        let prod = cheat_state(&k0, &k0).unwrap();
        let expected = qmat::kron(&k0.projector(), &StateVector::from_bloch(FRAC_PI_2, 0.0).projector());
        assert!(prod.mat().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cheat_state_rejects_zero_joint_vector() {
        let k0 = StateVector::basis(2, 0);
        let wide = StateVector::basis(4, 0);
        assert!(matches!(cheat_state(&k0, &wide), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn basis_vectors_are_orthonormal() {
        for i in 0..8 {
            for j in 0..8 {
                let b = ProjectiveBasis::new(PI * i as f64 / 7.0, 2.0 * PI * j as f64 / 8.0).unwrap();
                let [v0, v1] = b.vectors();
                assert_abs_diff_eq!(v0.inner(&v0).re, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(v1.inner(&v1).re, 1.0, epsilon = 1e-12);
                assert!(v0.inner(&v1).norm() < 1e-12);
            }
        }
        assert!(ProjectiveBasis::new(-0.1, 0.0).is_err());
        assert!(ProjectiveBasis::new(0.0, 2.0 * PI).is_err());
    }

    #[test]
    fn measure_examples() {
        let zero = qubit([1.0, 0.0, 0.0, 0.0]);
        for u in [0.0, 0.3, 0.999] {
            let m = measure(&zero, &ProjectiveBasis::computational(), u).unwrap();
            assert_eq!(m.outcome, Bit::ZERO);
        }
        let mixed = DensityMatrix::maximally_mixed(2);
        let basis = ProjectiveBasis::new(1.1, 0.4).unwrap();
        assert_eq!(measure(&mixed, &basis, 0.49).unwrap().outcome, Bit::ZERO);
        assert_eq!(measure(&mixed, &basis, 0.51).unwrap().outcome, Bit::ONE);

        let plus = DensityMatrix::pure(&StateVector::from_bloch(FRAC_PI_2, 0.0));
        let m = measure(&plus, &ProjectiveBasis::computational(), 0.1).unwrap();
        assert_abs_diff_eq!(m.probability, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn measure_joint_on_bell_state() {
        let bell = DensityMatrix::pure(&bell_psi_plus());
        let m = measure_joint(&bell, Subsystem::A, &ProjectiveBasis::computational(), 0.2).unwrap();
        assert_eq!(m.outcome, Bit::ZERO);
        assert_abs_diff_eq!(m.probability, 0.5, epsilon = 1e-15);
        assert!(m.conditional.mat().max_abs_diff(&ComplexMatrix::diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn measure_joint_product_state_has_no_steering() {
        let rho_a = qubit([0.7, 0.2, 0.2, 0.3]);
        let rho_b = qubit([0.4, -0.1, -0.1, 0.6]);
        let prod = DensityMatrix::two_qubit(qmat::kron(rho_a.mat(), rho_b.mat())).unwrap();
        let basis = ProjectiveBasis::new(0.8, 2.0).unwrap();
        for u in [0.1, 0.9] {
            let m = measure_joint(&prod, Subsystem::A, &basis, u).unwrap();
            assert!(m.conditional.mat().max_abs_diff(rho_b.mat()) < 1e-14);
        }
    }

    #[test]
    fn measure_joint_never_returns_impossible_outcome() {
        // |00⟩: outcome 1 on A in the computational basis has probability 0
        let rho = DensityMatrix::pure(&StateVector::basis(4, 0));
        for u in [0.0, 0.5, 0.999_999] {
            let m = measure_joint(&rho, Subsystem::A, &ProjectiveBasis::computational(), u).unwrap();
            assert_eq!(m.outcome, Bit::ZERO);
        }
    }

    #[test]
    fn steering_average_equals_marginal() {
        let k0 = StateVector::basis(2, 0);
        let a1 = StateVector::from_bloch(1.0, 0.5);
        let rho = cheat_state(&k0, &a1).unwrap();
        let marginal = rho.reduced(Subsystem::B).unwrap();
        let basis = ProjectiveBasis::new(2.0, 4.0).unwrap();
        let branches = steering_ensemble(&rho, Subsystem::A, &basis).unwrap();
        let mut avg = ComplexMatrix::zeros(2);
        for b in &branches {
            avg = &avg + &b.conditional.as_ref().unwrap().mat().scale_re(b.probability);
        }
        assert!(avg.max_abs_diff(marginal.mat()) < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::qubit(ComplexMatrix::diag(&[0.6, 0.6])).is_err());
        assert!(DensityMatrix::qubit(ComplexMatrix::diag(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(2).scale_re(0.5), vec![2, 2]).is_err());
        assert!(DensityMatrix::qubit(ComplexMatrix::from_real(2, &[0.5, 0.3, 0.0, 0.5]).unwrap()).is_err());
    }
}
