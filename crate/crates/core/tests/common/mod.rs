#![allow(dead_code)]

use ebcommit::qmat::{ComplexMatrix, StateVector, C64};
use ebcommit::states::DensityMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn gaussian(rng: &mut StdRng) -> f64 {
    // Box-Muller
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn complex_gaussian(rng: &mut StdRng) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

/// Haar-random pure state.
pub fn random_pure(rng: &mut StdRng, dim: usize) -> StateVector {
    let amps = (0..dim).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(amps).unwrap()
}

/// Ginibre ensemble: G G† / tr. Mixed with full rank almost surely.
pub fn random_density(rng: &mut StdRng, dim: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_entries(dim, (0..dim * dim).map(|_| complex_gaussian(rng)).collect()).unwrap();
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let m = m.scale_re(1.0 / tr).hermitian_part();
    let subsystems = if dim == 4 { vec![2, 2] } else { vec![dim] };
    DensityMatrix::new(m, subsystems).unwrap()
}

pub fn random_hermitian(rng: &mut StdRng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_entries(dim, (0..dim * dim).map(|_| complex_gaussian(rng)).collect()).unwrap();
    (&g + &g.adjoint()).scale_re(0.5)
}
