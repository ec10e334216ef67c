//! Seeded random ensembles used by property checks and Kraus recombination.
//!
//! Every generator here is ChaCha8 seeded from a 64-bit seed; the algorithm
//! name is exported so reports can record it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::linalg::{c, hermitian_part, real, CMatrix, CVector, HermitianEigen};
use crate::state::{DensityMatrix, HermitianObservable, PureState};

pub const RNG_ALGORITHM: &str = "chacha8";

pub type QfiRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> QfiRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> QfiRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / real(2f64.sqrt())
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| gaussian_complex(rng))
}

/// Haar-distributed pure state on `n` qubits.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PureState {
    PureState::normalized(random_vector(rng, 1 << n)).expect("gaussian vector is nonzero")
}

/// Random density matrix of the given rank (`G G† / tr`, `G` Ginibre).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DensityMatrix {
    let dim = 1 << n;
    let g = ginibre(rng, dim, rank.clamp(1, dim));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::trusted(hermitian_part(&(m / real(tr))))
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianObservable {
    let g = ginibre(rng, dim, dim);
    HermitianObservable::trusted(hermitian_part(&g))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix with the
/// phases of `R`'s diagonal absorbed.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = ginibre(rng, dim, dim);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / real(d.norm()) } else { real(1.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random trace-preserving channel with `n_kraus` operators, obtained from
/// the first `dim` columns of a Haar isometry.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, n_kraus: usize) -> KrausChannel {
    let big = random_unitary(rng, dim * n_kraus);
    let ops = (0..n_kraus)
        .map(|k| big.view((k * dim, 0), (dim, dim)).into_owned())
        .collect();
    KrausChannel::new(ops).expect("non-empty")
}

/// Random POVM with `outcomes` elements: `S^{-1/2} A_x S^{-1/2}` with random
/// positive `A_x` and `S = Σ A_x`. Ranks are drawn so that `S` is invertible.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Vec<CMatrix> {
    let min_rank = dim.div_ceil(outcomes.max(1));
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let rank = rng.random_range(min_rank..=dim);
            let g = ginibre(rng, dim, rank);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, a| acc + a);
    let inv_sqrt = HermitianEigen::new(&total).map(|x| real(1.0 / x.sqrt()));
    raw.iter()
        .map(|a| hermitian_part(&(&inv_sqrt * a * &inv_sqrt)))
        .collect()
}
