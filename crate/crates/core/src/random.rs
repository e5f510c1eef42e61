//! Seeded sampling of unitaries, states, and channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChoiMatrix;
use crate::linops::{c, CMatrix, DensityMatrix, Hermitian};

/// `d × d` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Hermitian {
    Hermitian::hermitize(&ginibre(d, d, rng))
}

/// Random density matrix `G G† / tr[G G†]` with `G` a `d × rank` Ginibre matrix.
pub fn density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(Hermitian::hermitize(&m.unscale(tr)))
}

/// Random pure state.
pub fn pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let u = haar_unitary(d, rng);
    DensityMatrix::pure(&u.column(0).into_owned())
}

/// Random CPTP channel with `n_kraus` Kraus operators, obtained from a Haar
/// isometry `C^d → C^d ⊗ C^n_kraus`.
pub fn channel<R: Rng + ?Sized>(d: usize, n_kraus: usize, rng: &mut R) -> ChoiMatrix {
    let n = n_kraus.max(1);
    let u = haar_unitary(d * n, rng);
    let kraus: Vec<CMatrix> = (0..n).map(|k| CMatrix::from_fn(d, d, |a, i| u[(a * n + k, i)])).collect();
    ChoiMatrix::from_kraus(&kraus).expect("Kraus operators share dimensions")
}
