//! Fixed states and peripheral spectrum of arbitrary channels.
//!
//! Run with `cargo run --example fixed_point_analysis`.

use fixcone::channel::{ChoiMatrix, FP_TOL};
use fixcone::linops::{c, CMatrix};
use fixcone::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn describe(name: &str, ch: &ChoiMatrix) -> fixcone::Result<()> {
    let fp = ch.fixed_points(FP_TOL)?;
    let worst = fp.eigenvalue_residuals.iter().copied().fold(0.0, f64::max);
    println!(
        "{name:<22} fixed dim {:>2}  states {:>2}  peripheral {:>2}  worst residual {worst:.1e}",
        fp.fixed_space_dim,
        fp.states.len(),
        fp.peripheral_spectrum.len()
    );
    Ok(())
}

fn main() -> fixcone::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    describe("random qubit channel", &random::channel(2, 2, &mut rng))?;
    describe("random qutrit channel", &random::channel(3, 3, &mut rng))?;
    describe("depolarizing(0.3)", &ChoiMatrix::depolarizing(3, 0.3))?;
    describe("dephasing", &ChoiMatrix::dephasing(3))?;
    describe("identity", &ChoiMatrix::identity(2))?;

    // A permutation has a unit-modulus spectrum but a single fixed state.
    let mut shift = CMatrix::zeros(3, 3);
    for i in 0..3 {
        shift[((i + 1) % 3, i)] = c(1.0, 0.0);
    }
    let perm = ChoiMatrix::unitary(&shift)?;
    describe("cyclic shift", &perm)?;
    for z in perm.fixed_points(FP_TOL)?.peripheral_spectrum.iter().take(3) {
        println!("  eigenvalue {:+.3} {:+.3}i", z[0], z[1]);
    }
    Ok(())
}
