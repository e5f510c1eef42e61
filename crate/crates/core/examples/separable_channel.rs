//! Channel fixing several states with disjoint supports.
//!
//! Run with `cargo run --example separable_channel`.

use fixcone::channel::FP_TOL;
use fixcone::engineer::{build_separable_multi, find_discrimination_projectors, Discrimination, SeparableMultiSpec};
use fixcone::linops::{trace_distance, DensityMatrix, Hermitian, RANK_TOL};

fn main() -> fixcone::Result<()> {
    let sigmas = vec![DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 1)];
    let b = DensityMatrix::basis(3, 2);

    if let Discrimination::Feasible { success, .. } = find_discrimination_projectors(&sigmas, RANK_TOL)? {
        println!("kernel projectors found, tr[Pi_i sigma_i] = {success:?}");
    }
    let spec = SeparableMultiSpec::from_states(sigmas.clone(), b)?;
    for check in spec.checks() {
        println!("{:<66} {:+.3e} {}", check.name, check.value, check.holds);
    }
    let channel = build_separable_multi(&spec)?;
    for (i, s) in sigmas.iter().enumerate() {
        println!("residual of sigma_{i}: {:.2e}", trace_distance(&channel.apply(s)?, s)?);
    }
    let fixed = channel.fixed_points(FP_TOL)?;
    println!("fixed space dim {}, extreme fixed states:", fixed.fixed_space_dim);
    for s in &fixed.states {
        let diag: Vec<f64> = (0..3).map(|i| s.matrix()[(i, i)].re).collect();
        println!("  diag {diag:.3?}");
    }

    // Mixed states work too, as long as their supports do not overlap.
    let s0 = DensityMatrix::new(Hermitian::from_real_diagonal(&[0.7, 0.3, 0.0, 0.0]))?;
    let s1 = DensityMatrix::basis(4, 2);
    let spec = SeparableMultiSpec::from_states(vec![s0.clone(), s1], DensityMatrix::basis(4, 3))?;
    let channel = build_separable_multi(&spec)?;
    println!("4-level mixed state residual: {:.2e}", trace_distance(&channel.apply(&s0)?, &s0)?);
    Ok(())
}
