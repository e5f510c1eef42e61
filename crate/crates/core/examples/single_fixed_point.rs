//! Closed-form channel with one prescribed fixed state.
//!
//! Run with `cargo run --example single_fixed_point`.

use fixcone::engineer::{build_single_fixed_point, single_fixed_point_choi, SingleFixedPointSpec};
use fixcone::linops::{trace_distance, DensityMatrix, Hermitian};

fn main() -> fixcone::Result<()> {
    let sigma = DensityMatrix::new(Hermitian::from_real_diagonal(&[0.6, 0.3, 0.1]))?;
    let b = DensityMatrix::new(Hermitian::from_real_diagonal(&[0.3, 0.5, 0.2]))?;
    let spec = SingleFixedPointSpec::new(sigma.clone(), b)?;
    println!("lambda_max = {:.3}, <V|B|V> = {:.3}", spec.lambda_max, spec.b_overlap());

    let channel = build_single_fixed_point(&spec)?;
    let report = channel.is_cptp();
    println!("cptp = {} (min eig {:.2e}, tp residual {:.2e})", report.is_cptp(), report.min_eig, report.tp_residual);
    println!("|Phi(sigma) - sigma| = {:.2e}", trace_distance(&channel.apply(&sigma)?, &sigma)?);

    // Any starting state is driven towards sigma.
    let settled = channel.settle(&DensityMatrix::basis(3, 1), 500, 1e-12)?;
    println!("from |1><1|: {} steps, distance to sigma {:.2e}", settled.steps, trace_distance(&settled.state, &sigma)?);

    // The overlap inequality alone does not make the Choi matrix positive.
    let thin = DensityMatrix::new(Hermitian::from_real_diagonal(&[0.5, 0.49, 0.01]))?;
    let spec = SingleFixedPointSpec::new(thin, DensityMatrix::basis(3, 2))?;
    for check in spec.checks() {
        println!("{:<36} value {:+.3e} holds {}", check.name, check.value, check.holds);
    }
    println!("builder: {}", build_single_fixed_point(&spec).unwrap_err());
    println!("raw formula min eig: {:.3e}", single_fixed_point_choi(&spec).is_cptp().min_eig);
    Ok(())
}
