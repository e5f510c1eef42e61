//! Classical symbol process from a three-fixed-point qutrit channel.
//!
//! Run with `cargo run --release --example cone_simulation`.

use fixcone::conesim::{estimate_process, run, to_quasi_realization, KickPolicy, SimulationConfig};
use fixcone::engineer::{build_separable_multi, SeparableMultiSpec};
use fixcone::linops::DensityMatrix;
use fixcone::quasireal::{PolyhedralCone, PROB_TOL};

fn main() -> fixcone::Result<()> {
    let spec = SeparableMultiSpec::from_states(
        vec![DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 1)],
        DensityMatrix::basis(3, 2),
    )?;
    let channel = build_separable_multi(&spec)?;
    let config = SimulationConfig::new(channel, KickPolicy::Depolarizing { strength: 0.5 }, 50, 2000, 7);

    let trajectory = run(&config)?;
    println!("{} rounds, {} unclassified", trajectory.rounds.len(), trajectory.unclassified());
    let head: String =
        trajectory.symbols().iter().take(40).map(|s| s.map_or('?', |i| char::from(b'0' + i as u8))).collect();
    println!("symbols: {head}...");

    let process = estimate_process(&trajectory)?;
    println!("transition estimate:");
    for row in &process.transition_estimate {
        println!("  {row:.3?}");
    }
    println!("stationary estimate: {:.3?}", process.stationary_estimate);

    let q = to_quasi_realization(&process)?;
    println!("positive realization: {}", q.is_positive_realization(PROB_TOL).all());
    let orthant = PolyhedralCone::orthant(q.dim());
    println!("orthant cone conditions: {:?}", q.check_dharmadhikari(&orthant, 1e-8)?);
    println!("p(00) = {:.4}, p(01) = {:.4}", q.word_probability(&["0", "0"])?, q.word_probability(&["0", "1"])?);
    Ok(())
}
