//! Minimum-trace channel with prescribed fixed points via the SDP.
//!
//! Run with `cargo run --example sdp_channel`.

use fixcone::engineer::build_via_sdp;
use fixcone::linops::{c, CVector, DensityMatrix};
use fixcone::sdp::SdpOptions;

fn main() -> fixcone::Result<()> {
    let opts = SdpOptions::default();

    let pair = [DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)];
    let out = build_via_sdp(&pair, None, &opts)?;
    println!(
        "orthogonal qubits: tr X = {:.9}, rank {}, iterations {}",
        out.x.matrix().trace(),
        out.solution.rank,
        out.solution.iterations
    );
    println!("fixed-point residuals {:?}, cptp {}", out.fixed_point_residuals, out.cptp.is_cptp());

    // Two non-orthogonal pure qutrit states.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let a = DensityMatrix::pure(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
    let b = DensityMatrix::pure(&CVector::from_vec(vec![c(h, 0.0), c(0.0, h), c(0.0, 0.0)]));
    let out = build_via_sdp(&[a, b], Some(&DensityMatrix::basis(3, 2)), &opts)?;
    println!(
        "overlapping qutrits: tr X = {:.6}, contraction {:.4} (converges {})",
        out.x.matrix().trace(),
        out.contraction,
        out.converges
    );
    println!("fixed-point residuals {:?}, cptp {}", out.fixed_point_residuals, out.cptp.is_cptp());
    Ok(())
}
