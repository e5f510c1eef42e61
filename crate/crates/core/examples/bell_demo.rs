//! Two-qubit Bell-basis example: discriminability ledger and channel.
//!
//! Run with `cargo run --example bell_demo`.

use fixcone::demo::{run_bell_demo, BellDemoParams, BellDemoReport};
use fixcone::sdp::SdpOptions;

fn show(title: &str, rep: &BellDemoReport) {
    println!("== {title}");
    for c in &rep.discriminability {
        println!("  {:<22} {:+.3e}  {}", c.name, c.value, if c.holds { "ok" } else { "FAILS" });
    }
    if let Some(reason) = &rep.fallback_reason {
        println!("  fallback: {reason}");
    }
    println!("  path {:?}, cptp {}", rep.path, rep.cptp.is_cptp());
    if let Some(s) = &rep.sdp {
        println!("  tr X = {:.6}, rank {}, contraction {:.4}", s.trace_x, s.rank, s.contraction);
    }
    println!("  fixed-point residuals {:?}", rep.fixed_point_residuals);
}

fn main() -> fixcone::Result<()> {
    let opts = SdpOptions::default();
    show("default coefficients", &run_bell_demo(&BellDemoParams::default(), &opts)?);

    let pure = BellDemoParams { s: [1.0, 0.0, 0.0], r: [1.0, 0.0, 0.0], ..Default::default() };
    show("s = r = (1, 0, 0)", &run_bell_demo(&pure, &opts)?);

    let rotated = BellDemoParams::default().with_coeffs([0.8, 0.6, -0.6, 0.8, 1.0, 0.0, 0.0, 1.0]);
    show("rotated superpositions", &run_bell_demo(&rotated, &opts)?);
    Ok(())
}
