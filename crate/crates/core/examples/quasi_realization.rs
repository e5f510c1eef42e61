//! Word probabilities and cone conditions for a hidden Markov model.
//!
//! Run with `cargo run --example quasi_realization`.

use fixcone::quasireal::{PolyhedralCone, QuasiRealization, CONE_TOL, PROB_TOL};
use nalgebra::{DMatrix, DVector};

fn main() -> fixcone::Result<()> {
    let t = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]);
    let q = QuasiRealization::markov(&t, DVector::from_vec(vec![2.0 / 3.0, 1.0 / 3.0]))?;

    for word in [vec![], vec!["0"], vec!["0", "1"], vec!["1", "1", "0"]] {
        println!("p({:<7}) = {:.6}", word.join(""), q.word_probability(&word)?);
    }
    for l in 1..=4 {
        println!("length {l}: total probability {:.12}", q.word_distribution(l)?.total());
    }
    println!("positive realization: {:?}", q.is_positive_realization(PROB_TOL));
    println!("orthant cone: {:?}", q.check_dharmadhikari(&PolyhedralCone::orthant(2), CONE_TOL)?);

    // The same process in a skewed basis has negative entries, yet still
    // preserves the image of the orthant.
    let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
    let g_inv = g.clone().try_inverse().expect("invertible");
    let skew = QuasiRealization::new(
        q.alphabet().to_vec(),
        q.maps().iter().map(|m| &g * m * &g_inv).collect(),
        (q.pi().transpose() * &g_inv).transpose(),
        &g * q.tau(),
    )?;
    let cone = PolyhedralCone::new(vec![g.column(0).into_owned(), g.column(1).into_owned()])?;
    println!("skewed nonneg: {}", skew.is_positive_realization(PROB_TOL).nonneg);
    println!("skewed cone check: {:?}", skew.check_dharmadhikari(&cone, CONE_TOL)?);
    let back = skew.in_cone_basis(&cone)?;
    println!("back in cone coordinates: {:?}", back.is_positive_realization(1e-12));

    let rotation = QuasiRealization::new(
        vec!["r".into()],
        vec![DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        DVector::from_vec(vec![0.5, 0.5]),
        DVector::from_vec(vec![1.0, 1.0]),
    )?;
    println!("rotation: {:?}", rotation.check_dharmadhikari(&PolyhedralCone::orthant(2), CONE_TOL)?);
    Ok(())
}
