//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use fixcone::channel::{ChoiMatrix, FP_TOL};
use fixcone::conesim::{estimate_process, run, KickPolicy, SimulationConfig, DEFAULT_CLASSIFY_TOL};
use fixcone::demo::{run_bell_demo, BellDemoParams, DemoPath};
use fixcone::engineer::{
    build_separable_multi, build_single_fixed_point, build_via_sdp, separable_multi_choi, single_fixed_point_choi,
    SeparableMultiSpec, SingleFixedPointSpec,
};
use fixcone::linops::{
    basis_vector, c, half_trace_norm_diff, herm_eig, max_abs, outer, partial_trace, trace_distance, CMatrix,
    DensityMatrix, Hermitian, Subsystem,
};
use fixcone::quasireal::{PolyhedralCone, QuasiRealization};
use fixcone::random;
use fixcone::sdp::{assemble_fixed_point_constraints, SdpOptions};
use fixcone::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn residual(ch: &ChoiMatrix, s: &DensityMatrix) -> f64 {
    half_trace_norm_diff(&ch.apply_operator(s.matrix()).unwrap(), s.matrix())
}

fn min_eig(m: &CMatrix) -> f64 {
    *herm_eig(&Hermitian::hermitize(m)).values.last().unwrap()
}

fn tp_residual(ch: &ChoiMatrix) -> f64 {
    let d = ch.d_in();
    let reduced = partial_trace(ch.matrix().matrix(), (ch.d_out(), d), Subsystem::First).unwrap();
    max_abs(&(reduced - CMatrix::identity(d, d)))
}

fn single_fixed_point_cptp() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_eig, mut worst_tp, mut worst_fp) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut failures = [0usize; 5];
    let mut rejected_by_builder = 0;
    let mut pairs = 0;
    while pairs < 200 {
        let d = 2 + pairs % 3;
        let sigma = random::density(d, d, &mut rng);
        let b = random::density(d, rng.random_range(1..=d), &mut rng);
        let spec = SingleFixedPointSpec::new(sigma.clone(), b).unwrap();
        if spec.b_overlap() > spec.lambda_max {
            continue;
        }
        let ch = single_fixed_point_choi(&spec);
        let eig = min_eig(ch.matrix().matrix());
        let tp = tp_residual(&ch);
        let fp = residual(&ch, &sigma);
        worst_eig = worst_eig.min(eig);
        worst_tp = worst_tp.max(tp);
        worst_fp = worst_fp.max(fp);
        if eig < -1e-9 || tp > 1e-9 || fp > 1e-9 {
            failures[d] += 1;
        }
        if build_single_fixed_point(&spec).is_err() {
            rejected_by_builder += 1;
        }
        pairs += 1;
    }
    let elapsed = start.elapsed();
    Outcome::new(
        failures.iter().sum::<usize>() == 0 && elapsed < Duration::from_secs(10),
        format!(
            "200 pairs, min eig {worst_eig:.3e}, TP {worst_tp:.3e}, fixed-point {worst_fp:.3e}, \
             not CPTP in d=2,3,4: {:?}, {rejected_by_builder} rejected by positivity check, {elapsed:.2?}",
            &failures[2..]
        ),
    )
}

fn validity_boundary() -> Outcome {
    // σ = diag(λ, (1−λ)/(d−1), ...) with B = |0⟩⟨0| = |V_max⟩⟨V_max|: overlap 1 > λ.
    let mut all_rejected = true;
    let mut violations = 0;
    let mut members = 0;
    let mut worst = f64::INFINITY;
    for d in 2..=4 {
        for k in 1..=8 {
            let lambda = 1.0 / d as f64 + k as f64 * (1.0 - 1.0 / d as f64) / 9.0;
            let mut diag = vec![(1.0 - lambda) / (d - 1) as f64; d];
            diag[0] = lambda;
            let sigma = DensityMatrix::new(Hermitian::from_real_diagonal(&diag)).unwrap();
            let spec = SingleFixedPointSpec::new(sigma.clone(), DensityMatrix::basis(d, 0)).unwrap();
            members += 1;
            all_rejected &= matches!(build_single_fixed_point(&spec), Err(Error::ConditionViolated { .. }));
            let ch = single_fixed_point_choi(&spec);
            let eig = min_eig(ch.matrix().matrix());
            worst = worst.min(eig);
            if eig < -1e-9 || tp_residual(&ch) > 1e-9 || residual(&ch, &sigma) > 1e-9 {
                violations += 1;
            }
        }
    }
    Outcome::new(
        all_rejected && violations > 0,
        format!("{members} members, all rejected: {all_rejected}, {violations} violate CPTP/fixed point when relaxed, min Choi eig {worst:.3e}"),
    )
}

fn sdp_orthogonal_qubits() -> Outcome {
    let sigmas = [DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)];
    let problem = assemble_fixed_point_constraints(&sigmas).unwrap();
    let mut candidate = CMatrix::zeros(4, 4);
    for ii in [0, 3] {
        candidate += outer(&basis_vector(4, ii), &basis_vector(4, ii));
    }
    let violation = |x: &CMatrix| {
        let x = Hermitian::hermitize(x);
        problem.constraints.iter().map(|k| (k.a.inner(&x) - k.b).abs()).fold(0.0, f64::max)
    };
    // Feasible family: Σ|ii⟩⟨ii| plus a coherence t|00⟩⟨11| + h.c., |t| ≤ 1.
    let coh = outer(&basis_vector(4, 0), &basis_vector(4, 3));
    let mut family_min = f64::INFINITY;
    for a in -4..=4 {
        for b in -4..=4 {
            let t = c(a as f64 / 4.0, b as f64 / 4.0);
            if t.norm() > 1.0 {
                continue;
            }
            let x = &candidate + &coh * t + coh.adjoint() * t.conj();
            if violation(&x) <= 1e-12 && min_eig(&x) >= -1e-12 {
                family_min = family_min.min(x.trace().re);
            }
        }
    }
    let built = build_via_sdp(&sigmas, None, &SdpOptions::default()).unwrap();
    let x = built.x.matrix().matrix();
    let trace = x.trace().re;
    let rest = CMatrix::identity(2, 2) - partial_trace(x, (2, 2), Subsystem::First).unwrap();
    let res = built.fixed_point_residuals.iter().cloned().fold(0.0, f64::max);
    // The minimum-trace face is the whole family; strip the coherence and compare.
    let t = x[(0, 3)];
    let off_face = max_abs(&(x - &candidate - &coh * t - coh.adjoint() * t.conj()));
    let pass = (trace - 2.0).abs() <= 1e-6
        && (trace - family_min).abs() <= 1e-6
        && violation(&candidate) <= 1e-12
        && violation(x) <= 1e-6
        && off_face <= 1e-6
        && t.norm() <= 1.0
        && max_abs(&rest) <= 1e-6
        && res <= 1e-8;
    Outcome::new(
        pass,
        format!(
            "tr X = {trace:.9}, family min {family_min}, distance to sum|ii><ii| + t|00><11| + h.c. {off_face:.2e} (|t| = {:.2e}), \
             residual operator {:.2e}, fixed-point residuals {res:.2e}",
            t.norm(),
            max_abs(&rest)
        ),
    )
}

fn qutrit_channel() -> ChoiMatrix {
    let spec = SeparableMultiSpec::from_states(
        vec![DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 1)],
        DensityMatrix::basis(3, 2),
    )
    .unwrap();
    build_separable_multi(&spec).unwrap()
}

fn separable_iff() -> Outcome {
    let sigmas = [DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 1)];
    let b = DensityMatrix::basis(3, 2);
    let ch = qutrit_channel();
    let forward = sigmas.iter().map(|s| residual(&ch, s)).fold(0.0, f64::max);
    let fps = ch.fixed_points(FP_TOL).unwrap();
    let recovered =
        sigmas.iter().all(|s| fps.states.iter().any(|f| trace_distance(f, s).unwrap() <= DEFAULT_CLASSIFY_TOL));

    let factor = 0.5 * sigmas[1].op().sub(b.op()).trace_norm();
    let eps = [1e-4, 1e-3, 1e-2];
    let res: Vec<f64> = eps
        .iter()
        .map(|e| {
            let p1 = Hermitian::from_real_diagonal(&[*e, 1.0, 0.0]);
            let spec = SeparableMultiSpec::new(sigmas.to_vec(), vec![sigmas[0].op().clone(), p1], b.clone()).unwrap();
            residual(&separable_multi_choi(&spec), &sigmas[0])
        })
        .collect();
    let slope = res.iter().zip(&eps).map(|(r, e)| r * e).sum::<f64>() / eps.iter().map(|e| e * e).sum::<f64>();
    let bounded = res.iter().zip(&eps).all(|(r, e)| *r >= e * factor * (1.0 - 1e-9));
    let linear = res.iter().zip(&eps).all(|(r, e)| ((r / e) - slope).abs() <= 0.2 * slope);
    Outcome::new(
        forward <= 1e-9 && recovered && bounded && linear,
        format!(
            "forward residual {forward:.2e}, {} fixed states recovered: {recovered}, perturbed residuals {res:?}, factor {factor:.3}, slope {slope:.4}",
            fps.states.len()
        ),
    )
}

fn fixed_point_extraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut empty = 0;
    for i in 0..50 {
        let d = 2 + i % 2;
        let k = rng.random_range(1..=3);
        let ch = random::channel(d, k, &mut rng);
        let fps = ch.fixed_points(FP_TOL).unwrap();
        if fps.states.is_empty() {
            empty += 1;
        }
        for s in &fps.states {
            worst = worst.max(residual(&ch, s));
        }
    }
    Outcome::new(empty == 0 && worst <= 1e-8, format!("50 channels, {empty} empty sets, worst residual {worst:.2e}"))
}

fn cone_simulation() -> Outcome {
    let start = Instant::now();
    let n = 10_000;
    let cfg = SimulationConfig::new(qutrit_channel(), KickPolicy::Depolarizing { strength: 1.0 }, 10, n, 2024);
    let t = run(&cfg).unwrap();
    let elapsed = start.elapsed();
    let deterministic = t == run(&cfg).unwrap();
    let mut counts = [0usize; 3];
    for s in t.symbols().into_iter().flatten() {
        counts[s] += 1;
    }
    let p = 1.0 / 3.0;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let freqs: Vec<f64> = counts.iter().map(|k| *k as f64 / n as f64).collect();
    let uniform = freqs.iter().all(|f| (f - p).abs() <= 3.0 * sigma);
    let stationary = estimate_process(&t).unwrap().stationary_estimate;
    Outcome::new(
        t.unclassified() == 0 && uniform && deterministic && elapsed < Duration::from_secs(60),
        format!(
            "{} unclassified, frequencies {freqs:.4?} (3 sigma = {:.4}), stationary estimate {stationary:.4?}, deterministic: {deterministic}, {elapsed:.2?}",
            t.unclassified(),
            3.0 * sigma
        ),
    )
}

fn quasi_realization_algebra() -> Outcome {
    let t = [[0.9, 0.1], [0.2, 0.8]];
    let pi = [2.0 / 3.0, 1.0 / 3.0];
    let q =
        QuasiRealization::markov(&DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]), DVector::from_vec(pi.to_vec()))
            .unwrap();
    let mut worst = 0.0f64;
    let mut worst_total = 0.0f64;
    for l in 1..=6 {
        let dist = q.word_distribution(l).unwrap();
        worst_total = worst_total.max((dist.total() - 1.0).abs());
        for w in &dist.words {
            let idx: Vec<usize> = w.word.iter().map(|s| s.parse().unwrap()).collect();
            // Path sum over the hidden start state; each symbol names the next state.
            let oracle: f64 = (0..2)
                .map(|s0| {
                    let mut p = pi[s0];
                    let mut prev = s0;
                    for &next in &idx {
                        p *= t[prev][next];
                        prev = next;
                    }
                    p
                })
                .sum();
            worst = worst.max((w.probability - oracle).abs());
        }
    }
    let orthant = PolyhedralCone::orthant(2);
    let accepts = q.check_dharmadhikari(&orthant, 1e-8).unwrap().all();
    let rot = QuasiRealization::new(
        vec!["a".into()],
        vec![DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        DVector::from_vec(vec![0.5, 0.5]),
        DVector::from_vec(vec![1.0, 1.0]),
    )
    .unwrap();
    let rejects = !rot.check_dharmadhikari(&orthant, 1e-8).unwrap().all();
    Outcome::new(
        worst <= 1e-12 && worst_total <= 1e-12 && accepts && rejects,
        format!("max word error {worst:.2e}, max |sum - 1| {worst_total:.2e}, accepts Markov: {accepts}, rejects rotation: {rejects}"),
    )
}

fn bell_demo() -> Outcome {
    let opts = SdpOptions::default();
    let report = run_bell_demo(&BellDemoParams::default(), &opts).unwrap();
    let ledger_complete = report.discriminability.len() == 4;
    let t11 = report.discriminability.iter().find(|c| c.name == "tr[Pi1 sigma1] > 0").map(|c| c.value);
    let res = report.fixed_point_residuals.iter().cloned().fold(0.0, f64::max);
    let pure =
        run_bell_demo(&BellDemoParams { s: [1.0, 0.0, 0.0], r: [1.0, 0.0, 0.0], ..Default::default() }, &opts).unwrap();
    let pass = ledger_complete
        && t11.is_some_and(|v| v.abs() <= 1e-10)
        && report.path == DemoPath::Sdp
        && res <= 1e-7
        && pure.path == DemoPath::Separable
        && pure.cptp.is_cptp();
    Outcome::new(
        pass,
        format!(
            "tr[Pi1 sigma1] = {:.2e}, default path {:?}, residuals {res:.2e}, pure path {:?} (CPTP {})",
            t11.unwrap_or(f64::NAN),
            report.path,
            pure.path,
            pure.cptp.is_cptp()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("single fixed point channel is CPTP and fixes sigma", single_fixed_point_cptp),
        ("validity inequality is load-bearing", validity_boundary),
        ("SDP on orthogonal qubits", sdp_orthogonal_qubits),
        ("separable construction, both directions", separable_iff),
        ("fixed-point extraction on random channels", fixed_point_extraction),
        ("cone simulation on the qutrit channel", cone_simulation),
        ("quasi-realization algebra", quasi_realization_algebra),
        ("Bell demo", bell_demo),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!("[{}] {}. {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, i + 1, outcome.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
