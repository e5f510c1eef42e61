use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use fixcone::channel::{ChoiMatrix, FP_TOL};
use fixcone::conesim::{self, SimulationConfig, Trajectory};
use fixcone::demo::{run_bell_demo, BellDemoParams};
use fixcone::engineer::{
    build_separable_multi, build_single_fixed_point, build_via_sdp, separable_multi_choi, single_fixed_point_choi,
    SeparableMultiSpec, SingleFixedPointSpec,
};
use fixcone::linops::{DensityMatrix, Hermitian};
use fixcone::quasireal::{PolyhedralCone, QuasiRealization, CONE_TOL, PROB_TOL};
use fixcone::sdp::{SdpOptions, SdpProblem, SdpStatus};
use fixcone::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fixcone",
    version,
    about = "Channels with prescribed fixed points and the classical processes they induce"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Overrides the seed of randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true)]
    feas_tol: Option<f64>,
    #[arg(long, global = true)]
    psd_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Fixed-point residual tolerance.
    #[arg(long, global = true)]
    fp_tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a channel given as a Choi matrix.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Build channels with prescribed fixed points.
    #[command(subcommand)]
    Engineer(EngineerCmd),
    /// Solve a semidefinite program.
    #[command(subcommand)]
    Sdp(SdpCmd),
    /// Word probabilities and cone conditions of quasi-realizations.
    #[command(subcommand)]
    Quasireal(QuasirealCmd),
    /// Settle, classify, and kick simulation.
    #[command(subcommand)]
    Conesim(ConesimCmd),
    /// Worked examples.
    #[command(subcommand)]
    Demo(DemoCmd),
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// CP and TP report; exits 3 when the channel is not CPTP.
    Check { choi: PathBuf },
    /// Extreme fixed states and the peripheral spectrum.
    FixedPoints { choi: PathBuf },
    /// Successive images of a state.
    Iterate {
        choi: PathBuf,
        state: PathBuf,
        #[arg(short, long, default_value_t = 10)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum EngineerCmd {
    /// Closed-form channel fixing one state.
    Single {
        sigma: PathBuf,
        b: PathBuf,
        #[arg(long)]
        report: bool,
        /// Build even when a condition fails.
        #[arg(long)]
        unchecked: bool,
    },
    /// Measure-and-prepare channel fixing several discriminable states.
    Separable {
        /// JSON array of states.
        states: PathBuf,
        b: PathBuf,
        /// JSON array of projectors; computed from the states when absent.
        #[arg(long)]
        projectors: Option<PathBuf>,
        #[arg(long)]
        report: bool,
        #[arg(long)]
        unchecked: bool,
    },
    /// Minimum-trace channel fixing the states, via SDP.
    Sdp {
        states: PathBuf,
        /// Completion state; maximally mixed when absent.
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long)]
        report: bool,
    },
}

#[derive(Subcommand)]
enum SdpCmd {
    /// Exits 3 when infeasible and 4 at the iteration limit.
    Solve {
        problem: PathBuf,
        /// Writes the problem and the full solution here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum QuasirealCmd {
    /// Probability of one word, or of every word of a length.
    Prob {
        realization: PathBuf,
        /// Comma-separated symbols; empty for the empty word.
        #[arg(long, conflicts_with = "length")]
        word: Option<String>,
        /// All words of this length.
        #[arg(long)]
        length: Option<usize>,
    },
    /// Positive-realization conditions.
    Check {
        realization: PathBuf,
        #[arg(long, default_value_t = PROB_TOL)]
        tol: f64,
    },
    /// Dharmadhikari cone conditions for a polyhedral cone.
    ConeCheck {
        realization: PathBuf,
        cone: PathBuf,
        #[arg(long, default_value_t = CONE_TOL)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum ConesimCmd {
    /// Runs a simulation config and writes the trajectory as JSON Lines.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Markov-chain fit to a trajectory's symbols.
    Estimate {
        trajectory: PathBuf,
        /// Emit the fitted chain as a quasi-realization.
        #[arg(long)]
        realization: bool,
    },
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Two-qubit Bell-basis example: discriminability and channel.
    Bell {
        /// α₀,β₀,δ₀,ε₀,α₁,β₁,δ₁,ε₁
        #[arg(long, value_delimiter = ',')]
        coeffs: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<f64>>,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

impl Global {
    fn sdp_options(&self) -> Result<SdpOptions> {
        let mut o = SdpOptions::default();
        if let Some(t) = self.feas_tol {
            o.feas_tol = positive(t, "feas-tol")?;
        }
        if let Some(t) = self.psd_tol {
            o.psd_tol = positive(t, "psd-tol")?;
        }
        if let Some(m) = self.max_iter {
            o.max_iter = m;
        }
        Ok(o)
    }

    fn fp_tol(&self) -> Result<f64> {
        self.fp_tol.map_or(Ok(FP_TOL), |t| positive(t, "fp-tol"))
    }
}

fn fixed_len<const N: usize>(v: &[f64], name: &str) -> Result<[f64; N]> {
    v.try_into().map_err(|_| Error::InvalidInput(format!("--{name} needs {N} comma-separated values, got {}", v.len())))
}

fn positive(t: f64, name: &str) -> Result<f64> {
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(Error::InvalidInput(format!("--{name} must be positive")))
    }
}

/// Printed value plus the exit code it should produce.
struct Output {
    value: Value,
    code: u8,
}

impl Output {
    fn ok<T: Serialize>(v: &T) -> Result<Self> {
        Ok(Output { value: serde_json::to_value(v)?, code: 0 })
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Channel(cmd) => match cmd {
            ChannelCmd::Check { choi } => {
                let ch: ChoiMatrix = read_json(choi)?;
                let rep = ch.is_cptp_with(g.psd_tol.unwrap_or(fixcone::linops::PSD_TOL), fixcone::channel::TP_TOL);
                Ok(Output { value: serde_json::to_value(rep)?, code: if rep.is_cptp() { 0 } else { 3 } })
            }
            ChannelCmd::FixedPoints { choi } => {
                let ch: ChoiMatrix = read_json(choi)?;
                Output::ok(&ch.fixed_points(g.fp_tol()?)?)
            }
            ChannelCmd::Iterate { choi, state, n } => {
                let ch: ChoiMatrix = read_json(choi)?;
                let rho: DensityMatrix = read_json(state)?;
                Output::ok(&ch.iterate(&rho, *n)?)
            }
        },
        Command::Engineer(cmd) => engineer(cmd, g),
        Command::Sdp(SdpCmd::Solve { problem, dump }) => {
            let p: SdpProblem = read_json(problem)?;
            let sol = p.solve(&g.sdp_options()?)?;
            if let Some(path) = dump {
                let w = BufWriter::new(File::create(path)?);
                serde_json::to_writer_pretty(w, &json!({ "problem": p, "solution": sol }))?;
            }
            let code = match sol.status {
                SdpStatus::Optimal => 0,
                SdpStatus::Infeasible => 3,
                SdpStatus::NumericalLimit => 4,
            };
            Ok(Output { value: serde_json::to_value(&sol)?, code })
        }
        Command::Quasireal(cmd) => match cmd {
            QuasirealCmd::Prob { realization, word, length } => {
                let q: QuasiRealization = read_json(realization)?;
                match (word, length) {
                    (_, Some(l)) => Output::ok(&q.word_distribution(*l)?),
                    (w, None) => {
                        let w = w.as_deref().unwrap_or("");
                        let symbols: Vec<&str> = w.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                        Output::ok(&json!({ "word": symbols, "probability": q.word_probability(&symbols)? }))
                    }
                }
            }
            QuasirealCmd::Check { realization, tol } => {
                let q: QuasiRealization = read_json(realization)?;
                let rep = q.is_positive_realization(*tol);
                Output::ok(&json!({ "report": rep, "positive": rep.all() }))
            }
            QuasirealCmd::ConeCheck { realization, cone, tol } => {
                let q: QuasiRealization = read_json(realization)?;
                let c: PolyhedralCone = read_json(cone)?;
                let rep = q.check_dharmadhikari(&c, *tol)?;
                Output::ok(&json!({ "report": rep, "all": rep.all() }))
            }
        },
        Command::Conesim(cmd) => match cmd {
            ConesimCmd::Run { config, out } => {
                let mut cfg: SimulationConfig = read_json(config)?;
                if let Some(s) = g.seed {
                    cfg.seed = s;
                }
                let t = conesim::run(&cfg)?;
                let mut w = BufWriter::new(File::create(out)?);
                t.write_jsonl(&mut w)?;
                w.flush()?;
                let symbols = t.symbols();
                let mut counts = vec![0usize; t.fixed_points.len()];
                for s in symbols.iter().flatten() {
                    counts[*s] += 1;
                }
                Output::ok(&json!({
                    "rounds": t.rounds.len(),
                    "unclassified": t.unclassified(),
                    "fixed_points": t.fixed_points,
                    "symbol_counts": counts,
                }))
            }
            ConesimCmd::Estimate { trajectory, realization } => {
                let t = Trajectory::read_jsonl(BufReader::new(File::open(trajectory)?))?;
                let e = conesim::estimate_process(&t)?;
                if *realization {
                    Output::ok(&conesim::to_quasi_realization(&e)?)
                } else {
                    Output::ok(&e)
                }
            }
        },
        Command::Demo(DemoCmd::Bell { coeffs, s, r }) => {
            let mut p = BellDemoParams::default();
            if let Some(c) = coeffs {
                p = p.with_coeffs(fixed_len(c, "coeffs")?);
            }
            if let Some(s) = s {
                p.s = fixed_len(s, "s")?;
            }
            if let Some(r) = r {
                p.r = fixed_len(r, "r")?;
            }
            Output::ok(&run_bell_demo(&p, &g.sdp_options()?)?)
        }
    }
}

fn engineer(cmd: &EngineerCmd, g: &Global) -> Result<Output> {
    match cmd {
        EngineerCmd::Single { sigma, b, report, unchecked } => {
            let spec = SingleFixedPointSpec::new(read_json(sigma)?, read_json(b)?)?;
            let checks = spec.checks();
            let choi = if *unchecked { single_fixed_point_choi(&spec) } else { build_single_fixed_point(&spec)? };
            if *report {
                Output::ok(&json!({
                    "choi": choi,
                    "lambda_max": spec.lambda_max,
                    "checks": checks,
                    "cptp": choi.is_cptp(),
                }))
            } else {
                Output::ok(&choi)
            }
        }
        EngineerCmd::Separable { states, b, projectors, report, unchecked } => {
            let sigmas: Vec<DensityMatrix> = read_json(states)?;
            let b: DensityMatrix = read_json(b)?;
            let spec = match projectors {
                Some(p) => SeparableMultiSpec::new(sigmas, read_json::<Vec<Hermitian>>(p)?, b)?,
                None => SeparableMultiSpec::from_states(sigmas, b)?,
            };
            let choi = if *unchecked { separable_multi_choi(&spec) } else { build_separable_multi(&spec)? };
            if *report {
                Output::ok(&json!({
                    "choi": choi,
                    "projectors": spec.projectors,
                    "success": spec.success(),
                    "convergence_margin": spec.convergence_margin(),
                    "checks": spec.checks(),
                    "cptp": choi.is_cptp(),
                }))
            } else {
                Output::ok(&choi)
            }
        }
        EngineerCmd::Sdp { states, b, report } => {
            let sigmas: Vec<DensityMatrix> = read_json(states)?;
            let b: Option<DensityMatrix> = b.as_deref().map(read_json).transpose()?;
            let out = build_via_sdp(&sigmas, b.as_ref(), &g.sdp_options()?)?;
            if !out.converges {
                eprintln!("warning: contraction {:.6} >= 1, iterations need not converge", out.contraction);
            }
            if *report {
                Output::ok(&out)
            } else {
                Output::ok(&out.c)
            }
        }
    }
}

/// Flattens JSON into `path,value` rows. Matrices become one row per matrix
/// row with interleaved `re,im` columns.
fn to_csv(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(m) if m.contains_key("re") && m.contains_key("im") && m.contains_key("cols") => {
            let cols = m["cols"].as_u64().unwrap_or(0) as usize;
            let re = m["re"].as_array().cloned().unwrap_or_default();
            let im = m["im"].as_array().cloned().unwrap_or_default();
            for (i, (r, c)) in re.chunks(cols.max(1)).zip(im.chunks(cols.max(1))).enumerate() {
                out.push_str(&format!("{path}[{i}]"));
                for (a, b) in r.iter().zip(c) {
                    out.push_str(&format!(",{a},{b}"));
                }
                out.push('\n');
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                to_csv(x, &p, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| x.is_number() || x.is_boolean() || x.is_null()) => {
            out.push_str(path);
            for x in a {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                to_csv(x, &format!("{path}[{i}]"), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{path},{s}\n")),
        other => out.push_str(&format!("{path},{other}\n")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match cli.global.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.value).expect("values serialize")),
                Format::Csv => {
                    let mut s = String::new();
                    to_csv(&out.value, "", &mut s);
                    print!("{s}");
                }
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
