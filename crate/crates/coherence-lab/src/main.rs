use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use coherence_lab::channels::{
    generalized_monotonicity_report, counterexample_kraus, measurement_gap, KrausSet,
};
use coherence_lab::coherence::{
    brute_force_coherence, closest_incoherent, divergence_to_incoherent, mixedness,
    purity_upper_bound, counterexample_state, ReferenceBasis, SearchBudget,
};
use coherence_lab::divergence::{quantum_tsallis, AlphaParam, DivergenceValue};
use coherence_lab::error::Error;
use coherence_lab::fuzz::{run_campaign, CampaignConfig};
use coherence_lab::linalg::OperatorJson;
use coherence_lab::measure::{measure_by_name, MEASURE_NAMES};
use coherence_lab::qubit::{figure1_data, figure2_data, DEFAULT_SCAN_POINTS, DEFAULT_U_GRID};
use coherence_lab::{C64, ComplexMatrix, DensityMatrix, Tolerances};

/// Coherence quantifiers from Tsallis alpha-divergences: values, minimizers,
/// monotonicity diagnostics, and randomized property campaigns.
#[derive(Parser)]
#[command(name = "coherence-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Hermiticity tolerance for input matrices.
    #[arg(long, default_value_t = 1e-10)]
    tol_herm: f64,
    /// Unit-trace tolerance for states.
    #[arg(long, default_value_t = 1e-9)]
    tol_trace: f64,
    /// Negative-eigenvalue tolerance for positivity checks.
    #[arg(long, default_value_t = 1e-9)]
    tol_psd: f64,
    /// Range-containment tolerance for divergence support checks.
    #[arg(long, default_value_t = 1e-8)]
    tol_range: f64,
}

impl TolArgs {
    fn build(&self) -> Tolerances {
        Tolerances {
            herm_tol: self.tol_herm,
            trace_tol: self.tol_trace,
            psd_tol: self.tol_psd,
            range_tol: self.tol_range,
            ..Tolerances::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a coherence measure of a state read from JSON.
    Coherence {
        /// State file: {"dim": d, "entries": [[re, im], ...]} row-major.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Registered measure name.
        #[arg(long, default_value = "c_alpha")]
        measure: String,
        /// Optional unitary file whose columns define the reference basis.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Also run the brute-force oracle and report both values.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Closest incoherent state (the divergence minimizer) of a state.
    Closest {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Quantum Tsallis alpha-divergence between two states.
    Divergence {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Selective-measurement monotonicity report for a state and an
    /// incoherent Kraus set; exits 5 when an asserted inequality fails.
    Monotonicity {
        #[arg(long)]
        state: PathBuf,
        /// Kraus file: {"operators": [{"rows": r, "cols": c, "entries": [...]}]}.
        #[arg(long)]
        kraus: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value = "c_alpha")]
        measure: String,
        /// Second state for the measurement gap identity (optional).
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Reproduce the three-level counterexample: sweep the instrument
    /// parameter |b| and print both monotonicity sums for C_2.
    Counterexample {
        #[arg(long, default_value_t = 11)]
        steps: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Write the qubit figure data as CSV files.
    Figures {
        /// Output directory for figure1.csv and figure2.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_U_GRID)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SCAN_POINTS)]
        scan: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Run a randomized property campaign; exits 5 when an asserted
    /// property is violated.
    Fuzz {
        #[arg(long, default_value = "c_alpha")]
        measure: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, env = "COHERENCE_LAB_SEED", default_value_t = 1)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
}

const EXIT_PARSE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VIOLATION: u8 = 5;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Json(_) | Error::BadAlpha(_) | Error::UnknownMeasure(_) => EXIT_PARSE,
        _ => EXIT_INVARIANT,
    }
}

/// 12 significant digits.
fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000".into();
    }
    format!("{:.11e}", x)
}

fn sig_div(v: &DivergenceValue) -> String {
    match v.finite() {
        Some(x) => sig(x),
        None => "inf".into(),
    }
}

fn read_state(path: &Path, tol: &Tolerances) -> Result<DensityMatrix, Error> {
    let text = fs::read_to_string(path)?;
    let m = ComplexMatrix::from_square_json(&text)?;
    DensityMatrix::new(m, tol)
}

fn read_basis(path: Option<&PathBuf>) -> Result<Option<ReferenceBasis>, Error> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let u = ComplexMatrix::from_square_json(&text)?;
            Ok(Some(ReferenceBasis::from_unitary(u)?))
        }
    }
}

fn basis_or_identity(basis: Option<ReferenceBasis>, dim: usize) -> ReferenceBasis {
    basis.unwrap_or_else(|| ReferenceBasis::identity(dim))
}

#[derive(Deserialize)]
struct KrausFile {
    operators: Vec<OperatorJson>,
}

fn read_kraus(path: &Path) -> Result<KrausSet, Error> {
    let text = fs::read_to_string(path)?;
    let parsed: KrausFile = serde_json::from_str(&text)?;
    let ops = parsed
        .operators
        .iter()
        .map(ComplexMatrix::from_operator_json)
        .collect::<Result<Vec<_>, _>>()?;
    KrausSet::new(ops)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Coherence { state, alpha, measure, basis, oracle, tol } => {
            let t = tol.build();
            let rho = read_state(&state, &t)?;
            let basis = basis_or_identity(read_basis(basis.as_ref())?, rho.dim());
            let framed = basis.to_frame(&rho, &t)?;
            let ap = AlphaParam::new(alpha)?;
            let m = measure_by_name(&measure, ap)?;
            let value = m.value(&framed, &t)?;
            let mut out = json!({
                "measure": m.name(),
                "alpha": alpha,
                "value": value,
                "mixedness": mixedness(&rho)?,
            });
            if measure == "c_alpha" {
                out["purity_bound"] = json!(purity_upper_bound(&rho, ap));
            }
            if oracle {
                let o = brute_force_coherence(&framed, &ReferenceBasis::identity(rho.dim()), ap, &SearchBudget::default(), &t)?;
                out["oracle"] = json!(o);
                out["oracle_gap"] = json!((value - o).abs());
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            println!("value = {}", sig(value));
            Ok(0)
        }
        Command::Closest { state, alpha, basis, tol } => {
            let t = tol.build();
            let rho = read_state(&state, &t)?;
            let basis = basis_or_identity(read_basis(basis.as_ref())?, rho.dim());
            let ap = AlphaParam::new(alpha)?;
            let closest = closest_incoherent(&rho, &basis, ap, &t)?;
            let div = divergence_to_incoherent(&rho, &basis, closest.weights.as_slice(), ap, &t)?;
            let out = json!({
                "alpha": alpha,
                "weights": closest.weights.as_slice(),
                "divergence": div,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            for (j, w) in closest.weights.as_slice().iter().enumerate() {
                println!("w[{}] = {}", j, sig(*w));
            }
            Ok(0)
        }
        Command::Divergence { rho, sigma, alpha, tol } => {
            let t = tol.build();
            let rho = read_state(&rho, &t)?;
            let sigma = read_state(&sigma, &t)?;
            let ap = AlphaParam::new(alpha)?;
            let v = quantum_tsallis(&rho, &sigma, ap, &t)?;
            println!("{}", serde_json::to_string_pretty(&json!({"alpha": alpha, "divergence": v}))?);
            println!("divergence = {}", sig_div(&v));
            Ok(0)
        }
        Command::Monotonicity { state, kraus, alpha, measure, sigma, tol } => {
            let t = tol.build();
            let rho = read_state(&state, &t)?;
            let set = read_kraus(&kraus)?;
            let ap = AlphaParam::new(alpha)?;
            let m = measure_by_name(&measure, ap)?;
            let report = generalized_monotonicity_report(m.as_ref(), &set, &rho, &t)?;
            let mut out = serde_json::to_value(&report)?;
            if let Some(sig_path) = sigma {
                let sig_state = read_state(&sig_path, &t)?;
                let gap = measurement_gap(&set, &rho, &sig_state, ap, &t)?;
                out["gap_report"] = serde_json::to_value(&gap)?;
                out["gap_identity_residual"] = json!(gap.identity_residual());
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            let violated = m.generalized_monotonicity_asserted() && !report.holds_generalized;
            Ok(if violated { EXIT_VIOLATION } else { 0 })
        }
        Command::Counterexample { steps, tol } => {
            let t = tol.build();
            let rho = counterexample_state(&t);
            let ap = AlphaParam::new(2.0)?;
            let m = measure_by_name("c_alpha", ap)?;
            let c_in = m.value(&rho, &t)?;
            println!("three-level input state, C_2 = {}", sig(c_in));
            println!("{:>8} {:>18} {:>18} {:>18} {:>18}  flags", "|b|", "p_1", "q_1", "generalized_lhs", "standard_lhs");
            let n = steps.max(2);
            for i in 0..n {
                let b = i as f64 / (n - 1) as f64;
                let a = (1.0 - b * b).max(0.0).sqrt();
                let set = counterexample_kraus(C64::new(a, 0.0), C64::new(b, 0.0))?;
                let rep = generalized_monotonicity_report(m.as_ref(), &set, &rho, &t)?;
                let gen_lhs = rep.strong_weighted_sum.unwrap_or(f64::NAN);
                let mut flags = String::new();
                if !rep.holds_generalized {
                    flags.push_str(" GENERALIZED-VIOLATED");
                }
                if !rep.holds_standard {
                    flags.push_str(" STANDARD-VIOLATED");
                }
                println!(
                    "{:>8.4} {:>18} {:>18} {:>18} {:>18} {}",
                    b,
                    sig(rep.probabilities[0]),
                    sig(rep.reference_probabilities[0]),
                    sig(gen_lhs),
                    sig(rep.standard_sum),
                    flags
                );
            }
            // endpoint summary at |b| = 1
            let set = counterexample_kraus(C64::new(0.0, 0.0), C64::new(1.0, 0.0))?;
            let rep = generalized_monotonicity_report(m.as_ref(), &set, &rho, &t)?;
            println!("at |b| = 1: generalized sum {} <= C_2 {} ; standard sum {} > C_2",
                sig(rep.strong_weighted_sum.unwrap_or(f64::NAN)), sig(c_in), sig(rep.standard_sum));
            Ok(0)
        }
        Command::Figures { out, points, scan, tol } => {
            let t = tol.build();
            fs::create_dir_all(&out)?;
            let alphas: Vec<AlphaParam> = [1.0, 2.0, 3.0, 4.0]
                .iter()
                .map(|&a| AlphaParam::new(a))
                .collect::<Result<_, _>>()?;
            let mut csv = String::from("u,alpha_1,alpha_2,alpha_3,alpha_4\n");
            for (u, row) in figure1_data(&alphas, points, scan, &t) {
                csv.push_str(&sig(u));
                for v in row {
                    csv.push(',');
                    csv.push_str(&sig(v));
                }
                csv.push('\n');
            }
            fs::write(out.join("figure1.csv"), csv)?;
            let mut csv = String::from("u,lower,upper\n");
            for (u, lo, hi) in figure2_data(points) {
                csv.push_str(&format!("{},{},{}\n", sig(u), sig(lo), sig(hi)));
            }
            fs::write(out.join("figure2.csv"), csv)?;
            println!("wrote {}", out.join("figure1.csv").display());
            println!("wrote {}", out.join("figure2.csv").display());
            Ok(0)
        }
        Command::Fuzz { measure, trials, seed, out, tol } => {
            if !MEASURE_NAMES.contains(&measure.as_str()) {
                return Err(Error::UnknownMeasure(measure));
            }
            let t = tol.build();
            let config = CampaignConfig::new(&measure, seed, trials);
            let report = run_campaign(&config, &t)?;
            let text = serde_json::to_string_pretty(&report)?;
            match out {
                Some(path) => fs::write(&path, text)?,
                None => println!("{}", text),
            }
            for (name, stats) in &report.properties {
                println!(
                    "{:<34} {:>6}/{:<6} {}",
                    name,
                    stats.passes,
                    stats.trials,
                    if stats.asserted { "asserted" } else { "reported" }
                );
            }
            Ok(if report.clean() { 0 } else { EXIT_VIOLATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(exit_code_for(&err))
        }
    }
}
