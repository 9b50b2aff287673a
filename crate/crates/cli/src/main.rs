use std::path::PathBuf;
use std::process::ExitCode;

use bdeconv::experiments::check::{run_check, CheckSpec, Mutation};
use bdeconv::experiments::deblur::{deblur_output, run_deblur, DeblurSpec};
use bdeconv::experiments::image::{test_image, GrayImage};
use bdeconv::experiments::kernels::KernelKind;
use bdeconv::experiments::{
    parse_algorithms, pgm, run_bench, run_noise, run_phase, Algorithm, BenchSpec, NoiseSpec, Output, PhaseSpec,
};
use bdeconv::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "BDECONV_THREADS";

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "bdeconv", version, about = "Blind deconvolution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operation counts and RMSE per solver on synthetic problems
    Bench(BenchArgs),
    /// Recovery rate against L / (K + N)
    Phase(PhaseArgs),
    /// RMSE in dB against measurement SNR
    Noise(NoiseArgs),
    /// Blind image deblurring with a known or dilated kernel support
    Deblur(DeblurArgs),
    /// Run the invariant suite; exits 1 if any check fails
    Check(CheckArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV path; a JSON sidecar is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long = "K", default_value_t = 100)]
    k: usize,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long = "L", default_value_t = 600)]
    l: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Comma list of ncbt, ncbb, ama, robb, or "all"
    #[arg(long, default_value = "all")]
    algo: String,
    /// Iteration cap per solve
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long = "K", default_value_t = 50)]
    k: usize,
    #[arg(long = "N", default_value_t = 50)]
    n: usize,
    /// Strictly increasing ratios L / (K + N)
    #[arg(long = "ratio-grid", default_value = "1.0,1.5,2.0,2.5")]
    ratio_grid: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value = "robb,ncbt")]
    algo: String,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long = "K", default_value_t = 100)]
    k: usize,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    /// Comma list of measurement counts
    #[arg(long = "L", default_value = "500,1000")]
    l: String,
    /// Comma list of SNR values in dB
    #[arg(long = "snr-grid", default_value = "10,20,30,40,50,60")]
    snr_grid: String,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Stop when |grad| falls below this fraction of the initial |grad|
    #[arg(long = "grad-ratio", default_value_t = 1e-12)]
    grad_ratio: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelName {
    Motion,
    Gaussian,
    Sin,
}

#[derive(Args)]
struct DeblurArgs {
    /// Binary PGM (P5) with power-of-two sides; defaults to a built-in 256x256 scene
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "motion")]
    kernel: KernelName,
    /// Motion length or sine window size in pixels; Gaussian scale for `gaussian`
    #[arg(long = "kernel-len")]
    kernel_len: Option<f64>,
    /// Motion angle in degrees
    #[arg(long, default_value_t = 45.0)]
    angle: f64,
    /// Grow the kernel support by this many pixels
    #[arg(long, default_value_t = 0)]
    dilate: usize,
    /// Number of Haar columns
    #[arg(long = "N", default_value_t = 1250)]
    n: usize,
    #[arg(long, default_value_t = 80)]
    iters: usize,
    /// Iterations at which relres and relerr are recorded
    #[arg(long, default_value = "20,40,60,80")]
    checkpoints: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long = "K", default_value_t = 16)]
    k: usize,
    #[arg(long = "N", default_value_t = 16)]
    n: usize,
    #[arg(long = "L", default_value_t = 192)]
    l: usize,
    #[arg(long, hide = true)]
    inject_adjoint_sign_error: bool,
    #[command(flatten)]
    common: Common,
}

enum Failure {
    Invalid(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimension(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::Io(_)
            | Error::Format(_) => Failure::Invalid(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Invalid(format!("cannot parse {what} entry {t:?}")))
        })
        .collect::<Result<Vec<T>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Failure::Invalid(format!("{what} is empty")))
            } else {
                Ok(v)
            }
        })
}

fn emit(out: &Output, path: Option<&PathBuf>) -> Result<(), Failure> {
    print!("{}", out.table.to_csv());
    if let Some(p) = path {
        let (csv, json) = out.write(p)?;
        eprintln!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}

fn algorithms(s: &str) -> Result<Vec<Algorithm>, Failure> {
    Ok(parse_algorithms(s)?)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(e.to_string()))
}

fn bench(a: BenchArgs) -> Result<bool, Failure> {
    let spec = BenchSpec {
        l: a.l,
        k: a.k,
        n: a.n,
        trials: a.trials,
        seed: a.common.seed,
        algorithms: algorithms(&a.algo)?,
        max_iter: a.iters,
    };
    emit(&run_bench(&spec)?.1, a.common.out.as_ref())?;
    Ok(true)
}

fn phase(a: PhaseArgs) -> Result<bool, Failure> {
    let spec = PhaseSpec {
        k: a.k,
        n: a.n,
        ratios: parse_list("ratio grid", &a.ratio_grid)?,
        trials: a.trials,
        seed: a.common.seed,
        algorithms: algorithms(&a.algo)?,
        max_iter: a.iters,
    };
    emit(&run_phase(&spec)?.1, a.common.out.as_ref())?;
    Ok(true)
}

fn noise(a: NoiseArgs) -> Result<bool, Failure> {
    let spec = NoiseSpec {
        ls: parse_list("L", &a.l)?,
        k: a.k,
        n: a.n,
        snr_db: parse_list("SNR grid", &a.snr_grid)?,
        trials: a.trials,
        seed: a.common.seed,
        max_iter: a.iters,
        grad_ratio_tol: a.grad_ratio,
    };
    emit(&run_noise(&spec)?.1, a.common.out.as_ref())?;
    Ok(true)
}

fn deblur(a: DeblurArgs) -> Result<bool, Failure> {
    let kernel = match a.kernel {
        KernelName::Motion => KernelKind::Motion {
            len: a.kernel_len.unwrap_or(12.0),
            angle_deg: a.angle,
        },
        KernelName::Gaussian => KernelKind::gaussian(a.kernel_len.unwrap_or(1.5)),
        KernelName::Sin => {
            let len = a.kernel_len.unwrap_or(7.0);
            if len < 1.0 || len.fract() != 0.0 {
                return Err(Failure::Invalid(format!(
                    "sine window size must be a positive integer, got {len}"
                )));
            }
            KernelKind::Sin { len: len as usize }
        }
    };
    let image: GrayImage = match &a.image {
        Some(p) => pgm::read(p)?,
        None => test_image(256),
    };
    let spec = DeblurSpec {
        dilate: a.dilate,
        checkpoints: parse_list("checkpoints", &a.checkpoints)?,
        seed: a.common.seed,
        ..DeblurSpec::new(kernel, a.n, a.iters)
    };
    let r = run_deblur(&image, &spec)?;
    let out = deblur_output(&spec, &r)?;
    emit(&out, a.common.out.as_ref())?;
    if let Some(p) = &a.common.out {
        let stem = p.with_extension("");
        let blurred = PathBuf::from(format!("{}_blurred.pgm", stem.display()));
        let restored = PathBuf::from(format!("{}_restored.pgm", stem.display()));
        pgm::write(&blurred, &r.blurred)?;
        pgm::write(&restored, &r.reconstruction)?;
        eprintln!("wrote {} and {}", blurred.display(), restored.display());
    }
    eprintln!(
        "K = {}, N = {}, relres = {:.4e}, relerr = {:.4}",
        r.k, r.n, r.relres, r.relerr
    );
    Ok(true)
}

fn check(a: CheckArgs) -> Result<bool, Failure> {
    let spec = CheckSpec {
        k: a.k,
        n: a.n,
        l: a.l,
        seed: a.common.seed,
        mutation: a.inject_adjoint_sign_error.then_some(Mutation::AdjointSign),
    };
    let rep = run_check(&spec)?;
    emit(&rep.output(&spec)?, a.common.out.as_ref())?;
    let failures = rep.failures();
    if failures.is_empty() {
        eprintln!("all {} checks passed", rep.results.len());
    } else {
        eprintln!(
            "{} of {} checks failed: {}",
            failures.len(),
            rep.results.len(),
            failures.join(", ")
        );
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Bench(a) => bench(a),
        Command::Phase(a) => phase(a),
        Command::Noise(a) => noise(a),
        Command::Deblur(a) => deblur(a),
        Command::Check(a) => check(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}
