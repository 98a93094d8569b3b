//! `freetensor` command-line tool.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freetensor::rational::parse_q;
use freetensor::series::Law;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "freetensor", version, about = "Moments, free cumulants and random tensor experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of stdout; a `.log` sidecar gets the timestamps
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
    /// Directory for cached enumerations
    #[arg(long, global = true, env = "FREETENSOR_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the classes of B_n for maps of order p
    Enumerate {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
    },
    /// Down-set and Möbius function below one map
    Poset(MapArgs),
    /// Moment and cumulant tables of a named law
    Laws(LawArgs),
    /// Free convolution of two moment files
    Convolve {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        p: usize,
        /// Truncation order; defaults to the shorter input
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// R- and Q-transforms and the Cauchy pair identities
    Transform {
        #[command(flatten)]
        law: LawArgs,
        /// Moment file used instead of a named law
        #[arg(long, conflicts_with = "family")]
        input: Option<PathBuf>,
    },
    /// Monte Carlo moment ladders
    Simulate {
        #[command(subcommand)]
        family: SimFamily,
    },
    /// Exact rescaled cumulants of k-fold free sums
    Clt {
        #[command(flatten)]
        law: LawArgs,
        /// Numbers of summands
        #[arg(long = "k", value_delimiter = ',', default_values_t = [1u64, 10, 100, 1000])]
        ks: Vec<u64>,
        /// Follow the centred free Poisson law at these rates instead
        #[arg(long = "poisson-t", value_delimiter = ',', conflicts_with = "family")]
        poisson_t: Vec<String>,
    },
    /// Run the acceptance checks
    Selftest {
        /// Criterion ids to run, all by default
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long = "N", value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        wishart_trials: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct MapArgs {
    /// Hex canonical code
    #[arg(long, conflicts_with_all = ["cycles", "pairs"])]
    pub code: Option<String>,
    /// 1-based vertex cycles, e.g. `1,2,3;4,5,6`
    #[arg(long, requires = "pairs")]
    pub cycles: Option<String>,
    /// 1-based pairs, e.g. `1-4,2-5,3-6`
    #[arg(long, requires = "cycles")]
    pub pairs: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawFamily {
    Semicircular,
    FreePoisson,
    MarchenkoPastur,
    Delta,
}

#[derive(Args, Debug, Clone)]
pub struct LawArgs {
    #[arg(long, value_enum)]
    pub family: Option<LawFamily>,
    #[arg(long)]
    pub p: usize,
    /// Series truncation
    #[arg(long = "K", default_value_t = 12)]
    pub k: usize,
    /// Rate, as a rational
    #[arg(long, default_value = "1")]
    pub t: String,
    /// Shape parameter of the Marchenko-Pastur law
    #[arg(long, default_value = "1")]
    pub tau: String,
    /// Explicit dilation of the Marchenko-Pastur law
    #[arg(long)]
    pub dilation: Option<String>,
    /// Push the law forward under x -> c x
    #[arg(long)]
    pub scale: Option<String>,
}

impl LawArgs {
    pub fn law(&self) -> Result<Law, Failure> {
        let family = self.family.ok_or_else(|| Failure::Usage("--family is required".into()))?;
        let p = self.p;
        let t = parse_q(&self.t)?;
        let base = match family {
            LawFamily::Semicircular => Law::Semicircular { p },
            LawFamily::FreePoisson => Law::FreePoisson { p, t },
            LawFamily::MarchenkoPastur => {
                let dilation = self.dilation.as_deref().map(parse_q).transpose()?;
                Law::MarchenkoPastur { p, tau: parse_q(&self.tau)?, dilation }
            }
            LawFamily::Delta => Law::Delta { p, t },
        };
        Ok(match &self.scale {
            Some(c) => Law::Dilate { base: Box::new(base), c: parse_q(c)? },
            None => base,
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum SimFamily {
    Wigner(SimArgs),
    Wishart(SimArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum EntryArg {
    Gaussian,
    Rademacher,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CouplingArg {
    /// k = t N^{p/2}
    HalfPower,
    /// k = t N
    Linear,
}

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Highest moment order estimated
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = EntryArg::Gaussian)]
    pub entries: EntryArg,
    /// Wishart rank ratio
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = CouplingArg::HalfPower)]
    pub coupling: CouplingArg,
    /// Explicit Wishart rank
    #[arg(long)]
    pub rank: Option<usize>,
    /// Wishart factor entry variance
    #[arg(long)]
    pub variance: Option<f64>,
}

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or parameters; exit 2.
    Usage(String),
    /// A check ran and failed, or the run hit an I/O problem; exit 1.
    Check(String),
}

impl From<freetensor::Error> for Failure {
    fn from(e: freetensor::Error) -> Self {
        match e {
            freetensor::Error::Io(m) => Failure::Check(format!("i/o error: {m}")),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::SystemTime::now();
    let result = match cli.command {
        Command::Enumerate { p, n } => commands::enumerate(&cli.common, p, n),
        Command::Poset(m) => commands::poset(&cli.common, &m),
        Command::Laws(l) => commands::laws(&cli.common, &l),
        Command::Convolve { a, b, p, k } => commands::convolve(&cli.common, &a, &b, p, k),
        Command::Transform { law, input } => commands::transform(&cli.common, &law, input.as_deref()),
        Command::Simulate { family } => commands::simulate(&cli.common, &family),
        Command::Clt { law, ks, poisson_t } => commands::clt(&cli.common, &law, &ks, &poisson_t),
        Command::Selftest { only, ns, trials, wishart_trials } => commands::selftest(&cli.common, &only, ns, trials, wishart_trials),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(Failure::Check(m)) => {
            eprintln!("freetensor: {m}");
            1
        }
        Err(Failure::Usage(m)) => {
            eprintln!("freetensor: {m}");
            2
        }
    };
    if let Some(out) = &cli.common.out {
        if let Err(e) = output::write_log(out, started, code) {
            eprintln!("freetensor: could not write log: {e}");
        }
    }
    ExitCode::from(code)
}
