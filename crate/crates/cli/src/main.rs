//! `otp`: generate instances, run greedy, verify the analysis, sweep experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otp_core::greedy::TieBreak;
use otp_core::metric::SpaceKind;

#[derive(Debug, Parser)]
#[command(name = "otp", version, about = "Greedy online transportation workbench")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Print rational values as exact fractions.
    #[arg(long, global = true)]
    exact: bool,
    /// Seed for random generation, or master seed for campaigns.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an instance document.
    Generate {
        #[command(subcommand)]
        family: GenerateFamily,
    },
    /// Run greedy on an instance file.
    Run {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::Lowest)]
        policy: Policy,
        /// Also solve for the offline optimum.
        #[arg(long)]
        with_opt: bool,
    },
    /// Check every lemma on one instance or on a random campaign.
    Verify(VerifyArgs),
    /// Emit one CSV row per instance.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Subcommand)]
enum GenerateFamily {
    Lowerbound {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Random {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        requests: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Kind::Line)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        capacity_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Instance file; omit when running a campaign.
    #[arg(required_unless_present = "random_campaign", conflicts_with = "random_campaign")]
    instance: Option<PathBuf>,
    /// Number of random instances per value of k.
    #[arg(long)]
    random_campaign: Option<usize>,
    #[command(flatten)]
    campaign: CampaignArgs,
    #[arg(long, value_enum, default_value_t = Policy::Lowest)]
    policy: Policy,
    /// Include every checked inequality in JSON output.
    #[arg(long)]
    detailed: bool,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    ks: Vec<u32>,
    #[arg(long, default_value_t = 50)]
    max_sites: usize,
    #[arg(long, default_value_t = 200)]
    max_requests: usize,
    #[arg(long, default_value_t = 5)]
    capacity_max: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "line,plane")]
    kinds: Vec<Kind>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Augmentation factor for the lower-bound family.
    #[arg(long, required_if_eq("family", "lowerbound"))]
    k: Option<u32>,
    /// Inclusive range `A..B`, or a single `m`.
    #[arg(long, required_if_eq("family", "lowerbound"))]
    m_range: Option<String>,
    #[arg(long, default_value = "0")]
    epsilon: String,
    /// Tie-break policy; the lower-bound family defaults to highest.
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Instances per value of k for the random family.
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[command(flatten)]
    campaign: CampaignArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Lowerbound,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Lowest,
    Highest,
}

impl From<Policy> for TieBreak {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Lowest => TieBreak::LowestSiteIndex,
            Policy::Highest => TieBreak::HighestSiteIndex,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Line,
    Plane,
    Matrix,
}

impl From<Kind> for SpaceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Line => SpaceKind::Line,
            Kind::Plane => SpaceKind::Plane,
            Kind::Matrix => SpaceKind::Matrix,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::Status::Usage.into()
        }
    }
}
