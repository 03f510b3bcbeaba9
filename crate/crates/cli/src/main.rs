use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wellness_cli::{run, AnalysisConfig, Format};
use wellness_core::survey::ScoringOptions;
use wellness_core::Method;

#[derive(Parser)]
#[command(name = "wellness", version, about = "Wellness study analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score surveys and write correlation tables and histograms.
    Analyze(AnalyzeArgs),
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Journal or export file, or a data directory. Repeat or comma-separate.
    #[arg(long, required = true, value_delimiter = ',')]
    input: Vec<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "pearson,spearman,kendall")]
    methods: Vec<Method>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Analyse invalid submissions too.
    #[arg(long)]
    include_invalid: bool,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Recompute validity from the raw samples journal.
    #[arg(long)]
    revalidate: bool,
    /// Count "no" on the positively phrased stress items.
    #[arg(long)]
    reverse_positive_pss: bool,
}

fn main() -> ExitCode {
    let Command::Analyze(a) = Cli::parse().command;
    let config = AnalysisConfig {
        inputs: a.input,
        experiment: a.experiment,
        methods: a.methods,
        include_invalid: a.include_invalid,
        format: a.format,
        bins: a.bins,
        revalidate: a.revalidate,
        scoring: ScoringOptions { reverse_positive_pss: a.reverse_positive_pss },
        out: a.out,
    };
    match run(&config) {
        Ok(analysis) => {
            print!("{}", analysis.summary.render());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
