use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use thiserror::Error;

use msr_core::conditions::check_independence;
use msr_core::format::{render_report_records, render_report_text, serialize_documents};
use msr_core::model::rates;
use msr_core::search::{
    merge_reports, run_search, shard, SearchConfig, SearchMode, SearchReport, DEFAULT_Y_DRAWS,
};
use msr_core::{parse_document, parse_documents, verify, CodeDocument, CodeParameters, Field};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "msrcode",
    version,
    about = "Search, verify and transform rotationally symmetric MSR codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Records,
}

#[derive(Clone, Copy)]
struct ShardSpec {
    index: usize,
    parts: usize,
}

impl FromStr for ShardSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (i, n) = s.split_once('/').ok_or("expected i/N")?;
        let index: usize = i.parse().map_err(|_| format!("bad shard index `{i}`"))?;
        let parts: usize = n.parse().map_err(|_| format!("bad shard count `{n}`"))?;
        if parts == 0 || index == 0 || index > parts {
            return Err(format!(
                "shard {index}/{parts} out of range (indices start at 1)"
            ));
        }
        Ok(ShardSpec { index, parts })
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Field characteristic
    #[arg(long)]
    p: u32,
    /// Extension degree
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: Mode,
    /// RNG seed (required in random mode)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of A matrices drawn in random mode
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Number of Y subspaces drawn per A in random mode
    #[arg(long, default_value_t = DEFAULT_Y_DRAWS)]
    y_draws: u64,
    /// Maximum number of codes to emit (0 = no cap)
    #[arg(long, default_value_t = 10)]
    limit: usize,
    /// Run only part i of N of the exhaustive enumeration
    #[arg(long)]
    shard: Option<ShardSpec>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Only keep codes whose storage rows are in general position
    #[arg(long)]
    general_position: bool,
    /// Write emitted codes to this file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Search for rotationally symmetric codes
    Search(SearchArgs),
    /// Check independence and recovery of every code in a file
    Verify {
        path: PathBuf,
        #[arg(long)]
        general_position: bool,
    },
    /// Put a code into systematic form
    Systematic {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print repair bandwidth figures
    Rate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// File size, an integer or fraction such as 3/2
        #[arg(long = "M", default_value = "1")]
        file_size: Rational64,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn run_threads(config: &SearchConfig, threads: usize) -> Result<SearchReport, CliError> {
    if threads <= 1 || config.mode != SearchMode::Exhaustive {
        return run_search(config).map_err(usage);
    }
    let pieces = shard(config, threads).map_err(usage)?;
    let reports = thread::scope(|scope| {
        let handles: Vec<_> = pieces
            .iter()
            .map(|c| scope.spawn(move || run_search(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })
    .map_err(usage)?;
    let mut merged = merge_reports(&reports).map_err(usage)?;
    if config.limit > 0 {
        merged.emitted.truncate(config.limit);
    }
    Ok(merged)
}

fn cmd_search(args: SearchArgs) -> Result<(), CliError> {
    let params = CodeParameters::new(args.n, args.k).map_err(usage)?;
    let field = Field::new(args.p, args.m, None).map_err(usage)?;
    let mode = match args.mode {
        Mode::Exhaustive => SearchMode::Exhaustive,
        Mode::Random => SearchMode::Random {
            seed: args
                .seed
                .ok_or_else(|| usage("random mode requires --seed"))?,
            samples: args.samples,
            y_draws: args.y_draws,
        },
    };
    let mut config = SearchConfig {
        params,
        field,
        mode,
        limit: args.limit,
        a_range: None,
        require_general_position: args.general_position,
    };
    if let Some(s) = args.shard {
        let parts = shard(&config, s.parts).map_err(usage)?;
        config = parts[s.index - 1].clone();
    }
    let report = run_threads(&config, args.threads)?;
    if let Some(path) = &args.out {
        let docs: Vec<CodeDocument> = report
            .emitted
            .iter()
            .cloned()
            .map(CodeDocument::Symmetric)
            .collect();
        write(path, &serialize_documents(&docs))?;
    }
    match args.format {
        ReportFormat::Text => print!("{}", render_report_text(&report)),
        ReportFormat::Records => print!("{}", render_report_records(&report)),
    }
    Ok(())
}

fn cmd_verify(path: &Path, general_position: bool) -> Result<(), CliError> {
    let docs =
        parse_documents(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut all_ok = true;
    for (idx, doc) in docs.iter().enumerate() {
        if docs.len() > 1 {
            println!("document {}", idx + 1);
        }
        let verdict = verify(&doc.to_explicit(), general_position);
        print!("{}", verdict.render());
        all_ok &= verdict.independent && verdict.recoverable;
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Failed("verification failed".into()))
    }
}

fn cmd_systematic(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let doc =
        parse_document(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(subset) = check_independence(&doc.to_explicit()).failing_subset {
        return Err(CliError::Failed(format!(
            "not independent: nodes {subset:?} are dependent"
        )));
    }
    let failed = |e: msr_core::ModelError| CliError::Failed(e.to_string());
    let (converted, t) = match &doc {
        CodeDocument::Symmetric(s) => {
            let (seed, t) = s.to_systematic().map_err(failed)?;
            (CodeDocument::Symmetric(seed), t)
        }
        CodeDocument::Explicit(c) => {
            let (code, t) = c.to_systematic().map_err(failed)?;
            (CodeDocument::Explicit(code), t)
        }
    };
    println!("T =");
    print!("{t}");
    let text = converted.serialize();
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_rate(n: usize, k: usize, file_size: Rational64) -> Result<(), CliError> {
    let r = rates(n, k, file_size).map_err(usage)?;
    println!("n            {}", r.n);
    println!("k            {}", r.k);
    println!("M            {}", r.file_size);
    println!("gamma_naive  {}", r.gamma_naive);
    println!("gamma_msr    {}", r.gamma_msr);
    println!("gamma_ia     {}", r.gamma_ia);
    println!("equal        {}", r.matches_cut_set());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search(args) => cmd_search(args),
        Command::Verify {
            path,
            general_position,
        } => cmd_verify(&path, general_position),
        Command::Systematic { path, out } => cmd_systematic(&path, out.as_deref()),
        Command::Rate { n, k, file_size } => cmd_rate(n, k, file_size),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msrcode: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
