use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fmf::annotation::server::{self, AppState};
use fmf::annotation::store::{system_clock, Store};
use fmf::config::Config;
use fmf::pipeline::{self, Context};
use fmf::{io, FmfError, Result};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "fmf", version, about = "Build and review fine-grained motion editing datasets")]
struct Cli {
    /// Key-value config file; FMF_* environment variables override it.
    #[arg(long, global = true, env = "FMF_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic corpus with oracle-generated motions.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        records: usize,
        #[arg(long, default_value_t = 2)]
        min_snippets: usize,
        #[arg(long, default_value_t = 6)]
        max_snippets: usize,
    },
    /// Sample atomic edits for every corpus record and generate targets.
    Gen {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON report of skipped records and backend failures.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the automatic quality checks.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rejected: Option<PathBuf>,
        /// Per-check rejection counts as CSV.
        #[arg(long)]
        report_csv: Option<PathBuf>,
    },
    /// Chain accepted siblings into complex edits.
    Compose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add paraphrased instructions.
    Rewrite {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write per-split dataset files, stats and a manifest.
    Export {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also export triplets that were never reviewed.
        #[arg(long)]
        accept_pending: bool,
    },
    /// Retrieval metrics for generated vs. target motions.
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 32)]
        gallery: usize,
    },
    /// Instruction text statistics.
    Stats {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Run the annotation service.
    Serve {
        /// Filtered triplets to review.
        #[arg(long)]
        input: PathBuf,
        /// Directory holding the event log and snapshots.
        #[arg(long)]
        state_dir: PathBuf,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| FmfError::Validation(e.to_string()))?;
    // a closed pipe (e.g. `| head`) is not an error
    let _ = writeln!(std::io::stdout().lock(), "{s}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::from_env(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.cmd {
        Cmd::Synth { out, records, min_snippets, max_snippets } => {
            let ctx = Context::new(cfg)?;
            let opts = pipeline::synth::SynthOptions {
                records,
                seed: ctx.cfg.seed,
                min_snippets,
                max_snippets,
            };
            let recs = pipeline::synth::synth_corpus(&out, &ctx.pool, &opts)?;
            tracing::info!("wrote {} records to {}", recs.len(), out.display());
        }
        Cmd::Gen { corpus, out, report } => {
            let ctx = Context::new(cfg)?;
            let (_, rep) = pipeline::gen::generate(&ctx, &corpus, &out)?;
            tracing::info!(
                "{} candidates from {} records, {} skipped, {} backend failures",
                rep.candidates,
                rep.records,
                rep.skipped.len(),
                rep.generator_failures
            );
            if let Some(p) = report {
                io::write_json(&p, &rep)?;
            }
            if rep.candidates == 0 && rep.generator_failures > 0 {
                return Err(FmfError::Backend(format!("all {} generator calls failed", rep.generator_failures)));
            }
        }
        Cmd::Filter { input, out, rejected, report_csv } => {
            let ctx = Context::new(cfg)?;
            let rep = pipeline::filter::filter_file(&ctx.filter, &input, &out, rejected.as_deref(), report_csv.as_deref())?;
            tracing::info!("{} of {} accepted", rep.accepted, rep.total);
        }
        Cmd::Compose { input, out } => {
            let ctx = Context::new(cfg)?;
            let (_, rep) = pipeline::compose::compose_file(&ctx, &input, &out)?;
            print_json(&rep)?;
        }
        Cmd::Rewrite { input, out } => {
            let ctx = Context::new(cfg)?;
            let ts = pipeline::rewrite::rewrite_file(&ctx, &input, &out)?;
            tracing::info!("rewrote {} triplets", ts.len());
        }
        Cmd::Export { input, out, accept_pending } => {
            let (manifest, _) = pipeline::export::export(&input, &out, pipeline::export::ExportOptions { accept_pending })?;
            print_json(&manifest.triplets)?;
        }
        Cmd::Eval { input, gallery } => {
            print_json(&pipeline::eval::evaluate_default(&input, gallery)?)?;
        }
        Cmd::Stats { input } => {
            let mut all = Vec::new();
            for p in &input {
                all.extend(io::read_jsonl::<fmf::record::EditTriplet>(p)?);
            }
            print_json(&pipeline::stats::dataset_stats(&all))?;
        }
        Cmd::Serve { input, state_dir, bind, ui_dir } => {
            let ctx = Context::new(cfg)?;
            let cfg = &ctx.cfg;
            if cfg.tokens.is_empty() {
                return Err(FmfError::Config("no annotator or expert tokens configured".into()));
            }
            let store = Store::open(&state_dir, cfg.audit.clone(), cfg.seed, system_clock())?;
            let state = Arc::new(AppState::new(store, &input, ctx.pool.clone(), cfg.tokens.clone(), cfg.seed)?);
            let bind = bind.unwrap_or_else(|| cfg.bind.clone());
            let ui_dir = ui_dir.or_else(|| cfg.ui_dir.clone());
            let rt = tokio::runtime::Runtime::new().map_err(|e| FmfError::io(&state_dir, e))?;
            rt.block_on(server::serve(state, &bind, ui_dir))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("FMF_LOG").unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            tracing::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
