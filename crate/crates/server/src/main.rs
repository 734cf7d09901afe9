use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use lingkod_core::domain::LanguageRegistry;
use lingkod_core::ids::TaskId;
use lingkod_core::metrics::{corpus_bleu, sentence_bleu};
use lingkod_server::{ServiceConfig, Store};
use serde::Deserialize;
use serde_json::json;

/// Admin CLI for the lingkod service. Configuration comes from the
/// environment (PORT, DATA_DIR, DETECTOR_MODE, ...).
#[derive(Parser)]
#[command(name = "lingkod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service until interrupted.
    Serve,
    /// Replace the language registry in DATA_DIR with a TSV file.
    Seed {
        #[arg(long)]
        registry: PathBuf,
    },
    /// Write the published export of a completed task.
    Export {
        #[arg(long)]
        task: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Offline metric computations.
    Metrics {
        #[command(subcommand)]
        metric: Metric,
    },
}

#[derive(Subcommand)]
enum Metric {
    /// Sentence and corpus BLEU for JSON lines of {"candidate","reference"}.
    Bleu {
        #[arg(long)]
        pairs: PathBuf,
    },
}

#[derive(Deserialize)]
struct Pair {
    candidate: String,
    reference: String,
}

fn persistent_store(config: &ServiceConfig) -> anyhow::Result<Store> {
    if config.data_dir.is_none() {
        bail!("DATA_DIR must be set");
    }
    Ok(Store::open(config)?)
}

fn bleu(path: &PathBuf) -> anyhow::Result<()> {
    let file = std::fs::File::open(path).with_context(|| format!("open {}", path.display()))?;
    let mut pairs = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: Pair = serde_json::from_str(&line).with_context(|| format!("line {}", n + 1))?;
        pairs.push((pair.candidate, pair.reference));
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, (c, r)) in pairs.iter().enumerate() {
        let row = match sentence_bleu(c, r) {
            Ok(s) => json!({ "line": i + 1, "bleu": s.value, "bp": s.bp }),
            Err(e) => json!({ "line": i + 1, "error": e.code() }),
        };
        writeln!(out, "{row}")?;
    }
    let corpus = match corpus_bleu(&pairs) {
        Ok(s) => json!({ "corpus_bleu": s.value, "bp": s.bp, "segments": pairs.len() }),
        Err(e) => json!({ "corpus_error": e.code(), "segments": pairs.len() }),
    };
    writeln!(out, "{corpus}")?;
    Ok(())
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Serve => {
            let config = ServiceConfig::from_env()?;
            let service = lingkod_server::serve(config).await?;
            println!("listening on {}", service.base_url());
            tokio::signal::ctrl_c().await?;
            service.shutdown().await?;
        }
        Command::Seed { registry } => {
            let config = ServiceConfig::from_env()?;
            let text = std::fs::read_to_string(&registry).with_context(|| format!("read {}", registry.display()))?;
            let parsed = LanguageRegistry::parse(&text)?;
            let n = parsed.len();
            persistent_store(&config)?.transact(|p| p.replace_registry(parsed))?;
            println!("registry replaced: {n} languages");
        }
        Command::Export { task, out } => {
            let config = ServiceConfig::from_env()?;
            let id = TaskId(task);
            let body = persistent_store(&config)?.read(|p| p.export(&id).map(str::to_owned));
            let Some(body) = body else { bail!("task {id} has no published export") };
            std::fs::write(&out, body).with_context(|| format!("write {}", out.display()))?;
        }
        Command::Metrics { metric: Metric::Bleu { pairs } } => bleu(&pairs)?,
    }
    Ok(())
}
