//! `labelbench`: preprocess a corpus into an artifact directory, serve it,
//! export labels, and score labels against ground truth.
//!
//! Exit codes: 0 success, 1 input error, 2 environment error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use labelbench_core::eval::{evaluate, read_label_csv, EvalError, EvalReport};
use labelbench_core::ingest::{load_dataset, validate_corpus, IngestError};
use labelbench_core::sentiment::Lexicon;
use labelbench_core::session::{export_labels, LabelStore, SessionError};
use labelbench_core::Execution;
use labelbench_server::artifacts::labels_path;
use labelbench_server::{ArtifactError, Artifacts, ProfileSpec, Server, Session};
use log::info;

#[derive(Parser)]
#[command(name = "labelbench", version, about = "Spambot labeling workbench backend")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an artifact directory from account and tweet CSVs.
    Preprocess {
        #[arg(long)]
        accounts: PathBuf,
        #[arg(long)]
        tweets: PathBuf,
        /// Sentiment lexicon TSV; the bundled lexicon when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Topic profiles to precompute, e.g. `overall:10,20;year:10,20`, or `none`.
        #[arg(long, default_value = "overall:10,20;year:10,20")]
        profiles: ProfileSpec,
        /// Run feature extraction on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Serve an artifact directory until interrupted.
    Serve {
        #[arg(long)]
        artifacts: PathBuf,
        /// TCP port; 0 picks a free one.
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Write every account's current label as `account_id,label,updated_at`.
    ExportLabels {
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision, recall, F1 and accuracy with spambot as the positive class.
    Evaluate {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Print the report as one JSON object.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Environment(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Environment(_) => 2,
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => Failure::Environment(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ArtifactError> for Failure {
    fn from(e: ArtifactError) -> Self {
        match e {
            ArtifactError::Io { .. } => Failure::Environment(e.to_string()),
            _ => Failure::Input(format!("corrupt artifact directory: {e}")),
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Malformed { .. } | SessionError::UnknownAccountId(_) => Failure::Input(e.to_string()),
            SessionError::IoFailure(_) | SessionError::PersistenceFailure(_) => Failure::Environment(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let outcome = match cli.command {
        Command::Preprocess { accounts, tweets, lexicon, out, profiles, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::default() };
            preprocess(&accounts, &tweets, lexicon.as_deref(), &out, &profiles, exec)
        }
        Command::Serve { artifacts, port, host } => serve(&artifacts, &host, port),
        Command::ExportLabels { artifacts, out } => export(&artifacts, &out),
        Command::Evaluate { labels, truth, json } => eval(&labels, &truth, json),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Environment(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}

fn preprocess(
    accounts: &Path,
    tweets: &Path,
    lexicon: Option<&Path>,
    out: &Path,
    profiles: &ProfileSpec,
    exec: Execution,
) -> Result<(), Failure> {
    let corpus = load_dataset(accounts, tweets)?;
    let report = validate_corpus(&corpus);
    if !report.is_valid() {
        for v in report.violations.iter().take(20) {
            eprintln!("{}: {}", v.location, v.message);
        }
        return Err(Failure::Input(format!("{} corpus violations", report.violations.len())));
    }
    let lexicon = match lexicon {
        Some(path) => {
            let body = std::fs::read_to_string(path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => Failure::Input(format!("lexicon not found: {}", path.display())),
                _ => Failure::Environment(format!("reading {}: {e}", path.display())),
            })?;
            Lexicon::parse(&body).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => Lexicon::bundled(),
    };
    info!("{} accounts, {} tweets", corpus.accounts.len(), corpus.tweets.len());
    let artifacts = Artifacts::build(corpus, lexicon, profiles, exec)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::Environment(format!("creating {}: {e}", out.display())))?;
    let manifest = artifacts.write(out)?;
    for (file, hash) in &manifest.files {
        println!("{hash}  {file}");
    }
    Ok(())
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

fn serve(dir: &Path, host: &str, port: u16) -> Result<(), Failure> {
    let artifacts = Artifacts::load(dir)?;
    let session = Session::open(artifacts, dir)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Environment(format!("starting runtime: {e}")))?;
    runtime.block_on(async {
        let server = Server::bind((host, port), session.clone()).await.map_err(|e| match e.kind() {
            std::io::ErrorKind::AddrInUse => Failure::Environment(format!("port {port} is in use")),
            _ => Failure::Environment(format!("binding {host}:{port}: {e}")),
        })?;
        let addr = server.local_addr().map_err(|e| Failure::Environment(e.to_string()))?;
        println!("listening on {addr}");
        server.run_until(shutdown_signal()).await.map_err(|e| Failure::Environment(e.to_string()))
    })?;
    session.cancel_all_jobs();
    runtime.shutdown_timeout(std::time::Duration::from_secs(2));
    info!("labels saved to {}", labels_path(dir).display());
    Ok(())
}

fn export(dir: &Path, out: &Path) -> Result<(), Failure> {
    let artifacts = Artifacts::load(dir)?;
    let universe = std::sync::Arc::new(artifacts.corpus.accounts.keys().cloned().collect());
    let store = LabelStore::open(&labels_path(dir), universe)?;
    export_labels(&store, out).map_err(|e| Failure::Environment(format!("writing {}: {e}", out.display())))?;
    Ok(())
}

fn print_report(r: &EvalReport) {
    println!("precision {:.6}", r.precision);
    println!("recall    {:.6}", r.recall);
    println!("f1        {:.6}", r.f1);
    println!("accuracy  {:.6}", r.accuracy);
    println!("tp {} fp {} fn {} tn {}", r.tp, r.fp, r.fn_, r.tn);
    println!("labeled {} unlabeled {}", r.labeled_count, r.unlabeled_count);
}

fn eval(labels: &Path, truth: &Path, json: bool) -> Result<(), Failure> {
    let report = evaluate(&read_label_csv(labels)?, &read_label_csv(truth)?)?;
    if json {
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        print_report(&report);
    }
    Ok(())
}
