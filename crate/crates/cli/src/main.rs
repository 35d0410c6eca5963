//! `tbacert`: generate emptiness certificates for timed Büchi automata and
//! check them independently.
//!
//! Exit codes: 0 for a positive answer (certificate accepted, language
//! empty), 1 for a negative one (rejected, nonempty), 2 for malformed input
//! or usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tbacert_core::formats::{
    read_certificate, read_graph, read_renaming, write_certificate, write_graph, Names, Renaming,
};
use tbacert_core::generator::{extract_certificate, iterative_scc_emptiness, ndfs_emptiness};
use tbacert_core::model::{compute_lu, parse_model, TimedAutomaton};
use tbacert_core::oracle::{self, OracleVerdict};
use tbacert_core::synth::{random_automata, ring, RandomParams};
use tbacert_core::zone_graph::{SubsumptionMode, SymbolicState};
use tbacert_core::{check_certificate_with, renumber, Certificate, CheckOptions, Subject};

#[derive(Parser)]
#[command(name = "tbacert", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Ndfs,
    Scc,
}

#[derive(Subcommand)]
enum Command {
    /// Check a certificate against a model.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        /// Override the mode named in the certificate header.
        #[arg(long)]
        mode: Option<SubsumptionMode>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        /// Stop at the first rejection.
        #[arg(long)]
        fail_fast: bool,
        /// Dictionary mapping model names to the numbers used in the certificate.
        #[arg(long)]
        renaming: Option<PathBuf>,
    },
    /// Decide emptiness and write a certificate when the language is empty.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value = "inclusion")]
        mode: SubsumptionMode,
        #[arg(long)]
        out_cert: PathBuf,
        #[arg(long)]
        out_graph: Option<PathBuf>,
    },
    /// Reference emptiness check by exhaustive exploration.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        /// Give up after this many symbolic states.
        #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
        cap: usize,
        /// Write the certificate made of every reachable state.
        #[arg(long)]
        emit_trivial_cert: Option<PathBuf>,
    },
    /// Extract a certificate from a subsumption graph file.
    Convert {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out_cert: PathBuf,
    },
    /// Recompute the numbering of a certificate from its cover graph.
    Renumber {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        renaming: Option<PathBuf>,
    },
    /// Write a synthetic model.
    Synth {
        #[command(subcommand)]
        family: Family,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Ring of `len` locations over three clocks; its language is empty.
    Ring {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// The `index`-th automaton of the seeded random stream.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_model(path: &Path) -> Result<TimedAutomaton> {
    parse_model(&read(path)?).with_context(|| format!("in model {}", path.display()))
}

fn load_certificate(
    path: &Path,
    ta: &TimedAutomaton,
    renaming: Option<&Path>,
) -> Result<Certificate> {
    let renaming: Option<Renaming> = renaming
        .map(|p| read_renaming(&read(p)?).with_context(|| format!("in renaming {}", p.display())))
        .transpose()?;
    let doc = read_certificate(&read(path)?)
        .with_context(|| format!("in certificate {}", path.display()))?;
    doc.resolve(ta, renaming.as_ref())
        .with_context(|| format!("in certificate {}", path.display()))
}

fn describe(ta: &TimedAutomaton, s: &SymbolicState) -> String {
    format!("({}, {:?})", ta.location(s.location).name, s.zone)
}

fn check(
    model: &Path,
    certificate: &Path,
    mode: Option<SubsumptionMode>,
    jobs: Option<usize>,
    fail_fast: bool,
    renaming: Option<&Path>,
) -> Result<ExitCode> {
    let ta = load_model(model)?;
    let mut cert = load_certificate(certificate, &ta, renaming)?;
    if let Some(m) = mode {
        cert.mode = m;
    }
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let start = Instant::now();
    let verdict = check_certificate_with(&ta, &cert, &CheckOptions { jobs, fail_fast })?;
    eprintln!(
        "checked {} entries in {} mode in {:.3} s",
        cert.len(),
        cert.mode,
        start.elapsed().as_secs_f64()
    );
    if verdict.accepted() {
        println!("accepted");
        return Ok(ExitCode::SUCCESS);
    }
    for r in &verdict.rejections {
        let subject = match r.subject {
            Subject::Initial => "initial state".to_string(),
            Subject::Entry(k) => {
                let e = &cert.entries[k];
                format!("entry {k} at {}", ta.location(e.location).name)
            }
        };
        match &r.witness {
            Some((edge, succ)) => eprintln!(
                "{subject}: {} (edge {edge} to {})",
                r.reason,
                describe(&ta, succ)
            ),
            None => eprintln!("{subject}: {}", r.reason),
        }
    }
    println!("rejected ({} problems)", verdict.rejections.len());
    Ok(ExitCode::from(1))
}

fn generate(
    model: &Path,
    algo: Algo,
    mode: SubsumptionMode,
    out_cert: &Path,
    out_graph: Option<&Path>,
) -> Result<ExitCode> {
    let ta = load_model(model)?;
    let lu = compute_lu(&ta);
    let start = Instant::now();
    let result = match algo {
        Algo::Ndfs => ndfs_emptiness(&ta, &lu, mode),
        Algo::Scc => iterative_scc_emptiness(&ta, &lu, mode),
    };
    eprintln!(
        "explored {} states in {} round(s) in {:.3} s",
        result.states,
        result.iterations,
        start.elapsed().as_secs_f64()
    );
    if let Some(lasso) = result.lasso() {
        println!("nonempty");
        let show = |states: &[SymbolicState]| {
            states
                .iter()
                .map(|s| describe(&ta, s))
                .collect::<Vec<_>>()
                .join(" -> ")
        };
        eprintln!("prefix: {}", show(&lasso.prefix));
        eprintln!("cycle: {}", show(&lasso.cycle));
        return Ok(ExitCode::from(1));
    }
    let graph = result.graph().expect("an empty verdict carries its graph");
    let names = Names::of(&ta);
    let cert = extract_certificate(graph)?;
    write(out_cert, &write_certificate(&cert, &names))?;
    if let Some(path) = out_graph {
        write(path, &write_graph(graph, &names))?;
    }
    println!("empty");
    Ok(ExitCode::SUCCESS)
}

fn run_oracle(model: &Path, cap: usize, emit: Option<&Path>) -> Result<ExitCode> {
    let ta = load_model(model)?;
    let lu = compute_lu(&ta);
    let explored = oracle::explore_full(&ta, &lu, cap)?;
    let verdict = oracle::verdict_of(&explored);
    eprintln!("{} reachable states", explored.nodes.len());
    if let (Some(path), OracleVerdict::Empty) = (emit, verdict) {
        let cert = oracle::trivial_certificate(&ta, &lu, cap)?;
        write(path, &write_certificate(&cert, &Names::of(&ta)))?;
    }
    println!("{verdict}");
    Ok(match verdict {
        OracleVerdict::Empty => ExitCode::SUCCESS,
        OracleVerdict::Nonempty => ExitCode::from(1),
    })
}

fn convert(graph: &Path, out_cert: &Path) -> Result<ExitCode> {
    let doc = read_graph(&read(graph)?).with_context(|| format!("in graph {}", graph.display()))?;
    let cert = extract_certificate(&doc.graph)?;
    write(out_cert, &write_certificate(&cert, &doc.names))?;
    Ok(ExitCode::SUCCESS)
}

fn run_renumber(
    cert: &Path,
    model: &Path,
    out: &Path,
    renaming: Option<&Path>,
) -> Result<ExitCode> {
    let ta = load_model(model)?;
    let c = load_certificate(cert, &ta, renaming)?;
    match renumber(&ta, &c) {
        Ok(fixed) => {
            write(out, &write_certificate(&fixed, &Names::of(&ta)))?;
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ tbacert_core::CertificateError::AcceptingCycle { .. }) => {
            eprintln!("{e}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn synth(family: &Family) -> Result<ExitCode> {
    let (ta, out) = match family {
        Family::Ring { len, out } => {
            if *len == 0 {
                bail!("--len must be positive");
            }
            (ring(*len), out)
        }
        Family::Random { seed, index, out } => {
            let mut all = random_automata(*seed, index + 1, RandomParams::default());
            (all.pop().expect("index + 1 > 0"), out)
        }
    };
    write(out, &ta.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check {
            model,
            certificate,
            mode,
            jobs,
            fail_fast,
            renaming,
        } => check(
            &model,
            &certificate,
            mode,
            jobs,
            fail_fast,
            renaming.as_deref(),
        ),
        Command::Generate {
            model,
            algo,
            mode,
            out_cert,
            out_graph,
        } => generate(&model, algo, mode, &out_cert, out_graph.as_deref()),
        Command::Oracle {
            model,
            cap,
            emit_trivial_cert,
        } => run_oracle(&model, cap, emit_trivial_cert.as_deref()),
        Command::Convert { graph, out_cert } => convert(&graph, &out_cert),
        Command::Renumber {
            cert,
            model,
            out,
            renaming,
        } => run_renumber(&cert, &model, &out, renaming.as_deref()),
        Command::Synth { family } => synth(&family),
    }
}

fn main() -> ExitCode {
    // clap already exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
