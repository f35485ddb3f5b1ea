//! `stabenv`: enumerate fixed points and trees, print restriction matrices,
//! and run the numerical verification suites. Reports are JSON on stdout (or
//! `--out`); timings go to stderr so reruns are byte-identical.
//!
//! Exit codes: 0 pass, 1 numerical failure or error, 2 bad configuration.

mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stabenv::envelope_x::restriction_matrix_x;
use stabenv::envelope_xprime::restriction_matrix_xprime;
use stabenv::error::Error;
use stabenv::limit::LimitConfig;
use stabenv::mirror::draw_params;
use stabenv::rect_combinatorics::{bj, tree_pairs, GrassData, LShapeRule, YoungDiagram};
use stabenv::theta_core::EllipticParams;

#[derive(Parser)]
#[command(name = "stabenv", version, about = "Elliptic stable envelopes of Grassmannians and their mirrors")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Dimension of the ambient space.
    #[arg(long, global = true, default_value_t = 4)]
    n: usize,
    /// Dimension of the subspaces.
    #[arg(long, global = true, default_value_t = 2)]
    k: usize,
    #[arg(long = "q-re", global = true, default_value_t = 0.1, allow_negative_numbers = true)]
    q_re: f64,
    #[arg(long = "q-im", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    q_im: f64,
    /// Working precision in bits.
    #[arg(long, global = true, env = "STABENV_PRECISION", default_value_t = 256)]
    precision: u32,
    /// Relative size of the last theta-series term kept.
    #[arg(long = "truncation-tol", global = true, default_value_t = 1e-60)]
    truncation_tol: f64,
    /// Pass threshold; each suite has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest step of the fixed-point restriction limits.
    #[arg(long, global = true, default_value_t = 1e-8)]
    epsilon: f64,
    /// Seed of the parameter draw.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Subsets, diagrams and the bijection between them.
    FixedPoints,
    /// Tree pairs (t, t̄) of a diagram.
    Trees {
        /// Row lengths, comma separated (empty for ∅).
        #[arg(long, default_value = "")]
        lambda: String,
    },
    /// Fixed-point restriction matrix of one side.
    Matrix {
        side: Side,
        /// Include the holomorphic normalization.
        #[arg(long)]
        bold: bool,
    },
    /// Run a verification suite.
    Verify {
        suite: Suite,
        /// Number of random draws (theta identities: 100, mother-k1: 5).
        #[arg(long)]
        samples: Option<usize>,
        /// Admit boundary boxes in the cancellation check.
        #[arg(long)]
        allow_boundary: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    X,
    Xprime,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Mirror,
    ThetaIdentities,
    Gkm,
    Cancellation,
    MotherK1,
    All,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::InvalidNK { .. }
            | Error::DiagramOutOfRectangle(_)
            | Error::InvalidSubset(_)
            | Error::BoxNotInTree(..)
            | Error::InvolutionUndefined(..)
            | Error::PairNotConnected(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn parse_lambda(g: &GrassData, s: &str) -> Result<YoungDiagram, Failure> {
    let parts = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Failure::Config(format!("bad row length `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(YoungDiagram::new(g, &parts)?)
}

fn run(cli: &Cli) -> Result<(Value, bool), Failure> {
    let a = &cli.run;
    let g = GrassData::new(a.n, a.k)?;
    let ell = EllipticParams::new(a.q_re, a.q_im, a.precision, a.truncation_tol)?;
    let limit = LimitConfig { epsilon: a.epsilon, ..LimitConfig::default() };
    limit.validate()?;
    match &cli.cmd {
        Cmd::FixedPoints => {
            let diagrams = g.diagrams();
            let table = diagrams
                .iter()
                .map(|d| Ok(json!({ "lambda": report::diagram(d), "subset": report::subset(&bj(d, &g)?) })))
                .collect::<Result<Vec<_>, Error>>()?;
            Ok((
                json!({
                    "n": g.n,
                    "k": g.k,
                    "count": g.num_fixed_points(),
                    "subsets": g.subsets().iter().map(report::subset).collect::<Vec<_>>(),
                    "diagrams": diagrams.iter().map(report::diagram).collect::<Vec<_>>(),
                    "bijection": table,
                }),
                true,
            ))
        }
        Cmd::Trees { lambda } => {
            let lam = parse_lambda(&g, lambda)?;
            let pairs = tree_pairs(&lam, &g, LShapeRule::Plain);
            Ok((
                json!({
                    "n": g.n,
                    "k": g.k,
                    "lambda": report::diagram(&lam),
                    "count": pairs.len(),
                    "pairs": pairs.iter().map(|p| json!({ "t": report::tree(&p.t), "tbar": report::tree(&p.tbar) })).collect::<Vec<_>>(),
                }),
                true,
            ))
        }
        Cmd::Matrix { side, bold } => {
            let (px, pp) = draw_params(g, a.seed, ell.precision_bits());
            let (m, params) = match side {
                Side::X => (restriction_matrix_x(&g, &px, &ell, *bold)?, report::x_params(&px)),
                Side::Xprime => (restriction_matrix_xprime(&g, &pp, &ell, &limit, *bold)?, report::xprime_params(&pp)),
            };
            let mut v = json!({
                "n": g.n,
                "k": g.k,
                "side": match side { Side::X => "x", Side::Xprime => "xprime" },
                "bold": bold,
                "seed": a.seed,
                "elliptic": report::elliptic(&ell),
                "params": params,
                "matrix": report::matrix(&m),
            });
            if let Side::Xprime = side {
                v["limit"] = report::limit(&limit);
            }
            Ok((v, true))
        }
        Cmd::Verify { suite, samples, allow_boundary } => {
            let ctx = suites::Ctx {
                g,
                ell,
                limit,
                seed: a.seed,
                tol: a.tol,
                samples: *samples,
                allow_boundary: *allow_boundary,
            };
            let out = match suite {
                Suite::Mirror => suites::mirror(&ctx),
                Suite::ThetaIdentities => suites::theta_identities(&ctx),
                Suite::Gkm => suites::gkm(&ctx),
                Suite::Cancellation => suites::cancellation(&ctx),
                Suite::MotherK1 => suites::mother_k1(&ctx),
                Suite::All => suites::all(&ctx),
            }?;
            Ok((out.report, out.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (value, pass) = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = serde_json::to_string_pretty(&value).expect("JSON values always serialize") + "\n";
    let written = match &cli.run.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(2);
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
