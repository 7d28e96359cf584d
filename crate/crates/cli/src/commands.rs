use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use treebergman::bergman::{coefficients, eval_basis, BasisIndex, BergmanKernel};
use treebergman::harmonic::FiniteFunction;
use treebergman::measure::vertex_measure;
use treebergman::operators::{
    bmo_norm, cz_decompose, hormander_sum, is_atom, project_eval, weak_type_curve,
    PiecewiseFunction,
};
use treebergman::verify::{run_suite, suite_ids, RunConfig, SuiteId};
use treebergman::{DyadicSet, Params, Vertex};

use crate::output::{emit, Sink};

/// Computation and verification harness for harmonic Bergman analysis on
/// homogeneous trees.
#[derive(Parser)]
#[command(name = "treebergman", version, about)]
pub struct Cli {
    /// Branching parameter (each vertex has q successors)
    #[arg(long, global = true, default_value_t = 2)]
    pub q: u32,

    /// Measure exponent (> 1)
    #[arg(long, global = true, default_value_t = 2.0)]
    pub alpha: f64,

    /// Relative tolerance for identity checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Truncation depth for series oracles
    #[arg(long, global = true, default_value_t = 40)]
    pub depth: u32,

    /// Seed for the randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Emit JSON instead of CSV
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the report to a file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a named verification suite and report per-check rows
    Suite {
        /// One of: geometry, measure, harmonic, orthonormality, kernel,
        /// projection, cz, hormander, hardy-bmo, all
        name: String,
    },
    /// Evaluate a single quantity
    Eval {
        #[command(subcommand)]
        what: EvalCmd,
    },
    /// Dump the coefficient family
    Coeff {
        #[command(subcommand)]
        what: CoeffCmd,
    },
    /// Calderon-Zygmund decomposition of a function file
    Cz {
        /// Function file in `anchor:word,value` lines
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Hormander-condition bracket for a kernel-column difference
    Hormander {
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value_t = 5)]
        window: i64,
    },
    /// Check the (1,p)-atom conditions
    AtomCheck {
        #[arg(long)]
        f: PathBuf,
        /// Exponent in (1, inf); "inf" for the sup-norm version
        #[arg(long)]
        p: String,
        /// Cell: a vertex `a:w` for its sector, or `point:a:w` for a singleton
        #[arg(long, allow_hyphen_values = true)]
        cell: String,
    },
    /// Windowed bounded-mean-oscillation norm
    Bmo {
        #[arg(long)]
        f: PathBuf,
        /// Predecessor steps above the support hull to scan
        #[arg(long, default_value_t = 6)]
        p_levels: u32,
    },
    /// Weak-type diagnostic curve for the projection
    Weak11 {
        #[arg(long)]
        f: PathBuf,
        /// Comma-separated superlevel heights
        #[arg(long)]
        lambdas: String,
        #[arg(long, default_value_t = 6)]
        window: i64,
    },
}

#[derive(Subcommand)]
pub enum EvalCmd {
    /// Reproducing kernel value K(v, x)
    Kernel(KernelArgs),
    /// Unnormalized basis function value
    Basis(BasisArgs),
    /// Measure of a single vertex
    Sigma {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Gromov distance between two vertices
    Rho {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Projection of a function file at a list of vertices
    Project {
        #[arg(long)]
        f: PathBuf,
        /// Comma-separated vertices
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
}

#[derive(Args)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
}

#[derive(Args)]
pub struct BasisArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub v: String,
    #[arg(long)]
    pub j: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
}

#[derive(Subcommand)]
pub enum CoeffCmd {
    /// Emit c, cp, and b(n) over a level window
    Dump {
        #[arg(long, default_value_t = -5, allow_hyphen_values = true)]
        n_min: i64,
        #[arg(long, default_value_t = 5, allow_hyphen_values = true)]
        n_max: i64,
    },
}

fn parse_vertex(s: &str, q: u32) -> Result<Vertex> {
    let v: Vertex = s.parse()?;
    v.check_digits(q)?;
    Ok(v)
}

fn load_function(path: &PathBuf, q: u32) -> Result<FiniteFunction> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let f = FiniteFunction::from_csv(&text)?;
    for v in f.support() {
        v.check_digits(q)?;
    }
    Ok(f)
}

/// Executes the parsed command; returns whether every check passed (always
/// true for plain evaluations).
pub fn run(cli: Cli) -> Result<bool> {
    let params = Params::new(cli.q, cli.alpha)?
        .with_tol(cli.tol)?
        .with_depth(cli.depth)?;
    let sink = Sink {
        json: cli.json,
        output: cli.output.clone(),
    };
    match cli.command {
        Command::Suite { name } => {
            let id: SuiteId = name
                .parse()
                .with_context(|| format!("known suites: {}", suite_ids().join(", ")))?;
            let cfg = RunConfig {
                params,
                seed: cli.seed,
            };
            let rows = run_suite(id, &cfg)?;
            let failed = rows.iter().filter(|c| !c.pass).count();
            let mut table = vec![vec![
                "check_id".to_string(),
                "anchor".to_string(),
                "input".to_string(),
                "expected".to_string(),
                "got".to_string(),
                "tol".to_string(),
                "pass".to_string(),
            ]];
            for c in &rows {
                table.push(vec![
                    c.id.clone(),
                    c.anchor.clone(),
                    c.input.clone(),
                    c.expected.clone(),
                    c.got.clone(),
                    format!("{}", c.tol),
                    format!("{}", c.pass),
                ]);
            }
            emit(&sink, &table)?;
            eprintln!(
                "suite {id}: {} checks, {failed} failed",
                rows.len()
            );
            Ok(failed == 0)
        }
        Command::Eval { what } => {
            run_eval(what, &params, &sink)?;
            Ok(true)
        }
        Command::Coeff {
            what: CoeffCmd::Dump { n_min, n_max },
        } => {
            if n_min > n_max {
                bail!("empty level window {n_min}..{n_max}");
            }
            let cf = coefficients(&params);
            let mut table = vec![vec!["key".to_string(), "value".to_string()]];
            table.push(vec!["c".into(), format!("{}", cf.c())]);
            table.push(vec!["cp".into(), format!("{}", cf.cp())]);
            for n in n_min..=n_max {
                table.push(vec![format!("b({n})"), format!("{}", cf.b(n))]);
            }
            emit(&sink, &table)?;
            Ok(true)
        }
        Command::Cz { f, lambda } => {
            let f = load_function(&f, params.q())?;
            let out = cz_decompose(&f, lambda, &params)?;
            let mut table = vec![vec![
                "record".to_string(),
                "key".to_string(),
                "value".to_string(),
            ]];
            table.push(vec!["lambda".into(), String::new(), format!("{lambda}")]);
            table.push(vec![
                "good_constant".into(),
                String::new(),
                format!("{}", out.good_l2_constant),
            ]);
            table.push(vec![
                "bad_constant".into(),
                String::new(),
                format!("{}", out.bad_l1_constant),
            ]);
            for cell in &out.selected {
                table.push(vec!["selected".into(), format!("{cell}"), String::new()]);
            }
            for (v, c) in out.good.points() {
                table.push(vec!["good_point".into(), format!("{v}"), format!("{c}")]);
            }
            for (g, c) in out.good.sectors() {
                table.push(vec!["good_sector".into(), format!("{g}"), format!("{c}")]);
            }
            for (cell, piece) in &out.bad {
                for (v, c) in piece.points() {
                    table.push(vec![
                        format!("bad_point[{cell}]"),
                        format!("{v}"),
                        format!("{c}"),
                    ]);
                }
                for (g, c) in piece.sectors() {
                    table.push(vec![
                        format!("bad_sector[{cell}]"),
                        format!("{g}"),
                        format!("{c}"),
                    ]);
                }
            }
            emit(&sink, &table)?;
            Ok(true)
        }
        Command::Hormander { v, x, y, window } => {
            let kernel = BergmanKernel::new(coefficients(&params));
            let v = parse_vertex(&v, params.q())?;
            let x = parse_vertex(&x, params.q())?;
            let y = parse_vertex(&y, params.q())?;
            let hb = hormander_sum(&kernel, &v, &x, &y, window, &params)?;
            let table = vec![
                vec!["lower".to_string(), "upper".to_string()],
                vec![format!("{}", hb.lower), format!("{}", hb.upper)],
            ];
            emit(&sink, &table)?;
            Ok(true)
        }
        Command::AtomCheck { f, p, cell } => {
            let func = load_function(&f, params.q())?;
            let p_exp = if p == "inf" {
                f64::INFINITY
            } else {
                p.parse::<f64>().context("exponent must be a number or `inf`")?
            };
            let cell = if let Some(rest) = cell.strip_prefix("point:") {
                DyadicSet::Singleton(parse_vertex(rest, params.q())?)
            } else {
                DyadicSet::Sector(parse_vertex(&cell, params.q())?)
            };
            let report = is_atom(
                &PiecewiseFunction::from_finite(&func),
                p_exp,
                &cell,
                &params,
            )?;
            let table = vec![
                vec![
                    "is_atom".to_string(),
                    "support_cell".to_string(),
                    "norm_ratio".to_string(),
                    "mean".to_string(),
                ],
                vec![
                    format!("{}", report.is_atom),
                    report
                        .support_cell
                        .map(|c| format!("{c}"))
                        .unwrap_or_else(|| "none".into()),
                    format!("{}", report.norm_ratio),
                    format!("{}", report.mean),
                ],
            ];
            emit(&sink, &table)?;
            Ok(true)
        }
        Command::Bmo { f, p_levels } => {
            let func = load_function(&f, params.q())?;
            let norm = bmo_norm(&func, p_levels, &params);
            let table = vec![
                vec!["key".to_string(), "value".to_string()],
                vec!["bmo_norm".into(), format!("{norm}")],
                vec![
                    "note".into(),
                    format!(
                        "supremum over cells within {p_levels} levels of the support hull; higher cells decay geometrically"
                    ),
                ],
            ];
            emit(&sink, &table)?;
            Ok(true)
        }
        Command::Weak11 { f, lambdas, window } => {
            let func = load_function(&f, params.q())?;
            let kernel = BergmanKernel::new(coefficients(&params));
            let heights: Vec<f64> = lambdas
                .split(',')
                .map(|s| s.trim().parse::<f64>().context("bad lambda list"))
                .collect::<Result<_>>()?;
            let curve = weak_type_curve(&kernel, &func, &heights, window, &params)?;
            let mut table = vec![vec![
                "lambda".to_string(),
                "mass".to_string(),
                "bound".to_string(),
                "ratio".to_string(),
            ]];
            for pt in curve {
                let ratio = if pt.bound > 0.0 {
                    format!("{}", pt.mass / pt.bound)
                } else {
                    "nan".to_string()
                };
                table.push(vec![
                    format!("{}", pt.lambda),
                    format!("{}", pt.mass),
                    format!("{}", pt.bound),
                    ratio,
                ]);
            }
            emit(&sink, &table)?;
            Ok(true)
        }
    }
}

fn run_eval(what: EvalCmd, params: &Params, sink: &Sink) -> Result<()> {
    match what {
        EvalCmd::Kernel(args) => {
            let kernel = BergmanKernel::new(coefficients(params));
            let v = parse_vertex(&args.v, params.q())?;
            let x = parse_vertex(&args.x, params.q())?;
            emit_value(sink, "kernel", kernel.eval(&v, &x))
        }
        EvalCmd::Basis(args) => {
            let v = parse_vertex(&args.v, params.q())?;
            let x = parse_vertex(&args.x, params.q())?;
            let idx = BasisIndex::new(v, args.j, params.q())?;
            emit_value(sink, "basis", eval_basis(&idx, &x, params.q()))
        }
        EvalCmd::Sigma { x } => {
            let x = parse_vertex(&x, params.q())?;
            emit_value(sink, "sigma", vertex_measure(params, &x))
        }
        EvalCmd::Rho { x, y } => {
            let x = parse_vertex(&x, params.q())?;
            let y = parse_vertex(&y, params.q())?;
            emit_value(sink, "rho", x.gromov_distance(&y))
        }
        EvalCmd::Project { f, at } => {
            let func = load_function(&f, params.q())?;
            let kernel = BergmanKernel::new(coefficients(params));
            let mut table = vec![vec!["vertex".to_string(), "value".to_string()]];
            for s in at.split(',') {
                let z = parse_vertex(s.trim(), params.q())?;
                let val = project_eval(&kernel, &func, &z, params);
                table.push(vec![format!("{z}"), format!("{val}")]);
            }
            emit(sink, &table)
        }
    }
}

fn emit_value(sink: &Sink, op: &str, value: f64) -> Result<()> {
    if sink.json {
        let obj = serde_json::json!({ "op": op, "value": value });
        crate::output::write_text(sink, &format!("{obj}\n"))
    } else {
        crate::output::write_text(sink, &format!("{value}\n"))
    }
}
