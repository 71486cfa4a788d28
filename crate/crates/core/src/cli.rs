//! The `bikripke` command line.
//!
//! Exit codes: 0 and 1 carry verdicts, 2 is a usage error, 3 an input or
//! validation error and 4 a failing suite.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::biasim::{refine, separating_formula_with, Side};
use crate::fol::{emit, FOProblem, Format};
use crate::formula::{parse, Formula, Signature};
use crate::kripke::{normalize, KripkeModel, ModelFile, Mode, PointedModel};
use crate::random::random_model;
use crate::semantics::{satisfies_at, theory};
use crate::suites::run_suite;
use crate::unravel::{bracket, unravel_with, DEFAULT_NODE_CAP};

#[derive(Parser, Debug)]
#[command(name = "bikripke", version, about = "Bi-intuitionistic logic over finite Kripke models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a formula at a world.
    Check {
        model: PathBuf,
        #[arg(short, long)]
        world: Option<String>,
        #[arg(short, long)]
        formula: String,
    },
    /// Greatest bi-asimulation between two models.
    Bisim {
        from: PathBuf,
        to: PathBuf,
        #[arg(long)]
        from_world: Option<String>,
        #[arg(long)]
        to_world: Option<String>,
        /// Print a separating formula instead of the relation.
        #[arg(long)]
        separate: bool,
        #[arg(long)]
        minimize: bool,
    },
    /// A formula true at the first point and false at the second.
    Separate {
        from: PathBuf,
        to: PathBuf,
        #[arg(long)]
        from_world: Option<String>,
        #[arg(long)]
        to_world: Option<String>,
        #[arg(long)]
        minimize: bool,
    },
    /// Bounded bi-unravelling around a world.
    Unravel {
        model: PathBuf,
        #[arg(short, long)]
        world: Option<String>,
        #[arg(long)]
        maxlen: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        cap: usize,
    },
    /// Expand a model with its bracket letters.
    Bracket { model: PathBuf },
    /// First-order problem for a formula: validity, or truth at a world of a model.
    Translate {
        #[arg(short, long)]
        formula: String,
        #[arg(long, default_value = "tptp")]
        format: Format,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(short, long)]
        world: Option<String>,
    },
    /// Representatives of the bounded theory of a point.
    Theory {
        model: PathBuf,
        #[arg(short, long)]
        world: Option<String>,
        #[arg(long)]
        rank: usize,
    },
    /// A seeded random model.
    Random {
        #[arg(long, default_value_t = 3)]
        worlds: usize,
        #[arg(long, default_value = "p,q", value_delimiter = ',')]
        letters: Vec<String>,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a property suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure(i32, String);

fn input(e: impl std::fmt::Display) -> Failure {
    Failure(3, e.to_string())
}

fn load(path: &Path) -> Result<(Arc<KripkeModel>, Option<String>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let file = ModelFile::from_json(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let model = normalize(&file, Mode::Strict).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok((Arc::new(model), file.point))
}

fn point(path: &Path, world: Option<String>) -> Result<PointedModel, Failure> {
    let (m, default) = load(path)?;
    let w = world.or(default).ok_or_else(|| input(format!("{}: no world given and the file has no point", path.display())))?;
    PointedModel::new(m, &w).map_err(input)
}

fn formula(text: &str) -> Result<Formula, Failure> {
    parse(text).map_err(|e| input(format!("formula: {e}")))
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut say = |s: &str| writeln!(out, "{s}").map_err(input);
    match command {
        Command::Check { model, world, formula: f } => {
            let pm = point(&model, world)?;
            let holds = satisfies_at(&pm.model, pm.point(), &formula(&f)?).map_err(input)?;
            say(&holds.to_string())?;
            Ok(if holds { 0 } else { 1 })
        }
        Command::Bisim { from, to, from_world, to_world, separate, minimize } => {
            if separate {
                return separate_cmd(&from, &to, from_world, to_world, minimize, &mut say);
            }
            let (m1, p1) = load(&from)?;
            let (m2, p2) = load(&to)?;
            let fp = refine(&m1, &m2).map_err(input)?;
            say(&fp.relation.to_json())?;
            match (from_world.or(p1), to_world.or(p2)) {
                (Some(a), Some(b)) => {
                    let present = fp.relation.contains_ids(Side::OneToTwo, &a, &b);
                    Ok(if present { 0 } else { 1 })
                }
                _ => Ok(0),
            }
        }
        Command::Separate { from, to, from_world, to_world, minimize } => {
            separate_cmd(&from, &to, from_world, to_world, minimize, &mut say)
        }
        Command::Unravel { model, world, maxlen, cap } => {
            let pm = point(&model, world)?;
            let w = pm.point_id().to_string();
            let u = unravel_with(&pm.model, &w, maxlen, cap).map_err(input)?;
            say(&u.model().to_file(Some(&w)).to_json())?;
            Ok(0)
        }
        Command::Bracket { model } => {
            let (m, p) = load(&model)?;
            let bm = bracket(&m).map_err(input)?;
            say(&bm.to_file(p.as_deref()).to_json())?;
            Ok(0)
        }
        Command::Translate { formula: f, format, model, world } => {
            let f = formula(&f)?;
            let problem = match model {
                None => FOProblem::validity(&f),
                Some(path) => {
                    let pm = point(&path, world)?;
                    FOProblem::grounded(&pm.model, pm.point_id(), &f).map_err(input)?
                }
            };
            write!(out, "{}", emit(&problem, format)).map_err(input)?;
            Ok(0)
        }
        Command::Theory { model, world, rank } => {
            let pm = point(&model, world)?;
            let sig: Signature = pm.model.signature().clone();
            // Classes are told apart by truth anywhere in the model, not just at the point.
            let context: Vec<PointedModel> = (0..pm.model.len()).map(|i| PointedModel::at_index(pm.model.clone(), i)).collect();
            let th = theory(&pm, &sig, rank, &context).map_err(input)?;
            for f in &th.positive {
                say(&format!("+ {f}"))?;
            }
            for f in &th.negative {
                say(&format!("- {f}"))?;
            }
            Ok(0)
        }
        Command::Random { worlds, letters, density, seed } => {
            if worlds == 0 || !(0.0..=1.0).contains(&density) {
                return Err(input("need at least one world and a density in [0, 1]"));
            }
            let sig = Signature::from_names(letters.iter().filter(|l| !l.is_empty())).map_err(input)?;
            say(&random_model(worlds, &sig, density, seed).to_file(None).to_json())?;
            Ok(0)
        }
        Command::Verify { suite, seed } => {
            let report = run_suite(&suite, seed).ok_or_else(|| Failure(2, format!("unknown suite {suite:?}")))?;
            say(&report.to_string())?;
            Ok(if report.is_ok() { 0 } else { 4 })
        }
    }
}

fn separate_cmd(
    from: &Path,
    to: &Path,
    from_world: Option<String>,
    to_world: Option<String>,
    minimize: bool,
    say: &mut dyn FnMut(&str) -> Result<(), Failure>,
) -> Result<i32, Failure> {
    let (a, b) = (point(from, from_world)?, point(to, to_world)?);
    match separating_formula_with(&a, &b, minimize).map_err(input)? {
        Some(f) => {
            say(&f.to_string())?;
            Ok(1)
        }
        None => {
            say("related: a bi-asimulation links the points")?;
            Ok(0)
        }
    }
}
