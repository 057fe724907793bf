//! Command-line arguments and the commands they run.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use psihat::cyclic_algebra::{GroupElement, RootData};
use psihat::state_sum::{canonical_rep, equal_mod_qtilde, qtilde_order, state_sum_with, Schedule};
use psihat::triangulation::{
    bubble_minus, bubble_plus, find_charge, gauge_transform, make_admissible, pachner_2_3, pachner_3_2, GGauge,
    HTriangulation, Slot,
};
use psihat::verify::{format_row, run_suite, Config, Level};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::document::{ResultDoc, TriangulationDoc};
use crate::{CliError, EXIT_FAILURE};

#[derive(Debug, Parser)]
#[command(name = "psihat", version, about = "Charged 6j-symbols and state sums at odd roots of unity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a residual suite and report the worst value per identity.
    Verify(VerifyArgs),
    /// Compute the state sum of a triangulation document.
    Invariant(InvariantArgs),
    /// Apply an H-Pachner or H-bubble move.
    Move(MoveArgs),
    /// Solve for a charge and write it into the document.
    FindCharge(FindChargeArgs),
    /// Apply a gauge transformation to the coloring.
    Gauge(GaugeArgs),
    /// Print the representative of a value modulo powers of q~.
    Canonical(CanonicalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RootArgs {
    /// Order N of the root of unity (odd, at least 3).
    #[arg(long = "N", short = 'n', default_value_t = 3)]
    pub n: usize,
    /// The root is exp(2 pi i k / N).
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

impl RootArgs {
    fn root(&self) -> Result<RootData, CliError> {
        Ok(RootData::new(self.n, self.k)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Algebra,
    Operators,
    Sixj,
    Moves,
}

impl LevelArg {
    fn level(self) -> Level {
        match self {
            LevelArg::Algebra => Level::Algebra,
            LevelArg::Operators => Level::Operators,
            LevelArg::Sixj => Level::Sixj,
            LevelArg::Moves => Level::Moves,
        }
    }

    fn default_trials(self) -> usize {
        match self {
            LevelArg::Algebra | LevelArg::Operators => 200,
            LevelArg::Sixj => 20,
            LevelArg::Moves => 3,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub level: LevelArg,
    #[command(flatten)]
    pub root: RootArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random draws; the default depends on the level.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Tolerance of the identities checked exactly, such as the q-lemma.
    #[arg(long = "tol-strict", default_value_t = 1e-10)]
    pub tol_strict: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ScheduleArg {
    #[default]
    Greedy,
    TetOrder,
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub root: RootArgs,
    /// Gauge the coloring until every edge value lies well inside I.
    #[arg(long)]
    pub make_admissible: bool,
    /// Solve for a charge when the document has none.
    #[arg(long)]
    pub find_charge: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result document to compare against; written when it does not exist.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Relative tolerance of the baseline comparison.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub schedule: ScheduleArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MoveKind {
    #[value(name = "pachner+")]
    PachnerPlus,
    #[value(name = "pachner-")]
    PachnerMinus,
    #[value(name = "bubble+")]
    BubblePlus,
    #[value(name = "bubble-")]
    BubbleMinus,
}

#[derive(Debug, Args)]
pub struct MoveArgs {
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub kind: MoveKind,
    /// `tet,face` for pachner+ and bubble+, `tet,edge` for pachner-, `tet,corner` for bubble-.
    #[arg(long)]
    pub target: String,
    /// `tet,edge` choosing the link edge of the face for bubble+.
    #[arg(long)]
    pub link_edge: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FindChargeArgs {
    pub file: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaugeArgs {
    pub file: PathBuf,
    /// `tet,corner` of the vertex of a point gauge.
    #[arg(long, requires = "g")]
    pub vertex: Option<String>,
    /// `x,y` value of the point gauge.
    #[arg(long)]
    pub g: Option<String>,
    /// Apply a random gauge at every vertex.
    #[arg(long, conflicts_with = "vertex")]
    pub random: bool,
    /// Then gauge until every edge value lies well inside I.
    #[arg(long)]
    pub make_admissible: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CanonicalArgs {
    /// `re,im` of the value.
    #[arg(long, required_unless_present = "result", allow_hyphen_values = true)]
    pub value: Option<String>,
    /// A result document to read the value from.
    #[arg(long, conflicts_with = "value")]
    pub result: Option<PathBuf>,
    #[command(flatten)]
    pub root: RootArgs,
}

/// Text for standard output and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Verify(a) => verify(&a),
        Command::Invariant(a) => invariant(&a),
        Command::Move(a) => apply_move(&a),
        Command::FindCharge(a) => cmd_find_charge(&a),
        Command::Gauge(a) => gauge(&a),
        Command::Canonical(a) => canonical(&a),
    }
}

fn parse_pair<T: FromStr>(s: &str, what: &str) -> Result<(T, T), CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let err = || CliError::input(format!("{what}: expected two comma-separated values, got {s:?}"));
    match parts.as_slice() {
        [a, b] => Ok((a.parse().map_err(|_| err())?, b.parse().map_err(|_| err())?)),
        _ => Err(err()),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub fn load_file(path: &Path) -> Result<HTriangulation, CliError> {
    TriangulationDoc::parse(&read(path)?)?.load()
}

/// Writes the document to `output`, or returns it for standard output.
fn emit(h: &HTriangulation, output: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let text = TriangulationDoc::save(h).to_json();
    match output {
        Some(p) => {
            write(p, &(text + "\n"))?;
            Ok(Outcome::ok(format!("wrote {}\n", p.display())))
        }
        None => Ok(Outcome::ok(text + "\n")),
    }
}

fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let cfg = Config {
        n: a.root.n,
        seed: a.seed,
        trials: a.trials.unwrap_or(a.level.default_trials()),
        tol: a.tol,
        tol_strict: a.tol_strict,
    };
    a.root.root()?;
    let rows = run_suite(a.level.level(), &cfg)?;
    let mut out = format!("verify {} N={} seed={} trials={}\n", a.level.level().name(), cfg.n, cfg.seed, cfg.trials);
    for r in &rows {
        out.push_str(&format_row(r));
        out.push('\n');
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        out.push_str("all identities hold\n");
        Ok(Outcome::ok(out))
    } else {
        out.push_str(&format!("failing: {}\n", failed.join("; ")));
        Ok(Outcome { stdout: out, code: EXIT_FAILURE })
    }
}

fn prepare(h: &mut HTriangulation, find: bool, admissible: bool, seed: u64) -> Result<(), CliError> {
    if h.charge.is_none() && find {
        h.charge = Some(find_charge(&h.complex, &h.link)?);
    }
    if admissible {
        let phi = h.coloring.as_ref().ok_or_else(|| CliError::input("the document has no coloring"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        h.coloring = Some(make_admissible(&h.complex, phi, &mut rng)?);
    }
    Ok(())
}

fn invariant(a: &InvariantArgs) -> Result<Outcome, CliError> {
    let rd = a.root.root()?;
    let mut h = load_file(&a.file)?;
    prepare(&mut h, a.find_charge, a.make_admissible, a.seed)?;
    if h.charge.is_none() {
        return Err(CliError::input("the document has no charge; pass --find-charge"));
    }
    let schedule = match a.schedule {
        ScheduleArg::Greedy => Schedule::Greedy,
        ScheduleArg::TetOrder => Schedule::TetOrder,
    };
    let value = state_sum_with(&rd, &h, schedule)?;
    let doc = ResultDoc::new(&value, &rd)?;
    let mut out = doc.to_json() + "\n";
    let mut code = 0;
    if let Some(path) = &a.baseline {
        if path.exists() {
            let base = ResultDoc::parse(&read(path)?)?;
            if base.n != doc.n {
                return Err(CliError::input(format!("baseline was computed at N = {}", base.n)));
            }
            let (equal, k) = equal_mod_qtilde(base.value(), doc.value(), &rd, a.tol);
            if equal {
                out.push_str(&format!("equal mod qtilde, k={k}\n"));
            } else {
                out.push_str(&format!("differs from the baseline {}\n", path.display()));
                code = EXIT_FAILURE;
            }
        } else {
            write(path, &(doc.to_json() + "\n"))?;
            out.push_str(&format!("baseline written to {}\n", path.display()));
        }
    }
    Ok(Outcome { stdout: out, code })
}

fn apply_move(a: &MoveArgs) -> Result<Outcome, CliError> {
    let h = load_file(&a.file)?;
    let (t, x): (usize, usize) = parse_pair(&a.target, "--target")?;
    let cx = &h.complex;
    let check = |limit: usize| {
        if t >= cx.n_tets() || x >= limit {
            Err(CliError::input(format!("target [{t}, {x}] does not exist")))
        } else {
            Ok(())
        }
    };
    let moved = match a.kind {
        MoveKind::PachnerPlus => {
            check(4)?;
            pachner_2_3(&h, Slot::new(t, x))?
        }
        MoveKind::PachnerMinus => {
            check(6)?;
            pachner_3_2(&h, cx.edge(t, x))?
        }
        MoveKind::BubblePlus => {
            check(4)?;
            let link_edge = match &a.link_edge {
                None => None,
                Some(s) => {
                    let (lt, le): (usize, usize) = parse_pair(s, "--link-edge")?;
                    if lt >= cx.n_tets() || le >= 6 {
                        return Err(CliError::input(format!("link edge [{lt}, {le}] does not exist")));
                    }
                    Some(cx.edge(lt, le))
                }
            };
            bubble_plus(&h, Slot::new(t, x), link_edge)?
        }
        MoveKind::BubbleMinus => {
            check(4)?;
            bubble_minus(&h, cx.vertex(t, x))?
        }
    };
    emit(&moved, &a.output)
}

fn cmd_find_charge(a: &FindChargeArgs) -> Result<Outcome, CliError> {
    let mut h = load_file(&a.file)?;
    h.charge = Some(find_charge(&h.complex, &h.link)?);
    emit(&h, &a.output)
}

fn gauge(a: &GaugeArgs) -> Result<Outcome, CliError> {
    let mut h = load_file(&a.file)?;
    let cx = &h.complex;
    let phi = h.coloring.clone().ok_or_else(|| CliError::input("the document has no coloring"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let delta = if let Some(v) = &a.vertex {
        let (t, c): (usize, usize) = parse_pair(v, "--vertex")?;
        if t >= cx.n_tets() || c >= 4 {
            return Err(CliError::input(format!("vertex [{t}, {c}] does not exist")));
        }
        let (x, y): (f64, f64) = parse_pair(a.g.as_deref().unwrap_or_default(), "--g")?;
        let g = GroupElement::new(x, y)?;
        Some(GGauge::point(cx.n_vertices(), cx.vertex(t, c), g))
    } else if a.random {
        Some(GGauge::random(cx.n_vertices(), &mut rng))
    } else {
        None
    };
    let mut phi = match delta {
        Some(d) => gauge_transform(cx, &phi, &d),
        None => phi,
    };
    if a.make_admissible {
        phi = make_admissible(cx, &phi, &mut rng)?;
    }
    h.coloring = Some(phi);
    h.validate()?;
    emit(&h, &a.output)
}

#[derive(Serialize)]
struct CanonicalDoc {
    modulus: f64,
    reduced_arg: f64,
    qtilde_order: usize,
    #[serde(rename = "N")]
    n: usize,
}

fn canonical(a: &CanonicalArgs) -> Result<Outcome, CliError> {
    let rd = a.root.root()?;
    let z = match (&a.value, &a.result) {
        (Some(v), _) => {
            let (re, im): (f64, f64) = parse_pair(v, "--value")?;
            Complex64::new(re, im)
        }
        (None, Some(p)) => ResultDoc::parse(&read(p)?)?.value(),
        (None, None) => return Err(CliError::input("pass --value or --result")),
    };
    let (modulus, reduced_arg) = canonical_rep(z, &rd)?;
    let doc = CanonicalDoc { modulus, reduced_arg, qtilde_order: qtilde_order(&rd, 1e-9), n: rd.n() };
    Ok(Outcome::ok(serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n"))
}
