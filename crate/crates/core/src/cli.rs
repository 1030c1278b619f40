//! Command-line front end: JSON problem files in, tables or JSON out.
//!
//! Exit codes: 0 on success, 1 for input or validation errors, 2 when a
//! numerical step fails (for example an LP that is infeasible because the
//! supplied moments are inconsistent).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounding::{
    atleast_r_bounds, boolean_lp_bounds, exactly_r_bounds, hunter_worsley_from_boxes, q_atleast_bounds,
    q_exactly_bounds, union_bounds, BooleanSystem, BooleanTarget, BoundPair, DEFAULT_Q_ORDER,
};
use crate::error::{Error, Result};
use crate::geometry::{format_vertices, EmptinessMode, EventBox};
use crate::measure::{Marginal, ProductMeasure};
use crate::oracle::{exact_count_distribution, full_inclusion_exclusion_union, monte_carlo_union};
use crate::screening::{binomial_moments, build_graph, screened_union, screening_table, MomentVector};

/// Version stamped into every JSON document this tool writes.
pub const FORMAT_VERSION: u32 = 1;

// ---------------------------------------------------------------- input ----

/// A geometry problem: boxes plus the product measure they live under.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub version: Option<u32>,
    pub dimension: usize,
    pub measure: MeasureSpec,
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Uniform on the box `[lower, upper]`.
    Uniform { lower: Vec<f64>, upper: Vec<f64> },
    /// Independent marginals, one per coordinate.
    Marginals { marginals: Vec<MarginalSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarginalSpec {
    Uniform { a: f64, b: f64 },
    Piecewise { knots: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub id: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Validated geometry problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub boxes: Vec<EventBox>,
    pub measure: ProductMeasure,
    pub mode: Option<EmptinessMode>,
}

impl ProblemFile {
    pub fn into_problem(self) -> Result<Problem> {
        if self.dimension == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        let measure = match self.measure {
            MeasureSpec::Uniform { lower, upper } => ProductMeasure::uniform(&lower, &upper)?,
            MeasureSpec::Marginals { marginals } => ProductMeasure::new(
                marginals
                    .into_iter()
                    .map(|m| match m {
                        MarginalSpec::Uniform { a, b } => Marginal::uniform(a, b),
                        MarginalSpec::Piecewise { knots, values } => Marginal::piecewise(knots, values),
                    })
                    .collect::<Result<_>>()?,
            )?,
        };
        if measure.dim() != self.dimension {
            return Err(Error::input(format!(
                "measure has dimension {} but the file declares {}",
                measure.dim(),
                self.dimension
            )));
        }
        let mut seen = std::collections::HashSet::new();
        let mut boxes = Vec::with_capacity(self.boxes.len());
        for b in self.boxes {
            if !seen.insert(b.id.clone()) {
                return Err(Error::input(format!("duplicate box id {}", b.id)));
            }
            let eb = EventBox::new(b.id, b.lower, b.upper)?;
            if eb.dim() != self.dimension {
                return Err(Error::input(format!(
                    "box {} has dimension {} but the file declares {}",
                    eb.id(),
                    eb.dim(),
                    self.dimension
                )));
            }
            boxes.push(eb);
        }
        Ok(Problem { boxes, measure, mode: self.mode.map(Into::into) })
    }
}

/// Moment input for `bounds`; the JSON written by `moments` parses as this.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MomentsDocument {
    pub version: u32,
    pub kind: String,
    pub n_events: usize,
    pub m: usize,
    /// `S_1..S_m`.
    pub s: Vec<f64>,
    pub q: Option<f64>,
}

impl MomentsDocument {
    fn from_vector(v: &MomentVector) -> Self {
        MomentsDocument {
            version: FORMAT_VERSION,
            kind: "moments".into(),
            n_events: v.n_events(),
            m: v.m(),
            s: v.moments().to_vec(),
            q: v.q(),
        }
    }

    fn into_vector(self) -> Result<MomentVector> {
        if self.m != self.s.len() {
            return Err(Error::input(format!("m = {} but {} moments listed", self.m, self.s.len())));
        }
        MomentVector::new(self.n_events, self.s, self.q)
    }
}

enum Input {
    Geometry(Problem),
    Moments(MomentVector),
}

fn read_source(path: &PathBuf) -> Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::input(format!("reading stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("reading {}: {e}", path.display())))?;
    }
    Ok(text)
}

fn parse_input(text: &str) -> Result<Input> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::input(format!("invalid JSON: {e}")))?;
    let is_moments = value.get("boxes").is_none() && value.get("s").is_some();
    if is_moments {
        let doc: MomentsDocument =
            serde_json::from_value(value).map_err(|e| Error::input(format!("invalid moments document: {e}")))?;
        Ok(Input::Moments(doc.into_vector()?))
    } else {
        let file: ProblemFile =
            serde_json::from_value(value).map_err(|e| Error::input(format!("invalid problem file: {e}")))?;
        Ok(Input::Geometry(file.into_problem()?))
    }
}

pub fn load_problem(text: &str) -> Result<Problem> {
    match parse_input(text)? {
        Input::Geometry(p) => Ok(p),
        Input::Moments(_) => Err(Error::input("this command needs a geometry file, not bare moments")),
    }
}

// ------------------------------------------------------------ arguments ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Closed,
    PositiveMeasure,
}

impl From<ModeArg> for EmptinessMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Closed => EmptinessMode::Closed,
            ModeArg::PositiveMeasure => EmptinessMode::PositiveMeasure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Union,
    Atleast,
    Exactly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Moment,
    Boolean,
    HunterWorsley,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Ie,
    Cells,
    Mc,
}

#[derive(Debug, Parser)]
#[command(name = "boxbound", version, about = "Probabilities and LP bounds for unions of boxes")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "BOXBOUND_FORMAT", default_value = "table")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    /// Problem file (JSON); `-` reads stdin.
    input: PathBuf,
    /// Emptiness test; defaults to the file's setting, else positive-measure.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise and higher-order emptiness tables.
    Screen(GeometryArgs),
    /// Exact union probability by pruned inclusion-exclusion.
    Union(GeometryArgs),
    /// Binomial moments S_1..S_m and the union probability Q.
    Moments {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Highest moment order (default min(3, N)).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Lower and upper bounds from linear programs.
    Bounds {
        /// Problem file or moments document (JSON); `-` reads stdin.
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum, default_value = "union")]
        target: Target,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Moment order (default min(3, N), capped by the moments supplied).
        #[arg(long)]
        m: Option<usize>,
        /// Add the exact union probability as a constraint.
        #[arg(long)]
        with_q: bool,
        /// Drop p_0 and the S_0 row (union target, moment method only).
        #[arg(long)]
        reduced: bool,
        #[arg(long, value_enum, default_value = "moment")]
        method: Method,
    },
    /// Ground truth from an independent engine.
    Oracle {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_enum, default_value = "cells")]
        engine: Engine,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Intersection graph in DOT format.
    Graph(GeometryArgs),
}

// --------------------------------------------------------------- output ----

#[derive(Serialize)]
struct ScreenRowOut {
    tuple: String,
    events: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nonempty: bool,
}

#[derive(Serialize)]
struct ScreenOrderOut {
    order: usize,
    rows: Vec<ScreenRowOut>,
}

#[derive(Serialize)]
struct ScreenOut {
    version: u32,
    kind: &'static str,
    mode: &'static str,
    orders: Vec<ScreenOrderOut>,
    clique_number: usize,
    terms_used: usize,
    terms_full: u64,
}

#[derive(Serialize)]
struct UnionOut {
    version: u32,
    kind: &'static str,
    mode: &'static str,
    q: f64,
    terms_used: usize,
    terms_full: u64,
}

#[derive(Serialize)]
struct BoundOut {
    method: String,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct BoundsOut {
    version: u32,
    kind: &'static str,
    target: &'static str,
    r: usize,
    m: usize,
    with_q: bool,
    bound: BoundOut,
}

#[derive(Serialize)]
struct OracleOut {
    version: u32,
    kind: &'static str,
    engine: &'static str,
    union: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    standard_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct GraphOut {
    version: u32,
    kind: &'static str,
    vertices: Vec<String>,
    edges: Vec<[String; 2]>,
    clique_number: usize,
    dot: String,
}

fn mode_name(mode: EmptinessMode) -> &'static str {
    match mode {
        EmptinessMode::Closed => "closed",
        EmptinessMode::PositiveMeasure => "positive-measure",
    }
}

/// Probability for tables: at most 12 decimals, trailing zeros trimmed.
fn fmt_prob(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn order_heading(k: usize) -> String {
    match k {
        2 => "Pairs".into(),
        3 => "Triples".into(),
        k => format!("{k}-tuples"),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

// ------------------------------------------------------------- commands ----

fn resolve_mode(cli: Option<ModeArg>, problem: &Problem) -> EmptinessMode {
    cli.map(Into::into).or(problem.mode).unwrap_or(if problem.measure.is_continuous() {
        EmptinessMode::PositiveMeasure
    } else {
        EmptinessMode::Closed
    })
}

fn geometry(args: &GeometryArgs) -> Result<(Problem, EmptinessMode)> {
    let problem = load_problem(&read_source(&args.input)?)?;
    let mode = resolve_mode(args.mode, &problem);
    Ok((problem, mode))
}

fn cmd_screen(args: &GeometryArgs, format: Format) -> Result<String> {
    let (p, mode) = geometry(args)?;
    let table = screening_table(&p.boxes, mode)?;
    let union = screened_union(&p.boxes, &p.measure, mode)?;
    let clique_number = union.ledger.max_order();
    let ids = |idx: &[usize]| idx.iter().map(|&i| p.boxes[i].id().to_string()).collect::<Vec<_>>();
    match format {
        Format::Json => Ok(to_json(&ScreenOut {
            version: FORMAT_VERSION,
            kind: "screen",
            mode: mode_name(mode),
            orders: table
                .iter()
                .enumerate()
                .map(|(i, rows)| ScreenOrderOut {
                    order: i + 2,
                    rows: rows
                        .iter()
                        .map(|r| ScreenRowOut {
                            tuple: r.label.clone(),
                            events: ids(&r.indices),
                            lower: r.lower.clone(),
                            upper: r.upper.clone(),
                            nonempty: r.nonempty,
                        })
                        .collect(),
                })
                .collect(),
            clique_number,
            terms_used: union.terms_used,
            terms_full: union.terms_full,
        })),
        Format::Table => {
            let mut out = String::new();
            for (i, rows) in table.iter().enumerate() {
                if rows.is_empty() {
                    continue;
                }
                let cells: Vec<String> =
                    rows.iter().map(|r| format!("{} = {}", r.label, format_vertices(&r.lower, &r.upper))).collect();
                let width = cells.iter().map(String::len).max().unwrap_or(0).max(10);
                let _ = writeln!(out, "{:<width$}  Nonempty?", order_heading(i + 2));
                for (cell, r) in cells.iter().zip(rows) {
                    let _ = writeln!(out, "{cell:<width$}  {}", if r.nonempty { "yes" } else { "no good" });
                }
                out.push('\n');
            }
            let _ = writeln!(out, "mode: {}", mode_name(mode));
            let _ = writeln!(out, "clique number: {clique_number}");
            let _ = writeln!(out, "{} of {} terms retained", union.terms_used, union.terms_full);
            Ok(out)
        }
    }
}

fn cmd_union(args: &GeometryArgs, format: Format) -> Result<String> {
    let (p, mode) = geometry(args)?;
    let u = screened_union(&p.boxes, &p.measure, mode)?;
    Ok(match format {
        Format::Json => to_json(&UnionOut {
            version: FORMAT_VERSION,
            kind: "union",
            mode: mode_name(mode),
            q: u.q,
            terms_used: u.terms_used,
            terms_full: u.terms_full,
        }),
        Format::Table => format!(
            "Q = {}\n{} of {} terms retained\n",
            fmt_prob(u.q),
            u.terms_used,
            u.terms_full
        ),
    })
}

fn cmd_moments(args: &GeometryArgs, m: Option<usize>, format: Format) -> Result<String> {
    let (p, mode) = geometry(args)?;
    let m = m.unwrap_or(DEFAULT_Q_ORDER.min(p.boxes.len()));
    let v = binomial_moments(&p.boxes, &p.measure, mode, m)?;
    Ok(match format {
        Format::Json => to_json(&MomentsDocument::from_vector(&v)),
        Format::Table => {
            let mut out = String::new();
            for (k, s) in v.moments().iter().enumerate() {
                let _ = writeln!(out, "S_{} = {}", k + 1, fmt_prob(*s));
            }
            let _ = writeln!(out, "Q = {}", fmt_prob(v.q().unwrap_or(f64::NAN)));
            out
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    input: &PathBuf,
    mode: Option<ModeArg>,
    target: Target,
    r: usize,
    m: Option<usize>,
    with_q: bool,
    reduced: bool,
    method: Method,
    format: Format,
) -> Result<String> {
    let parsed = parse_input(&read_source(input)?)?;
    let (moments_m, n_events) = match &parsed {
        Input::Geometry(p) => (usize::MAX, p.boxes.len()),
        Input::Moments(v) => (v.m(), v.n_events()),
    };
    let m = m.unwrap_or(DEFAULT_Q_ORDER.min(n_events).min(moments_m));
    let r = if target == Target::Union { 1 } else { r };
    if reduced && (method != Method::Moment || target != Target::Union || with_q) {
        return Err(Error::input("--reduced applies to the moment method with --target union and no --with-q"));
    }

    let bound = match method {
        Method::Moment => {
            let v = match &parsed {
                Input::Geometry(p) => binomial_moments(&p.boxes, &p.measure, resolve_mode(mode, p), m)?,
                Input::Moments(v) => v.clone(),
            };
            match (target, with_q) {
                (Target::Union, false) => union_bounds(&v, m, !reduced)?,
                (Target::Union, true) => q_atleast_bounds(&v, m, 1)?,
                (Target::Atleast, false) => atleast_r_bounds(&v, m, r)?,
                (Target::Atleast, true) => q_atleast_bounds(&v, m, r)?,
                (Target::Exactly, false) => exactly_r_bounds(&v, m, r)?,
                (Target::Exactly, true) => q_exactly_bounds(&v, m, r)?,
            }
        }
        Method::Boolean => {
            let Input::Geometry(p) = &parsed else {
                return Err(Error::input("the Boolean method needs a geometry file"));
            };
            if with_q {
                return Err(Error::input("--with-q applies to the moment method only"));
            }
            let system = BooleanSystem::from_boxes(&p.boxes, &p.measure, resolve_mode(mode, p), m)?;
            let t = match target {
                Target::Union => BooleanTarget::Union,
                Target::Atleast => BooleanTarget::AtLeast(r),
                Target::Exactly => BooleanTarget::Exactly(r),
            };
            boolean_lp_bounds(&system, t)?
        }
        Method::HunterWorsley => {
            let Input::Geometry(p) = &parsed else {
                return Err(Error::input("the Hunter-Worsley method needs a geometry file"));
            };
            if target != Target::Union || with_q {
                return Err(Error::input("Hunter-Worsley bounds the union only"));
            }
            let mode = resolve_mode(mode, p);
            let upper = hunter_worsley_from_boxes(&p.boxes, &p.measure, mode)?;
            // the largest single event is the matching trivial lower bound
            let mut lower: f64 = 0.0;
            for b in &p.boxes {
                lower = lower.max(p.measure.box_probability(b)?);
            }
            BoundPair { lower, upper, method: "hunter-worsley".into() }
        }
    };

    let target_name = match target {
        Target::Union => "union",
        Target::Atleast => "atleast",
        Target::Exactly => "exactly",
    };
    Ok(match format {
        Format::Json => to_json(&BoundsOut {
            version: FORMAT_VERSION,
            kind: "bounds",
            target: target_name,
            r,
            m,
            with_q,
            bound: BoundOut { method: bound.method, lower: bound.lower, upper: bound.upper },
        }),
        Format::Table => format!(
            "method: {}\ntarget: {target_name} (r = {r}, m = {m})\nlower = {}\nupper = {}\n",
            bound.method,
            fmt_prob(bound.lower),
            fmt_prob(bound.upper)
        ),
    })
}

fn cmd_oracle(args: &GeometryArgs, engine: Engine, samples: u64, seed: u64, format: Format) -> Result<String> {
    let (p, _) = geometry(args)?;
    let out = match engine {
        Engine::Ie => OracleOut {
            version: FORMAT_VERSION,
            kind: "oracle",
            engine: "ie",
            union: full_inclusion_exclusion_union(&p.boxes, &p.measure)?,
            distribution: None,
            standard_error: None,
            samples: None,
            seed: None,
        },
        Engine::Cells => {
            let d = exact_count_distribution(&p.boxes, &p.measure)?;
            OracleOut {
                version: FORMAT_VERSION,
                kind: "oracle",
                engine: "cells",
                union: d.union(),
                distribution: Some(d.p),
                standard_error: None,
                samples: None,
                seed: None,
            }
        }
        Engine::Mc => {
            let e = monte_carlo_union(&p.boxes, &p.measure, samples, seed)?;
            OracleOut {
                version: FORMAT_VERSION,
                kind: "oracle",
                engine: "mc",
                union: e.estimate,
                distribution: None,
                standard_error: Some(e.standard_error),
                samples: Some(samples),
                seed: Some(seed),
            }
        }
    };
    Ok(match format {
        Format::Json => to_json(&out),
        Format::Table => {
            let mut s = format!("engine: {}\nunion = {}\n", out.engine, fmt_prob(out.union));
            if let Some(d) = &out.distribution {
                for (i, x) in d.iter().enumerate() {
                    let _ = writeln!(s, "P(xi = {i}) = {}", fmt_prob(*x));
                }
            }
            if let Some(se) = out.standard_error {
                let _ = writeln!(s, "standard error = {}", fmt_prob(se));
                let _ = writeln!(s, "samples = {samples}, seed = {seed}");
            }
            s
        }
    })
}

fn cmd_graph(args: &GeometryArgs, format: Format) -> Result<String> {
    let (p, mode) = geometry(args)?;
    let g = build_graph(&p.boxes, mode)?;
    Ok(match format {
        Format::Table => g.to_dot(),
        Format::Json => to_json(&GraphOut {
            version: FORMAT_VERSION,
            kind: "graph",
            vertices: g.labels().to_vec(),
            edges: g
                .edges()
                .into_iter()
                .map(|(i, j)| [g.labels()[i].clone(), g.labels()[j].clone()])
                .collect(),
            clique_number: g.clique_number(),
            dot: g.to_dot(),
        }),
    })
}

fn dispatch(cli: &Cli) -> Result<String> {
    let f = cli.format;
    match &cli.command {
        Command::Screen(a) => cmd_screen(a, f),
        Command::Union(a) => cmd_union(a, f),
        Command::Moments { geometry, m } => cmd_moments(geometry, *m, f),
        Command::Bounds { input, mode, target, r, m, with_q, reduced, method } => {
            cmd_bounds(input, *mode, *target, *r, *m, *with_q, *reduced, *method, f)
        }
        Command::Oracle { geometry, engine, samples, seed } => cmd_oracle(geometry, *engine, *samples, *seed, f),
        Command::Graph(a) => cmd_graph(a, f),
    }
}

/// Runs the tool on `argv` (program name first), writing results to `out`
/// and diagnostics to `err`. Returns the process exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if informational {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            return 1;
        }
    };
    match dispatch(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_input_error() {
                1
            } else {
                2
            }
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
