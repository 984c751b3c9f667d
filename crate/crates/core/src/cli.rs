//! Command-line front end.
//!
//! Every command produces a [`Report`]. Exit code 0 means valid or feasible,
//! 1 means a negative mathematical verdict (the report says why), and 2 means
//! malformed input or an internal failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::builder::{self, BuildError, BuildOptions};
use crate::datum::{CandidateLattice, HblDatum, SlackReport};
use crate::flow::{decompose_flow, project_weight, Imbalance};
use crate::io;
use crate::linalg::Subspace;
use crate::numeric::{self, AscentOptions, GaussianInput, GridFunction};
use crate::presentation::{self, bound_constant, summary_weight, verify_presentation, Presentation, VerificationReport};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "hblcert", version, about = "Verify and build graph certificates for Hölder-Brascamp-Lieb data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Datum file (JSON).
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Presentation file (JSON).
    #[arg(long, global = true)]
    pub presentation: Option<PathBuf>,
    /// Candidate subspace file (JSON).
    #[arg(long, global = true)]
    pub candidates: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 512)]
    pub max_lattice: usize,
    /// Floating-point tolerance for numeric verdicts.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file: the presentation for `build`, the report otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a presentation against a datum.
    Verify {
        /// Also compute the bound constant.
        #[arg(long)]
        bound: bool,
    },
    /// Scaling condition, candidate lattice, violations and critical subspaces.
    CheckData,
    /// Exponent polytope of the candidates: rows, extreme points, membership of the exponents.
    Polytope {
        /// Maximum number of row subsets examined during vertex enumeration.
        #[arg(long, default_value_t = 200_000)]
        cap: usize,
    },
    /// Build a presentation from the candidate lattice.
    Build {
        #[arg(long)]
        trace: bool,
    },
    /// Explicit constant of a valid presentation.
    Bound,
    /// Chain decomposition of every θᵢ and of σ.
    DecomposeFlow,
    /// Image of the presentation graph and θ under one map.
    Project {
        /// 1-based map index.
        #[arg(long)]
        map: usize,
    },
    /// Gaussian ratio at the identity and the ascent heuristic.
    Gaussian {
        #[arg(long, default_value_t = 2000)]
        iterations: usize,
        /// Random Gaussian inputs checked against the constant of --presentation.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Midpoint quadrature of both sides of the inequality for grid functions.
    Quadrature {
        /// One grid file per map, in map order.
        #[arg(long = "grid", num_args = 1..)]
        grids: Vec<PathBuf>,
        /// Constant to test; defaults to the bound of --presentation.
        #[arg(long)]
        constant: Option<f64>,
    },
    /// DOT diagram of a presentation.
    ExportDot,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::CheckData => "check-data",
            Command::Polytope { .. } => "polytope",
            Command::Build { .. } => "build",
            Command::Bound => "bound",
            Command::DecomposeFlow => "decompose-flow",
            Command::Project { .. } => "project",
            Command::Gaussian { .. } => "gaussian",
            Command::Quadrature { .. } => "quadrature",
            Command::ExportDot => "export-dot",
        }
    }
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub verdict: String,
    pub exit_code: i32,
    pub text: String,
    pub details: Value,
}

impl Report {
    fn new(command: &str, verdict: &str, exit_code: i32, text: String, details: Value) -> Self {
        Report {
            command: command.into(),
            verdict: verdict.into(),
            exit_code,
            text,
            details,
        }
    }

    pub fn error(command: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        Report {
            command: command.into(),
            verdict: "error".into(),
            exit_code: 2,
            text: format!("error: {message}\n"),
            details: json!({ "error": message }),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "details": self.details,
        })
    }

    /// Rendering for the requested format.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Text | Format::Dot => self.text.clone(),
        }
    }
}

struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

fn read(path: &Option<PathBuf>, flag: &str) -> Result<(String, PathBuf), Fail> {
    let p = path.as_ref().ok_or_else(|| Fail(format!("--{flag} is required")))?;
    let text = fs::read_to_string(p).map_err(|e| Fail(format!("{}: {e}", p.display())))?;
    Ok((text, p.clone()))
}

fn load_datum(cli: &Cli) -> Result<HblDatum, Fail> {
    let (text, p) = read(&cli.data, "data")?;
    io::parse_datum(&text).map_err(|e| Fail(format!("{}: {e}", p.display())))
}

fn load_presentation(cli: &Cli) -> Result<Presentation, Fail> {
    let (text, p) = read(&cli.presentation, "presentation")?;
    io::parse_presentation(&text).map_err(|e| Fail(format!("{}: {e}", p.display())))
}

fn load_candidates(cli: &Cli, datum: &HblDatum) -> Result<Option<Vec<(String, Subspace)>>, Fail> {
    if cli.candidates.is_none() {
        return Ok(None);
    }
    let (text, p) = read(&cli.candidates, "candidates")?;
    io::parse_candidates(&text, datum.dim())
        .map(Some)
        .map_err(|e| Fail(format!("{}: {e}", p.display())))
}

/// The kernel-seeded closure, with the candidate file as extra seeds.
fn lattice(cli: &Cli, datum: &HblDatum) -> Result<CandidateLattice, Fail> {
    let seeds: Vec<Subspace> = load_candidates(cli, datum)?
        .unwrap_or_default()
        .into_iter()
        .map(|c| c.1)
        .collect();
    Ok(datum.generate_lattice(&seeds, cli.max_lattice)?)
}

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn qs(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(q).collect())
}

fn slack_json(r: &SlackReport) -> Value {
    json!({
        "subspace": r.subspace.to_string(),
        "image_dims": r.image_dims,
        "slack": q(&r.slack),
        "classification": r.classification.to_string(),
    })
}

fn imbalance_json(b: &Imbalance) -> Value {
    json!({ "vertex": b.vertex, "inflow": q(&b.inflow), "outflow": q(&b.outflow) })
}

fn verification_json(r: &VerificationReport) -> Value {
    json!({
        "valid": r.valid(),
        "graph_violations": r.graph_violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "maps": r.maps.iter().map(|m| json!({
            "name": m.name,
            "mass": q(&m.mass),
            "expected_mass": q(&m.expected_mass),
            "negative_edges": m.negative_edges,
            "imbalances": m.imbalances.iter().map(imbalance_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "summary": {
            "sigma": qs(&r.summary),
            "mass": q(&r.summary_mass),
            "imbalances": r.summary_imbalances.iter().map(imbalance_json).collect::<Vec<_>>(),
        },
        "failures": r.failures.iter().map(|f| json!({ "kind": f.kind(), "message": f.to_string() })).collect::<Vec<_>>(),
    })
}

fn verification_text(datum: &HblDatum, r: &VerificationReport) -> String {
    let mut out = String::new();
    if r.graph_violations.is_empty() {
        out.push_str("graph: ok\n");
    } else {
        for v in &r.graph_violations {
            writeln!(out, "graph: {v}").unwrap();
        }
    }
    for (i, m) in r.maps.iter().enumerate() {
        writeln!(
            out,
            "theta{} ({}): {}, mass {} (tau = {})",
            i + 1,
            m.name,
            if m.imbalances.is_empty() && m.negative_edges.is_empty() { "balanced" } else { "unbalanced" },
            format_rational(&m.mass),
            format_rational(&datum.exponents()[i]),
        )
        .unwrap();
    }
    if !r.summary.is_empty() {
        let sigma: Vec<String> = r.summary.iter().map(format_rational).collect();
        writeln!(out, "sigma: ({})", sigma.join(", ")).unwrap();
        writeln!(
            out,
            "sigma: {}, mass {}",
            if r.summary_imbalances.is_empty() { "balanced" } else { "unbalanced" },
            format_rational(&r.summary_mass)
        )
        .unwrap();
    }
    for f in &r.failures {
        writeln!(out, "failure [{}]: {f}", f.kind()).unwrap();
    }
    writeln!(out, "verdict: {}", if r.valid() { "valid" } else { "invalid" }).unwrap();
    out
}

fn bound_json(c: &presentation::BoundCertificate) -> Value {
    json!({
        "value": c.value,
        "log_value": c.log_value(),
        "exact_one": c.exact_one,
        "factors": c.factors.iter().map(|f| json!({
            "map": f.map + 1,
            "edge": f.edge,
            "base": q(&f.base),
            "exponent": q(&f.exponent),
        })).collect::<Vec<_>>(),
        "normalized": c.normalized().iter().map(|(b, e)| json!({ "base": q(b), "exponent": q(e) })).collect::<Vec<_>>(),
    })
}

fn bound_text(c: &presentation::BoundCertificate) -> String {
    let mut out = String::new();
    let norm = c.normalized();
    if norm.is_empty() {
        out.push_str("C = 1 (every factor has base 1)\n");
    } else {
        let parts: Vec<String> = norm
            .iter()
            .map(|(b, e)| format!("({})^({})", format_rational(b), format_rational(e)))
            .collect();
        writeln!(out, "C = {} = {:.12}", parts.join(" * "), c.value).unwrap();
    }
    out
}

fn verify(cli: &Cli, with_bound: bool) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let p = load_presentation(cli)?;
    let r = verify_presentation(&datum, &p);
    let mut text = verification_text(&datum, &r);
    let mut details = verification_json(&r);
    if with_bound && r.valid() {
        let c = bound_constant(&datum, &p)?;
        text.push_str(&bound_text(&c));
        details["bound"] = bound_json(&c);
    }
    let (verdict, code) = if r.valid() { ("valid", 0) } else { ("invalid", 1) };
    Ok(Report::new("verify", verdict, code, text, details))
}

fn check_data(cli: &Cli) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let scaling = datum.check_scaling();
    let lat = lattice(cli, &datum)?;
    let violation = datum.find_violation(&lat)?;
    let critical = datum.find_critical(&lat)?;
    let mut text = String::new();
    writeln!(
        text,
        "scaling: dim H = {}, sum tau_i dim pi_i(H) = {} ({})",
        format_rational(&scaling.lhs),
        format_rational(&scaling.rhs),
        if scaling.holds { "holds" } else { "fails" }
    )
    .unwrap();
    writeln!(text, "lattice: {} subspaces ({})", lat.len(), if lat.closed { "closed" } else { "truncated" }).unwrap();
    match &violation {
        Some(v) => writeln!(text, "violation: {} with slack {}", v.subspace, format_rational(&v.slack)).unwrap(),
        None => text.push_str("violation: none among candidates\n"),
    }
    for c in &critical {
        writeln!(text, "critical: {}", c.subspace).unwrap();
    }
    let feasible = scaling.holds && violation.is_none();
    writeln!(text, "verdict: {}", if feasible { "feasible" } else { "infeasible" }).unwrap();
    let details = json!({
        "scaling": { "holds": scaling.holds, "lhs": q(&scaling.lhs), "rhs": q(&scaling.rhs) },
        "lattice": { "size": lat.len(), "closed": lat.closed },
        "violation": violation.as_ref().map(slack_json),
        "critical": critical.iter().map(slack_json).collect::<Vec<_>>(),
    });
    let (verdict, code) = if feasible { ("feasible", 0) } else { ("infeasible", 1) };
    Ok(Report::new("check-data", verdict, code, text, details))
}

fn polytope(cli: &Cli, cap: usize) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    // an explicit candidate file is taken literally; otherwise use the generated lattice
    let candidates: Vec<Subspace> = match load_candidates(cli, &datum)? {
        Some(c) => CandidateLattice::from_subspaces(datum.dim(), c.into_iter().map(|x| x.1)).subspaces,
        None => lattice(cli, &datum)?.subspaces,
    };
    let poly = builder::polytope_from_candidates(&datum, &candidates)?;
    let ext = builder::enumerate_extremes(&poly, cap);
    let tau = datum.exponents();
    let violated = poly.first_violated(tau).map(ToString::to_string);
    let member = violated.is_none();
    let decomposition = if member { builder::caratheodory(&poly, tau).ok() } else { None };

    let mut text = String::new();
    for c in &poly.constraints {
        writeln!(text, "row: {c}").unwrap();
    }
    for p in &ext.points {
        let s: Vec<String> = p.iter().map(format_rational).collect();
        writeln!(text, "vertex: ({})", s.join(", ")).unwrap();
    }
    if ext.cap_hit {
        writeln!(text, "enumeration stopped after {} row subsets", ext.subsets_examined).unwrap();
    }
    match &violated {
        Some(row) => writeln!(text, "exponents: outside, violating {row}").unwrap(),
        None => writeln!(
            text,
            "exponents: inside{}",
            if poly.is_extreme(tau) { ", extreme" } else { "" }
        )
        .unwrap(),
    }
    let details = json!({
        "constraints": poly.constraints.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "vertices": ext.points.iter().map(|p| qs(p)).collect::<Vec<_>>(),
        "subsets_examined": ext.subsets_examined,
        "cap_hit": ext.cap_hit,
        "member": member,
        "extreme": member && poly.is_extreme(tau),
        "violated_row": violated,
        "decomposition": decomposition.map(|d| d.terms.iter().map(|(c, p)| json!({ "weight": q(c), "point": qs(p) })).collect::<Vec<_>>()),
    });
    let (verdict, code) = if member { ("feasible", 0) } else { ("infeasible", 1) };
    Ok(Report::new("polytope", verdict, code, text, details))
}

fn build(cli: &Cli, trace: bool) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let lat = lattice(cli, &datum)?;
    let options = BuildOptions {
        max_lattice: cli.max_lattice,
        trace,
    };
    match builder::build_presentation(&datum, &lat.subspaces, &options) {
        Ok(out) => {
            let p = out.presentation;
            let serialized = io::serialize_presentation(&p);
            let bound = builder::vertex_bound(datum.len(), datum.dim());
            let mut text = String::new();
            if let Some(path) = &cli.out {
                fs::write(path, &serialized).map_err(|e| Fail(format!("{}: {e}", path.display())))?;
                writeln!(text, "wrote {}", path.display()).unwrap();
            } else {
                text.push_str(&serialized);
            }
            for line in &out.trace {
                writeln!(text, "trace: {line}").unwrap();
            }
            writeln!(
                text,
                "built: {} vertices, {} edges (bound {})",
                p.vertex_count(),
                p.graph.edges.len(),
                bound.map_or("overflow".into(), |b| b.to_string())
            )
            .unwrap();
            let details = json!({
                "vertices": p.vertex_count(),
                "edges": p.graph.edges.len(),
                "vertex_bound": bound.map(|b| b.to_string()),
                "trace": out.trace,
                "presentation": serde_json::from_str::<Value>(&serialized).expect("serializer writes JSON"),
            });
            Ok(Report::new("build", "valid", 0, text, details))
        }
        Err(
            e @ (BuildError::Scaling { .. }
            | BuildError::Violation { .. }
            | BuildError::CandidatesInsufficient { .. }
            | BuildError::SubproblemViolation { .. }
            | BuildError::NotMember(_)),
        ) => {
            let text = format!("build failed: {e}\nverdict: infeasible\n");
            Ok(Report::new("build", "infeasible", 1, text, json!({ "reason": e.to_string() })))
        }
        Err(e) => Err(Fail(e.to_string())),
    }
}

fn bound(cli: &Cli) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let p = load_presentation(cli)?;
    let r = verify_presentation(&datum, &p);
    if !r.valid() {
        let text = verification_text(&datum, &r);
        return Ok(Report::new("bound", "invalid", 1, text, verification_json(&r)));
    }
    let c = bound_constant(&datum, &p)?;
    Ok(Report::new("bound", "valid", 0, bound_text(&c), bound_json(&c)))
}

fn decompose(cli: &Cli) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let p = load_presentation(cli)?;
    let mut text = String::new();
    let mut parts = Vec::new();
    let sigma = summary_weight(&datum, &p)?;
    let named: Vec<(String, crate::flow::WeightFunction)> = (0..p.theta.width())
        .map(|j| (format!("theta{}", j + 1), p.theta.component(j)))
        .chain(std::iter::once(("sigma".to_string(), sigma)))
        .collect();
    for (name, w) in &named {
        let dec = decompose_flow(&p.graph, w)?;
        for t in &dec.terms {
            writeln!(text, "{name}: {} * chain {:?}", format_rational(&t.coefficient), t.chain).unwrap();
        }
        parts.push(json!({
            "weight": name,
            "terms": dec.terms.iter().map(|t| json!({ "coefficient": q(&t.coefficient), "chain": t.chain })).collect::<Vec<_>>(),
        }));
    }
    Ok(Report::new("decompose-flow", "valid", 0, text, json!({ "decompositions": parts })))
}

fn project(cli: &Cli, map: usize) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let p = load_presentation(cli)?;
    if map == 0 || map > datum.len() {
        return Err(Fail(format!("--map must be between 1 and {}", datum.len())));
    }
    let (proj, w) = project_weight(&p.graph, &p.theta, datum.map(map - 1))?;
    let mut text = String::new();
    for (i, v) in proj.graph.vertices.iter().enumerate() {
        writeln!(text, "vertex {i}: {v}").unwrap();
    }
    for (k, &(a, b)) in proj.graph.edges.iter().enumerate() {
        let s: Vec<String> = w.values()[k].iter().map(format_rational).collect();
        writeln!(text, "edge {k}: {a} -> {b} ({})", s.join(", ")).unwrap();
    }
    let details = json!({
        "ambient": proj.graph.ambient,
        "vertices": proj.graph.vertices.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "edges": proj.graph.edges.iter().enumerate().map(|(k, &(a, b))| json!({ "from": a, "to": b, "theta": qs(&w.values()[k]) })).collect::<Vec<_>>(),
        "vertex_map": proj.vertex_map,
        "edge_map": proj.edge_map,
    });
    Ok(Report::new("project", "valid", 0, text, details))
}

fn gaussian(cli: &Cli, iterations: usize, samples: usize) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let at_identity = numeric::gaussian_ratio(&datum, &GaussianInput::identity(&datum))?;
    let options = AscentOptions {
        iterations,
        ..AscentOptions::default()
    };
    let ascent = numeric::gaussian_ascent(&datum, &options, cli.seed)?;
    let mut text = format!("ratio at identity: {at_identity:.12}\n");
    writeln!(
        text,
        "ascent: sup estimate {:.12} after {} iterations ({})",
        ascent.sup_estimate,
        ascent.iterations,
        if ascent.diverged { "diverged" } else { "bounded" }
    )
    .unwrap();
    let mut details = json!({
        "ratio_at_identity": finite_or_string(at_identity),
        "sup_estimate": finite_or_string(ascent.sup_estimate),
        "iterations": ascent.iterations,
        "diverged": ascent.diverged,
    });
    let mut dominated = true;
    if samples > 0 {
        let p = load_presentation(cli)?;
        let c = bound_constant(&datum, &p)?.value;
        let mut worst: f64 = 0.0;
        for k in 0..samples {
            let g = GaussianInput::random(&datum, 1.0, cli.seed.wrapping_add(k as u64));
            worst = worst.max(numeric::gaussian_ratio(&datum, &g)? / c);
        }
        dominated = worst <= 1.0 + cli.tol;
        writeln!(text, "samples: max ratio / C = {worst:.12} over {samples} inputs").unwrap();
        details["samples"] = json!({ "count": samples, "constant": c, "max_ratio_over_constant": worst, "dominated": dominated });
    }
    let ok = !ascent.diverged && dominated;
    let (verdict, code) = if ok { ("bounded", 0) } else { ("diverged", 1) };
    Ok(Report::new("gaussian", verdict, code, text, details))
}

fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn quadrature(cli: &Cli, grids: &[PathBuf], constant: Option<f64>) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let fs = grids
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Fail(format!("{}: {e}", p.display())))?;
            GridFunction::parse(&text).map_err(|e| Fail(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, Fail>>()?;
    let c = match constant {
        Some(c) => c,
        None => bound_constant(&datum, &load_presentation(cli)?)?.value,
    };
    let r = numeric::quadrature_check(&datum, c, &fs, None)?;
    let ok = r.ratio <= 1.0 + cli.tol;
    let text = format!(
        "lhs = {:.12}\nrhs = {:.12}\nratio = {:.12}\nverdict: {}\n",
        r.lhs,
        r.rhs,
        r.ratio,
        if ok { "consistent" } else { "exceeds constant" }
    );
    let details = json!({ "constant": c, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio });
    let (verdict, code) = if ok { ("valid", 0) } else { ("invalid", 1) };
    Ok(Report::new("quadrature", verdict, code, text, details))
}

fn export_dot(cli: &Cli) -> Result<Report, Fail> {
    let datum = load_datum(cli)?;
    let p = load_presentation(cli)?;
    let dot = presentation::export_dot(&datum, &p);
    Ok(Report::new("export-dot", "valid", 0, dot.clone(), json!({ "dot": dot })))
}

/// Runs one command; never panics on bad input.
pub fn run(cli: &Cli) -> Report {
    let name = cli.command.name();
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Report::error(name, "--tol must be positive");
    }
    if cli.format == Format::Dot && !matches!(cli.command, Command::ExportDot) {
        return Report::error(name, "--format dot is only available for export-dot");
    }
    let result = match &cli.command {
        Command::Verify { bound } => verify(cli, *bound),
        Command::CheckData => check_data(cli),
        Command::Polytope { cap } => polytope(cli, *cap),
        Command::Build { trace } => build(cli, *trace),
        Command::Bound => bound(cli),
        Command::DecomposeFlow => decompose(cli),
        Command::Project { map } => project(cli, *map),
        Command::Gaussian { iterations, samples } => gaussian(cli, *iterations, *samples),
        Command::Quadrature { grids, constant } => quadrature(cli, grids, *constant),
        Command::ExportDot => export_dot(cli),
    };
    result.unwrap_or_else(|Fail(msg)| Report::error(name, msg))
}

/// Runs, writes the report to `--out` (except for `build`) or returns it for stdout.
pub fn run_and_render(cli: &Cli) -> (i32, String) {
    let report = run(cli);
    let rendered = report.render(cli.format);
    if report.exit_code != 2 && !matches!(cli.command, Command::Build { .. }) {
        if let Some(path) = &cli.out {
            return match write_file(path, &rendered) {
                Ok(()) => (report.exit_code, String::new()),
                Err(e) => (2, Report::error(&report.command, e).render(cli.format)),
            };
        }
    }
    (report.exit_code, rendered)
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}
