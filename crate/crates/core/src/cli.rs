//! Configuration, batch evaluation and tabular output for the `verlinde`
//! binary.
//!
//! A run is described by a [`RunConfig`], read from a JSON file and then
//! overridden by command-line flags. Every command produces a [`Report`]:
//! ordered rows with a fixed column schema plus a free-form `details` tree.
//! Rows carry their own diagnostics so downstream tools never recompute.
//!
//! Exit codes: `0` success, `2` configuration error, `3` computation error,
//! `4` an invariant check failed (the report is still written).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error as ThisError;

use crate::charfun::{irred_character, Character};
use crate::deform::{self, DeformationSpec};
use crate::index::{self, IndexRequest, OddClassSpec};
use crate::kaehler;
use crate::levels::{self, canonical_level, Level, PointSet};
use crate::liealg::{build_root_system, root_system_from_label, RootSystem};
use crate::linalg::IMat;
use crate::series::Series;
use crate::witten;
use crate::Error;

/// Version of the CSV column layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 9] = [
    "command",
    "group",
    "level",
    "genus",
    "exponents",
    "re",
    "im",
    "diag_residual",
    "diag_int_defect",
];

const INTEGER_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-10;
const AGREEMENT_TOL: f64 = 1e-4;
const DEFAULT_GENUS: u32 = 2;
const DEFAULT_ORDER: usize = 4;
const DEFAULT_T_GRID: [f64; 5] = [0.0, -0.5, -0.9, -0.99, -0.999];
const DEFAULT_N_VALUES: [i64; 2] = [100, 1000];

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Label(String),
    Parts {
        #[serde(rename = "type")]
        kind: String,
        rank: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum LevelSpec {
    Scalar(i64),
    Matrix(IMat),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationEntry {
    pub variable: String,
    pub highest_weight: Vec<i64>,
    /// Truncation order for this variable; the series ring uses the largest
    /// requested order as its total degree.
    #[serde(default)]
    pub order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OddFactor {
    pub name: String,
    pub highest_weight: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OddSpecConfig {
    pub factors: Vec<OddFactor>,
    pub intersections: IMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PointSetChoice {
    #[default]
    Shifted,
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Everything a command needs. Fields not used by a command are ignored.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub level: Option<LevelSpec>,
    #[serde(default)]
    pub genus: Option<u32>,
    #[serde(default)]
    pub deformation: Vec<DeformationEntry>,
    /// Series truncation order when no deformation entry sets one; also the
    /// Taylor order of `kaehler` and the `t`-order of `witten`.
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub insertion_weight: Option<Vec<i64>>,
    #[serde(default)]
    pub odd_spec: Option<OddSpecConfig>,
    #[serde(default)]
    pub point_set: Option<PointSetChoice>,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub s_order: Option<usize>,
    #[serde(default)]
    pub n_values: Option<Vec<i64>>,
    /// Number of terms in the truncated `witten` sum; rows are emitted only
    /// when this is set.
    #[serde(default)]
    pub witten_terms: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("computation failed: {0}")]
    Computation(Error),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Computation(_) => 3,
        }
    }

    /// Single-line JSON description for stderr.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Config { field, message } => {
                json!({"error": "config", "field": field, "message": message})
            }
            CliError::Computation(e) => json!({"error": "computation", "message": e.to_string()}),
            CliError::Io { path, message } => json!({"error": "io", "field": path, "message": message}),
        }
    }
}

/// Errors caused by the input are reported as configuration errors against
/// the field most likely responsible; the rest are computation errors.
fn blame(field: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::InvalidInput(m) => CliError::config(field, m),
        Error::UnsupportedType(m) => CliError::config("group", format!("unsupported group type `{m}`")),
        Error::Inadmissible => CliError::config("level", Error::Inadmissible.to_string()),
        other => CliError::Computation(other),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "<root>".to_string() } else { path };
        CliError::config(field, e.into_inner().to_string())
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text)
}

/// Parses `a,b;c,d` (or one row per line) into an integer matrix. A value
/// naming an existing file is read from disk.
pub fn parse_level_matrix(text: &str) -> Result<IMat, CliError> {
    let body = if Path::new(text).is_file() {
        std::fs::read_to_string(text)
            .map_err(|e| CliError::Io { path: text.to_string(), message: e.to_string() })?
    } else {
        text.to_string()
    };
    let rows: Vec<&str> = body
        .split([';', '\n'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .collect();
    let mut m = IMat::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let parsed: Result<Vec<i64>, _> = row.split(',').map(|x| x.trim().parse::<i64>()).collect();
        m.push(parsed.map_err(|e| CliError::config(format!("level-matrix[{i}]"), e.to_string()))?);
    }
    if m.is_empty() {
        return Err(CliError::config("level-matrix", "empty matrix"));
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "verlinde", version, about = "Index formulas for moduli of G-bundles on a curve")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Verlinde,
    Index,
    Kaehler,
    Newstead,
    Witten,
    Oracle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verlinde numbers with point counts and the fusion cross-check.
    Verlinde(CommonArgs),
    /// Deformed index as a coefficient table.
    Index(CommonArgs),
    /// Kähler-differential index along a grid of t values.
    Kaehler(CommonArgs),
    /// Vanishing order at t = -1 and limit diagnostics.
    Newstead(CommonArgs),
    /// Large-level SL(2) asymptotics (`--level` is the shift l).
    Witten(CommonArgs),
    /// Genus-g partition function of the fusion ring.
    Oracle(CommonArgs),
}

impl Command {
    pub fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Verlinde(a) => (CommandKind::Verlinde, a),
            Command::Index(a) => (CommandKind::Index, a),
            Command::Kaehler(a) => (CommandKind::Kaehler, a),
            Command::Newstead(a) => (CommandKind::Newstead, a),
            Command::Witten(a) => (CommandKind::Witten, a),
            Command::Oracle(a) => (CommandKind::Oracle, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// A1..A4, C2, G2, T<n>, or a product such as A1xT1.
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "level_matrix")]
    pub level: Option<i64>,
    /// Rows separated by `;`, entries by `,`; or a path to such a file.
    #[arg(long)]
    pub level_matrix: Option<String>,
    #[arg(long)]
    pub genus: Option<u32>,
    #[arg(long)]
    pub order: Option<usize>,
    /// A single t value; replaces the configured grid.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Worker threads; defaults to the rayon default.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    /// Loads the configuration file (if any) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = &self.group {
            cfg.group = Some(GroupSpec::Label(g.clone()));
        }
        if let Some(k) = self.level {
            cfg.level = Some(LevelSpec::Scalar(k));
        }
        if let Some(m) = &self.level_matrix {
            cfg.level = Some(LevelSpec::Matrix(parse_level_matrix(m)?));
        }
        if let Some(g) = self.genus {
            cfg.genus = Some(g);
        }
        if let Some(o) = self.order {
            cfg.order = Some(o);
        }
        if let Some(t) = self.t {
            cfg.t_grid = Some(vec![t]);
        }
        if let Some(f) = self.format {
            cfg.output.format = Some(f);
        }
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.clone());
        }
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// Reports

/// One output row. `exponents` is the monomial exponent tuple joined by `;`
/// (empty for scalars).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub command: String,
    pub group: String,
    pub level: String,
    pub genus: u32,
    pub exponents: String,
    pub re: f64,
    pub im: f64,
    pub diag_residual: f64,
    pub diag_int_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub rows: Vec<Row>,
    pub details: Value,
    /// Invariant checks that failed; non-empty means exit code 4.
    pub violations: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            rows: Vec::new(),
            details: Value::Null,
            violations: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            4
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.command.clone(),
                r.group.clone(),
                r.level.clone(),
                r.genus.to_string(),
                r.exponents.clone(),
                format_float(r.re),
                format_float(r.im),
                format_float(r.diag_residual),
                format_float(r.diag_int_defect),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

/// Integral values print without a fraction; everything else uses the
/// shortest round-trip form.
pub fn format_float(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        x.to_string()
    }
}

// ---------------------------------------------------------------------------
// Shared setup

struct Setting {
    rs: RootSystem,
    level: Level,
    level_label: String,
    scalar_level: Option<i64>,
    genus: u32,
}

fn root_system(cfg: &RunConfig) -> Result<RootSystem, CliError> {
    let spec = cfg.group.as_ref().ok_or_else(|| CliError::config("group", "missing"))?;
    let built = match spec {
        GroupSpec::Label(l) => root_system_from_label(l),
        GroupSpec::Parts { kind, rank } => build_root_system(kind, *rank),
    };
    built.map_err(|e| CliError::config("group", e.to_string()))
}

fn format_matrix(m: &IMat) -> String {
    m.iter()
        .map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn setting(cfg: &RunConfig) -> Result<Setting, CliError> {
    let rs = root_system(cfg)?;
    let spec = cfg.level.as_ref().ok_or_else(|| CliError::config("level", "missing"))?;
    let (level, scalar_level) = match spec {
        LevelSpec::Scalar(k) => (canonical_level(&rs, *k).map_err(blame("level"))?, Some(*k)),
        LevelSpec::Matrix(m) => (Level::new(&rs, m.clone()).map_err(blame("level"))?, None),
    };
    let level_label = match scalar_level {
        Some(k) => k.to_string(),
        None => format_matrix(&level.h),
    };
    Ok(Setting { rs, level, level_label, scalar_level, genus: cfg.genus.unwrap_or(DEFAULT_GENUS) })
}

fn weight_character(rs: &RootSystem, field: &str, w: &[i64]) -> Result<Character, CliError> {
    if w.len() != rs.rank {
        return Err(CliError::config(field, format!("expected {} entries, got {}", rs.rank, w.len())));
    }
    if !rs.is_dominant(w) {
        return Err(CliError::config(field, "highest weight must be dominant"));
    }
    irred_character(rs, w).map_err(blame(field))
}

fn insertion(rs: &RootSystem, cfg: &RunConfig) -> Result<Character, CliError> {
    match &cfg.insertion_weight {
        Some(w) => weight_character(rs, "insertion_weight", w),
        None => Ok(Character::trivial(rs.rank)),
    }
}

fn series_order(cfg: &RunConfig) -> usize {
    cfg.deformation
        .iter()
        .filter_map(|d| d.order)
        .chain(cfg.order)
        .max()
        .unwrap_or(DEFAULT_ORDER)
}

fn deformation_spec(rs: &RootSystem, cfg: &RunConfig) -> Result<DeformationSpec, CliError> {
    let order = series_order(cfg);
    let mut terms = Vec::with_capacity(cfg.deformation.len());
    for (i, d) in cfg.deformation.iter().enumerate() {
        let ch = weight_character(rs, &format!("deformation[{i}].highest_weight"), &d.highest_weight)?;
        terms.push((d.variable.clone(), ch));
    }
    if terms.is_empty() {
        return Ok(DeformationSpec::empty(order));
    }
    DeformationSpec::new(terms, order).map_err(blame("deformation"))
}

fn odd_spec(rs: &RootSystem, cfg: &RunConfig) -> Result<Option<OddClassSpec>, CliError> {
    let Some(odd) = &cfg.odd_spec else {
        return Ok(None);
    };
    let mut factors = Vec::with_capacity(odd.factors.len());
    for (i, f) in odd.factors.iter().enumerate() {
        let field = format!("odd_spec.factors[{i}].highest_weight");
        factors.push((f.name.clone(), weight_character(rs, &field, &f.highest_weight)?));
    }
    OddClassSpec::new(factors, odd.intersections.clone())
        .map(Some)
        .map_err(blame("odd_spec.intersections"))
}

fn factorial_weight(exps: &[u32]) -> f64 {
    exps.iter()
        .map(|&e| (1..=e).map(f64::from).product::<f64>())
        .product()
}

fn exponent_label(exps: &[u32]) -> String {
    exps.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

/// Coefficient rows of a series in the ring's monomial order. The
/// integrality defect is that of `∏ eᵢ!·coefficient`.
fn series_rows(command: &str, s: &Setting, series: &Series, residual: f64) -> Vec<Row> {
    series
        .terms()
        .map(|(exps, c)| Row {
            command: command.to_string(),
            group: s.rs.type_label.clone(),
            level: s.level_label.clone(),
            genus: s.genus,
            exponents: exponent_label(exps),
            re: c.re,
            im: c.im,
            diag_residual: residual,
            diag_int_defect: index::integrality_defect(c * factorial_weight(exps)),
        })
        .collect()
}

fn scalar_row(command: &str, s: &Setting, value: f64, residual: f64, defect: f64) -> Row {
    Row {
        command: command.to_string(),
        group: s.rs.type_label.clone(),
        level: s.level_label.clone(),
        genus: s.genus,
        exponents: String::new(),
        re: value,
        im: 0.0,
        diag_residual: residual,
        diag_int_defect: defect,
    }
}

/// Rounds values within the integer tolerance so they print exactly.
fn snap(value: f64) -> (f64, Option<i64>) {
    let r = value.round();
    if (value - r).abs() < INTEGER_TOL {
        (r, Some(r as i64))
    } else {
        (value, None)
    }
}

// ---------------------------------------------------------------------------
// Commands

pub fn cmd_verlinde(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = setting(cfg)?;
    let mut report = Report::new("verlinde");
    let reps = levels::regular_orbit_representatives(&s.rs, &s.level, PointSet::Shifted)
        .map_err(blame("level"))?;
    let raw = levels::verlinde_number(&s.rs, &s.level, s.genus).map_err(blame("level"))?;
    let defect = (raw - raw.round()).abs();
    let (value, exact) = snap(raw);
    let oracle = match s.scalar_level {
        Some(k) if s.rs.torus_rank == 0 => {
            Some(levels::fusion_gluing_oracle(&s.rs, k, s.genus).map_err(CliError::Computation)?)
        }
        _ => None,
    };
    if exact.is_none() {
        report.violations.push(format!("Verlinde number {raw} is not within {INTEGER_TOL} of an integer"));
    }
    let mismatch = oracle.map_or(0.0, |o| (raw - o as f64).abs());
    if mismatch > INTEGER_TOL {
        report.violations.push(format!("fusion oracle gives {}, formula gives {raw}", oracle.unwrap_or(0)));
    }
    report.rows.push(scalar_row("verlinde", &s, value, mismatch, defect));
    report.details = json!({
        "level": s.level_label,
        "level_matrix": s.level.h,
        "genus": s.genus,
        "value": value,
        "exact": exact,
        "flagged_non_integral": exact.is_none(),
        "oracle_value": oracle,
        "point_count": reps.len(),
        "f_order": s.level.f_order,
    });
    Ok(report)
}

pub fn cmd_index(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = setting(cfg)?;
    let spec = deformation_spec(&s.rs, cfg)?;
    let u = insertion(&s.rs, cfg)?;
    let which = match cfg.point_set.unwrap_or_default() {
        PointSetChoice::Shifted => PointSet::Shifted,
        PointSetChoice::Kernel => PointSet::Kernel,
    };
    let req = IndexRequest {
        genus: s.genus,
        spec: spec.clone(),
        insertion: u,
        odd: odd_spec(&s.rs, cfg)?,
        point_set: which,
    };
    let series = index::index_general(&s.rs, &s.level, &req).map_err(blame("deformation"))?;

    // Residuals of the deformed-point equation, itemised per point.
    let reps = levels::regular_orbit_representatives(&s.rs, &s.level, which).map_err(blame("level"))?;
    let mut per_point = Vec::with_capacity(reps.len());
    let mut worst = 0.0f64;
    for p in &reps {
        let dp = deform::solve_deformed(&s.rs, &s.level, &spec, p).map_err(CliError::Computation)?;
        let r = deform::residual(&s.level, &spec, &dp).map_err(CliError::Computation)?;
        worst = worst.max(r);
        per_point.push(json!({"mu": p.point.reduced_mu(), "residual": r}));
    }

    let mut report = Report::new("index");
    report.rows = series_rows("index", &s, &series, worst);
    let max_defect = report.rows.iter().map(|r| r.diag_int_defect).fold(0.0, f64::max);
    if max_defect > INTEGER_TOL {
        report.violations.push(format!("integrality defect {max_defect:e} exceeds {INTEGER_TOL:e}"));
    }
    if worst > RESIDUAL_TOL {
        report.violations.push(format!("deformed-point residual {worst:e} exceeds {RESIDUAL_TOL:e}"));
    }
    report.details = json!({
        "variables": series.ring().vars(),
        "order": series.order(),
        "point_set": cfg.point_set.unwrap_or_default(),
        "points": per_point,
        "max_residual": worst,
        "max_integrality_defect": max_defect,
    });
    Ok(report)
}

fn kaehler_v(rs: &RootSystem, cfg: &RunConfig) -> Result<Character, CliError> {
    let mut v = Character::zero();
    for (i, d) in cfg.deformation.iter().enumerate() {
        if d.variable != "s" {
            return Err(CliError::config(
                format!("deformation[{i}].variable"),
                "the Kähler index takes a single deformation in the variable `s`",
            ));
        }
        v = v.add(&weight_character(rs, &format!("deformation[{i}].highest_weight"), &d.highest_weight)?);
    }
    Ok(v)
}

pub fn cmd_kaehler(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = setting(cfg)?;
    let v = kaehler_v(&s.rs, cfg)?;
    let u = insertion(&s.rs, cfg)?;
    let s_order = cfg.s_order.unwrap_or(if v.is_empty() { 0 } else { DEFAULT_ORDER });
    let grid = cfg.t_grid.clone().unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
    if let Some(bad) = grid.iter().find(|&&t| !(t > -1.0 && t <= 0.0)) {
        return Err(CliError::config("t_grid", format!("t = {bad} is outside (-1, 0]")));
    }
    let mut report = Report::new("kaehler");
    let mut runs = Vec::with_capacity(grid.len());
    for &t in &grid {
        let idx = kaehler::kaehler_index(&s.rs, &s.level, s.genus, &v, &u, t, s_order)
            .map_err(blame("level"))?;
        let st = &idx.continuation;
        let label = format!("kaehler(t={t})");
        let mut rows = series_rows(&label, &s, &idx.series, st.max_residual);
        // Numeric t gives no integrality statement.
        rows.iter_mut().for_each(|r| r.diag_int_defect = 0.0);
        report.rows.extend(rows);
        if st.max_residual > RESIDUAL_TOL {
            report.violations.push(format!("residual {:e} at t = {t}", st.max_residual));
        }
        runs.push(json!({
            "t": t,
            "max_residual": st.max_residual,
            "max_condition": st.max_condition,
            "min_separation": st.min_separation,
            "accepted_steps": st.accepted_steps,
            "halvings": st.halvings,
            "points": st.points,
        }));
    }
    let mut taylor = Value::Null;
    if let Some(order) = cfg.order {
        let series = kaehler::kaehler_formal_t(&s.rs, &s.level, s.genus, &v, &u, order)
            .map_err(CliError::Computation)?;
        let rows = series_rows("kaehler(taylor)", &s, &series, 0.0);
        let defect = rows.iter().map(|r| r.diag_int_defect).fold(0.0, f64::max);
        if defect > INTEGER_TOL {
            report.violations.push(format!("Taylor coefficient integrality defect {defect:e}"));
        }
        taylor = json!({"order": order, "max_integrality_defect": defect});
        report.rows.extend(rows);
    }
    report.details = json!({
        "s_order": s_order,
        "outside_guarantee": !kaehler::within_guarantee(&s.rs, &s.level),
        "runs": runs,
        "taylor": taylor,
    });
    Ok(report)
}

pub fn cmd_newstead(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = setting(cfg)?;
    let u = insertion(&s.rs, cfg)?;
    let rep = kaehler::newstead_report(&s.rs, &s.level, s.genus, &u).map_err(blame("level"))?;
    let mut report = Report::new("newstead");
    let limit = rep.limit_inner_sum.unwrap_or(f64::NAN);
    let agreement = rep.agreement.unwrap_or(f64::NAN);
    let mut row = scalar_row("newstead", &s, limit, agreement, 0.0);
    row.exponents = rep.vanishing_order.to_string();
    report.rows.push(row);
    for e in &rep.errors {
        report.violations.push(e.clone());
    }
    if !(agreement <= AGREEMENT_TOL) {
        report.violations.push(format!("extrapolated inner sum disagrees with the limit by {agreement:e}"));
    }
    if !rep.nonzero_limit {
        report.violations.push("inner-sum limit vanishes".into());
    }
    report.details = serde_json::to_value(&rep).expect("report serializes");
    Ok(report)
}

fn witten_phi(rs: &RootSystem, cfg: &RunConfig) -> Result<BTreeMap<i64, i64>, CliError> {
    match cfg.deformation.as_slice() {
        [] => Ok(index::su2_phi(&crate::charfun::adjoint_character(rs))),
        [d] => Ok(index::su2_phi(&weight_character(rs, "deformation[0].highest_weight", &d.highest_weight)?)),
        _ => Err(CliError::config("deformation", "the asymptotic sum takes one deformation")),
    }
}

pub fn cmd_witten(cfg: &RunConfig) -> Result<Report, CliError> {
    let l = match cfg.level {
        Some(LevelSpec::Scalar(l)) => l,
        Some(LevelSpec::Matrix(_)) => return Err(CliError::config("level", "expected the integer shift l")),
        None => 0,
    };
    let genus = cfg.genus.unwrap_or(DEFAULT_GENUS);
    let rs = root_system_from_label("A1").map_err(CliError::Computation)?;
    if let Some(g) = &cfg.group {
        if root_system(cfg)?.type_label != "A1" {
            return Err(CliError::config("group", format!("the asymptotic check is for A1, got {g:?}")));
        }
    }
    let n_values = cfg.n_values.clone().unwrap_or_else(|| DEFAULT_N_VALUES.to_vec());
    let run = witten::asymptotic_check(l, genus, &n_values).map_err(blame("n_values"))?;
    let mut report = Report::new("witten");
    let label = |level: i64| Setting {
        rs: rs.clone(),
        level: canonical_level(&rs, level.max(0)).expect("A1 levels are admissible"),
        level_label: level.to_string(),
        scalar_level: Some(level),
        genus,
    };
    for r in &run.rows {
        let s = label(r.level);
        let mut row = scalar_row("witten", &s, r.scaled, r.deviation, 0.0);
        row.exponents = format!("n={}", r.n);
        report.rows.push(row);
    }
    let mut sum = Value::Null;
    if let Some(terms) = cfg.witten_terms {
        let phi = witten_phi(&rs, cfg)?;
        let order = cfg.order.unwrap_or(2);
        let ws = witten::witten_sum(l, &phi, genus, order, terms).map_err(blame("deformation"))?;
        let s = label(l);
        let mut rows = series_rows("witten(sum)", &s, &ws.series, ws.tail_bound);
        rows.iter_mut().for_each(|r| r.diag_int_defect = 0.0);
        report.rows.extend(rows);
        sum = json!({"terms": ws.terms, "tail_bound": ws.tail_bound, "dimension": ws.dimension});
    }
    if run.rows.windows(2).any(|w| w[1].deviation > w[0].deviation) {
        report.violations.push("deviation does not decrease with n".into());
    }
    report.details = json!({"asymptotics": run, "sum": sum});
    Ok(report)
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = setting(cfg)?;
    let k = s
        .scalar_level
        .ok_or_else(|| CliError::config("level", "the fusion oracle needs a scalar level"))?;
    let oracle = levels::fusion_gluing_oracle(&s.rs, k, s.genus).map_err(blame("group"))?;
    let formula = levels::verlinde_number(&s.rs, &s.level, s.genus).map_err(CliError::Computation)?;
    let gap = (formula - oracle as f64).abs();
    let mut report = Report::new("oracle");
    report.rows.push(scalar_row("oracle", &s, oracle as f64, gap, 0.0));
    if gap > INTEGER_TOL {
        report.violations.push(format!("oracle {oracle} differs from the formula value {formula}"));
    }
    report.details = json!({
        "oracle_value": oracle,
        "formula_value": formula,
        "integrable_weights": levels::integrable_weights(&s.rs, k).len(),
    });
    Ok(report)
}

pub fn execute(kind: CommandKind, cfg: &RunConfig) -> Result<Report, CliError> {
    match kind {
        CommandKind::Verlinde => cmd_verlinde(cfg),
        CommandKind::Index => cmd_index(cfg),
        CommandKind::Kaehler => cmd_kaehler(cfg),
        CommandKind::Newstead => cmd_newstead(cfg),
        CommandKind::Witten => cmd_witten(cfg),
        CommandKind::Oracle => cmd_oracle(cfg),
    }
}

/// Output of [`run`]: the rendered text, the report, and whether the text
/// went to a file.
pub struct RunOutput {
    pub text: String,
    pub report: Report,
    pub written_to_file: bool,
}

/// Resolves the configuration, runs on a bounded pool and renders.
pub fn run(kind: CommandKind, args: &CommonArgs) -> Result<RunOutput, CliError> {
    let cfg = args.resolve()?;
    let format = cfg.output.format.unwrap_or_default();
    let report = match args.jobs {
        Some(0) => return Err(CliError::config("jobs", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("jobs", e.to_string()))?
            .install(|| execute(kind, &cfg))?,
        None => execute(kind, &cfg)?,
    };
    let text = report.render(format);
    if let Some(path) = &cfg.output.path {
        std::fs::write(path, &text)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    }
    let written_to_file = cfg.output.path.is_some();
    Ok(RunOutput { text, report, written_to_file })
}

/// Entry point used by the binary. Writes output and diagnostics to the
/// given streams and returns the process exit code.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let (kind, args) = cli.command.split();
    match run(kind, &args) {
        Ok(RunOutput { text, report, written_to_file }) => {
            if !written_to_file {
                let _ = out.write_all(text.as_bytes());
            }
            for v in &report.violations {
                let _ = writeln!(err, "{}", json!({"error": "invariant", "message": v}));
            }
            report.exit_code()
        }
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn config_accepts_both_group_forms() {
        let a = cfg(r#"{"group": "A2", "level": 1}"#);
        let b = cfg(r#"{"group": {"type": "A", "rank": 2}, "level": [[2, -1], [-1, 2]]}"#);
        assert_eq!(root_system(&a).unwrap().type_label, root_system(&b).unwrap().type_label);
        let sa = setting(&a).unwrap();
        let sb = setting(&b).unwrap();
        assert_eq!(sa.level, sb.level);
        assert_eq!(sa.level_label, "1");
        assert_eq!(sb.level_label, "2,-1;-1,2");
    }

    #[test]
    fn config_errors_carry_the_field_path() {
        let e = parse_config(r#"{"group": "A1", "deformation": [{"variable": "t", "highest_weight": "x"}]}"#)
            .unwrap_err();
        match e {
            CliError::Config { field, .. } => assert_eq!(field, "deformation[0].highest_weight"),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_config(r#"{"grup": "A1"}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let c = cfg(r#"{"group": "A1", "level": 1, "deformation": [{"variable": "t", "highest_weight": [1, 0]}]}"#);
        match cmd_index(&c).unwrap_err() {
            CliError::Config { field, .. } => assert_eq!(field, "deformation[0].highest_weight"),
            other => panic!("unexpected {other:?}"),
        }
        let c = cfg(r#"{"group": "A1", "level": -3}"#);
        match cmd_verlinde(&c).unwrap_err() {
            CliError::Config { field, .. } => assert_eq!(field, "level"),
            other => panic!("unexpected {other:?}"),
        }
        let c = cfg(r#"{"group": "B3", "level": 1}"#);
        assert!(matches!(cmd_verlinde(&c).unwrap_err(), CliError::Config { .. }));
    }

    #[test]
    fn level_matrix_parsing() {
        assert_eq!(parse_level_matrix("2,0; 0,4").unwrap(), vec![vec![2, 0], vec![0, 4]]);
        assert_eq!(parse_level_matrix("3").unwrap(), vec![vec![3]]);
        assert!(parse_level_matrix("1,x").is_err());
        assert!(parse_level_matrix(" ; ").is_err());
    }

    #[test]
    fn verlinde_rows_match_the_oracle() {
        for (label, k, g, expected) in [("A1", 1, 2, 4.0), ("A1", 1, 1, 2.0), ("A2", 1, 2, 9.0)] {
            let c = RunConfig {
                group: Some(GroupSpec::Label(label.into())),
                level: Some(LevelSpec::Scalar(k)),
                genus: Some(g),
                ..Default::default()
            };
            let r = cmd_verlinde(&c).unwrap();
            assert!(r.violations.is_empty());
            assert_eq!(r.rows[0].re, expected);
            assert_eq!(r.details["exact"], json!(expected as i64));
            assert_eq!(r.details["oracle_value"], json!(expected as i64));
        }
    }

    #[test]
    fn empty_deformation_reproduces_verlinde() {
        let c = cfg(r#"{"group": "A1", "level": 3, "genus": 2, "order": 2}"#);
        let idx = cmd_index(&c).unwrap();
        let ver = cmd_verlinde(&c).unwrap();
        let constant = idx.rows.iter().find(|r| r.exponents == "0").unwrap();
        assert!((constant.re - ver.rows[0].re).abs() < 1e-9);
        assert!(idx.rows.iter().filter(|r| r.exponents != "0").all(|r| r.re.abs() < 1e-12));
    }

    #[test]
    fn index_rows_are_integral_for_the_adjoint() {
        let c = cfg(r#"{"group": "A1", "level": 2, "genus": 2,
                        "deformation": [{"variable": "t", "highest_weight": [2], "order": 4}]}"#);
        let r = cmd_index(&c).unwrap();
        assert_eq!(r.rows.len(), 5);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.rows.iter().all(|row| row.diag_residual < 1e-12));
    }

    #[test]
    fn csv_schema_and_determinism() {
        let c = cfg(r#"{"group": "A1", "level": 1, "deformation": [{"variable": "t", "highest_weight": [2], "order": 2}]}"#);
        let a = cmd_index(&c).unwrap().to_csv();
        let b = cmd_index(&c).unwrap().to_csv();
        assert_eq!(a, b);
        let header = a.lines().next().unwrap();
        assert_eq!(header, CSV_COLUMNS.join(","));
        assert_eq!(a.lines().count(), 4);
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(4.0), "4");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(1.5e-16), "1.5e-16");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn witten_deviation_decreases() {
        let c = cfg(r#"{"level": 0, "genus": 2, "n_values": [100, 1000]}"#);
        let r = cmd_witten(&c).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[1].diag_residual < r.rows[0].diag_residual);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn flags_override_the_config() {
        let args = CommonArgs {
            group: Some("A2".into()),
            level: Some(2),
            genus: Some(3),
            t: Some(-0.5),
            format: Some(OutputFormat::Csv),
            ..Default::default()
        };
        let c = args.resolve().unwrap();
        assert_eq!(c.group, Some(GroupSpec::Label("A2".into())));
        assert_eq!(c.level, Some(LevelSpec::Scalar(2)));
        assert_eq!(c.genus, Some(3));
        assert_eq!(c.t_grid, Some(vec![-0.5]));
        assert_eq!(c.output.format, Some(OutputFormat::Csv));
    }

    #[test]
    fn exit_codes_through_main() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(["verlinde", "verlinde", "--group", "A1", "--level", "1"], &mut out, &mut err);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["rows"][0]["re"], json!(4.0));

        let mut err = Vec::new();
        let code = main_with(["verlinde", "verlinde", "--group", "Q7", "--level", "1"], &mut Vec::new(), &mut err);
        assert_eq!(code, 2);
        let e: Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(e["field"], json!("group"));

        let code = main_with(["verlinde", "frobnicate"], &mut Vec::new(), &mut Vec::new());
        assert_eq!(code, 2);
    }
}
