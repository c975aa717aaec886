//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for bad input, 2 when an internal cross-check
//! fails.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use nibbled::analysis::{point_in, recurrence_at, sample_boxes, start_point, surfaces_at, RecurrenceSample};
use nibbled::conic::{billiard_trace, NibbledEllipse, TableError, TableSpec};
use nibbled::criterion::{verify_mainsurf, CriterionReport};
use nibbled::flattening::{build_flat_polygon_with, flatten_point_with, interval_partition, FlatCase, ParamInterval, ParameterPartition};
use nibbled::flow::birkhoff_average;
use nibbled::quadrature::Quadrature;
use nibbled::render;
use nibbled::staircase::PolygonSpec;
use nibbled::surface::SurfaceDump;
use nibbled::tolerances;

const CSV_HELP: &str = "CSV columns:
  criterion   interval,lo,hi,s,wronskian,wronskian_error,x_brackets,y_brackets,wronskian_check,branch_check
              (bracket lists are ';'-separated in family order)
  recurrence  interval,lo,hi,s,component,d,min_tail,argmin_n,connection_found,connection_n,homology_defect,status
  birkhoff    interval,s,component,start,box,area_fraction,average
  trace       index,t,x,y,flat_u,flat_v,caustic

Environment: NB_THREADS caps the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "nibbled", version, about = "Nibbled-ellipse billiards: flattening, surfaces, diagnostics", after_help = CSV_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table checks and drawings.
    #[command(subcommand)]
    Table(TableCommand),
    /// Flattened polygon at one caustic parameter per interval.
    Flatten(FlattenArgs),
    /// Unfolded translation surfaces with their singularities.
    Surface(FlattenArgs),
    /// Wronskian and bracket checks on every selected interval.
    Criterion(CriterionArgs),
    /// min n·ε_n of first-return maps at sampled caustic parameters.
    Recurrence(RecurrenceArgs),
    /// Birkhoff averages of boxes along the diagonal flow.
    Birkhoff(BirkhoffArgs),
    /// Physical billiard orbit tangent to one caustic.
    Trace(TraceArgs),
}

#[derive(Debug, Subcommand)]
pub enum TableCommand {
    /// Parse, validate and re-emit the table in canonical form.
    Validate(IoArgs),
    /// Draw the table outline as SVG.
    Render(IoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Table JSON file.
    #[arg(long)]
    pub table: PathBuf,
    /// Output file (standard output if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlattenArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Interval index or "auto" for all intervals.
    #[arg(long, default_value = "auto")]
    pub interval: String,
    /// Caustic parameter; the interval midpoint if omitted.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value = "auto")]
    pub interval: String,
    /// Chebyshev grid points per interval.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Required value/error ratio of the strict checks; values below
    /// the default are rejected.
    #[arg(long, default_value_t = tolerances::SIGN_MARGIN)]
    pub sign_margin: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value = "auto")]
    pub interval: String,
    /// Random caustic parameters per interval.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Orbit length N; the minimum of n·ε_n is taken over [N/2, N].
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BirkhoffArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value = "auto")]
    pub interval: String,
    #[arg(long)]
    pub s: Option<f64>,
    /// Starting points per surface.
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[arg(long, default_value_t = 10)]
    pub boxes: usize,
    /// Flow time in units of the surface diameter.
    #[arg(long, default_value_t = 1e4)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Caustic parameter.
    #[arg(long)]
    pub s: f64,
    /// Path length.
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// With svg output, draw the orbit in flat coordinates.
    #[arg(long)]
    pub flat: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] nibbled::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("output failed: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(e) if e.is_internal() => 2,
            CliError::Output(_) => 2,
            _ => 1,
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::Domain(e.into())
    }
}

/// Validated settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub table: PathBuf,
    pub out: Option<PathBuf>,
    pub intervals: Selection,
    pub sign_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    One(usize),
}

impl Selection {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if s == "auto" {
            return Ok(Selection::All);
        }
        s.parse().map(Selection::One).map_err(|_| CliError::Usage(format!("--interval expects an index or \"auto\", got {s:?}")))
    }

    /// The intervals to process; a given s selects the interval holding it
    /// when none was named.
    fn pick_for(self, part: &ParameterPartition, s: Option<f64>) -> Result<Vec<(usize, ParamInterval)>, CliError> {
        match (self, s) {
            (Selection::All, Some(s)) => {
                let i = part.locate(s).ok_or_else(|| CliError::Usage(format!("--s {s} lies in no parameter interval")))?;
                Ok(vec![(i, part.intervals[i])])
            }
            (sel, _) => sel.pick(&part.intervals),
        }
    }

    fn pick(self, all: &[ParamInterval]) -> Result<Vec<(usize, ParamInterval)>, CliError> {
        match self {
            Selection::All => Ok(all.iter().copied().enumerate().collect()),
            Selection::One(i) => all.get(i).map(|j| vec![(i, *j)]).ok_or_else(|| CliError::Usage(format!("interval {i} out of range (table has {})", all.len()))),
        }
    }
}

impl RunConfig {
    fn new(io: &IoArgs, interval: &str, sign_margin: f64) -> Result<Self, CliError> {
        if !(sign_margin >= tolerances::SIGN_MARGIN) {
            return Err(CliError::Usage(format!("--sign-margin may only tighten the default {:e}", tolerances::SIGN_MARGIN)));
        }
        Ok(RunConfig { table: io.table.clone(), out: io.out.clone(), intervals: Selection::parse(interval)?, sign_margin })
    }
}

pub fn load_table(path: &Path) -> Result<NibbledEllipse, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let spec: TableSpec = serde_json::from_str(&text).map_err(|e| TableError::CompatibilityViolation(format!("malformed table JSON: {e}")))?;
    Ok(spec.build()?)
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(body.as_bytes()).map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn f(x: f64) -> String {
    format!("{x:.17e}")
}

fn unsupported(cmd: &str, fmt: Format) -> CliError {
    CliError::Usage(format!("{cmd} does not support --format {fmt:?}").to_lowercase())
}

fn domain<E: Into<nibbled::Error>>(e: E) -> CliError {
    CliError::Domain(e.into())
}

#[derive(Serialize)]
struct FlatRecord {
    interval: usize,
    range: ParamInterval,
    s: f64,
    ell: f64,
    case: FlatCase,
    polygon: PolygonSpec,
    components: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct SurfaceRecord {
    interval: usize,
    s: f64,
    component: usize,
    euler_characteristic: i64,
    surface: SurfaceDump,
}

fn flatten(a: &FlattenArgs, surfaces: bool) -> Result<(), CliError> {
    let cfg = RunConfig::new(&a.io, &a.interval, tolerances::SIGN_MARGIN)?;
    let table = load_table(&cfg.table)?;
    let q = Quadrature::new(table.family);
    let part = interval_partition(&table);
    let picked = cfg.intervals.pick_for(&part, a.s)?;
    let mut flats = Vec::new();
    for (i, j) in &picked {
        let s = a.s.unwrap_or(j.midpoint());
        flats.push((*i, build_flat_polygon_with(&q, &table, j, s).map_err(domain)?));
    }
    if surfaces {
        if a.format != Format::Json {
            return Err(unsupported("surface", a.format));
        }
        let mut recs = Vec::new();
        for (i, fp) in &flats {
            let sample = surfaces_at(&q, &table, fp.s)?;
            for (c, m) in sample.surfaces.iter().enumerate() {
                recs.push(SurfaceRecord { interval: *i, s: fp.s, component: c, euler_characteristic: m.euler_characteristic(), surface: m.dump() });
            }
        }
        return emit(&cfg.out, &json(&recs)?);
    }
    match a.format {
        Format::Json => {
            let recs: Vec<FlatRecord> = flats
                .iter()
                .map(|(i, fp)| FlatRecord { interval: *i, range: fp.interval, s: fp.s, ell: fp.ell, case: fp.case(), polygon: fp.polygon.to_spec(), components: fp.polygon.components.clone() })
                .collect();
            emit(&cfg.out, &json(&recs)?)
        }
        Format::Svg => match flats.as_slice() {
            [(_, fp)] => emit(&cfg.out, &render::polygon_scene(&fp.polygon).to_svg()),
            _ => Err(CliError::Usage("svg output needs a single --interval".into())),
        },
        Format::Csv => Err(unsupported("flatten", a.format)),
    }
}

fn criterion(a: &CriterionArgs) -> Result<(), CliError> {
    let cfg = RunConfig::new(&a.io, &a.interval, a.sign_margin)?;
    let table = load_table(&cfg.table)?;
    let part = interval_partition(&table);
    let picked = cfg.intervals.pick(&part.intervals)?;
    let mut reports: Vec<(usize, CriterionReport)> = Vec::new();
    for (i, j) in picked {
        let r = verify_mainsurf(&table, &j, a.grid).map_err(domain)?;
        reports.push((i, r.tightened(cfg.sign_margin)));
    }
    let body = match a.format {
        Format::Json => json(&reports.iter().map(|(i, r)| serde_json::json!({ "index": i, "report": r })).collect::<Vec<_>>())?,
        Format::Csv => {
            let header = ["interval", "lo", "hi", "s", "wronskian", "wronskian_error", "x_brackets", "y_brackets", "wronskian_check", "branch_check"];
            let join = |v: &[f64]| v.iter().map(|&x| f(x)).collect::<Vec<_>>().join(";");
            let rows = reports.iter().flat_map(|(i, r)| {
                r.rows.iter().map(move |g| {
                    vec![
                        i.to_string(),
                        f(r.interval.lo),
                        f(r.interval.hi),
                        f(g.s),
                        f(g.wronskian),
                        f(g.wronskian_error),
                        join(&g.x_brackets),
                        join(&g.y_brackets),
                        format!("{:?}", g.wronskian_check).to_lowercase(),
                        format!("{:?}", g.branch_check).to_lowercase(),
                    ]
                })
            });
            csv_text(&header, rows)?
        }
        Format::Svg => return Err(unsupported("criterion", a.format)),
    };
    emit(&cfg.out, &body)?;
    Ok(())
}

/// One row of the recurrence scan.
#[derive(Debug, Serialize)]
struct RecurrenceRow {
    interval: usize,
    range: ParamInterval,
    s: f64,
    samples: Vec<RecurrenceSample>,
    status: String,
}

fn recurrence(a: &RecurrenceArgs) -> Result<(), CliError> {
    let cfg = RunConfig::new(&a.io, &a.interval, tolerances::SIGN_MARGIN)?;
    let table = load_table(&cfg.table)?;
    let q = Quadrature::new(table.family);
    let part = interval_partition(&table);
    let picked = cfg.intervals.pick(&part.intervals)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut jobs: Vec<(usize, ParamInterval, f64)> = Vec::new();
    for &(i, j) in &picked {
        for _ in 0..a.samples {
            jobs.push((i, j, point_in(&j, rng.gen(), 1e-3)));
        }
    }
    let results: Vec<Result<RecurrenceRow, CliError>> = jobs
        .par_iter()
        .map(|&(i, j, s)| match recurrence_at(&q, &table, s, a.n) {
            Ok(samples) => Ok(RecurrenceRow { interval: i, range: j, s, samples, status: "ok".into() }),
            Err(e) if e.is_internal() => Err(CliError::Domain(e)),
            Err(e) => Ok(RecurrenceRow { interval: i, range: j, s, samples: vec![], status: e.to_string() }),
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let body = match a.format {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let header = ["interval", "lo", "hi", "s", "component", "d", "min_tail", "argmin_n", "connection_found", "connection_n", "homology_defect", "status"];
            let mut out = Vec::new();
            for r in &rows {
                let head = vec![r.interval.to_string(), f(r.range.lo), f(r.range.hi), f(r.s)];
                if r.samples.is_empty() {
                    let mut v = head.clone();
                    v.extend(std::iter::repeat(String::new()).take(7));
                    v.push(r.status.clone());
                    out.push(v);
                }
                for c in &r.samples {
                    let mut v = head.clone();
                    v.extend([
                        c.component.to_string(),
                        c.d.to_string(),
                        f(c.record.min_tail),
                        c.record.argmin_n.to_string(),
                        c.record.connection_found.to_string(),
                        c.record.connection_n.map(|n| n.to_string()).unwrap_or_default(),
                        f(c.homology_defect),
                        r.status.clone(),
                    ]);
                    out.push(v);
                }
            }
            csv_text(&header, out)?
        }
        Format::Svg => return Err(unsupported("recurrence", a.format)),
    };
    emit(&cfg.out, &body)
}

#[derive(Debug, Serialize)]
struct BirkhoffRecord {
    interval: usize,
    s: f64,
    component: usize,
    time: f64,
    area_fractions: Vec<f64>,
    /// averages[start][box]
    averages: Vec<Vec<f64>>,
    max_area_deviation: f64,
    max_spread: f64,
    hit_singularity: bool,
}

fn birkhoff(a: &BirkhoffArgs) -> Result<(), CliError> {
    let cfg = RunConfig::new(&a.io, &a.interval, tolerances::SIGN_MARGIN)?;
    if !(a.horizon > 0.0) || a.samples == 0 || a.boxes == 0 {
        return Err(CliError::Usage("--horizon, --samples and --boxes must be positive".into()));
    }
    let table = load_table(&cfg.table)?;
    let q = Quadrature::new(table.family);
    let part = interval_partition(&table);
    let picked = cfg.intervals.pick_for(&part, a.s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut recs = Vec::new();
    for (i, j) in picked {
        let s = a.s.unwrap_or(j.midpoint());
        let sample = surfaces_at(&q, &table, s)?;
        for (c, m) in sample.surfaces.iter().enumerate() {
            let boxes = sample_boxes(m, a.boxes).map_err(domain)?;
            let area = m.area();
            let fractions: Vec<f64> = boxes.iter().map(|b| b.area() / area).collect();
            let starts: Vec<_> = (0..a.samples).map(|_| start_point(m, rng.gen(), rng.gen(), rng.gen())).collect();
            let time = a.horizon * m.diameter();
            let runs = starts.par_iter().map(|&p| birkhoff_average(m, &boxes, p, time)).collect::<Result<Vec<_>, _>>().map_err(domain)?;
            let averages: Vec<Vec<f64>> = runs.iter().map(|r| r.averages.clone()).collect();
            let max_area_deviation = averages.iter().flat_map(|v| v.iter().zip(&fractions).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
            let max_spread = (0..boxes.len())
                .map(|b| {
                    let col = averages.iter().map(|v| v[b]);
                    col.clone().fold(f64::NEG_INFINITY, f64::max) - col.fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            recs.push(BirkhoffRecord {
                interval: i,
                s,
                component: c,
                time,
                area_fractions: fractions,
                averages,
                max_area_deviation,
                max_spread,
                hit_singularity: runs.iter().any(|r| r.hit_singularity),
            });
        }
    }
    let body = match a.format {
        Format::Json => json(&recs)?,
        Format::Csv => {
            let header = ["interval", "s", "component", "start", "box", "area_fraction", "average"];
            let mut out = Vec::new();
            for r in &recs {
                for (k, avg) in r.averages.iter().enumerate() {
                    for (b, v) in avg.iter().enumerate() {
                        out.push(vec![r.interval.to_string(), f(r.s), r.component.to_string(), k.to_string(), b.to_string(), f(r.area_fractions[b]), f(*v)]);
                    }
                }
            }
            csv_text(&header, out)?
        }
        Format::Svg => return Err(unsupported("birkhoff", a.format)),
    };
    emit(&cfg.out, &body)
}

fn trace(a: &TraceArgs) -> Result<(), CliError> {
    let cfg = RunConfig::new(&a.io, "auto", tolerances::SIGN_MARGIN)?;
    if !(a.horizon > 0.0) {
        return Err(CliError::Usage("--horizon must be positive".into()));
    }
    let table = load_table(&cfg.table)?;
    let q = Quadrature::new(table.family);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let state = table.state_on_caustic(a.s, rng.gen(), rng.gen())?;
    let orbit = billiard_trace(&table, &state, a.horizon)?;
    // vertices of the orbit with their arc-length positions
    let mut pts = Vec::with_capacity(orbit.segments.len() + 1);
    let mut t = 0.0;
    if let Some(g) = orbit.segments.first() {
        pts.push((0.0, g.start, g.caustic));
    }
    for g in &orbit.segments {
        t += (g.end[0] - g.start[0]).hypot(g.end[1] - g.start[1]);
        pts.push((t, g.end, g.caustic));
    }
    let flat = pts.iter().map(|(_, p, _)| flatten_point_with(&q, &table, a.s, *p)).collect::<Result<Vec<_>, _>>().map_err(domain)?;
    let body = match a.format {
        Format::Csv => {
            let header = ["index", "t", "x", "y", "flat_u", "flat_v", "caustic"];
            let rows = pts.iter().zip(&flat).enumerate().map(|(k, ((t, p, c), w))| vec![k.to_string(), f(*t), f(p[0]), f(p[1]), f(w[0]), f(w[1]), f(*c)]);
            csv_text(&header, rows)?
        }
        Format::Svg if a.flat => {
            let ell = q.ell(a.s, 0).map_err(domain)?.value;
            render::flat_orbit_scene(&flat, ell).to_svg()
        }
        Format::Svg => render::trajectory_scene(&table, &orbit, 64).to_svg(),
        Format::Json => json(&orbit)?,
    };
    emit(&cfg.out, &body)
}

fn table_cmd(c: &TableCommand) -> Result<(), CliError> {
    match c {
        TableCommand::Validate(io) => {
            let t = load_table(&io.table)?;
            emit(&io.out, &json(&t.to_spec())?)
        }
        TableCommand::Render(io) => {
            let t = load_table(&io.table)?;
            emit(&io.out, &render::table_scene(&t, 64).to_svg())
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("NB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        // a second call in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads();
    match &cli.command {
        Command::Table(c) => table_cmd(c),
        Command::Flatten(a) => flatten(a, false),
        Command::Surface(a) => flatten(a, true),
        Command::Criterion(a) => criterion(a),
        Command::Recurrence(a) => recurrence(a),
        Command::Birkhoff(a) => birkhoff(a),
        Command::Trace(a) => trace(a),
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("usage: nibbled <table|flatten|surface|criterion|recurrence|birkhoff|trace> [OPTIONS] (see --help)");
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn io() -> IoArgs {
        IoArgs { table: "t.json".into(), out: None }
    }

    #[test]
    fn selection_parsing() {
        assert_eq!(Selection::parse("auto").unwrap(), Selection::All);
        assert_eq!(Selection::parse("3").unwrap(), Selection::One(3));
        assert!(matches!(Selection::parse("x"), Err(CliError::Usage(_))));
    }

    #[test]
    fn sign_margin_only_tightens() {
        assert!(RunConfig::new(&io(), "auto", 10.0).is_err());
        assert_eq!(RunConfig::new(&io(), "auto", 1e6).unwrap().sign_margin, 1e6);
    }

    #[test]
    fn given_s_picks_its_interval() {
        let part = ParameterPartition { breakpoints: vec![0.5, 1.0, 2.0], intervals: vec![ParamInterval { lo: 0.5, hi: 1.0 }, ParamInterval { lo: 1.0, hi: 2.0 }] };
        assert_eq!(Selection::All.pick_for(&part, Some(1.5)).unwrap()[0].0, 1);
        assert_eq!(Selection::All.pick_for(&part, None).unwrap().len(), 2);
        assert!(Selection::All.pick_for(&part, Some(0.1)).is_err());
    }
}
