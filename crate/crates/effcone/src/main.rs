//! Command-line front end.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use effcone::beilinson::SignReading;
use effcone::chern::{fmt_q, parse_q, Chern, Slope};
use effcone::config::{Config, OutputFormat};
use effcone::engine::Engine;
use effcone::error::Error;
use effcone::exceptional::{exceptional_from_slope, ExceptionalBundle, ExceptionalPair};
use effcone::family::{Family, FamilyCheck, FamilyRunner};
use effcone::golden::check_row;
use effcone::report::{
    table_order, tex_table, CheckRecord, ConeReport, ResolutionRecord, TableRow,
};

const EXIT_PARSE: u8 = 2;
const EXIT_COVERAGE: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_INCOMPLETE: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "effcone",
    version,
    about = "Effective cones of moduli spaces of sheaves on P1 x P1"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Largest rank of exceptional bundles generated.
    #[arg(long, global = true)]
    rank_bound: Option<i64>,
    /// Grid step of the curve scan, as `p/q`.
    #[arg(long, global = true)]
    scan_step: Option<String>,
    /// Cells of padding around the scanned region.
    #[arg(long, global = true)]
    padding: Option<i64>,
    /// Largest number of exceptional twist classes.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Cache directory for generated databases.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Reading of the mixed-case sign condition.
    #[arg(long, global = true, value_parser = parse_reading)]
    sign_reading: Option<SignReading>,
    /// Treat an incomplete cone as an error.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Target {
    /// Hilbert scheme of `n` points.
    #[arg(long)]
    hilbert: Option<i64>,
    /// Character `rank c1a c1b ch2`, entries rational.
    #[arg(long = "char", num_args = 4, value_names = ["R", "C1A", "C1B", "CH2"], allow_negative_numbers = true)]
    character: Option<Vec<String>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value of the delta surface at a slope and the bundles attaining it.
    Delta {
        #[arg(long, num_args = 2, value_names = ["MU1", "MU2"], allow_negative_numbers = true, required = true)]
        mu: Vec<String>,
    },
    /// Controlling bundles and extremal pairs of a character.
    Pairs {
        #[command(flatten)]
        target: Target,
    },
    /// The resolution attached to a pair, as `O(a,b)`, `E_{p/q,r/s}` or `p/q,r/s`.
    Resolve {
        #[command(flatten)]
        target: Target,
        #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], required = true, allow_hyphen_values = true)]
        pair: Vec<String>,
    },
    /// Extremal rays and facets of the effective cone.
    Cone {
        #[command(flatten)]
        target: ConeTarget,
    },
    /// The table of Hilbert-scheme cones over a range `a..b`.
    Table {
        range: String,
        /// Compare with the embedded published table.
        #[arg(long)]
        check: bool,
    },
    /// Checks an infinite family (or `all`) over a range of `k`.
    Family {
        id: String,
        /// Range `a..b` of `k`; defaults to the family's standard range.
        #[arg(long)]
        k: Option<String>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ConeTarget {
    /// Hilbert scheme of `n` points.
    #[arg(long)]
    hilbert: Option<i64>,
    /// Character `rank c1a c1b ch2`, entries rational.
    #[arg(long = "char", num_args = 4, value_names = ["R", "C1A", "C1B", "CH2"], allow_negative_numbers = true)]
    character: Option<Vec<String>>,
    /// Range `a..b` of Hilbert schemes.
    #[arg(long)]
    table: Option<String>,
}

fn parse_reading(s: &str) -> Result<SignReading, String> {
    match s {
        "as-printed" => Ok(SignReading::AsPrinted),
        "mirrored" => Ok(SignReading::Mirrored),
        _ => Err("expected `as-printed` or `mirrored`".into()),
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            Error::Coverage(_) | Error::Resource(_) | Error::CompletionNotFound(_) => EXIT_COVERAGE,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

/// Standard output that goes quiet once the reader hangs up, so piping into
/// `head` ends the program cleanly.
struct Out {
    closed: bool,
}

impl Out {
    fn write_fmt(&mut self, args: fmt::Arguments<'_>) {
        if self.closed {
            return;
        }
        let mut stdout = io::stdout().lock();
        if let Err(e) = stdout.write_fmt(args).and_then(|()| stdout.flush()) {
            if e.kind() != io::ErrorKind::BrokenPipe {
                eprintln!("error: writing output: {e}");
            }
            self.closed = true;
        }
    }
}

fn build_config(o: &GlobalOpts) -> Result<Config, Error> {
    let mut cfg = match &o.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(v) = o.rank_bound {
        cfg.rank_bound = v;
    }
    if let Some(v) = &o.scan_step {
        cfg.scan_step = parse_q(v)?;
    }
    if let Some(v) = o.padding {
        cfg.padding = v;
    }
    if let Some(v) = o.cap {
        cfg.cap = v;
    }
    if let Some(v) = o.format {
        cfg.output = v;
    }
    if let Some(v) = &o.cache_dir {
        cfg.cache_dir = Some(v.clone());
    }
    if let Some(v) = o.sign_reading {
        cfg.sign_reading = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<i64>, Error> {
    let bad = || Error::Parse(format!("expected a range `a..b`, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn parse_character(v: &[String]) -> Result<Chern, Error> {
    let q: Vec<_> = v.iter().map(|s| parse_q(s)).collect::<Result<_, _>>()?;
    Ok(Chern::new(
        q[0].clone(),
        q[1].clone(),
        q[2].clone(),
        q[3].clone(),
    ))
}

fn target_character(hilbert: Option<i64>, character: &Option<Vec<String>>) -> Result<Chern, Error> {
    match (hilbert, character) {
        (Some(n), _) => {
            if n < 1 {
                return Err(Error::Parse("the number of points must be positive".into()));
            }
            Ok(Chern::hilbert_scheme(n))
        }
        (None, Some(v)) => parse_character(v),
        (None, None) => Err(Error::Parse("a target character is required".into())),
    }
}

/// Parses `O(a,b)`, `E_{p/q,r/s}` or `p/q,r/s`.
fn parse_bundle(s: &str) -> Result<ExceptionalBundle, Error> {
    let t = s.trim();
    let inner = if let Some(x) = t.strip_prefix("O(").and_then(|x| x.strip_suffix(')')) {
        x
    } else if let Some(x) = t.strip_prefix("E_{").and_then(|x| x.strip_suffix('}')) {
        x
    } else {
        t
    };
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("not a bundle: {s:?}")))?;
    exceptional_from_slope(&Slope::new(parse_q(a)?, parse_q(b)?))
}

fn print_structured<T: Serialize>(out: &mut Out, value: &T) {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("output serializes")
    );
}

fn emit_report(out: &mut Out, report: &ConeReport, format: OutputFormat) {
    match format {
        OutputFormat::Text => write!(out, "{}", report.to_text()),
        OutputFormat::Json => writeln!(out, "{}", report.to_json()),
        OutputFormat::Tex => write!(out, "{}", report.to_tex()),
    }
}

#[derive(Serialize)]
struct DeltaOutput {
    mu: [String; 2],
    value: String,
    attainers: Vec<String>,
    max_rank: i64,
    warning: Option<String>,
}

fn cmd_delta(out: &mut Out, engine: &Engine, mu: &[String]) -> Outcome {
    let mu = Slope::new(parse_q(&mu[0])?, parse_q(&mu[1])?);
    let d = engine.delta(&mu)?;
    let bound = engine.config.rank_bound;
    let warning = (d.max_rank() > 0 && d.max_rank() + 2 >= bound).then(|| {
        format!(
            "maximum attained at rank {} within 2 of the rank bound {bound}",
            d.max_rank()
        )
    });
    let d_out = DeltaOutput {
        mu: [fmt_q(&mu.mu1), fmt_q(&mu.mu2)],
        value: fmt_q(&d.value),
        attainers: d.attainers.iter().map(|e| e.to_string()).collect(),
        max_rank: d.max_rank(),
        warning,
    };
    match engine.config.output {
        OutputFormat::Json => print_structured(out, &d_out),
        _ => {
            writeln!(
                out,
                "delta({}, {}) = {}",
                d_out.mu[0], d_out.mu[1], d_out.value
            );
            writeln!(
                out,
                "attained by: {}",
                if d_out.attainers.is_empty() {
                    "none".into()
                } else {
                    d_out.attainers.join(", ")
                }
            );
            if let Some(w) = &d_out.warning {
                writeln!(out, "warning: {w}");
            }
        }
    }
    Ok(0)
}

fn cmd_pairs(out: &mut Out, engine: &Engine, target: &Target) -> Outcome {
    let xi = target_character(target.hilbert, &target.character)?;
    if target.hilbert == Some(1) {
        return Ok(one_point_notice(out));
    }
    let analysis = engine.analyze(&xi)?;
    let comp = effcone::cone::ConeComputation {
        analysis,
        rays: Vec::new(),
        cone: None,
        notes: Vec::new(),
        warnings: Vec::new(),
    };
    let report = ConeReport::new(&comp, engine.config.rank_bound);
    match engine.config.output {
        OutputFormat::Json => print_structured(out, &(&report.controlling, &report.pairs)),
        _ => {
            writeln!(
                out,
                "controlling bundles: {}",
                report.controlling.join(", ")
            );
            for p in &report.pairs {
                let c = &p.character;
                writeln!(
                    out,
                    "{{{}, {}}}  point ({}, {}) Delta {}  character ({}, ({}, {}), {})  {}  assumed {:?}",
                    p.pair[0],
                    p.pair[1],
                    p.mu_plus[0],
                    p.mu_plus[1],
                    p.delta_plus,
                    c.rank,
                    c.c1a,
                    c.c1b,
                    c.ch2,
                    p.divisor,
                    p.assumed
                );
            }
        }
    }
    Ok(0)
}

fn cmd_resolve(out: &mut Out, engine: &Engine, target: &Target, pair: &[String]) -> Outcome {
    let xi = target_character(target.hilbert, &target.character)?;
    let p = ExceptionalPair::new(parse_bundle(&pair[0])?, parse_bundle(&pair[1])?)?;
    let res = engine.resolve(&xi, &p)?;
    let name = if target.hilbert.is_some() { "I_Z" } else { "U" };
    let rec = ResolutionRecord::new(&res, name);
    match engine.config.output {
        OutputFormat::Json => print_structured(out, &rec),
        _ => {
            writeln!(out, "{} case, coil ({})", rec.case, rec.coil.join(", "));
            writeln!(out, "{}", rec.arrows);
            if let Some(k) = rec.kronecker {
                writeln!(
                    out,
                    "Kronecker N = {}, dims ({}, {}), expected dimension {}",
                    k.n, k.a, k.b, k.edim
                );
            }
        }
    }
    Ok(0)
}

fn one_point_notice(out: &mut Out) -> u8 {
    writeln!(out, "the Hilbert scheme of one point is P1 x P1 itself; its effective cone is spanned by H1 and H2");
    0
}

fn cmd_cone(out: &mut Out, engine: &Engine, target: &ConeTarget, strict: bool) -> Outcome {
    if let Some(r) = &target.table {
        return cmd_table(out, engine, r, false, strict);
    }
    if target.hilbert == Some(1) {
        return Ok(one_point_notice(out));
    }
    let xi = target_character(target.hilbert, &target.character)?;
    let comp = engine.cone(&xi)?;
    let report = ConeReport::new(&comp, engine.config.rank_bound);
    emit_report(out, &report, engine.config.output);
    Ok(if strict && comp.incomplete() {
        EXIT_INCOMPLETE
    } else {
        0
    })
}

fn cmd_table(out: &mut Out, engine: &Engine, range: &str, check: bool, strict: bool) -> Outcome {
    let range = parse_range(range)?;
    if *range.start() < 2 {
        return Err(Error::Parse("the table starts at n = 2".into()).into());
    }
    let mut rows = Vec::new();
    for n in range {
        let comp = engine.hilbert(n)?;
        let rays = table_order(&comp.extremal_rays());
        let check = if check {
            check_row(n, &rays).map(|c| CheckRecord::from(&c))
        } else {
            None
        };
        rows.push(TableRow {
            n,
            rays: rays.iter().map(|r| r.name()).collect(),
            check,
            warnings: comp.warnings.clone(),
        });
    }
    match engine.config.output {
        OutputFormat::Json => print_structured(out, &rows),
        OutputFormat::Tex => {
            let t: Vec<(String, Vec<String>)> = rows
                .iter()
                .map(|r| (r.n.to_string(), r.rays.clone()))
                .collect();
            write!(out, "{}", tex_table(&t));
        }
        OutputFormat::Text => {
            for r in &rows {
                let status = match &r.check {
                    Some(c) if c.passed => "  [pass]".to_string(),
                    Some(c) => format!("  [FAIL missing {:?} extra {:?}]", c.missing, c.extra),
                    None if check => "  [not tabulated]".to_string(),
                    None => String::new(),
                };
                writeln!(out, "{}: {}{status}", r.n, r.rays.join(", "));
                for w in &r.warnings {
                    writeln!(out, "  warning: {w}");
                }
            }
        }
    }
    let mismatch = rows
        .iter()
        .any(|r| r.check.as_ref().is_some_and(|c| !c.passed));
    let incomplete = rows.iter().any(|r| !r.warnings.is_empty());
    Ok(if mismatch {
        EXIT_MISMATCH
    } else if strict && incomplete {
        EXIT_INCOMPLETE
    } else {
        0
    })
}

fn cmd_family(out: &mut Out, engine: &Engine, id: &str, k: &Option<String>) -> Outcome {
    let families: Vec<Family> = if id == "all" {
        Family::ALL.to_vec()
    } else {
        vec![id.parse()?]
    };
    let explicit = k.as_deref().map(parse_range).transpose()?;
    let mut runner = FamilyRunner::new(engine);
    let mut all: Vec<FamilyCheck> = Vec::new();
    for f in families {
        let ks = explicit.clone().unwrap_or_else(|| f.default_range());
        all.extend(runner.run(f, ks)?);
    }
    match engine.config.output {
        OutputFormat::Json => print_structured(out, &all),
        _ => {
            for c in &all {
                let tag = if c.passed { "pass" } else { "FAIL" };
                writeln!(
                    out,
                    "[{tag}] {} k={} n={}: {}  ({})",
                    c.family, c.k, c.n, c.statement, c.detail
                );
            }
        }
    }
    Ok(if all.iter().all(|c| c.passed) {
        0
    } else {
        EXIT_MISMATCH
    })
}

fn run(out: &mut Out, cli: Cli) -> Outcome {
    let cfg = build_config(&cli.opts)?;
    let engine = Engine::new(cfg)?;
    match &cli.command {
        Command::Delta { mu } => cmd_delta(out, &engine, mu),
        Command::Pairs { target } => cmd_pairs(out, &engine, target),
        Command::Resolve { target, pair } => cmd_resolve(out, &engine, target, pair),
        Command::Cone { target } => cmd_cone(out, &engine, target, cli.opts.strict),
        Command::Table { range, check } => cmd_table(out, &engine, range, *check, cli.opts.strict),
        Command::Family { id, k } => cmd_family(out, &engine, id, k),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Out { closed: false };
    match run(&mut out, cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
