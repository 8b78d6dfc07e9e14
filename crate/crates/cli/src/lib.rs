//! Argument parsing and command dispatch for the `petty` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 geometric rejection (non-convex, non-positive, aliased or singular body).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use petty_core::body::{certify, ellipsoid_body, matrix_from_rows, parse_matrix, volume, SupportBody};
use petty_core::harmonics::{box_multiplier, SpectralField};
use petty_core::projection::{petty, projection_iterate};
use petty_core::sphere::{build_grid, SphereGrid};
use petty_core::stability::{deficit, dym_spectrum, lambda_l, spectrum_csv};
use petty_core::transforms::{cosine_multiplier, radon_multiplier};
use petty_core::verify::{run_all, VerifyConfig};
use petty_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_GEOMETRY: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "petty", version, about = "Projection bodies, the Petty functional and its linearization on S²")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every acceptance suite; exit 1 if any fails.
    Verify(VerifyArgs),
    /// Petty functional and fixed-point residual of a body.
    Petty(BodyArgs),
    /// Both sides of the quadratic deficit identity for a body.
    Deficit(BodyArgs),
    /// Support function of the k-th projection body.
    Iterate(IterateArgs),
    /// Multiplier table of the transforms and linearized operators.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Ambient dimension.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Spectral truncation degree.
    #[arg(long = "lmax", default_value_t = 16)]
    pub l_max: usize,
    /// Quadrature grid degree (default 2·lmax).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false, args = ["body", "ellipsoid"])]
pub struct BodyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Body file, or inline JSON when the value starts with `{`.
    #[arg(long)]
    pub body: Option<String>,
    /// Ellipsoid `φB`, given as `diag(a,b,c)` or a JSON 3×3 array.
    #[arg(long)]
    pub ellipsoid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

/// A command that could not produce its artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotConvex { .. } | Error::NonPositive { .. } | Error::Aliasing(_) | Error::Singular(_) => {
            EXIT_GEOMETRY
        }
        _ => EXIT_USAGE,
    }
}

/// What a successful run writes: the artifact, diagnostic lines for stderr,
/// and the exit code (nonzero only for a failed verification).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub diagnostics: Vec<String>,
    pub code: u8,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self { output, diagnostics: Vec::new(), code: EXIT_OK }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ConfigEcho {
    command: &'static str,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    l_max: usize,
    grid_degree: usize,
    seed: u64,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    body: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
}

impl ConfigEcho {
    fn new(command: &'static str, common: &Common) -> Self {
        Self {
            command,
            n: common.n,
            m: None,
            l_max: common.l_max,
            grid_degree: grid_degree(common),
            seed: common.seed,
            format: common.format,
            body: None,
            k: None,
        }
    }
}

fn grid_degree(common: &Common) -> usize {
    common.grid.unwrap_or(2 * common.l_max)
}

fn check_common(common: &Common, geometric: bool) -> Result<(), Failure> {
    if common.n < 3 {
        return Err(Failure::usage(format!("n must be ≥ 3, got {}", common.n)));
    }
    if geometric && common.n != 3 {
        return Err(Failure::usage(format!(
            "geometric commands need n = 3, got {}",
            common.n
        )));
    }
    let grid = grid_degree(common);
    if grid < 2 * common.l_max {
        return Err(Failure::usage(format!(
            "grid too coarse: degree {grid} < 2·lmax = {}",
            2 * common.l_max
        )));
    }
    Ok(())
}

fn envelope(config: &ConfigEcho, report: impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(&json!({ "config": config, "report": report }))
        .expect("report serializes");
    text.push('\n');
    text
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Petty(args) => cmd_petty(args),
        Command::Deficit(args) => cmd_deficit(args),
        Command::Iterate(args) => cmd_iterate(args),
        Command::Spectrum(args) => cmd_spectrum(args),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let common = &args.common;
    check_common(common, true)?;
    let config = VerifyConfig {
        n: common.n,
        m: args.m,
        l_max: common.l_max,
        grid_degree: grid_degree(common),
        seed: common.seed,
    };
    let report = run_all(&config)?;
    let mut echo = ConfigEcho::new("verify", common);
    echo.m = Some(args.m);
    let output = match common.format {
        Format::Json => envelope(&echo, &report),
        Format::Csv => {
            let mut out = String::from("id,name,passed,quantity,value\n");
            for c in &report.criteria {
                for (q, v) in &c.measured {
                    let _ = writeln!(out, "{},{},{},{q},{v:.16e}", c.id, c.name, c.passed);
                }
            }
            out
        }
    };
    Ok(Outcome {
        output,
        diagnostics: report.criteria.iter().map(|c| c.line()).collect(),
        code: if report.all_passed { EXIT_OK } else { EXIT_FAIL },
    })
}

/// Body description accepted by `--body`.
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Field(SpectralField),
    Ellipsoid(String),
}

/// Accepts a spectral field, `{"ellipsoid": …}` with a 3×3 array or a
/// `diag(…)` string, or any object carrying the field under `"body"` (the
/// output of `iterate`).
pub fn parse_body_json(text: &str) -> Result<BodySpec, Failure> {
    let value: Value = serde_json::from_str(text).map_err(|e| Failure::usage(format!("body JSON: {e}")))?;
    body_from_value(&value)
}

fn body_from_value(value: &Value) -> Result<BodySpec, Failure> {
    let Some(object) = value.as_object() else {
        return Err(Failure::usage("body JSON must be an object"));
    };
    if let Some(e) = object.get("ellipsoid") {
        return match e {
            Value::String(s) => Ok(BodySpec::Ellipsoid(s.clone())),
            other => Ok(BodySpec::Ellipsoid(other.to_string())),
        };
    }
    if let Some(inner) = object.get("body").or_else(|| object.get("report").and_then(|r| r.get("body"))) {
        return body_from_value(inner);
    }
    Ok(BodySpec::Field(SpectralField::from_json(&value.to_string())?))
}

fn read_source(args: &BodyArgs) -> Result<(BodySpec, String), Failure> {
    if let Some(matrix) = &args.ellipsoid {
        return Ok((BodySpec::Ellipsoid(matrix.clone()), format!("ellipsoid {matrix}")));
    }
    let source = args.body.as_deref().ok_or_else(|| Failure::usage("need --body or --ellipsoid"))?;
    if source.trim_start().starts_with('{') {
        return Ok((parse_body_json(source)?, "inline".into()));
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| Failure::usage(format!("cannot read body file {source}: {e}")))?;
    Ok((parse_body_json(&text)?, source.to_string()))
}

/// Zero-pads or checks the field against `l_max`; content above `l_max`
/// is rejected rather than silently dropped.
pub fn fit_field(field: &SpectralField, l_max: usize) -> Result<SpectralField, Failure> {
    if field.n() != 3 {
        return Err(Error::Dimension(field.n()).into());
    }
    let tail = field.tail_norm(l_max);
    if tail > 0.0 {
        return Err(Failure::usage(format!(
            "body has content of norm {tail:e} above lmax = {l_max}; raise --lmax"
        )));
    }
    Ok(field.with_l_max(l_max))
}

fn load_body(args: &BodyArgs) -> Result<(SupportBody, String), Failure> {
    let common = &args.common;
    check_common(common, true)?;
    let (spec, description) = read_source(args)?;
    let grid: Arc<SphereGrid> = Arc::new(build_grid(grid_degree(common), common.n)?);
    let body = match spec {
        BodySpec::Ellipsoid(text) => {
            let phi = if text.trim_start().starts_with('[') {
                let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
                    .map_err(|e| Failure::usage(format!("ellipsoid matrix: {e}")))?;
                matrix_from_rows(&rows)?
            } else {
                parse_matrix(&text)?
            };
            ellipsoid_body(&phi, &grid, common.l_max)?
        }
        BodySpec::Field(field) => certify(&fit_field(&field, common.l_max)?, &grid)?,
    };
    Ok((body, description))
}

fn key_value_csv(rows: &[(&str, String, f64)]) -> String {
    let mut out = String::from("quantity,k,value\n");
    for (q, k, v) in rows {
        let _ = writeln!(out, "{q},{k},{v:.16e}");
    }
    out
}

pub fn cmd_petty(args: &BodyArgs) -> Result<Outcome, Failure> {
    let (body, description) = load_body(args)?;
    let report = petty(&body)?;
    let mut echo = ConfigEcho::new("petty", &args.common);
    echo.body = Some(description);
    Ok(Outcome::ok(match args.common.format {
        Format::Json => envelope(&echo, &report),
        Format::Csv => key_value_csv(&[
            ("V_K", String::new(), report.volume),
            ("V_PiK", String::new(), report.projection_volume),
            ("petty", String::new(), report.petty),
            ("c", String::new(), report.c),
            ("residual_sup", String::new(), report.residual_sup),
            ("residual_l2", String::new(), report.residual_l2),
        ]),
    }))
}

pub fn cmd_deficit(args: &BodyArgs) -> Result<Outcome, Failure> {
    let (body, description) = load_body(args)?;
    let report = deficit(&body)?.with_seed(args.common.seed);
    let mut echo = ConfigEcho::new("deficit", &args.common);
    echo.body = Some(description);
    Ok(Outcome::ok(match args.common.format {
        Format::Json => envelope(&echo, &report),
        Format::Csv => {
            let mut rows = vec![
                ("lhs", String::new(), report.lhs),
                ("rhs", String::new(), report.rhs),
                ("equality_case", String::new(), f64::from(u8::from(report.equality_case))),
            ];
            rows.extend(report.per_degree.iter().map(|t| ("term", t.k.to_string(), t.term)));
            key_value_csv(&rows)
        }
    }))
}

#[derive(Serialize)]
struct IterateReport<'a> {
    k: usize,
    volume: f64,
    body: &'a SpectralField,
}

pub fn cmd_iterate(args: &IterateArgs) -> Result<Outcome, Failure> {
    if args.k == 0 {
        return Err(Failure::usage("--k must be ≥ 1"));
    }
    let (body, description) = load_body(&args.body)?;
    let image = projection_iterate(&body, args.k)?;
    let mut echo = ConfigEcho::new("iterate", &args.body.common);
    echo.body = Some(description);
    echo.k = Some(args.k);
    Ok(Outcome::ok(match args.body.common.format {
        Format::Json => envelope(
            &echo,
            IterateReport { k: args.k, volume: volume(&image), body: image.field() },
        ),
        Format::Csv => {
            let field = image.field();
            let mut out = String::from("k,l,c\n");
            for k in 0..=field.l_max() {
                for (i, c) in field.degree(k).iter().enumerate() {
                    let _ = writeln!(out, "{k},{},{c:.16e}", i + 1);
                }
            }
            out
        }
    }))
}

#[derive(Serialize)]
struct SpectrumRow {
    n: usize,
    k: usize,
    radon: f64,
    cosine: f64,
    #[serde(rename = "box")]
    box_: f64,
    mu_dym: f64,
    #[serde(rename = "lambda_L")]
    lambda_l: f64,
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<Outcome, Failure> {
    let common = &args.common;
    check_common(common, false)?;
    let (n, l_max) = (common.n, common.l_max);
    let output = match common.format {
        Format::Csv => spectrum_csv(n, args.m, l_max)?,
        Format::Json => {
            let spectrum = dym_spectrum(n, args.m, l_max)?;
            let rows: Vec<SpectrumRow> = (0..=l_max)
                .map(|k| SpectrumRow {
                    n,
                    k,
                    radon: radon_multiplier(n, k),
                    cosine: cosine_multiplier(n, k),
                    box_: box_multiplier(n, k),
                    mu_dym: spectrum.mu(k),
                    lambda_l: lambda_l(n, k),
                })
                .collect();
            let mut echo = ConfigEcho::new("spectrum", common);
            echo.m = Some(args.m);
            envelope(&echo, json!({ "scale": spectrum.scale, "kernel_degrees": spectrum.kernel_degrees, "rows": rows }))
        }
    };
    Ok(Outcome::ok(output))
}

/// Output path of the parsed command.
pub fn out_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::Verify(a) => a.common.out.as_ref(),
        Command::Petty(a) | Command::Deficit(a) => a.common.out.as_ref(),
        Command::Iterate(a) => a.body.common.out.as_ref(),
        Command::Spectrum(a) => a.common.out.as_ref(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("petty").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn geometry_errors_map_to_three() {
        assert_eq!(exit_code(&Error::NotConvex { node: 0, margin: -1.0 }), EXIT_GEOMETRY);
        assert_eq!(exit_code(&Error::Aliasing(1.0)), EXIT_GEOMETRY);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::GridTooCoarse { exact: 1, required: 2 }), EXIT_USAGE);
    }

    #[test]
    fn body_json_forms() {
        let field = r#"{"n":3,"L_max":0,"coeffs":[{"k":0,"l":1,"c":3.5449077018110318}]}"#;
        assert!(matches!(parse_body_json(field).unwrap(), BodySpec::Field(_)));
        assert_eq!(
            parse_body_json(r#"{"ellipsoid":[[1,0,0],[0,2,0],[0,0,1]]}"#).unwrap(),
            BodySpec::Ellipsoid("[[1,0,0],[0,2,0],[0,0,1]]".into())
        );
        let wrapped = format!(r#"{{"config":{{}},"report":{{"k":1,"body":{field}}}}}"#);
        assert!(matches!(parse_body_json(&wrapped).unwrap(), BodySpec::Field(_)));
        assert_eq!(parse_body_json("[1,2]").unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn fields_above_lmax_are_rejected() {
        let mut f = SpectralField::constant(3, 6, 1.0).unwrap();
        assert_eq!(fit_field(&f, 8).unwrap().l_max(), 8);
        f.set(6, 1, 1e-3).unwrap();
        assert_eq!(fit_field(&f, 4).unwrap_err().code, EXIT_USAGE);
    }

    #[test]
    fn config_checks() {
        let cli = parse(&["spectrum", "--n", "2"]);
        assert_eq!(run(&cli).unwrap_err().code, EXIT_USAGE);
        let cli = parse(&["petty", "--ellipsoid", "diag(1,1,1)", "--lmax", "8", "--grid", "10"]);
        assert_eq!(run(&cli).unwrap_err().code, EXIT_USAGE);
        let cli = parse(&["petty", "--n", "4", "--ellipsoid", "diag(1,1,1)"]);
        assert_eq!(run(&cli).unwrap_err().code, EXIT_USAGE);
        assert!(Cli::try_parse_from(["petty", "petty", "--body", "a", "--ellipsoid", "b"]).is_err());
    }

    #[test]
    fn spectrum_for_higher_dimensions() {
        let out = run(&parse(&["spectrum", "--n", "5", "--lmax", "6", "--format", "csv"])).unwrap();
        assert_eq!(out.output.lines().count(), 8);
        assert!(out.output.lines().nth(3).unwrap().starts_with("5,2,"));
    }
}
