//! The `sixform` command line.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 backend
//! failure, 4 form is not of type 2, 5 evaluation domain error, 6
//! rank-deficient G₂ basis.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::acs::{self, AcsError};
use crate::classify::{self, matrix_columns_json, ClassifyError, TypeLabel};
use crate::exterior::{standard, ExteriorError, KForm};
use crate::field::{self, ChartBox, FieldError, IntegrabilityOptions, NijenhuisMode};
use crate::formlang::{FormField, FormlangError, PiRational};
use crate::g2::{self, G2Error, SubspaceBasis};
use crate::linalg::Matrix;
use crate::scalar::{parse_rational, Rational, Scalar, Tolerances};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "sixform", version, about = "Classify 3-forms on R^6 and extract their complex geometry")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// exact, float, or auto (exact unless the input or a square root forces floats)
    #[arg(long, global = true, value_enum, default_value_t = BackendChoice::Auto)]
    pub backend: BackendChoice,
    /// Volume form: `standard` (dx1^...^dx6) or a JSON 6-form, inline or as a path
    #[arg(long, global = true, default_value = "standard")]
    pub theta: String,
    /// Residual tolerance; overrides SIXFORM_TOLERANCE
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub pivot_tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_band: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for point and basis batches
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Exact,
    Float,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// One JSON object per line (scans)
    Jsonl,
    Csv,
    Pretty,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// JSON form file (a single form or an array) or a .form DSL file
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// DSL text such as "dx1^dx2^dx3 + dx4^dx5^dx6", or inline JSON
    #[arg(long)]
    pub inline: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type, lambda, Q and the Delta basis
    Classify(Input),
    /// The complex structures J+ and J- of a type-2 form
    Acs(Input),
    /// A change of basis to Re(dz1^dz2^dz3)
    Normalize(Input),
    /// The (3,0)-form with the given real part
    Gamma(Input),
    #[command(subcommand)]
    Field(FieldCommand),
    #[command(subcommand)]
    G2(G2Command),
}

#[derive(Debug, Subcommand)]
pub enum FieldCommand {
    /// Classify a 3-form field on a grid
    Scan(ScanArgs),
    /// Closedness and integrability of J over a box
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub input: Input,
    /// Six comma-separated ranges `lo:hi` or fixed values; pi multiples allowed
    #[arg(long, default_value = "0,0,0,0,0,0", allow_hyphen_values = true)]
    pub r#box: String,
    /// Points per axis: one number for every non-degenerate axis, or six
    #[arg(long)]
    pub resolution: Option<String>,
    /// Scan along one coordinate (x1..x6), others fixed by --box
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long, requires = "axis", allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value = "-1:1,-1:1,-1:1,-1:1,-1:1,-1:1", allow_hyphen_values = true)]
    pub r#box: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// symbolic, fd or richardson
    #[arg(long, default_value = "symbolic")]
    pub mode: NijenhuisMode,
    #[arg(long, default_value_t = field::DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub nijenhuis_tolerance: f64,
}

#[derive(Debug, Subcommand)]
pub enum G2Command {
    /// Restrict the standard G2 form to 6-dimensional subspaces
    Restrict(RestrictArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RestrictArgs {
    /// The subspace spanned by e1..e6
    #[arg(long)]
    pub standard_slice: bool,
    /// This many random bases, drawn from --seed
    #[arg(long)]
    pub random: Option<usize>,
    /// JSON: a 7x6 array (rows), or an array of them
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Backend(String),
    #[error("{0}")]
    NotTypeTwo(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    RankDeficient(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Backend(_) => 3,
            CliError::NotTypeTwo(_) => 4,
            CliError::Domain(_) => 5,
            CliError::RankDeficient(_) => 6,
        }
    }
}

impl From<ExteriorError> for CliError {
    fn from(e: ExteriorError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FormlangError> for CliError {
    fn from(e: FormlangError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ClassifyError> for CliError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Exterior(_) | ClassifyError::NotThreeForm { .. } | ClassifyError::BadVolume => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Backend(e.to_string()),
        }
    }
}

impl From<AcsError> for CliError {
    fn from(e: AcsError) -> Self {
        match e {
            AcsError::NotTypeTwo(_) => CliError::NotTypeTwo(e.to_string()),
            AcsError::Classify(c) => c.into(),
            AcsError::Exterior(x) => x.into(),
            _ => CliError::Backend(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Domain(_) | FieldError::NegativeSqrtDomain(_) => CliError::Domain(e.to_string()),
            FieldError::NotTypeTwoAtPoint { .. } | FieldError::NotTypeTwoNearPoint { .. } => {
                CliError::NotTypeTwo(e.to_string())
            }
            FieldError::NotThreeForm(_) | FieldError::BadBox(_) => CliError::Input(e.to_string()),
            FieldError::Classify(c) => c.into(),
            FieldError::Acs(a) => a.into(),
        }
    }
}

impl From<G2Error> for CliError {
    fn from(e: G2Error) -> Self {
        match e {
            G2Error::RankDeficientBasis { .. } => CliError::RankDeficient(e.to_string()),
            G2Error::Classify(c) => c.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Parse `args` (including the program name), run, and write the report to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.global.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Backend(e.to_string())),
        },
        None => execute(&cli),
    };
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command line and return the text it prints.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let ctx = Context::new(&cli.global)?;
    match &cli.command {
        Command::Classify(input) => cmd_classify(&ctx, input),
        Command::Acs(input) => cmd_structure(&ctx, input, Structure::Acs),
        Command::Normalize(input) => cmd_structure(&ctx, input, Structure::Normalize),
        Command::Gamma(input) => cmd_structure(&ctx, input, Structure::Gamma),
        Command::Field(FieldCommand::Scan(args)) => cmd_scan(&ctx, args),
        Command::Field(FieldCommand::Check(args)) => cmd_check(&ctx, args),
        Command::G2(G2Command::Restrict(args)) => cmd_g2(&ctx, args),
    }
}

struct Context {
    backend: BackendChoice,
    theta: Theta,
    tol: Tolerances,
    seed: u64,
    format: Format,
}

#[derive(Clone)]
enum Theta {
    Exact(KForm<Rational>),
    Float(KForm<f64>),
}

impl Theta {
    fn exact(&self) -> Option<&KForm<Rational>> {
        match self {
            Theta::Exact(k) => Some(k),
            Theta::Float(_) => None,
        }
    }

    fn float(&self) -> KForm<f64> {
        match self {
            Theta::Exact(k) => k.to_float(),
            Theta::Float(k) => k.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Theta::Exact(k) if *k == standard::theta() => json!("standard"),
            Theta::Exact(k) => json!(k.to_json()),
            Theta::Float(k) => json!(k.to_json()),
        }
    }
}

impl Context {
    fn new(g: &GlobalOpts) -> Result<Context, CliError> {
        let mut tol = Tolerances::from_env();
        for (value, slot) in [(g.tolerance, &mut tol.residual), (g.pivot_tolerance, &mut tol.pivot), (g.lambda_band, &mut tol.lambda_band)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Input(format!("tolerances must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        let theta = if g.theta == "standard" {
            Theta::Exact(standard::theta())
        } else {
            let text = if g.theta.trim_start().starts_with('{') {
                g.theta.clone()
            } else {
                read(&PathBuf::from(&g.theta))?
            };
            match KForm::<Rational>::from_json_str(&text) {
                Ok(k) => Theta::Exact(k),
                Err(_) => Theta::Float(KForm::<f64>::from_json_str(&text)?),
            }
        };
        Ok(Context { backend: g.backend, theta, tol, seed: g.seed, format: g.format })
    }

    fn envelope(&self, command: &str, backend: &str, body: Value) -> Value {
        let mut v = json!({
            "command": command,
            "version": VERSION,
            "backend": backend,
            "theta": self.theta.to_json(),
            "tolerances": self.tol,
            "seed": self.seed,
        });
        if let (Value::Object(map), Value::Object(extra)) = (&mut v, body) {
            map.extend(extra);
        }
        v
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn input_text(input: &Input) -> Result<(String, bool), CliError> {
    match (&input.file, &input.inline) {
        (Some(path), _) => {
            let text = read(path)?;
            let json = path.extension().is_some_and(|e| e == "json") || looks_like_json(&text);
            Ok((text, json))
        }
        (None, Some(text)) => Ok((text.clone(), looks_like_json(text))),
        (None, None) => Err(CliError::Input("no input given".into())),
    }
}

fn looks_like_json(text: &str) -> bool {
    matches!(text.trim_start().chars().next(), Some('{' | '['))
}

/// A form read from the input, exactly when its coefficients allow it.
struct FormInput {
    exact: Option<KForm<Rational>>,
    float: KForm<f64>,
}

fn load_forms(input: &Input) -> Result<Vec<FormInput>, CliError> {
    let (text, json) = input_text(input)?;
    if json {
        let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("bad JSON: {e}")))?;
        let items = match value {
            Value::Array(items) => items,
            other => vec![other],
        };
        items
            .iter()
            .map(|v| {
                let s = v.to_string();
                match KForm::<Rational>::from_json_str(&s) {
                    Ok(k) => Ok(FormInput { float: k.to_float(), exact: Some(k) }),
                    Err(ExteriorError::Coefficient(_)) => {
                        Ok(FormInput { exact: None, float: KForm::<f64>::from_json_str(&s)? })
                    }
                    Err(e) => Err(e.into()),
                }
            })
            .collect()
    } else {
        let f = FormField::parse(&text)?;
        if f.terms().any(|(_, c)| (0..6).any(|i| c.depends_on(i))) {
            return Err(CliError::Input("this command needs constant coefficients; use `field` for fields".into()));
        }
        let exact = f.eval_exact(&std::array::from_fn(|_| PiRational::zero())).map_err(|e| CliError::Domain(e.to_string()))?;
        let float = f.eval_float(&[0.0; 6]).map_err(|e| CliError::Domain(e.to_string()))?;
        Ok(vec![FormInput { exact, float }])
    }
}

fn load_field(input: &Input) -> Result<FormField, CliError> {
    let (text, _) = input_text(input)?;
    if looks_like_json(&text) {
        let k = KForm::<Rational>::from_json_str(&text)?;
        return Ok(FormField::constant(&k));
    }
    Ok(FormField::parse(&text)?)
}

/// Which backend to use for `form`. `None` asks the caller to try exact and
/// fall back to floats.
fn pick_exact<'a>(ctx: &'a Context, form: &'a FormInput) -> Result<Option<(&'a KForm<Rational>, &'a KForm<Rational>)>, CliError> {
    match ctx.backend {
        BackendChoice::Float => Ok(None),
        BackendChoice::Exact => match (&form.exact, ctx.theta.exact()) {
            (Some(k), Some(t)) => Ok(Some((k, t))),
            _ => Err(CliError::Backend("exact backend requested but the input is not rational".into())),
        },
        BackendChoice::Auto => Ok(form.exact.as_ref().zip(ctx.theta.exact())),
    }
}

fn cmd_classify(ctx: &Context, input: &Input) -> Result<String, CliError> {
    let forms = load_forms(input)?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut backends = Vec::new();
    for form in &forms {
        let (report, label, lambda, backend) = match pick_exact(ctx, form)? {
            Some((k, t)) => {
                let r = classify::classify(k, Some(t), &ctx.tol)?;
                (r.to_json(), r.label, r.lambda.to_coef_string(), "exact")
            }
            None => {
                let r = classify::classify(&form.float, Some(&ctx.theta.float()), &ctx.tol)?;
                (r.to_json(), r.label, r.lambda.to_coef_string(), "float")
            }
        };
        reports.push(report);
        rows.push((label, lambda, backend));
        backends.push(backend);
    }
    let backend = summary_backend(&backends);
    Ok(match ctx.format {
        Format::Json | Format::Jsonl => {
            json_text(&ctx.envelope("classify", backend, json!({ "reports": reports })), ctx.format)
        }
        Format::Csv => {
            let mut s = String::from("index,type,lambda,backend\n");
            for (k, (label, lambda, b)) in rows.iter().enumerate() {
                s.push_str(&format!("{k},{label},{lambda},{b}\n"));
            }
            s
        }
        Format::Pretty => {
            let mut s = String::new();
            for (label, lambda, b) in &rows {
                s.push_str(&format!("{label:<20} lambda = {lambda} ({b})\n"));
            }
            s
        }
    })
}

fn summary_backend(backends: &[&'static str]) -> &'static str {
    match backends.first() {
        Some(first) if backends.iter().all(|b| b == first) => first,
        Some(_) => "mixed",
        None => "exact",
    }
}

fn json_text(v: &Value, format: Format) -> String {
    match format {
        Format::Jsonl => format!("{v}\n"),
        _ => format!("{}\n", serde_json::to_string_pretty(v).expect("JSON value serializes")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Structure {
    Acs,
    Normalize,
    Gamma,
}

impl Structure {
    fn name(self) -> &'static str {
        match self {
            Structure::Acs => "acs",
            Structure::Normalize => "normalize",
            Structure::Gamma => "gamma",
        }
    }
}

fn structure_json<S: Scalar>(which: Structure, omega: &KForm<S>, theta: &KForm<S>, tol: &Tolerances) -> Result<Value, AcsError> {
    Ok(match which {
        Structure::Acs => {
            let (plus, minus) = acs::complex_structures(omega, theta, tol)?;
            json!({
                "lambda": plus.lambda.to_coef_string(),
                "J_plus": matrix_columns_json(&plus.j),
                "J_minus": matrix_columns_json(&minus.j),
                "square_defect": acs::square_defect(&plus.j).to_coef_string(),
                "purity_residual_plus": acs::purity_residual(omega, &plus.j).to_coef_string(),
                "purity_residual_minus": acs::purity_residual(omega, &minus.j).to_coef_string(),
            })
        }
        Structure::Normalize => {
            let cob = acs::normalize(omega, theta, tol)?;
            let mut v = cob.to_json();
            v["omega_N"] = json!(standard::omega_normal::<S>().to_json());
            v
        }
        Structure::Gamma => {
            let (plus, _) = acs::complex_structures(omega, theta, tol)?;
            let gamma = acs::make_gamma(omega, &plus.j, tol)?;
            let mut v = gamma.to_json();
            v["three_zero_residual"] = json!(acs::three_zero_residual(&gamma).to_coef_string());
            v
        }
    })
}

fn cmd_structure(ctx: &Context, input: &Input, which: Structure) -> Result<String, CliError> {
    let forms = load_forms(input)?;
    let [form] = forms.as_slice() else {
        return Err(CliError::Input(format!("{} takes a single form, got {}", which.name(), forms.len())));
    };
    let float = |ctx: &Context| structure_json(which, &form.float, &ctx.theta.float(), &ctx.tol);
    let (body, backend) = match pick_exact(ctx, form)? {
        Some((k, t)) => match structure_json(which, k, t, &ctx.tol) {
            Ok(v) => (v, "exact"),
            Err(AcsError::IrrationalNorm(_)) if ctx.backend == BackendChoice::Auto => (float(ctx)?, "float"),
            Err(e) => return Err(e.into()),
        },
        None => (float(ctx)?, "float"),
    };
    let report = ctx.envelope(which.name(), backend, json!({ "result": body }));
    match ctx.format {
        Format::Json | Format::Jsonl => Ok(json_text(&report, ctx.format)),
        Format::Pretty => Ok(pretty_structure(which, &report["result"])),
        Format::Csv => Err(CliError::Input(format!("csv output is not available for {}", which.name()))),
    }
}

/// Rows of a matrix given as JSON columns of strings.
fn pretty_matrix(name: &str, columns: &Value) -> String {
    let cols: Vec<Vec<String>> = columns
        .as_array()
        .map(|cs| {
            cs.iter()
                .map(|c| c.as_array().map(|v| v.iter().map(|x| x.as_str().unwrap_or("?").to_string()).collect()).unwrap_or_default())
                .collect()
        })
        .unwrap_or_default();
    let width = cols.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut s = format!("{name} =\n");
    for r in 0..cols.first().map_or(0, Vec::len) {
        let row: Vec<String> = cols.iter().map(|c| format!("{:>width$}", c[r])).collect();
        s.push_str(&format!("  [ {} ]\n", row.join("  ")));
    }
    s
}

fn pretty_form(name: &str, form: &Value) -> String {
    let terms = form["terms"].as_array().cloned().unwrap_or_default();
    if terms.is_empty() {
        return format!("{name} = 0\n");
    }
    let mut text = String::new();
    for (k, t) in terms.iter().enumerate() {
        let idx: Vec<String> = t["idx"].as_array().into_iter().flatten().map(|i| format!("dx{i}")).collect();
        let coef = t["coef"].as_str().unwrap_or("?");
        let (negative, magnitude) = match coef.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, coef),
        };
        text.push_str(match (k, negative) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        if magnitude != "1" {
            text.push_str(magnitude);
            text.push('*');
        }
        text.push_str(&idx.join("^"));
    }
    format!("{name} = {text}\n")
}

fn pretty_structure(which: Structure, r: &Value) -> String {
    let s = |k: &str| r[k].as_str().unwrap_or("?").to_string();
    match which {
        Structure::Acs => format!(
            "lambda = {}\n{}{}square defect = {}, purity residual = {}\n",
            s("lambda"),
            pretty_matrix("J+", &r["J_plus"]),
            pretty_matrix("J-", &r["J_minus"]),
            s("square_defect"),
            s("purity_residual_plus"),
        ),
        Structure::Normalize => format!(
            "{}residual = {}\n{}\n",
            pretty_matrix("P", &r["P"]),
            s("residual"),
            s("convention")
        ),
        Structure::Gamma => format!(
            "{}{}(3,0) residual = {}\n",
            pretty_form("re", &r["re"]),
            pretty_form("im", &r["im"]),
            s("three_zero_residual")
        ),
    }
}

fn axis_index(name: &str) -> Result<usize, CliError> {
    match name.trim_start_matches('x').parse::<usize>() {
        Ok(k @ 1..=6) => Ok(k - 1),
        _ => Err(CliError::Input(format!("unknown axis {name:?}; expected x1..x6"))),
    }
}

fn parse_box(text: &str) -> Result<ChartBox, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    Ok(ChartBox::parse(&parts)?)
}

fn cmd_scan(ctx: &Context, args: &ScanArgs) -> Result<String, CliError> {
    let f = load_field(&args.input)?;
    let theta = ctx.theta.exact().cloned().ok_or_else(|| CliError::Backend("field scans need a rational theta".into()))?;
    let mut bounds_text: Vec<String> = args.r#box.split(',').map(|s| s.trim().to_string()).collect();
    if bounds_text.len() != 6 {
        return Err(CliError::Input(format!("--box needs 6 comma-separated ranges, got {}", bounds_text.len())));
    }
    let mut axis = None;
    if let Some(name) = &args.axis {
        let k = axis_index(name)?;
        bounds_text[k] = args.range.clone().unwrap_or_else(|| "0:2pi".into());
        axis = Some(k);
    }
    let bounds = ChartBox::parse(&bounds_text.iter().map(String::as_str).collect::<Vec<_>>())?;
    let resolution: [usize; 6] = match &args.resolution {
        Some(text) => {
            let values = text
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Input(format!("bad resolution {text:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            match values.as_slice() {
                [n] => std::array::from_fn(|k| if bounds.lo[k] == bounds.hi[k] { 1 } else { *n }),
                six if six.len() == 6 => std::array::from_fn(|k| six[k]),
                _ => return Err(CliError::Input("--resolution takes one or six values".into())),
            }
        }
        None => std::array::from_fn(|k| if bounds.lo[k] == bounds.hi[k] && axis != Some(k) { 1 } else { args.n }),
    };
    if resolution.contains(&0) {
        return Err(CliError::Input("resolution must be at least 1 per axis".into()));
    }
    let scan = field::scan_types(&f, &bounds, resolution, &theta, &ctx.tol)?;
    Ok(match ctx.format {
        Format::Csv => scan.to_csv(),
        Format::Jsonl => scan.to_json_lines(),
        Format::Json => {
            let points: Vec<Value> =
                scan.to_json_lines().lines().map(|l| serde_json::from_str(l).expect("own JSON")).collect();
            json_text(
                &ctx.envelope(
                    "field scan",
                    "auto",
                    json!({
                        "field": f.to_string(),
                        "box": bounds.to_json(),
                        "resolution": resolution,
                        "points": points,
                    }),
                ),
                Format::Json,
            )
        }
        Format::Pretty => {
            let mut s = String::new();
            for e in &scan.entries {
                let lambda = e.lambda.map(|l| format!("{l:.6}")).unwrap_or_else(|| "-".into());
                s.push_str(&format!("{:<60} {:<20} {}\n", e.point.coordinate_strings().join(", "), e.label.to_string(), lambda));
            }
            s
        }
    })
}

fn cmd_check(ctx: &Context, args: &CheckArgs) -> Result<String, CliError> {
    let f = load_field(&args.input)?;
    let theta = ctx.theta.exact().cloned().ok_or_else(|| CliError::Backend("field checks need a rational theta".into()))?;
    let bounds = parse_box(&args.r#box)?;
    let options = IntegrabilityOptions {
        samples: args.samples,
        seed: ctx.seed,
        mode: args.mode,
        step: args.step,
        nijenhuis_tolerance: args.nijenhuis_tolerance,
    };
    let report = field::integrability(&f, &bounds, &theta, &options, &ctx.tol)?;
    Ok(match ctx.format {
        Format::Json | Format::Jsonl => json_text(
            &ctx.envelope(
                "field check",
                "float",
                json!({ "field": f.to_string(), "box": bounds.to_json(), "report": report.to_json() }),
            ),
            ctx.format,
        ),
        Format::Pretty => format!(
            "verdict: {}\nclosed: {} ({}, max |d omega| = {:e})\nnijenhuis max: {:e} (scale {:e})\nsamples: {}\n{}",
            report.verdict,
            report.closed,
            report.closed_by,
            report.max_d_omega,
            report.nijenhuis_max,
            report.nijenhuis_scale,
            report.samples,
            report.reason.map(|r| format!("reason: {r}\n")).unwrap_or_default()
        ),
        Format::Csv => return Err(CliError::Input("csv output is not available for field check".into())),
    })
}

fn basis_from_json(v: &Value, tol: &Tolerances) -> Result<SubspaceBasis<Rational>, CliError> {
    let bad = || CliError::Input("a basis is a 7x6 array of numbers (rows)".into());
    let rows = v.as_array().ok_or_else(bad)?;
    let mut m = Matrix::<Rational>::zeros(rows.len(), rows.first().and_then(Value::as_array).map_or(0, Vec::len));
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(bad)?;
        if row.len() != m.cols() {
            return Err(bad());
        }
        for (c, x) in row.iter().enumerate() {
            let text = match x {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(bad()),
            };
            m[(r, c)] = parse_rational(&text).map_err(|e| CliError::Input(format!("bad entry {}", e.0)))?;
        }
    }
    Ok(SubspaceBasis::new(m, tol)?)
}

fn cmd_g2(ctx: &Context, args: &RestrictArgs) -> Result<String, CliError> {
    let bases = if args.standard_slice {
        vec![SubspaceBasis::standard_slice()]
    } else if let Some(n) = args.random {
        g2::random_bases(n, ctx.seed)
    } else if let Some(path) = &args.file {
        let value: Value =
            serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("bad JSON: {e}")))?;
        let nested = value.as_array().and_then(|a| a.first()).and_then(Value::as_array).and_then(|r| r.first()).is_some_and(Value::is_array);
        if nested {
            value.as_array().expect("checked").iter().map(|b| basis_from_json(b, &ctx.tol)).collect::<Result<_, _>>()?
        } else {
            vec![basis_from_json(&value, &ctx.tol)?]
        }
    } else {
        return Err(CliError::Input("no bases given".into()));
    };
    let results = g2::restrict_batch(&bases, &ctx.tol)?;
    let type2 = results.iter().filter(|r| r.report.label == TypeLabel::Type2).count();
    let summary = format!("{type2}/{} Type2", results.len());
    Ok(match ctx.format {
        Format::Json | Format::Jsonl => {
            let items: Vec<Value> = results
                .iter()
                .map(|r| json!({ "basis": r.basis.to_json(), "form": r.form.to_json(), "report": r.report.to_json() }))
                .collect();
            json_text(&ctx.envelope("g2 restrict", "exact", json!({ "restrictions": items, "summary": summary })), ctx.format)
        }
        Format::Csv => {
            let mut s = String::from("index,type,lambda\n");
            for (k, r) in results.iter().enumerate() {
                s.push_str(&format!("{k},{},{}\n", r.report.label, r.report.lambda));
            }
            s
        }
        Format::Pretty => {
            let mut s = String::new();
            for (k, r) in results.iter().enumerate() {
                s.push_str(&format!("{k:>4}  {:<8} lambda = {:<8} {}\n", r.report.label.to_string(), r.report.lambda.to_string(), pretty_form("", &json!(r.form.to_json())).trim_start_matches(" = ").trim_end()));
            }
            s.push_str(&summary);
            s.push('\n');
            s
        }
    })
}
