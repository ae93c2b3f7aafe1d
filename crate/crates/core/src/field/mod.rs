//! Chart-level operations on 3-form fields: exterior derivative, pointwise
//! type, type scans over grids, the `J₊` field, its Nijenhuis tensor and the
//! integrability verdict (closed and `J` integrable).

mod nijenhuis;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::acs::{self, AcsError};
use crate::classify::{self, ClassifyError, Endo, TypeLabel, TypeReport};
use crate::exterior::KForm;
use crate::formlang::{parse_pi_rational, DomainError, FieldValue, FormField, PiRational, Point};
use crate::linalg::Matrix;
use crate::scalar::{ParseScalarError, Rational, Tolerances};

pub use nijenhuis::{nijenhuis_at, NijenhuisMode, NijenhuisReport, SymbolicJ, DEFAULT_STEP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Acs(#[from] AcsError),
    #[error("expected a 3-form field, got degree {0}")]
    NotThreeForm(usize),
    #[error("form is {label} at {point:?}, not type 2")]
    NotTypeTwoAtPoint { label: TypeLabel, point: Vec<String> },
    #[error("form is {label} at {point:?} near the probe point, not type 2")]
    NotTypeTwoNearPoint { label: TypeLabel, point: Vec<f64> },
    #[error("lambda >= 0 at {0:?}: sqrt(-lambda) undefined")]
    NegativeSqrtDomain(Vec<f64>),
    #[error("bad box: {0}")]
    BadBox(String),
}

pub fn exterior_derivative(f: &FormField) -> FormField {
    f.exterior_derivative()
}

/// A classification at one point, exact or floating point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointReport {
    Exact(TypeReport<Rational>),
    Float(TypeReport<f64>),
}

impl PointReport {
    pub fn label(&self) -> TypeLabel {
        match self {
            PointReport::Exact(r) => r.label,
            PointReport::Float(r) => r.label,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            PointReport::Exact(r) => crate::scalar::Scalar::to_f64(&r.lambda),
            PointReport::Float(r) => r.lambda,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PointReport::Exact(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            PointReport::Exact(r) => r.to_json(),
            PointReport::Float(r) => r.to_json(),
        }
    }
}

fn check_degree(f: &FormField) -> Result<(), FieldError> {
    if f.degree() != 3 {
        return Err(FieldError::NotThreeForm(f.degree()));
    }
    Ok(())
}

/// Classify the value of `f` at `p`; exact whenever the value is rational.
pub fn type_at(f: &FormField, p: &Point, theta: &KForm<Rational>, tol: &Tolerances) -> Result<PointReport, FieldError> {
    check_degree(f)?;
    Ok(match f.eval(p)? {
        FieldValue::Exact(k) => PointReport::Exact(classify::classify(&k, Some(theta), tol)?),
        FieldValue::Float(k) => PointReport::Float(classify::classify(&k, Some(&theta.to_float()), tol)?),
    })
}

/// `J₊` of the value at `p` relative to the global `θ`, as floats.
pub fn j_at(f: &FormField, p: &Point, theta: &KForm<Rational>, tol: &Tolerances) -> Result<Endo<f64>, FieldError> {
    check_degree(f)?;
    let report = type_at(f, p, theta, tol)?;
    if report.label() != TypeLabel::Type2 {
        return Err(FieldError::NotTypeTwoAtPoint { label: report.label(), point: p.coordinate_strings() });
    }
    match f.eval(p)? {
        FieldValue::Exact(k) => match acs::complex_structures(&k, theta, tol) {
            Ok((plus, _)) => Ok(plus.j.to_float()),
            Err(AcsError::IrrationalNorm(_)) => float_j(&k.to_float(), &theta.to_float(), tol),
            Err(e) => Err(e.into()),
        },
        FieldValue::Float(k) => float_j(&k, &theta.to_float(), tol),
    }
}

fn float_j(k: &KForm<f64>, theta: &KForm<f64>, tol: &Tolerances) -> Result<Endo<f64>, FieldError> {
    Ok(acs::complex_structures(k, theta, tol)?.0.j)
}

/// An axis-aligned box in the chart; bounds may be rational multiples of π.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub lo: [PiRational; 6],
    pub hi: [PiRational; 6],
}

impl ChartBox {
    /// Six `"lo:hi"` ranges (a single value fixes the coordinate).
    pub fn parse(ranges: &[&str]) -> Result<ChartBox, FieldError> {
        if ranges.len() != 6 {
            return Err(FieldError::BadBox(format!("expected 6 ranges, got {}", ranges.len())));
        }
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for r in ranges {
            let (a, b) = r.split_once(':').unwrap_or((r, r));
            let parse = |s: &str| parse_pi_rational(s).map_err(|ParseScalarError(m)| FieldError::BadBox(m));
            let (a, b) = (parse(a)?, parse(b)?);
            if a.to_f64() > b.to_f64() {
                return Err(FieldError::BadBox(format!("empty range {r:?}")));
            }
            lo.push(a);
            hi.push(b);
        }
        Ok(ChartBox { lo: lo.try_into().expect("six"), hi: hi.try_into().expect("six") })
    }

    /// The degenerate box at a single point.
    pub fn point(x: [PiRational; 6]) -> ChartBox {
        ChartBox { lo: x.clone(), hi: x }
    }

    /// `resolution[k]` equally spaced values on axis `k`, endpoints included.
    fn axis(&self, k: usize, n: usize) -> Vec<PiRational> {
        if n <= 1 || self.lo[k] == self.hi[k] {
            return vec![self.lo[k].clone()];
        }
        let width = self.hi[k].clone() - self.lo[k].clone();
        (0..n)
            .map(|s| {
                let t = Rational::new((s as i64).into(), ((n - 1) as i64).into());
                let step = width.checked_mul(&PiRational::rational(t)).expect("rational scaling");
                self.lo[k].clone() + step
            })
            .collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> [f64; 6] {
        std::array::from_fn(|k| {
            let (a, b) = (self.lo[k].to_f64(), self.hi[k].to_f64());
            if a == b {
                a
            } else {
                rng.gen_range(a..=b)
            }
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": self.lo.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "hi": self.hi.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScanLabel {
    Type(TypeLabel),
    Error(String),
}

impl std::fmt::Display for ScanLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScanLabel::Type(t) => write!(f, "{t}"),
            ScanLabel::Error(_) => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub point: Point,
    pub label: ScanLabel,
    pub lambda: Option<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeScan {
    pub entries: Vec<ScanEntry>,
    pub bounds: ChartBox,
    pub resolution: [usize; 6],
}

impl TypeScan {
    pub fn labels(&self) -> Vec<ScanLabel> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,x3,x4,x5,x6,label,lambda\n");
        for e in &self.entries {
            let x = e.point.to_float();
            let coords: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            let lambda = e.lambda.map(|l| format!("{l}")).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", coords.join(","), e.label, lambda));
        }
        out
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let mut line = json!({
                "x": e.point.to_float(),
                "label": e.label.to_string(),
                "lambda": e.lambda,
                "exact": e.exact,
            });
            if let Point::Exact(_) = e.point {
                line["coordinates"] = json!(e.point.coordinate_strings());
            }
            if let ScanLabel::Error(msg) = &e.label {
                line["error"] = json!(msg);
            }
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Classify `f` on a grid, row-major with `x1` varying slowest. Points where
/// evaluation fails are labelled `error`; the scan continues.
pub fn scan_types(
    f: &FormField,
    bounds: &ChartBox,
    resolution: [usize; 6],
    theta: &KForm<Rational>,
    tol: &Tolerances,
) -> Result<TypeScan, FieldError> {
    check_degree(f)?;
    let axes: Vec<Vec<PiRational>> = (0..6).map(|k| bounds.axis(k, resolution[k])).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let entries = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut x: [PiRational; 6] = std::array::from_fn(|_| PiRational::zero());
            for k in (0..6).rev() {
                x[k] = axes[k][rest % axes[k].len()].clone();
                rest /= axes[k].len();
            }
            let point = Point::Exact(x);
            match type_at(f, &point, theta, tol) {
                Ok(r) => ScanEntry {
                    label: ScanLabel::Type(r.label()),
                    lambda: Some(r.lambda()),
                    exact: r.is_exact(),
                    point,
                },
                Err(e) => ScanEntry { label: ScanLabel::Error(e.to_string()), lambda: None, exact: false, point },
            }
        })
        .collect();
    Ok(TypeScan { entries, bounds: bounds.clone(), resolution })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Integrable,
    NotIntegrable,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Integrable => "integrable",
            Verdict::NotIntegrable => "not-integrable",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrabilityOptions {
    pub samples: usize,
    pub seed: u64,
    pub mode: NijenhuisMode,
    /// Step for the finite-difference modes.
    pub step: f64,
    /// Bound on `max |N|` relative to `max(1, |J|·|∂J|)`.
    pub nijenhuis_tolerance: f64,
}

impl Default for IntegrabilityOptions {
    fn default() -> Self {
        IntegrabilityOptions {
            samples: 200,
            seed: 0,
            mode: NijenhuisMode::Symbolic,
            step: nijenhuis::DEFAULT_STEP,
            nijenhuis_tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub verdict: Verdict,
    pub closed: bool,
    /// `"syntactic"` when `dω` cancelled to zero, `"sampled"` otherwise.
    pub closed_by: &'static str,
    pub max_d_omega: f64,
    pub nijenhuis_max: f64,
    pub nijenhuis_scale: f64,
    pub samples: usize,
    pub reason: Option<String>,
    pub options: IntegrabilityOptions,
    pub tolerances: Tolerances,
}

impl IntegrabilityReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Integrable iff closed and `J₊` has vanishing Nijenhuis tensor, decided at
/// seeded random samples in `bounds`.
pub fn integrability(
    f: &FormField,
    bounds: &ChartBox,
    theta: &KForm<Rational>,
    options: &IntegrabilityOptions,
    tol: &Tolerances,
) -> Result<IntegrabilityReport, FieldError> {
    check_degree(f)?;
    let mut rng = crate::random::rng(options.seed);
    let points: Vec<[f64; 6]> = (0..options.samples.max(1)).map(|_| bounds.sample(&mut rng)).collect();

    let d = f.exterior_derivative();
    let (closed_by, max_d_omega, closed) = if d.is_zero() {
        ("syntactic", 0.0, true)
    } else {
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for x in &points {
            worst = worst.max(d.eval_float(x)?.max_abs());
            scale = scale.max(f.eval_float(x)?.max_abs());
        }
        ("sampled", worst, worst <= tol.residual * scale)
    };
    let mut report = IntegrabilityReport {
        verdict: Verdict::Indeterminate,
        closed,
        closed_by,
        max_d_omega,
        nijenhuis_max: 0.0,
        nijenhuis_scale: 1.0,
        samples: points.len(),
        reason: None,
        options: *options,
        tolerances: *tol,
    };
    if !closed {
        report.verdict = Verdict::NotIntegrable;
        report.reason = Some(format!("d(omega) != 0: max coefficient {max_d_omega:e} at the samples"));
        return Ok(report);
    }

    let theta_f = theta.to_float();
    // every sample is evaluated first so that domain errors win over labels
    let values = points.iter().map(|x| f.eval_float(x)).collect::<Result<Vec<_>, _>>()?;
    for (x, value) in points.iter().zip(&values) {
        let label = classify::classify(value, Some(&theta_f), tol)?.label;
        if label != TypeLabel::Type2 {
            report.reason = Some(format!("form is {label} at sample {x:?}"));
            return Ok(report);
        }
    }

    let symbolic = match options.mode {
        NijenhuisMode::Symbolic => Some(SymbolicJ::new(f, theta)?),
        _ => None,
    };
    let results: Vec<Result<NijenhuisReport, FieldError>> = points
        .par_iter()
        .map(|x| match &symbolic {
            // derivatives of the closed form may leave the domain where the
            // form itself is fine (sqrt near zero); extrapolated differences then
            Some(s) => match s.nijenhuis(x) {
                Err(FieldError::Domain(_)) => {
                    nijenhuis_at(f, x, NijenhuisMode::Richardson, options.step, theta, tol)
                }
                r => r,
            },
            None => nijenhuis_at(f, x, options.mode, options.step, theta, tol),
        })
        .collect();
    for r in results {
        let r = match r {
            Ok(r) => r,
            Err(e @ (FieldError::NotTypeTwoNearPoint { .. } | FieldError::NegativeSqrtDomain(_))) => {
                report.reason = Some(e.to_string());
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        report.nijenhuis_max = report.nijenhuis_max.max(r.max_abs);
        report.nijenhuis_scale = report.nijenhuis_scale.max(r.scale);
    }
    report.verdict = if report.nijenhuis_max <= options.nijenhuis_tolerance * report.nijenhuis_scale {
        Verdict::Integrable
    } else {
        report.reason = Some(format!("Nijenhuis tensor reaches {:e}", report.nijenhuis_max));
        Verdict::NotIntegrable
    };
    Ok(report)
}

/// Convenience: a constant field's `J₊` as a float matrix.
pub fn constant_j(form: &KForm<Rational>, theta: &KForm<Rational>, tol: &Tolerances) -> Result<Matrix<f64>, FieldError> {
    j_at(&FormField::constant(form), &Point::origin(), theta, tol)
}
