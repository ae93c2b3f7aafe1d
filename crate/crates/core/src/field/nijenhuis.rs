//! Nijenhuis tensor of the `J₊` field, by symbolic differentiation of the
//! closed-form entries of `J` or by central differences.

use serde::Serialize;

use super::FieldError;
use crate::acs;
use crate::classify::{self, Endo, TypeLabel};
use crate::exterior::{basis_indices, KForm};
use crate::formlang::expr::{self, EvalCache, Expr};
use crate::formlang::FormField;
use crate::linalg::Matrix;
use crate::scalar::{Rational, Tolerances};

pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NijenhuisMode {
    Symbolic,
    FiniteDifference,
    /// Central differences at `h` and `h/2`, extrapolated.
    Richardson,
}

impl std::str::FromStr for NijenhuisMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symbolic" => Ok(NijenhuisMode::Symbolic),
            "fd" | "finite-difference" => Ok(NijenhuisMode::FiniteDifference),
            "richardson" => Ok(NijenhuisMode::Richardson),
            other => Err(format!("unknown Nijenhuis mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NijenhuisReport {
    pub point: [f64; 6],
    pub mode: NijenhuisMode,
    /// `max |N^k_ij|` over `i < j` and `k`.
    pub max_abs: f64,
    /// `max(1, max|J| · max|∂J|)`, the natural size of the terms in `N`.
    pub scale: f64,
    /// `tensor[i][j][k] = N(∂_i, ∂_j)^k`, 0-based.
    pub tensor: Vec<Vec<Vec<f64>>>,
}

/// `N^k_ij = Σ_l (J^l_i ∂_l J^k_j − J^l_j ∂_l J^k_i − J^k_l ∂_i J^l_j + J^k_l ∂_j J^l_i)`
/// with `dj[l] = ∂_l J`.
fn tensor(point: [f64; 6], mode: NijenhuisMode, j: &Endo<f64>, dj: &[Endo<f64>]) -> NijenhuisReport {
    let mut t = vec![vec![vec![0.0; 6]; 6]; 6];
    let mut max_abs = 0.0f64;
    for i in 0..6 {
        for jj in 0..6 {
            if i == jj {
                continue;
            }
            for k in 0..6 {
                let mut s = 0.0;
                for l in 0..6 {
                    s += j[(l, i)] * dj[l][(k, jj)] - j[(l, jj)] * dj[l][(k, i)] - j[(k, l)] * dj[i][(l, jj)]
                        + j[(k, l)] * dj[jj][(l, i)];
                }
                t[i][jj][k] = s;
                max_abs = max_abs.max(s.abs());
            }
        }
    }
    let dmax = dj.iter().map(Matrix::max_abs).fold(0.0, f64::max);
    NijenhuisReport { point, mode, max_abs, scale: (j.max_abs() * dmax).max(1.0), tensor: t }
}

/// `J₊ = Q/sqrt(-λ)` as expressions in the chart coordinates, together with
/// all first partial derivatives.
#[derive(Debug, Clone)]
pub struct SymbolicJ {
    field: FormField,
    theta: KForm<f64>,
    lambda: Expr,
    j: Vec<Expr>,
    dj: Vec<Vec<Expr>>,
}

impl SymbolicJ {
    pub fn new(f: &FormField, theta: &KForm<Rational>) -> Result<SymbolicJ, FieldError> {
        if f.degree() != 3 {
            return Err(FieldError::NotThreeForm(f.degree()));
        }
        let basis = basis_indices(6, 3);
        let coeffs: Vec<(usize, Expr)> = basis
            .iter()
            .enumerate()
            .filter_map(|(n, mi)| f.terms().find(|(m, _)| m == mi).map(|(_, c)| (n, c.clone())))
            .collect();
        // Q is quadratic in ω: Q(ω) = Σ c_I c_J B(α_I, α_J) with B read off
        // from the Q of basis pairs.
        let mut q_terms: Vec<Vec<Expr>> = vec![Vec::new(); 36];
        for (a, (na, ca)) in coeffs.iter().enumerate() {
            for (nb, cb) in &coeffs[a..] {
                let alpha = KForm::<Rational>::basis(6, &basis[*na].indices());
                let beta = KForm::<Rational>::basis(6, &basis[*nb].indices());
                let b = if na == nb {
                    bilinear_q(&alpha, &alpha, theta)?
                } else {
                    let ab = bilinear_q(&alpha, &beta, theta)?;
                    let ba = bilinear_q(&beta, &alpha, theta)?;
                    &ab + &ba
                };
                for k in 0..6 {
                    for j in 0..6 {
                        let c = b[(k, j)].clone();
                        if c != Rational::from_integer(0.into()) {
                            q_terms[k * 6 + j].push(expr::mul(vec![Expr::Const(c), ca.clone(), cb.clone()]));
                        }
                    }
                }
            }
        }
        let q: Vec<Expr> = q_terms.into_iter().map(expr::add).collect();
        let mut trace_terms = Vec::new();
        for k in 0..6 {
            for j in 0..6 {
                let (a, b) = (&q[k * 6 + j], &q[j * 6 + k]);
                if !a.is_zero() && !b.is_zero() {
                    trace_terms.push(expr::mul(vec![a.clone(), b.clone()]));
                }
            }
        }
        let lambda = expr::mul(vec![
            Expr::Const(Rational::new(1.into(), 6.into())),
            expr::add(trace_terms),
        ]);
        let s = expr::sqrt(expr::neg(lambda.clone()));
        let j: Vec<Expr> = q.iter().map(|qkj| expr::div(qkj.clone(), s.clone())).collect();
        let dj = (0..6).map(|l| j.iter().map(|e| e.diff(l)).collect()).collect();
        Ok(SymbolicJ { field: f.clone(), theta: theta.to_float(), lambda, j, dj })
    }

    /// `λ` as an expression.
    pub fn lambda(&self) -> &Expr {
        &self.lambda
    }

    /// Entry `(row k, column j)` of `J`, 0-based.
    pub fn entry(&self, k: usize, j: usize) -> &Expr {
        &self.j[k * 6 + j]
    }

    pub fn j_at(&self, x: &[f64; 6]) -> Result<Endo<f64>, FieldError> {
        let mut cache = EvalCache::new();
        self.check(x, &mut cache)?;
        matrix(&self.j, x, &mut cache)
    }

    fn check(&self, x: &[f64; 6], cache: &mut EvalCache) -> Result<(), FieldError> {
        let value = self.field.eval_float(x)?;
        let label = classify::classify(&value, Some(&self.theta), &Tolerances::default())?.label;
        if label != TypeLabel::Type2 {
            return Err(FieldError::NotTypeTwoNearPoint { label, point: x.to_vec() });
        }
        if self.lambda.eval_cached(x, cache)? >= 0.0 {
            return Err(FieldError::NegativeSqrtDomain(x.to_vec()));
        }
        Ok(())
    }

    pub fn nijenhuis(&self, x: &[f64; 6]) -> Result<NijenhuisReport, FieldError> {
        let mut cache = EvalCache::new();
        self.check(x, &mut cache)?;
        let j = matrix(&self.j, x, &mut cache)?;
        let dj = self.dj.iter().map(|d| matrix(d, x, &mut cache)).collect::<Result<Vec<_>, _>>()?;
        Ok(tensor(*x, NijenhuisMode::Symbolic, &j, &dj))
    }
}

fn bilinear_q(a: &KForm<Rational>, b: &KForm<Rational>, theta: &KForm<Rational>) -> Result<Endo<Rational>, FieldError> {
    let columns = (0..6)
        .map(|j| Ok(a.interior_basis(j).wedge(b)?.dualize_five(theta)?))
        .collect::<Result<Vec<_>, crate::exterior::ExteriorError>>()
        .map_err(crate::classify::ClassifyError::from)?;
    Ok(Matrix::from_columns(&columns))
}

fn matrix(entries: &[Expr], x: &[f64; 6], cache: &mut EvalCache) -> Result<Endo<f64>, FieldError> {
    let data = entries.iter().map(|e| e.eval_cached(x, cache)).collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_vec(6, 6, data))
}

fn float_j(f: &FormField, x: &[f64; 6], theta: &KForm<f64>, tol: &Tolerances) -> Result<Endo<f64>, FieldError> {
    let value = f.eval_float(x)?;
    let label = classify::classify(&value, Some(theta), tol)?.label;
    if label != TypeLabel::Type2 {
        return Err(FieldError::NotTypeTwoNearPoint { label, point: x.to_vec() });
    }
    let lambda = classify::lambda_invariant(&value, theta, tol)?;
    if lambda >= 0.0 {
        return Err(FieldError::NegativeSqrtDomain(x.to_vec()));
    }
    Ok(acs::complex_structures(&value, theta, tol)?.0.j)
}

fn central(f: &FormField, x: &[f64; 6], l: usize, h: f64, theta: &KForm<f64>, tol: &Tolerances) -> Result<Endo<f64>, FieldError> {
    let mut plus = *x;
    let mut minus = *x;
    plus[l] += h;
    minus[l] -= h;
    let diff = &float_j(f, &plus, theta, tol)? - &float_j(f, &minus, theta, tol)?;
    Ok(diff.scaled(&(0.5 / h)))
}

/// `N` at `x`. The finite-difference modes check the type at every stencil point.
pub fn nijenhuis_at(
    f: &FormField,
    x: &[f64; 6],
    mode: NijenhuisMode,
    h: f64,
    theta: &KForm<Rational>,
    tol: &Tolerances,
) -> Result<NijenhuisReport, FieldError> {
    if mode == NijenhuisMode::Symbolic {
        return SymbolicJ::new(f, theta)?.nijenhuis(x);
    }
    let theta_f = theta.to_float();
    let j = float_j(f, x, &theta_f, tol)?;
    let dj = (0..6)
        .map(|l| {
            let d = central(f, x, l, h, &theta_f, tol)?;
            if mode == NijenhuisMode::FiniteDifference {
                return Ok(d);
            }
            let half = central(f, x, l, h / 2.0, &theta_f, tol)?;
            Ok((&half.scaled(&4.0) - &d).scaled(&(1.0 / 3.0)))
        })
        .collect::<Result<Vec<_>, FieldError>>()?;
    Ok(tensor(*x, mode, &j, &dj))
}
