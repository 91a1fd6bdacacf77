//! Declarative scalar functions on an interval.
//!
//! Problem data (initial condition, weight, boundary and nonlocal forcing) are
//! described by [`FunctionSpec`] values rather than opaque callables, so that
//! configurations serialize cleanly and the transform engine can integrate
//! them against oscillatory kernels in closed form.
//!
//! Every kind lowers to a list of [`PolyExpTerm`]s: a complex polynomial times
//! `exp(i*freq*x)` supported on a subinterval. Polynomials and builtins lower
//! to a single frequency-zero term, exponential modes to one term each, and
//! sampled data to one cubic term per spline segment.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("sampled function needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("interpolation order must be 1 or 3, got {0}")]
    BadOrder(u8),
    #[error("unknown builtin function `{0}`")]
    UnknownBuiltin(String),
    #[error("sample span must have positive length")]
    BadSpan,
}

/// Which axis the function lives on. Space functions are defined on [0,1];
/// time functions on [0,T] for some horizon or period T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Space,
    Time,
}

/// Interpolation order for sampled data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpOrder {
    Linear,
    Cubic,
}

/// A single complex-exponential mode `amp * exp(i * freq * x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub freq: Complex64,
    pub amp: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kind {
    /// `c0 + c1 x + c2 x^2 + ...`
    Polynomial(Vec<Complex64>),
    /// Sum of complex-exponential modes.
    Modes(Vec<Mode>),
    /// Uniform samples over `span`, interpolated linearly or by a natural
    /// cubic spline.
    Samples {
        values: Vec<Complex64>,
        span: (f64, f64),
        order: InterpOrder,
    },
    /// Named builtin with a scalar parameter.
    Builtin { name: String, param: f64 },
}

/// A declaratively described scalar function on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub kind: Kind,
    pub domain: Domain,
}

/// Polynomial-times-exponential piece `poly(x) * exp(i*freq*x)` on `[a, b]`.
/// The polynomial is in the global coordinate.
#[derive(Debug, Clone)]
pub struct PolyExpTerm {
    pub support: (f64, f64),
    pub poly: Vec<Complex64>,
    pub freq: Complex64,
}

impl FunctionSpec {
    pub fn polynomial(domain: Domain, coeffs: Vec<Complex64>) -> Self {
        FunctionSpec {
            kind: Kind::Polynomial(coeffs),
            domain,
        }
    }

    pub fn real_polynomial(domain: Domain, coeffs: &[f64]) -> Self {
        Self::polynomial(
            domain,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    pub fn constant(domain: Domain, c: Complex64) -> Self {
        Self::polynomial(domain, vec![c])
    }

    pub fn zero(domain: Domain) -> Self {
        Self::polynomial(domain, vec![])
    }

    pub fn modes(domain: Domain, modes: Vec<Mode>) -> Self {
        FunctionSpec {
            kind: Kind::Modes(modes),
            domain,
        }
    }

    pub fn samples(
        domain: Domain,
        values: Vec<Complex64>,
        span: (f64, f64),
        order: InterpOrder,
    ) -> Result<Self, SpecError> {
        if values.len() < 2 {
            return Err(SpecError::TooFewSamples(values.len()));
        }
        if !(span.1 > span.0) {
            return Err(SpecError::BadSpan);
        }
        Ok(FunctionSpec {
            kind: Kind::Samples {
                values,
                span,
                order,
            },
            domain,
        })
    }

    pub fn builtin(domain: Domain, name: &str, param: f64) -> Result<Self, SpecError> {
        match name {
            "constant" | "bump" => Ok(FunctionSpec {
                kind: Kind::Builtin {
                    name: name.to_string(),
                    param,
                },
                domain,
            }),
            other => Err(SpecError::UnknownBuiltin(other.to_string())),
        }
    }

    /// True when the function is identically zero; transforms of zero data
    /// short-circuit to exact zeros.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Polynomial(c) => c.iter().all(|z| z.norm_sqr() == 0.0),
            Kind::Modes(m) => m.iter().all(|m| m.amp.norm_sqr() == 0.0),
            Kind::Samples { values, .. } => values.iter().all(|z| z.norm_sqr() == 0.0),
            Kind::Builtin { param, .. } => *param == 0.0,
        }
    }

    /// Pointwise value.
    pub fn value(&self, x: f64) -> Complex64 {
        match &self.kind {
            Kind::Polynomial(c) => horner(c, x),
            Kind::Modes(m) => m
                .iter()
                .map(|m| m.amp * (Complex64::i() * m.freq * x).exp())
                .sum(),
            Kind::Samples { .. } => {
                let terms = self.lower();
                eval_piecewise(&terms, x)
            }
            Kind::Builtin { name, param } => match name.as_str() {
                "constant" => Complex64::new(*param, 0.0),
                // param * x^2 (1-x)^2, a smooth bump vanishing to first order
                // at both endpoints.
                "bump" => {
                    let b = x * x * (1.0 - x) * (1.0 - x);
                    Complex64::new(param * b, 0.0)
                }
                _ => unreachable!("builtin validated at construction"),
            },
        }
    }

    /// Pointwise derivative.
    pub fn derivative(&self, x: f64) -> Complex64 {
        match &self.kind {
            Kind::Polynomial(c) => horner(&poly_derivative(c), x),
            Kind::Modes(m) => m
                .iter()
                .map(|m| m.amp * Complex64::i() * m.freq * (Complex64::i() * m.freq * x).exp())
                .sum(),
            Kind::Samples { .. } => {
                let terms = self.lower();
                deriv_piecewise(&terms, x)
            }
            Kind::Builtin { name, param } => match name.as_str() {
                "constant" => Complex64::new(0.0, 0.0),
                "bump" => {
                    let d = 2.0 * x * (1.0 - x) * (1.0 - x) - 2.0 * x * x * (1.0 - x);
                    Complex64::new(param * d, 0.0)
                }
                _ => unreachable!(),
            },
        }
    }

    /// Lower to poly-exp terms over the given window (defaults to the natural
    /// support of the description).
    pub fn lower(&self) -> Vec<PolyExpTerm> {
        let wide = (f64::NEG_INFINITY, f64::INFINITY);
        match &self.kind {
            Kind::Polynomial(c) => vec![PolyExpTerm {
                support: wide,
                poly: c.clone(),
                freq: Complex64::new(0.0, 0.0),
            }],
            Kind::Modes(m) => m
                .iter()
                .map(|m| PolyExpTerm {
                    support: wide,
                    poly: vec![m.amp],
                    freq: m.freq,
                })
                .collect(),
            Kind::Samples {
                values,
                span,
                order,
            } => lower_samples(values, *span, *order),
            Kind::Builtin { name, param } => match name.as_str() {
                "constant" => vec![PolyExpTerm {
                    support: wide,
                    poly: vec![Complex64::new(*param, 0.0)],
                    freq: Complex64::new(0.0, 0.0),
                }],
                // x^2 - 2x^3 + x^4 scaled by param
                "bump" => vec![PolyExpTerm {
                    support: wide,
                    poly: vec![
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, 0.0),
                        Complex64::new(*param, 0.0),
                        Complex64::new(-2.0 * param, 0.0),
                        Complex64::new(*param, 0.0),
                    ],
                    freq: Complex64::new(0.0, 0.0),
                }],
                _ => unreachable!(),
            },
        }
    }
}

/// Evaluate a lowered term list at a point (piecewise pieces half-open,
/// last piece closed; wide pieces always contribute).
pub fn eval_terms(terms: &[PolyExpTerm], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let n = terms.len();
    let mut matched_piece = false;
    for (k, t) in terms.iter().enumerate() {
        let (a, b) = t.support;
        if a.is_infinite() && b.is_infinite() {
            acc += horner(&t.poly, x) * (Complex64::i() * t.freq * x).exp();
        } else if !matched_piece && x >= a && (x < b || (x <= b && k == n - 1)) {
            acc += horner(&t.poly, x) * (Complex64::i() * t.freq * x).exp();
            matched_piece = true;
        }
    }
    acc
}

pub fn horner(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn poly_derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

fn eval_piecewise(terms: &[PolyExpTerm], x: f64) -> Complex64 {
    for t in terms {
        // Half-open pieces except the last, which is closed on the right.
        let (a, b) = t.support;
        if x >= a && (x < b || (x <= b && std::ptr::eq(t, terms.last().unwrap()))) {
            return horner(&t.poly, x) * (Complex64::i() * t.freq * x).exp();
        }
    }
    // Outside the span: clamp to nearest segment (evaluation is defined on
    // the whole domain; extrapolation uses the end segment).
    if let Some(t) = terms.first() {
        if x < t.support.0 {
            return horner(&t.poly, x);
        }
    }
    if let Some(t) = terms.last() {
        return horner(&t.poly, x);
    }
    Complex64::new(0.0, 0.0)
}

fn deriv_piecewise(terms: &[PolyExpTerm], x: f64) -> Complex64 {
    for t in terms {
        let (a, b) = t.support;
        if x >= a && (x < b || (x <= b && std::ptr::eq(t, terms.last().unwrap()))) {
            return horner(&poly_derivative(&t.poly), x);
        }
    }
    if let Some(t) = terms.first() {
        if x < t.support.0 {
            return horner(&poly_derivative(&t.poly), x);
        }
    }
    if let Some(t) = terms.last() {
        return horner(&poly_derivative(&t.poly), x);
    }
    Complex64::new(0.0, 0.0)
}

/// Build per-segment cubic (or linear) polynomials for uniform samples.
fn lower_samples(values: &[Complex64], span: (f64, f64), order: InterpOrder) -> Vec<PolyExpTerm> {
    let n = values.len();
    let h = (span.1 - span.0) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| span.0 + i as f64 * h).collect();
    let mut out = Vec::with_capacity(n - 1);
    match order {
        InterpOrder::Linear => {
            for i in 0..n - 1 {
                let slope = (values[i + 1] - values[i]) / h;
                // p(x) = v_i + slope*(x - x_i), expanded in the global coordinate
                let c0 = values[i] - slope * xs[i];
                out.push(PolyExpTerm {
                    support: (xs[i], xs[i + 1]),
                    poly: vec![c0, slope],
                    freq: Complex64::new(0.0, 0.0),
                });
            }
        }
        InterpOrder::Cubic => {
            let m = natural_spline_second_derivs(values, h);
            for i in 0..n - 1 {
                // Segment form:
                //   s(x) = v_i + b (x-x_i) + c (x-x_i)^2 + d (x-x_i)^3
                let c = m[i] / 2.0;
                let d = (m[i + 1] - m[i]) / (6.0 * h);
                let b = (values[i + 1] - values[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
                let xi = xs[i];
                // expand around 0
                let c0 = values[i] - b * xi + c * xi * xi - d * xi * xi * xi;
                let c1 = b - 2.0 * c * xi + 3.0 * d * xi * xi;
                let c2 = c - 3.0 * d * xi;
                let c3 = d;
                out.push(PolyExpTerm {
                    support: (xs[i], xs[i + 1]),
                    poly: vec![c0, c1, c2, c3],
                    freq: Complex64::new(0.0, 0.0),
                });
            }
        }
    }
    out
}

/// Natural cubic spline second derivatives on a uniform grid (tridiagonal
/// solve with zero end conditions).
fn natural_spline_second_derivs(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut m = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return m;
    }
    let k = n - 2;
    let mut diag = vec![4.0; k];
    let mut rhs: Vec<Complex64> = (0..k)
        .map(|i| (v[i] - v[i + 1] * 2.0 + v[i + 2]) * (6.0 / (h * h)))
        .collect();
    // Thomas algorithm, unit off-diagonals.
    for i in 1..k {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        let prev = rhs[i - 1];
        rhs[i] -= prev * w;
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for i in (1..k).rev() {
        m[i] = (rhs[i - 1] - m[i + 1]) / diag[i - 1];
    }
    m
}
