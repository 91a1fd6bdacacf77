//! Oriented sector-boundary contours and complex line quadrature.
//!
//! The sectors are bounded by rays at multiples of pi/3. `D` regions are
//! where `Re(-i lambda^3) < 0` (upper: arg in (pi/3, 2pi/3); lower: two
//! sectors), `E` regions the complement. Boundaries are oriented so the
//! region lies to the left; the truncated boundary of a sector (theta1,
//! theta2) with |lambda| > R is traversed in along the theta2 ray, around the
//! arc at R from theta2 to theta1, and out along the theta1 ray.

use crate::funcspec::FunctionSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("truncation length {l} must exceed the radius {r}")]
    BadTruncation { r: f64, l: f64 },
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorLabel {
    DPlus,
    DMinus,
    EPlus,
    EMinus,
    RealLine,
    Custom,
}

/// One oriented piece: a straight segment or an origin-centred arc.
#[derive(Debug, Clone, Copy)]
pub enum Piece {
    Line { a: Complex64, b: Complex64 },
    Arc { r: f64, th0: f64, th1: f64 },
}

impl Piece {
    pub fn start(&self) -> Complex64 {
        match *self {
            Piece::Line { a, .. } => a,
            Piece::Arc { r, th0, .. } => Complex64::from_polar(r, th0),
        }
    }

    pub fn end(&self) -> Complex64 {
        match *self {
            Piece::Line { b, .. } => b,
            Piece::Arc { r, th1, .. } => Complex64::from_polar(r, th1),
        }
    }

    pub fn reversed(&self) -> Piece {
        match *self {
            Piece::Line { a, b } => Piece::Line { a: b, b: a },
            Piece::Arc { r, th0, th1 } => Piece::Arc {
                r,
                th0: th1,
                th1: th0,
            },
        }
    }

    /// Point and derivative of the unit-parameterization z(t), t in [0,1].
    pub fn at(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            Piece::Line { a, b } => (a + (b - a) * t, b - a),
            Piece::Arc { r, th0, th1 } => {
                let th = th0 + (th1 - th0) * t;
                let z = Complex64::from_polar(r, th);
                (z, Complex64::i() * z * (th1 - th0))
            }
        }
    }
}

/// Oriented piecewise path; disconnected boundaries keep one piece list per
/// component.
#[derive(Debug, Clone)]
pub struct ContourPath {
    pub label: SectorLabel,
    pub components: Vec<Vec<Piece>>,
}

impl ContourPath {
    pub fn reversed(&self) -> ContourPath {
        ContourPath {
            label: self.label,
            components: self
                .components
                .iter()
                .map(|c| c.iter().rev().map(|p| p.reversed()).collect())
                .collect(),
        }
    }

    /// Verify pieces within each component chain end-to-start.
    pub fn is_contiguous(&self, tol: f64) -> bool {
        self.components.iter().all(|c| {
            c.windows(2)
                .all(|w| (w[0].end() - w[1].start()).norm() <= tol)
        })
    }
}

/// Angular sectors (theta1, theta2) for each region label.
pub fn sectors_of(label: SectorLabel) -> Vec<(f64, f64)> {
    match label {
        SectorLabel::DPlus => vec![(PI / 3.0, 2.0 * PI / 3.0)],
        SectorLabel::DMinus => vec![(-PI, -2.0 * PI / 3.0), (-PI / 3.0, 0.0)],
        SectorLabel::EPlus => vec![(0.0, PI / 3.0), (2.0 * PI / 3.0, PI)],
        SectorLabel::EMinus => vec![(-2.0 * PI / 3.0, -PI / 3.0)],
        SectorLabel::RealLine | SectorLabel::Custom => vec![],
    }
}

/// Truncated boundary of the labelled region, oriented region-left.
pub fn build_contour(label: SectorLabel, r: f64, l: f64) -> Result<ContourPath, ContourError> {
    if !(r > 0.0) {
        return Err(ContourError::BadRadius(r));
    }
    if !(l > r) {
        return Err(ContourError::BadTruncation { r, l });
    }
    let comps = sectors_of(label)
        .into_iter()
        .map(|(th1, th2)| sector_boundary(th1, th2, r, l))
        .collect();
    Ok(ContourPath {
        label,
        components: comps,
    })
}

/// In along theta2 (l -> r), arc r from theta2 down to theta1, out along
/// theta1 (r -> l).
fn sector_boundary(th1: f64, th2: f64, r: f64, l: f64) -> Vec<Piece> {
    vec![
        Piece::Line {
            a: Complex64::from_polar(l, th2),
            b: Complex64::from_polar(r, th2),
        },
        Piece::Arc {
            r,
            th0: th2,
            th1: th1,
        },
        Piece::Line {
            a: Complex64::from_polar(r, th1),
            b: Complex64::from_polar(l, th1),
        },
    ]
}

/// Closed positively-oriented boundary of the annular sector
/// {r < |z| < l, theta1 < arg z < theta2} (used by the winding counter and
/// orientation tests).
pub fn closed_sector_loop(th1: f64, th2: f64, r: f64, l: f64) -> ContourPath {
    ContourPath {
        label: SectorLabel::Custom,
        components: vec![vec![
            Piece::Line {
                a: Complex64::from_polar(r, th1),
                b: Complex64::from_polar(l, th1),
            },
            Piece::Arc {
                r: l,
                th0: th1,
                th1: th2,
            },
            Piece::Line {
                a: Complex64::from_polar(l, th2),
                b: Complex64::from_polar(r, th2),
            },
            Piece::Arc {
                r,
                th0: th2,
                th1: th1,
            },
        ]],
    }
}

/// Quadrature controls shared by the integrators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Ray truncation length beyond the contour radius; 0 means automatic.
    pub truncation_l: f64,
    /// Principal-value exclusion half-width.
    pub pv_epsilon: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_panels: 40_000,
            truncation_l: 0.0,
            pv_epsilon: 1e-3,
        }
    }
}

/// Result of a line integral: value, error estimate, convergence flag.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub est_abs_error: f64,
    pub converged: bool,
}

/// Adaptive integral of `f` along the path. The error estimate accumulates
/// panel discrepancies plus, for the final piece of each component, a
/// truncation-tail estimate built from the integrand magnitude near the far
/// end and a fitted decay rate.
pub fn integrate_contour<F>(f: F, path: &ContourPath, spec: &QuadratureSpec) -> QuadResult
where
    F: Fn(Complex64) -> Complex64,
{
    let mut total = Complex64::new(0.0, 0.0);
    let mut est = 0.0;
    let mut converged = true;
    let mut budget = spec.max_panels;
    for comp in &path.components {
        for piece in comp {
            let g = |t: f64| {
                let (z, dz) = piece.at(t);
                f(z) * dz
            };
            let r = adaptive_param(&g, 0.0, 1.0, spec.abs_tol, spec.rel_tol, &mut budget);
            total += r.value;
            est += r.est_abs_error;
            converged &= r.converged;
        }
        // tail model on the trailing piece when it is an outward ray
        if let Some(Piece::Line { a, b }) = comp.last() {
            if b.norm() > a.norm() + 1e-12 {
                est += ray_tail_estimate(&f, *a, *b);
            }
        }
    }
    QuadResult {
        value: total,
        est_abs_error: est,
        converged,
    }
}

/// Magnitude-times-decay-model estimate for the dropped tail of a truncated
/// outward ray.
fn ray_tail_estimate<F>(f: &F, a: Complex64, b: Complex64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    let len = (b - a).norm();
    let zm = a + (b - a) * 0.95;
    let fm = f(zm).norm();
    let fe = f(b).norm();
    if fe <= 0.0 {
        return 0.0;
    }
    let c_hat = if fm > fe {
        ((fm / fe).ln() / (0.05 * len)).max(1e-3 / len)
    } else {
        1e-3 / len
    };
    // factor 3: a local exponential fit understates algebraic tails
    (3.0 * fe / c_hat).min(fe * 1e6 * len)
}

/// Registered singular point on the real axis.
#[derive(Debug, Clone, Copy)]
pub struct Exclusion {
    pub x0: f64,
    /// When true the integrand extends smoothly across `x0` and the local
    /// values are bridged by a 4-point interpolant through
    /// `x0 +- pv_epsilon, x0 +- 2 pv_epsilon`; otherwise a symmetric
    /// `pv_epsilon` neighbourhood is excluded (principal value).
    pub removable: bool,
}

/// Symmetric-limit integral over `[-L, L]` with exclusion handling.
pub fn integrate_real_pv<F>(f: F, exclusions: &[Exclusion], spec: &QuadratureSpec) -> QuadResult
where
    F: Fn(f64) -> Complex64,
{
    let l = if spec.truncation_l > 0.0 {
        spec.truncation_l
    } else {
        200.0
    };
    let eps = spec.pv_epsilon;

    // Bridge interpolants for removable points.
    struct Bridge {
        x0: f64,
        xs: [f64; 4],
        ys: [Complex64; 4],
    }
    let bridges: Vec<Bridge> = exclusions
        .iter()
        .filter(|e| e.removable)
        .map(|e| {
            let xs = [e.x0 - 2.0 * eps, e.x0 - eps, e.x0 + eps, e.x0 + 2.0 * eps];
            let ys = [f(xs[0]), f(xs[1]), f(xs[2]), f(xs[3])];
            Bridge { x0: e.x0, xs, ys }
        })
        .collect();
    let bridged = |x: f64| -> Complex64 {
        for b in &bridges {
            if (x - b.x0).abs() < eps {
                // cubic Lagrange through the four flanking samples
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..4 {
                    let mut w = 1.0;
                    for j in 0..4 {
                        if i != j {
                            w *= (x - b.xs[j]) / (b.xs[i] - b.xs[j]);
                        }
                    }
                    acc += b.ys[i] * w;
                }
                return acc;
            }
        }
        f(x)
    };

    // Breakpoints: ends, exclusion stitch marks, and gap edges.
    let mut cuts = vec![-l, l];
    for e in exclusions {
        for d in [-2.0 * eps, -eps, eps, 2.0 * eps] {
            let x = e.x0 + d;
            if x > -l && x < l {
                cuts.push(x);
            }
        }
        if !e.removable {
            // symmetric gap (-eps, eps) around x0 is skipped below
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-300);

    let in_gap = |x0: f64, x1: f64| -> bool {
        exclusions
            .iter()
            .any(|e| !e.removable && x0 >= e.x0 - eps - 1e-300 && x1 <= e.x0 + eps + 1e-300)
    };

    let mut total = Complex64::new(0.0, 0.0);
    let mut est = 0.0;
    let mut converged = true;
    let mut budget = spec.max_panels;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if in_gap(x0, x1) {
            continue;
        }
        let r = adaptive_param(&bridged, x0, x1, spec.abs_tol, spec.rel_tol, &mut budget);
        total += r.value;
        est += r.est_abs_error;
        converged &= r.converged;
    }
    // tails beyond +-L from an algebraic/exponential decay fit
    for side in [1.0, -1.0] {
        let fe = f(side * l).norm();
        let fm = f(side * 0.95 * l).norm();
        if fe > 0.0 {
            let c_hat = if fm > fe {
                ((fm / fe).ln() / (0.05 * l)).max(0.5 / l)
            } else {
                0.5 / l
            };
            est += 3.0 * fe / c_hat;
        }
    }
    QuadResult {
        value: total,
        est_abs_error: est,
        converged,
    }
}

/// Adaptive bisection with a 16-node rule compared against its two halves.
pub fn adaptive_param<F>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    budget: &mut usize,
) -> QuadResult
where
    F: Fn(f64) -> Complex64,
{
    let gl = |lo: f64, hi: f64| -> Complex64 {
        let (nodes, weights) = crate::oscint::gauss_legendre(16);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut est = 0.0;
    let mut converged = true;
    // stack of (lo, hi, coarse value, depth)
    let mut stack = vec![(a, b, gl(a, b), 0u32)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        if *budget == 0 {
            total += coarse;
            est += coarse.norm().max(abs_tol);
            converged = false;
            continue;
        }
        *budget = budget.saturating_sub(2);
        let mid = 0.5 * (lo + hi);
        let left = gl(lo, mid);
        let right = gl(mid, hi);
        let fine = left + right;
        let err = (coarse - fine).norm();
        let local_tol = (abs_tol * (hi - lo) / (b - a).max(1e-300)).max(rel_tol * fine.norm());
        if err <= local_tol || depth >= 40 {
            total += fine;
            est += err.min(local_tol.max(err * 1e-2)) + err * 1e-2;
            if depth >= 40 && err > local_tol {
                converged = false;
                est += err;
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    QuadResult {
        value: total,
        est_abs_error: est,
        converged,
    }
}

/// `(1/T) int_0^T h(t) exp(-i n omega t) dt`, `omega = 2 pi / T`, by the
/// uniform trapezoid rule (spectrally accurate for smooth T-periodic data and
/// exact for pure modes below the grid Nyquist index).
pub fn fourier_coefficient(h: &FunctionSpec, n: i64, t_period: f64) -> Complex64 {
    fourier_coefficient_sampled(&|t| h.value(t), n, t_period)
}

/// Same as [`fourier_coefficient`] for a raw callable.
pub fn fourier_coefficient_sampled<F>(h: &F, n: i64, t_period: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    const N_FFT: usize = 1024;
    let omega = 2.0 * PI / t_period;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..N_FFT {
        let t = t_period * k as f64 / N_FFT as f64;
        acc += h(t) * (-Complex64::i() * (n as f64) * omega * t).exp();
    }
    acc / N_FFT as f64
}
