//! Contour-integral solver for the initial nonlocal value problem.
//!
//! Two equivalent representations are evaluated: the D-form
//!
//! ```text
//! 2 pi u(x,t) = PV int_R e^{i l x + i l^3 t} U_hat dl
//!             + int_{dD_R^+} e^{i l x + i l^3 t} N0(l; t') dl
//!             + int_{dD_R^-} e^{i l (x-1) + i l^3 t} rc(l; t') dl
//! ```
//!
//! and the E-form, which trades the real-line term for integration along the
//! complementary sector boundaries with opposite signs. Both hold for any
//! t' >= t; integrands are evaluated in kernel-paired form so every factor
//! stays at the scale of the product actually attained on the path.
//!
//! Ray integrals are truncated at a radius chosen from the cubic-phase
//! integration-by-parts budget. What remains past the truncation is either
//! estimated (oscillatory parts) or corrected: the endpoint part of the time
//! transforms, which at t' = t carries no cubic phase, is fitted on each ray
//! against an inverse-power (plus single live exponential) basis and its tail
//! integrated exactly along a rotated descent path; at t' > t the non-decaying
//! limit of the non-data part of N0 is corrected by an explicit
//! integration-by-parts series.

use crate::contour::QuadratureSpec;
use crate::funcspec::{FunctionSpec, Kind};
use crate::oscint::gauss_legendre;
use crate::problem::{ProblemData, ProblemError};
use crate::spectral::{PairedCtx, SpectralError};
use crate::{ALPHA, ALPHA2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(
        "determinant zero check failed on the D sectors at radius {radius}: \
         counted {count} zeros (boundary minimum {min_abs:.3e})"
    )]
    ZeroFreeGate {
        radius: f64,
        count: i64,
        min_abs: f64,
    },
    #[error("zero count refused: {0}")]
    ZeroCountRefused(String),
    #[error("point ({x}, {t}) outside the domain (x in [0,1], t >= 0)")]
    BadPoint { x: f64, t: f64 },
    #[error("fixed t' = {t_prime} is below a requested t = {t}")]
    TPrimeTooSmall { t_prime: f64, t: f64 },
}

/// Choice of the representation parameter t' per evaluation time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TPrimePolicy {
    /// t' = t. The endpoint parts of the time transforms then carry no cubic
    /// phase and are handled by the fitted tail corrections.
    EqualToT,
    /// t' = t + offset.
    Offset(f64),
    /// One fixed t' for every point (must be >= every requested t).
    Fixed(f64),
    /// t' = 2t: the endpoint parts of the time transforms then oscillate at
    /// the same cubic rate as the propagator kernel, so one truncation rule
    /// covers every family.
    Auto,
}

impl TPrimePolicy {
    pub fn t_prime(&self, t: f64) -> f64 {
        match *self {
            TPrimePolicy::EqualToT => t,
            TPrimePolicy::Offset(d) => t + d,
            TPrimePolicy::Fixed(v) => v,
            TPrimePolicy::Auto => t + t.max(1e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContourVariant {
    /// D-sector boundaries plus the real-line transform of the initial datum.
    TheoremD,
    /// E-sector boundaries only.
    CorollaryE,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Contour radius cap; the effective radius shrinks for large t to keep
    /// the arc kernels near unit scale.
    pub radius: f64,
    pub quad: QuadratureSpec,
    pub t_prime: TPrimePolicy,
    pub variant: ContourVariant,
    /// Run the argument-principle zero check on the D closures before
    /// solving.
    pub check_zero_free: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            radius: 3.0,
            quad: QuadratureSpec::default(),
            t_prime: TPrimePolicy::Auto,
            variant: ContourVariant::CorollaryE,
            check_zero_free: true,
        }
    }
}

/// Evaluated solution samples with per-point error estimates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionField {
    pub points: Vec<(f64, f64)>,
    pub values: Vec<Complex64>,
    pub est_abs_error: Vec<f64>,
    pub diagnostics: FieldDiagnostics,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub cancellation_count: usize,
    pub max_truncation_l: f64,
    pub min_radius: f64,
    pub integrand_evals: usize,
}

impl SolutionField {
    pub fn max_est_error(&self) -> f64 {
        self.est_abs_error.iter().cloned().fold(0.0, f64::max)
    }
}

/// Pointwise agreement report between the two contour variants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantReport {
    pub points: Vec<(f64, f64)>,
    pub discrepancy: Vec<f64>,
    pub combined_est: Vec<f64>,
    pub passed: bool,
}

/// `rc(lambda; t') = n(lambda) + i lambda h1~ - lambda^2 h0~`, the
/// combination carried by the contours attached to the right endpoint.
pub fn right_combination(
    data: &ProblemData,
    lambda: Complex64,
    t_prime: f64,
) -> Result<crate::spectral::SpectralEval, SpectralError> {
    let n = crate::spectral::n_combined(data, lambda, t_prime)?;
    let h0t = crate::spectral::time_transform(&data.boundary0, lambda, t_prime)?.value;
    let h1t = crate::spectral::time_transform(&data.boundary1, lambda, t_prime)?.value;
    let v = n.value + Complex64::i() * lambda * h1t - lambda * lambda * h0t;
    let mut out = n;
    out.value = v;
    out.est_abs_error += 1e-15 * (lambda.norm() * h1t.norm() + lambda.norm_sqr() * h0t.norm());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Job layout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum WKind {
    /// Kernel exp(i lambda x), amplitude N0-paired.
    Plus,
    /// Kernel exp(i lambda (x-1)), amplitude rc-paired.
    Minus,
    /// Kernel exp(i lambda x), amplitude U_hat-paired (real-line term).
    UHat,
}

#[derive(Debug, Clone, Copy)]
struct RayJob {
    theta: f64,
    sign: f64,
    kind: WKind,
}

#[derive(Debug, Clone, Copy)]
struct ArcJob {
    th0: f64,
    th1: f64,
    sign: f64,
    kind: WKind,
}

/// Ray and arc jobs for one variant, orientation signs folded in (including
/// the global minus of the E-form). Rays are parameterized outward.
fn jobs_for(variant: ContourVariant) -> (Vec<RayJob>, Vec<ArcJob>, bool) {
    let ray = |theta: f64, sign: f64, kind: WKind| RayJob { theta, sign, kind };
    match variant {
        ContourVariant::CorollaryE => {
            // -int_{dE+} W+ over sectors (0, pi/3) and (2pi/3, pi);
            // -int_{dE-} W- over (-2pi/3, -pi/3).
            let rays = vec![
                ray(PI / 3.0, 1.0, WKind::Plus),
                ray(0.0, -1.0, WKind::Plus),
                ray(PI, 1.0, WKind::Plus),
                ray(2.0 * PI / 3.0, -1.0, WKind::Plus),
                ray(-PI / 3.0, 1.0, WKind::Minus),
                ray(-2.0 * PI / 3.0, -1.0, WKind::Minus),
            ];
            let arcs = vec![
                ArcJob {
                    th0: PI / 3.0,
                    th1: 0.0,
                    sign: -1.0,
                    kind: WKind::Plus,
                },
                ArcJob {
                    th0: PI,
                    th1: 2.0 * PI / 3.0,
                    sign: -1.0,
                    kind: WKind::Plus,
                },
                ArcJob {
                    th0: -PI / 3.0,
                    th1: -2.0 * PI / 3.0,
                    sign: -1.0,
                    kind: WKind::Minus,
                },
            ];
            (rays, arcs, false)
        }
        ContourVariant::TheoremD => {
            // +int_{dD+} W+ over (pi/3, 2pi/3);
            // +int_{dD-} W- over (-pi, -2pi/3) and (-pi/3, 0);
            // +PV int_R e^{i l x} [e^{i l^3 t} U_hat].
            let rays = vec![
                ray(2.0 * PI / 3.0, -1.0, WKind::Plus),
                ray(PI / 3.0, 1.0, WKind::Plus),
                ray(0.0, -1.0, WKind::Minus),
                ray(-PI / 3.0, 1.0, WKind::Minus),
                ray(-2.0 * PI / 3.0, -1.0, WKind::Minus),
                ray(-PI, 1.0, WKind::Minus),
            ];
            let arcs = vec![
                ArcJob {
                    th0: 2.0 * PI / 3.0,
                    th1: PI / 3.0,
                    sign: 1.0,
                    kind: WKind::Plus,
                },
                ArcJob {
                    th0: 0.0,
                    th1: -PI / 3.0,
                    sign: 1.0,
                    kind: WKind::Minus,
                },
                ArcJob {
                    th0: -2.0 * PI / 3.0,
                    th1: -PI,
                    sign: 1.0,
                    kind: WKind::Minus,
                },
            ];
            (rays, arcs, true)
        }
    }
}

// ---------------------------------------------------------------------------
// Geometry and budget rules
// ---------------------------------------------------------------------------

/// Largest spectral feature of the data: space-mode frequencies directly,
/// time-mode frequencies through the cube root.
fn data_feature_scale(data: &ProblemData) -> f64 {
    let space_scale = |f: &FunctionSpec| -> f64 {
        if let Kind::Modes(m) = &f.kind {
            m.iter().map(|m| m.freq.norm()).fold(0.0, f64::max)
        } else {
            0.0
        }
    };
    let time_scale = |f: &FunctionSpec| -> f64 {
        if let Kind::Modes(m) = &f.kind {
            m.iter()
                .map(|m| m.freq.norm().powf(1.0 / 3.0))
                .fold(0.0, f64::max)
        } else {
            0.0
        }
    };
    let mut s: f64 = 1.0;
    s = s
        .max(space_scale(&data.initial))
        .max(space_scale(&data.weight));
    for h in [&data.boundary0, &data.boundary1, &data.nonlocal] {
        s = s.max(time_scale(h));
    }
    s
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    r: f64,
    l: f64,
    l_upper: f64,
    t: f64,
    t_prime: f64,
    delta: f64,
    /// slowest cubic phase rate among the active oscillatory families
    phase_rate: f64,
}

fn geometry_for(data: &ProblemData, cfg: &SolverConfig, t: f64) -> Geometry {
    let t_prime = cfg.t_prime.t_prime(t);
    let delta = (t_prime - t).max(0.0);
    let tbar = t.max(1e-3);
    // keep |lambda^3| * max(t, delta) small on the arc so the kernel pairing
    // never cancels more than a couple of digits there
    let r_budget = (4.0 / t.max(delta).max(0.25)).cbrt();
    let r = cfg.radius.min(r_budget).max(0.5);
    let phase_rate = if delta > 1e-9 { tbar.min(delta) } else { tbar };
    let feature = data_feature_scale(data);
    let l = if cfg.quad.truncation_l > 0.0 {
        cfg.quad.truncation_l
    } else {
        (4.0e5 / (3.0 * phase_rate))
            .powf(0.25)
            .max(r + 6.0)
            .max(2.0 * feature + 4.0)
            .min(600.0)
    };
    // upper rays sink into rounding noise once exp(0.87 s) swamps f64; their
    // tails are reconstructed analytically instead of integrated further out
    let l_upper = l.min((r + 6.0).max(26.0).max(2.0 * feature + 4.0));
    Geometry {
        r,
        l,
        l_upper,
        t,
        t_prime,
        delta,
        phase_rate,
    }
}

fn is_upper(theta: f64) -> bool {
    (theta - PI / 3.0).abs() < 1e-12 || (theta - 2.0 * PI / 3.0).abs() < 1e-12
}

/// Breakpoints slicing `[r, l]` into at most `max_cuts` pieces of equal
/// cumulative phase `s + s^3 rate` (plus endpoints).
fn phase_cuts(r: f64, l: f64, rate: f64, max_cuts: usize) -> Vec<f64> {
    let phi = |s: f64| s - r + (s * s * s - r * r * r) * rate;
    let total = phi(l);
    let pieces = ((total / PI).ceil() as usize).clamp(4, max_cuts);
    let mut cuts = Vec::with_capacity(pieces + 1);
    cuts.push(r);
    for k in 1..pieces {
        let target = total * k as f64 / pieces as f64;
        // bisect phi(s) = target
        let (mut a, mut b) = (r, l);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if phi(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        cuts.push(0.5 * (a + b));
    }
    cuts.push(l);
    cuts
}

// ---------------------------------------------------------------------------
// Solver entry points
// ---------------------------------------------------------------------------

/// Evaluate the solution representation at the requested (x, t) points.
pub fn solve_invp(
    data: &ProblemData,
    cfg: &SolverConfig,
    points: &[(f64, f64)],
) -> Result<SolutionField, SolveError> {
    data.validate()?;
    for &(x, t) in points {
        if !(0.0..=1.0).contains(&x) || t < 0.0 {
            return Err(SolveError::BadPoint { x, t });
        }
        if let TPrimePolicy::Fixed(v) = cfg.t_prime {
            if v < t {
                return Err(SolveError::TPrimeTooSmall { t_prime: v, t });
            }
        }
    }

    if data.initial.is_zero() && data.is_homogeneous() {
        return Ok(SolutionField {
            points: points.to_vec(),
            values: vec![Complex64::new(0.0, 0.0); points.len()],
            est_abs_error: vec![0.0; points.len()],
            diagnostics: FieldDiagnostics::default(),
        });
    }

    // group points by t, keeping original indices for reassembly
    let mut groups: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    for (i, &(x, t)) in points.iter().enumerate() {
        if let Some(g) = groups.iter_mut().find(|(gt, _)| *gt == t) {
            g.1.push((i, x));
        } else {
            groups.push((t, vec![(i, x)]));
        }
    }

    // zero-free gate at the smallest radius any group will use
    if cfg.check_zero_free {
        let min_r = groups
            .iter()
            .map(|(t, _)| geometry_for(data, cfg, *t).r)
            .fold(cfg.radius, f64::min);
        gate_zero_free(data, min_r)?;
    }

    let results: Vec<Result<GroupResult, SolveError>> = groups
        .par_iter()
        .map(|(t, pts)| solve_group(data, cfg, *t, pts))
        .collect();

    let mut values = vec![Complex64::new(0.0, 0.0); points.len()];
    let mut errs = vec![0.0; points.len()];
    let mut diag = FieldDiagnostics {
        min_radius: f64::INFINITY,
        ..Default::default()
    };
    for r in results {
        let g = r?;
        for (slot, v, e) in g.entries {
            values[slot] = v;
            errs[slot] = e;
        }
        diag.cancellation_count += g.cancellations;
        diag.max_truncation_l = diag.max_truncation_l.max(g.l_used);
        diag.min_radius = diag.min_radius.min(g.r_used);
        diag.integrand_evals += g.evals;
    }
    if !diag.min_radius.is_finite() {
        diag.min_radius = cfg.radius;
    }
    Ok(SolutionField {
        points: points.to_vec(),
        values,
        est_abs_error: errs,
        diagnostics: diag,
    })
}

/// Run both variants and compare pointwise.
pub fn cross_check_variants(
    data: &ProblemData,
    cfg: &SolverConfig,
    points: &[(f64, f64)],
) -> Result<VariantReport, SolveError> {
    let mut cfg_d = cfg.clone();
    cfg_d.variant = ContourVariant::TheoremD;
    let mut cfg_e = cfg.clone();
    cfg_e.variant = ContourVariant::CorollaryE;
    let ud = solve_invp(data, &cfg_d, points)?;
    let ue = solve_invp(data, &cfg_e, points)?;
    let discrepancy: Vec<f64> = ud
        .values
        .iter()
        .zip(&ue.values)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let combined_est: Vec<f64> = ud
        .est_abs_error
        .iter()
        .zip(&ue.est_abs_error)
        .map(|(a, b)| a + b)
        .collect();
    let passed = discrepancy
        .iter()
        .zip(&combined_est)
        .all(|(d, e)| *d <= 2.0 * e.max(1e-12));
    Ok(VariantReport {
        points: points.to_vec(),
        discrepancy,
        combined_est,
        passed,
    })
}

fn gate_zero_free(data: &ProblemData, radius: f64) -> Result<(), SolveError> {
    let report = crate::verify::count_delta_zeros_d_closure(&data.weight, radius, 50.0)
        .map_err(|e| SolveError::ZeroCountRefused(e.to_string()))?;
    if report.winding_count != 0 {
        return Err(SolveError::ZeroFreeGate {
            radius,
            count: report.winding_count,
            min_abs: report.min_abs_delta_on_boundary,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Per-t evaluation
// ---------------------------------------------------------------------------

struct GroupResult {
    entries: Vec<(usize, Complex64, f64)>,
    cancellations: usize,
    l_used: f64,
    r_used: f64,
    evals: usize,
}

fn solve_group(
    data: &ProblemData,
    cfg: &SolverConfig,
    t: f64,
    pts: &[(usize, f64)],
) -> Result<GroupResult, SolveError> {
    let xs: Vec<f64> = pts.iter().map(|&(_, x)| x).collect();

    // at t = 0 the representation collapses to the Fourier inversion of U
    if t == 0.0 {
        let entries = pts
            .iter()
            .map(|&(i, x)| (i, data.initial.value(x), 1e-12))
            .collect();
        return Ok(GroupResult {
            entries,
            cancellations: 0,
            l_used: 0.0,
            r_used: cfg.radius,
            evals: 0,
        });
    }

    let geo = geometry_for(data, cfg, t);
    let ctx = PairedCtx::new(data, t, geo.t_prime);
    let (rays, arcs, with_real_line) = jobs_for(cfg.variant);

    let mut acc = PointAccumulator::new(xs.len());

    for ray in &rays {
        integrate_ray(&ctx, &geo, ray, &xs, cfg, &mut acc)?;
    }
    for arc in &arcs {
        integrate_arc(&ctx, &geo, arc, &xs, &mut acc)?;
    }
    if with_real_line {
        integrate_real_line_term(&ctx, &geo, &xs, cfg, &mut acc)?;
    }

    let inv2pi = 1.0 / (2.0 * PI);
    let entries = pts
        .iter()
        .enumerate()
        .map(|(k, &(i, _))| (i, acc.values[k] * inv2pi, acc.errs[k] * inv2pi))
        .collect();
    Ok(GroupResult {
        entries,
        cancellations: acc.cancellations,
        l_used: geo.l,
        r_used: geo.r,
        evals: acc.evals,
    })
}

struct PointAccumulator {
    values: Vec<Complex64>,
    errs: Vec<f64>,
    cancellations: usize,
    evals: usize,
}

impl PointAccumulator {
    fn new(n: usize) -> Self {
        PointAccumulator {
            values: vec![Complex64::new(0.0, 0.0); n],
            errs: vec![0.0; n],
            cancellations: 0,
            evals: 0,
        }
    }
}

fn kernel_shift(kind: WKind) -> f64 {
    match kind {
        WKind::Plus | WKind::UHat => 0.0,
        WKind::Minus => -1.0,
    }
}

fn eval_w(
    ctx: &PairedCtx,
    kind: WKind,
    lam: Complex64,
) -> Result<(Complex64, bool), SpectralError> {
    match kind {
        WKind::Plus => ctx.w_plus(lam).map(|e| (e.value, e.cancelled)),
        WKind::Minus => ctx.w_minus(lam).map(|e| (e.value, e.cancelled)),
        WKind::UHat => Ok((ctx.u_hat_paired(lam), false)),
    }
}

/// Adaptive integration of one truncated ray with the heavy amplitude shared
/// across evaluation points, followed by tail treatment.
fn integrate_ray(
    ctx: &PairedCtx,
    geo: &Geometry,
    ray: &RayJob,
    xs: &[f64],
    cfg: &SolverConfig,
    acc: &mut PointAccumulator,
) -> Result<(), SolveError> {
    let dir = Complex64::from_polar(1.0, ray.theta);
    let l_ray = if is_upper(ray.theta) && ray.kind == WKind::Plus {
        geo.l_upper
    } else {
        geo.l
    };
    let shift = kernel_shift(ray.kind);

    // initial segmentation: equal slices of cumulative phase, capped; the
    // adaptive splitter resolves whatever still matters
    let rate = geo.t_prime.max(geo.t);
    let cuts = phase_cuts(geo.r, l_ray, rate, 96);

    let mut budget = cfg.quad.max_panels;

    let eval_seg = |s0: f64,
                    s1: f64,
                    evals: &mut usize,
                    cancels: &mut usize|
     -> Result<Vec<Complex64>, SpectralError> {
        let (nodes, weights) = gauss_legendre(16);
        let mid = 0.5 * (s0 + s1);
        let half = 0.5 * (s1 - s0);
        let mut vals = vec![Complex64::new(0.0, 0.0); xs.len()];
        for (node, w) in nodes.iter().zip(weights.iter()) {
            let s = mid + half * node;
            let lam = dir * s;
            let (wv, cancelled) = eval_w(ctx, ray.kind, lam)?;
            *evals += 1;
            if cancelled {
                *cancels += 1;
            }
            if wv.norm_sqr() == 0.0 {
                continue;
            }
            for (k, &x) in xs.iter().enumerate() {
                let kern = (Complex64::i() * lam * (x + shift)).exp();
                vals[k] += kern * wv * *w;
            }
        }
        let scale = half * dir;
        for v in &mut vals {
            *v *= scale;
        }
        Ok(vals)
    };

    let mut cancels = 0usize;
    let mut evals = 0usize;
    let mut stack: Vec<(f64, f64, Vec<Complex64>, u32)> = Vec::new();
    let mut scale0 = 0.0f64;
    for w in cuts.windows(2) {
        let v = eval_seg(w[0], w[1], &mut evals, &mut cancels)?;
        scale0 = scale0.max(v.iter().map(|z| z.norm()).fold(0.0, f64::max));
        stack.push((w[0], w[1], v, 0));
    }
    let tol_share = cfg
        .quad
        .abs_tol
        .max(cfg.quad.rel_tol * scale0)
        .max(1e-14);
    let total_len = l_ray - geo.r;
    while let Some((s0, s1, coarse, depth)) = stack.pop() {
        if budget == 0 || depth >= 24 {
            for (k, v) in coarse.iter().enumerate() {
                acc.values[k] += ray.sign * v;
                acc.errs[k] += v.norm() * 1e-3 + tol_share;
            }
            continue;
        }
        budget = budget.saturating_sub(2);
        let mid = 0.5 * (s0 + s1);
        let left = eval_seg(s0, mid, &mut evals, &mut cancels)?;
        let right = eval_seg(mid, s1, &mut evals, &mut cancels)?;
        let mut worst = 0.0f64;
        for k in 0..xs.len() {
            worst = worst.max((coarse[k] - left[k] - right[k]).norm());
        }
        let local_tol = tol_share * ((s1 - s0) / total_len).max(1e-6);
        if worst <= local_tol {
            for k in 0..xs.len() {
                let fine = left[k] + right[k];
                acc.values[k] += ray.sign * fine;
                acc.errs[k] += (coarse[k] - fine).norm();
            }
        } else {
            stack.push((s0, mid, left, depth + 1));
            stack.push((mid, s1, right, depth + 1));
        }
    }
    acc.cancellations += cancels;
    acc.evals += evals;

    ray_tail(ctx, geo, ray, l_ray, xs, acc)?;
    Ok(())
}

/// Tail handling past the truncation radius of one ray.
fn ray_tail(
    ctx: &PairedCtx,
    geo: &Geometry,
    ray: &RayJob,
    l_ray: f64,
    xs: &[f64],
    acc: &mut PointAccumulator,
) -> Result<(), SolveError> {
    let dir = Complex64::from_polar(1.0, ray.theta);
    let z0 = dir * l_ray;
    let shift = kernel_shift(ray.kind);
    let equal_t = geo.delta <= 1e-9;

    let (w_l, _) = eval_w(ctx, ray.kind, z0)?;
    let b0_l = if equal_t && ray.kind != WKind::UHat {
        endpoint_amplitude(ctx, ray.kind, ray.theta, z0)?
    } else {
        Complex64::new(0.0, 0.0)
    };

    for (k, &x) in xs.iter().enumerate() {
        let xi = x + shift;
        // cubic-phase families: dropped, estimated from the amplitude left at
        // the truncation radius against the integration-by-parts rate
        let denom = (3.0 * l_ray * l_ray * geo.phase_rate + xi.abs()).max(1e-6);
        let kern_mag = (-(xi) * z0.im).exp().min(1.0);
        acc.errs[k] += (w_l - b0_l).norm() * kern_mag / denom * 3.0;
    }

    if equal_t && ray.kind != WKind::UHat {
        fitted_endpoint_tail(ctx, ray, l_ray, xs, acc)?;
    } else if ray.kind == WKind::Plus && is_upper(ray.theta) && !ctx.data.nonlocal.is_zero() {
        // the non-data part of N0 tends to a nonzero constant in the upper
        // sectors; past truncation it oscillates like exp(-i lambda^3 delta)
        let c_inf = ctx.nu0_limit();
        for (k, &x) in xs.iter().enumerate() {
            let tail = byparts_phase_tail(z0, x, -geo.delta, 3);
            acc.values[k] += ray.sign * c_inf * tail;
            acc.errs[k] += c_inf.norm() * tail.norm() * 2e-2;
        }
    }
    Ok(())
}

/// Endpoint amplitude at t' = t (coefficient of the phaseless family in the
/// paired integrand).
fn endpoint_amplitude(
    ctx: &PairedCtx,
    kind: WKind,
    theta: f64,
    lam: Complex64,
) -> Result<Complex64, SolveError> {
    Ok(match kind {
        WKind::Minus => ctx.rc_end(lam)?,
        WKind::Plus => {
            if is_upper(theta) {
                ctx.n0_end(lam)?
            } else {
                // on real rays the factor e^{-i lambda} is folded into the
                // kernel: e^{i l x} e^{-i l} rc_end = e^{i l (x-1)} rc_end
                ctx.rc_end(lam)?
            }
        }
        WKind::UHat => Complex64::new(0.0, 0.0),
    })
}

/// Kernel exponent offset seen by the endpoint family on each ray.
fn endpoint_kernel_shift(kind: WKind, theta: f64) -> f64 {
    match kind {
        WKind::Minus => -1.0,
        WKind::Plus => {
            if is_upper(theta) {
                0.0
            } else {
                -1.0
            }
        }
        WKind::UHat => 0.0,
    }
}

/// Least-squares model of the endpoint amplitude along one ray: inverse
/// powers of lambda, plus one live exponential family on the upper rays.
struct EndpointFit {
    basis: Vec<(i32, Option<Complex64>)>,
    coeffs: Vec<Complex64>,
    resid: f64,
    sample_scale: f64,
    z0: Complex64,
    dir: Complex64,
    l_ray: f64,
}

impl EndpointFit {
    fn build(ctx: &PairedCtx, kind: WKind, theta: f64, l_ray: f64) -> Result<Self, SolveError> {
        let dir = Complex64::from_polar(1.0, theta);
        let z0 = dir * l_ray;
        let upper = is_upper(theta) && kind == WKind::Plus;
        let live: Option<Complex64> = if upper {
            if (theta - PI / 3.0).abs() < 1e-9 {
                Some(ALPHA)
            } else {
                Some(ALPHA2)
            }
        } else {
            None
        };
        let mut basis: Vec<(i32, Option<Complex64>)> = if upper {
            vec![(0, None), (1, None), (2, None), (3, None)]
        } else {
            vec![(1, None), (2, None), (3, None)]
        };
        if let Some(a) = live {
            basis.push((1, Some(a)));
            basis.push((2, Some(a)));
            basis.push((3, Some(a)));
        }
        let n_samp = basis.len() * 2 + 2;
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(n_samp);
        let mut rhs: Vec<Complex64> = Vec::with_capacity(n_samp);
        for i in 0..n_samp {
            let s = l_ray * (1.0 + 0.11 * i as f64);
            let lam = dir * s;
            let b = endpoint_amplitude(ctx, kind, theta, lam)?;
            let row = basis
                .iter()
                .map(|&(p, ph)| {
                    // the true complex basis (L/lambda)^p, whose restriction
                    // to the ray carries the constant phase dir^{-p}
                    let mut v =
                        Complex64::from_polar((l_ray / s).powi(p), -(p as f64) * theta);
                    if let Some(a) = ph {
                        let phase: Complex64 = (-Complex64::i() * a * (lam - z0)).exp();
                        v *= phase;
                    }
                    v
                })
                .collect();
            rows.push(row);
            rhs.push(b);
        }
        let sample_scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (coeffs, resid) = complex_least_squares(&rows, &rhs);
        Ok(EndpointFit {
            basis,
            coeffs,
            resid,
            sample_scale,
            z0,
            dir,
            l_ray,
        })
    }

    /// `int_{z0}^{inf} e^{i lambda xi} B(lambda) dlambda` for the fitted
    /// model, plus a residual-scaled magnitude for the error estimate.
    fn tail(&self, xi: f64) -> (Complex64, f64) {
        let mut tail = Complex64::new(0.0, 0.0);
        let mut tail_mag = 0.0;
        for (c, &(p, ph)) in self.coeffs.iter().zip(self.basis.iter()) {
            // basis e^{-i a (lambda - z0)} (L/lambda)^p against e^{i lambda xi}:
            // fold the phase into the kernel exponent and restore the
            // normalization constant e^{i a z0}
            let (xi_eff, norm_c) = match ph {
                None => (Complex64::new(xi, 0.0), Complex64::new(1.0, 0.0)),
                Some(a) => (
                    Complex64::new(xi, 0.0) - a,
                    (Complex64::i() * a * self.z0).exp(),
                ),
            };
            let tk = norm_c * basis_tail_integral(self.z0, self.dir, xi_eff, p, self.l_ray);
            tail += c * tk;
            tail_mag += tk.norm();
        }
        (tail, self.resid * tail_mag)
    }
}

/// Fit the endpoint amplitude on the ray and integrate its tail along
/// rotated descent paths; applied only at t' = t, where this part of the
/// integrand carries no cubic phase.
fn fitted_endpoint_tail(
    ctx: &PairedCtx,
    ray: &RayJob,
    l_ray: f64,
    xs: &[f64],
    acc: &mut PointAccumulator,
) -> Result<(), SolveError> {
    let fit = EndpointFit::build(ctx, ray.kind, ray.theta, l_ray)?;
    acc.evals += fit.basis.len() * 2 + 2;
    let eshift = endpoint_kernel_shift(ray.kind, ray.theta);
    for (k, &x) in xs.iter().enumerate() {
        let xi = x + eshift;
        if xi.abs() < 0.02 {
            // spatial endpoint: the tail kernel stops decaying; report the
            // (documented) degraded accuracy instead of correcting
            acc.errs[k] += fit.sample_scale;
            continue;
        }
        let (tail, err) = fit.tail(xi);
        acc.values[k] += ray.sign * tail;
        acc.errs[k] += err + tail.norm() * 1e-9;
    }
    Ok(())
}

/// Test support: the fitted endpoint tail of the rc-carrying family on the
/// ray at `theta`, truncated at `l_ray`, against kernel `exp(i lambda xi)`.
#[doc(hidden)]
pub fn debug_fitted_tail(
    ctx: &PairedCtx,
    theta: f64,
    l_ray: f64,
    xi: f64,
) -> Complex64 {
    let fit = EndpointFit::build(ctx, WKind::Minus, theta, l_ray).unwrap();
    fit.tail(xi).0
}

/// Test support: same for the N0-carrying family (kernel `exp(i lambda x)`).
#[doc(hidden)]
pub fn debug_fitted_tail_plus(
    ctx: &PairedCtx,
    theta: f64,
    l_ray: f64,
    x: f64,
) -> Complex64 {
    let fit = EndpointFit::build(ctx, WKind::Plus, theta, l_ray).unwrap();
    fit.tail(x + endpoint_kernel_shift(WKind::Plus, theta)).0
}

/// Test support: one basis-function tail integral (with optional live phase).
#[doc(hidden)]
pub fn debug_basis_tail(
    z0: Complex64,
    dir: Complex64,
    xi: f64,
    p: i32,
    l: f64,
    live: Option<Complex64>,
) -> Complex64 {
    match live {
        None => basis_tail_integral(z0, dir, Complex64::new(xi, 0.0), p, l),
        Some(a) => {
            (Complex64::i() * a * z0).exp()
                * basis_tail_integral(z0, dir, Complex64::new(xi, 0.0) - a, p, l)
        }
    }
}

/// Test support: fit residual and model evaluation along the ray.
#[doc(hidden)]
pub fn debug_fit_probe(
    ctx: &PairedCtx,
    theta: f64,
    l_ray: f64,
    s_values: &[f64],
) -> (f64, Vec<Complex64>) {
    let fit = EndpointFit::build(ctx, WKind::Plus, theta, l_ray).unwrap();
    let dir = Complex64::from_polar(1.0, theta);
    let model: Vec<Complex64> = s_values
        .iter()
        .map(|&s| {
            let lam = dir * s;
            let mut v = Complex64::new(0.0, 0.0);
            for (c, &(p, ph)) in fit.coeffs.iter().zip(fit.basis.iter()) {
                let mut b = Complex64::from_polar((l_ray / s).powi(p), -(p as f64) * theta);
                if let Some(a) = ph {
                    b *= (-Complex64::i() * a * (lam - fit.z0)).exp();
                }
                v += c * b;
            }
            v
        })
        .collect();
    (fit.resid, model)
}

/// `int_{z0}^{inf * dir} exp(i lambda xi) (L/lambda)^p dlambda` for complex
/// `xi` with a ray-convergent kernel, via rotation to the steepest descent
/// direction (the integrand continues analytically off the ray).
fn basis_tail_integral(z0: Complex64, dir: Complex64, xi: Complex64, p: i32, l: f64) -> Complex64 {
    let xin = xi.norm();
    if xin < 1e-12 {
        return Complex64::new(0.0, 0.0);
    }
    let mut d = Complex64::i() * xi.conj() / xin;
    // keep the path from bending back toward the origin (tolerance avoids
    // spurious blending from rounding of z0's angle)
    if (z0.conj() * d).re < -1e-9 * z0.norm() {
        let blend = 0.5 * (d + dir);
        d = if blend.norm() > 1e-6 {
            blend / blend.norm()
        } else {
            dir
        };
    }
    // full complex exponent coefficient along the path: e^{i lam xi} =
    // e^{i z0 xi} e^{-gamma v} with gamma = -i d xi (Re gamma = decay rate,
    // Im gamma = residual oscillation when the direction was blended)
    let gamma = -(Complex64::i() * d * xi);
    let rate = gamma.re;
    if rate <= 1e-12 {
        if p == 0 {
            return -(Complex64::i() * z0 * xi).exp() / (Complex64::i() * xi);
        }
        return Complex64::new(0.0, 0.0);
    }
    let pref = (Complex64::i() * z0 * xi).exp() * d;
    let vmax = 42.0 / rate;
    let cutpoints = [0.0, 0.02, 0.08, 0.2, 0.5, 1.0];
    let (nodes, weights) = gauss_legendre(16);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cutpoints.windows(2) {
        let (a, b) = (w[0] * vmax, w[1] * vmax);
        // subdivide so residual oscillation stays resolved per panel
        let subs = ((gamma.im.abs() * (b - a) / 2.5).ceil() as usize).max(1);
        for k in 0..subs {
            let aa = a + (b - a) * k as f64 / subs as f64;
            let bb = a + (b - a) * (k + 1) as f64 / subs as f64;
            let mid = 0.5 * (aa + bb);
            let half = 0.5 * (bb - aa);
            for (nd, wt) in nodes.iter().zip(weights.iter()) {
                let v = mid + half * nd;
                let lam = z0 + d * v;
                let f = (-(gamma * v)).exp()
                    * (l / lam.norm()).powi(p)
                    * Complex64::from_polar(1.0, -(p as f64) * lam.arg());
                acc += f * *wt * half;
            }
        }
    }
    pref * acc
}

/// Integration-by-parts series for
/// `int_{z0}^{inf} exp(i (lambda x + lambda^3 dt)) dlambda` along the ray
/// through z0 (constant amplitude).
fn byparts_phase_tail(z0: Complex64, x: f64, dt: f64, terms: usize) -> Complex64 {
    let lam = z0;
    let p1 = Complex64::i() * (x + 3.0 * lam * lam * dt);
    let p2 = Complex64::i() * 6.0 * lam * dt;
    let p3 = Complex64::i() * 6.0 * dt;
    if p1.norm() < 1e-12 {
        return Complex64::new(0.0, 0.0);
    }
    let t0 = -1.0 / p1;
    let mut sum = t0;
    if terms > 1 {
        let t1 = -(p2 / (p1 * p1)) / p1;
        sum += t1;
        if terms > 2 {
            let t1p = -p3 / (p1 * p1 * p1) + 3.0 * p2 * p2 / (p1 * p1 * p1 * p1);
            sum += -t1p / p1;
        }
    }
    let phase = (Complex64::i() * (lam * x + lam * lam * lam * dt)).exp();
    phase * sum
}

/// Dense complex least squares via normal equations (small systems only).
fn complex_least_squares(rows: &[Vec<Complex64>], rhs: &[Complex64]) -> (Vec<Complex64>, f64) {
    let m = rows.len();
    let n = rows[0].len();
    let mut aug = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n];
    for i in 0..m {
        for j in 0..n {
            for k in 0..n {
                let add = rows[i][j].conj() * rows[i][k];
                aug[j][k] += add;
            }
            let add = rows[i][j].conj() * rhs[i];
            aug[j][n] += add;
        }
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| {
                aug[p][col]
                    .norm()
                    .partial_cmp(&aug[q][col].norm())
                    .unwrap()
            })
            .unwrap();
        aug.swap(col, piv);
        let d = aug[col][col];
        if d.norm() < 1e-300 {
            continue;
        }
        for row in 0..n {
            if row != col {
                let f = aug[row][col] / d;
                for k in col..=n {
                    let sub = aug[col][k] * f;
                    aug[row][k] -= sub;
                }
            }
        }
    }
    let coeffs: Vec<Complex64> = (0..n)
        .map(|j| {
            let d = aug[j][j];
            if d.norm() < 1e-300 {
                Complex64::new(0.0, 0.0)
            } else {
                aug[j][n] / d
            }
        })
        .collect();
    let mut resid = 0.0;
    for i in 0..m {
        let fit: Complex64 = rows[i].iter().zip(&coeffs).map(|(r, c)| r * c).sum();
        resid += (fit - rhs[i]).norm_sqr();
    }
    (coeffs, (resid / m as f64).sqrt())
}

fn integrate_arc(
    ctx: &PairedCtx,
    geo: &Geometry,
    arc: &ArcJob,
    xs: &[f64],
    acc: &mut PointAccumulator,
) -> Result<(), SolveError> {
    let (nodes, weights) = gauss_legendre(64);
    let shift = kernel_shift(arc.kind);
    let mid = 0.5 * (arc.th0 + arc.th1);
    let half = 0.5 * (arc.th1 - arc.th0);
    for (nd, wt) in nodes.iter().zip(weights.iter()) {
        let th = mid + half * nd;
        let lam = Complex64::from_polar(geo.r, th);
        let (wv, cancelled) = eval_w(ctx, arc.kind, lam)?;
        acc.evals += 1;
        if cancelled {
            acc.cancellations += 1;
        }
        if wv.norm_sqr() == 0.0 {
            continue;
        }
        let dz = Complex64::i() * lam * half;
        for (k, &x) in xs.iter().enumerate() {
            let kern = (Complex64::i() * lam * (x + shift)).exp();
            acc.values[k] += arc.sign * kern * wv * dz * *wt;
        }
    }
    Ok(())
}

/// The real-line transform term of the D-form,
/// `PV int e^{i l x} [e^{i l^3 t} U_hat(l)] dl`, with the tails rotated into
/// the decaying sector interiors (legal: the integrand is entire and the
/// propagator decays there for t > 0).
fn integrate_real_line_term(
    ctx: &PairedCtx,
    geo: &Geometry,
    xs: &[f64],
    cfg: &SolverConfig,
    acc: &mut PointAccumulator,
) -> Result<(), SolveError> {
    if ctx.data.initial.is_zero() {
        return Ok(());
    }
    let l = geo.l;
    let rate = geo.t.max(1e-3);

    // symmetric phase-sliced segmentation of [-l, l]
    let half_cuts = phase_cuts(0.0, l, rate, 64);
    let mut cuts: Vec<f64> = half_cuts.iter().rev().map(|s| -s).collect();
    cuts.extend(half_cuts.iter().skip(1));
    let eval_seg = |s0: f64, s1: f64, evals: &mut usize| -> Vec<Complex64> {
        let (nodes, weights) = gauss_legendre(16);
        let mid = 0.5 * (s0 + s1);
        let half = 0.5 * (s1 - s0);
        let mut vals = vec![Complex64::new(0.0, 0.0); xs.len()];
        for (node, w) in nodes.iter().zip(weights.iter()) {
            let lam = Complex64::new(mid + half * node, 0.0);
            let wv = ctx.u_hat_paired(lam);
            *evals += 1;
            for (k, &x) in xs.iter().enumerate() {
                vals[k] += (Complex64::i() * lam * x).exp() * wv * *w;
            }
        }
        for v in &mut vals {
            *v *= half;
        }
        vals
    };
    let tol_share = cfg.quad.abs_tol.max(1e-13);
    let mut stack: Vec<(f64, f64, Vec<Complex64>, u32)> = Vec::new();
    let mut evals = 0usize;
    for w in cuts.windows(2) {
        let v = eval_seg(w[0], w[1], &mut evals);
        stack.push((w[0], w[1], v, 0));
    }
    while let Some((s0, s1, coarse, depth)) = stack.pop() {
        if depth >= 26 {
            for (k, v) in coarse.iter().enumerate() {
                acc.values[k] += v;
                acc.errs[k] += v.norm() * 1e-3;
            }
            continue;
        }
        let mid = 0.5 * (s0 + s1);
        let left = eval_seg(s0, mid, &mut evals);
        let right = eval_seg(mid, s1, &mut evals);
        let mut worst = 0.0f64;
        for k in 0..xs.len() {
            worst = worst.max((coarse[k] - left[k] - right[k]).norm());
        }
        if worst <= tol_share * ((s1 - s0) / (2.0 * l)).max(1e-6) {
            for k in 0..xs.len() {
                acc.values[k] += left[k] + right[k];
                acc.errs[k] += (coarse[k] - left[k] - right[k]).norm();
            }
        } else {
            stack.push((s0, mid, left, depth + 1));
            stack.push((mid, s1, right, depth + 1));
        }
    }
    acc.evals += evals;

    // rotated tails: outward into (0, pi/6] on the right, [5pi/6, pi) on the
    // left, where exp(i lambda^3 t) decays super-exponentially
    for side in [1.0f64, -1.0] {
        let z0 = Complex64::new(side * l, 0.0);
        let d = if side > 0.0 {
            Complex64::from_polar(1.0, PI / 6.0)
        } else {
            Complex64::from_polar(1.0, 5.0 * PI / 6.0)
        };
        let vmax = (40.0f64 / geo.t.max(1e-3)).cbrt() + l;
        let (nodes, weights) = gauss_legendre(16);
        let panels = 24usize;
        let mut vals = vec![Complex64::new(0.0, 0.0); xs.len()];
        for p in 0..panels {
            let a = vmax * p as f64 / panels as f64;
            let b = vmax * (p + 1) as f64 / panels as f64;
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (nd, wt) in nodes.iter().zip(weights.iter()) {
                let v = mid + half * nd;
                let lam = z0 + d * v;
                let wv = ctx.u_hat_paired(lam);
                acc.evals += 1;
                for (k, &x) in xs.iter().enumerate() {
                    vals[k] += (Complex64::i() * lam * x).exp() * wv * *wt * half;
                }
            }
        }
        for (k, v) in vals.iter().enumerate() {
            // +L tail continues outward; the -inf..-L stretch is traversed
            // toward -L, so its rotated path enters with opposite sign
            acc.values[k] += side * v * d;
        }
    }
    Ok(())
}
