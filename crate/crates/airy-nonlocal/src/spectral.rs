//! Spectral scalar functions of the problem: restricted Fourier transforms,
//! weight transforms, time transforms, the characteristic determinant
//! `Delta(lambda) = sum_j alpha^j kappa_hat(alpha^j lambda)` with
//! `kappa(y) = K(1-y)`, its derivative, and the data combinations `N1`,
//! `n(lambda)`, `N0` that enter the solution representations.
//!
//! Everything here is exact-per-term (closed antiderivatives of the lowered
//! polynomial-exponential pieces); est_abs_error on results reflects rounding
//! scaled by the largest intermediate magnitude, and the cancellation flag is
//! raised when the assembled value is far smaller than its parts.

use crate::funcspec::{Domain, FunctionSpec, PolyExpTerm};
use crate::oscint::{
    gl_panels, kernel_transform, osc_gl_quadrature, osc_poly_integral, raise_poly, shift_poly,
    transform_terms,
};
use crate::problem::ProblemData;
use crate::{alpha_pow, ALPHA, ALPHA2};
use num_complex::Complex64;
use thiserror::Error;

/// `|value| < CANCEL_FACTOR * max_intermediate` raises the cancellation flag.
pub const CANCEL_FACTOR: f64 = 1e-13;

/// Relative threshold below which `Delta` is treated as singular.
pub const SINGULAR_DELTA_FACTOR: f64 = 1e-12;

/// A lambda-dependent evaluation with an error estimate and a loss-of-
/// significance diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct SpectralEval {
    pub lambda: Complex64,
    pub value: Complex64,
    pub est_abs_error: f64,
    pub cancellation_flag: bool,
}

impl SpectralEval {
    pub fn exact_zero(lambda: Complex64) -> Self {
        SpectralEval {
            lambda,
            value: Complex64::new(0.0, 0.0),
            est_abs_error: 0.0,
            cancellation_flag: false,
        }
    }

    fn from_parts(lambda: Complex64, value: Complex64, max_mag: f64) -> Self {
        SpectralEval {
            lambda,
            value,
            est_abs_error: 1e-15 * max_mag,
            cancellation_flag: value.norm() < CANCEL_FACTOR * max_mag,
        }
    }
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("interval violation: need 0 <= y <= z <= 1, got y={0}, z={1}")]
    BadInterval(f64, f64),
    #[error("{0} must live on the {1:?} domain")]
    WrongDomain(&'static str, Domain),
    #[error("negative time horizon {0}")]
    NegativeHorizon(f64),
    #[error(
        "singular denominator at lambda = {lambda}: |Delta| = {mag:.3e} \
         below {thresh:.3e}; the contour radius must avoid zeros of Delta"
    )]
    SingularDelta {
        lambda: Complex64,
        mag: f64,
        thresh: f64,
    },
}

// ---------------------------------------------------------------------------
// Elementary transforms
// ---------------------------------------------------------------------------

/// `int_y^z exp(-i lambda x) f(x) dx` for a space-domain function.
pub fn fourier_restricted(
    f: &FunctionSpec,
    lambda: Complex64,
    y: f64,
    z: f64,
) -> Result<SpectralEval, SpectralError> {
    if f.domain != Domain::Space {
        return Err(SpectralError::WrongDomain("f", Domain::Space));
    }
    if !(0.0..=1.0).contains(&y) || !(0.0..=1.0).contains(&z) || y > z {
        return Err(SpectralError::BadInterval(y, z));
    }
    if y == z || f.is_zero() {
        return Ok(SpectralEval::exact_zero(lambda));
    }
    let v = kernel_transform(f, lambda, y, z);
    let kmax = ((lambda.im * y).exp()).max((lambda.im * z).exp());
    Ok(SpectralEval::from_parts(
        lambda,
        v,
        kmax * func_scale(f) * (z - y),
    ))
}

/// Terms of `kappa(y) = K(1-y)` obtained by reflecting the lowered terms of
/// `K` about 1/2.
pub fn reflected_terms(k: &FunctionSpec) -> Vec<PolyExpTerm> {
    k.lower()
        .iter()
        .map(|t| {
            // P(w) e^{i nu w} on (a,b) becomes, with w = 1-y,
            // P(1-y) e^{i nu} e^{-i nu y} on (1-b, 1-a).
            let shifted = shift_poly(&t.poly, 1.0); // Q(u) = P(1+u)
            let flipped: Vec<Complex64> = shifted
                .iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
                .collect(); // Q(-y) = P(1-y)
            let amp = (Complex64::i() * t.freq).exp();
            let poly = flipped.iter().map(|&c| c * amp).collect();
            let (a, b) = t.support;
            let (lo, hi) = if a.is_finite() && b.is_finite() {
                (1.0 - b, 1.0 - a)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            PolyExpTerm {
                support: (lo, hi),
                poly,
                freq: -t.freq,
            }
        })
        .collect()
}

/// `kappa_hat(lambda) = int_0^1 exp(-i lambda y) K(1-y) dy
///                    = exp(-i lambda) K_hat(-lambda)`.
pub fn kappa_hat(k: &FunctionSpec, lambda: Complex64) -> Result<SpectralEval, SpectralError> {
    if k.domain != Domain::Space {
        return Err(SpectralError::WrongDomain("K", Domain::Space));
    }
    let terms = reflected_terms(k);
    let v = transform_terms(&terms, 0, lambda, 0.0, 0.0, 1.0);
    let kmax = 1.0f64.max(lambda.im.exp());
    Ok(SpectralEval::from_parts(lambda, v, kmax * func_scale(k)))
}

/// `int_0^{t'} exp(-i lambda^3 s) h(s) ds` for a time-domain function.
pub fn time_transform(
    h: &FunctionSpec,
    lambda: Complex64,
    t_prime: f64,
) -> Result<SpectralEval, SpectralError> {
    if h.domain != Domain::Time {
        return Err(SpectralError::WrongDomain("h", Domain::Time));
    }
    if t_prime < 0.0 {
        return Err(SpectralError::NegativeHorizon(t_prime));
    }
    if h.is_zero() || t_prime == 0.0 {
        return Ok(SpectralEval::exact_zero(lambda));
    }
    let om = lambda * lambda * lambda;
    let v = transform_terms(&h.lower(), 0, om, 0.0, 0.0, t_prime);
    let kmax = 1.0f64.max((om.im * t_prime).exp());
    Ok(SpectralEval::from_parts(
        lambda,
        v,
        kmax * func_scale(h) * t_prime,
    ))
}

// ---------------------------------------------------------------------------
// Determinant and rotated sums
// ---------------------------------------------------------------------------

/// The three values `kappa_hat(alpha^j lambda)`, j = 0, 1, 2.
pub fn kappa_hat_rotated(k_terms: &[PolyExpTerm], lambda: Complex64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (j, slot) in out.iter_mut().enumerate() {
        let mu = alpha_pow(j as i32) * lambda;
        *slot = transform_terms(k_terms, 0, mu, 0.0, 0.0, 1.0);
    }
    out
}

/// `S_w = sum_j alpha^{w j} kappa_hat(alpha^j lambda)` for w = 0, 1, 2.
/// `S_1` is the characteristic determinant `Delta`.
pub fn s_sums(kh: &[Complex64; 3]) -> [Complex64; 3] {
    let mut s = [Complex64::new(0.0, 0.0); 3];
    for (w, sw) in s.iter_mut().enumerate() {
        for (j, &k) in kh.iter().enumerate() {
            *sw += alpha_pow((w * j) as i32) * k;
        }
    }
    s
}

/// `Delta(lambda) = sum_j alpha^j kappa_hat(alpha^j lambda)`, the
/// determinant (up to a constant factor) of the Dirichlet-to-Neumann system.
pub fn delta(k: &FunctionSpec, lambda: Complex64) -> Result<SpectralEval, SpectralError> {
    if k.domain != Domain::Space {
        return Err(SpectralError::WrongDomain("K", Domain::Space));
    }
    let terms = reflected_terms(k);
    let kh = kappa_hat_rotated(&terms, lambda);
    let v = ALPHA * kh[1] + ALPHA2 * kh[2] + kh[0];
    let max_mag = kh.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectralEval::from_parts(lambda, v, max_mag))
}

/// Analytic derivative
/// `Delta'(lambda) = -i sum_j alpha^{2j} int_0^1 exp(-i alpha^j lambda y) y kappa(y) dy`.
pub fn delta_prime(k: &FunctionSpec, lambda: Complex64) -> Result<SpectralEval, SpectralError> {
    if k.domain != Domain::Space {
        return Err(SpectralError::WrongDomain("K", Domain::Space));
    }
    let terms = reflected_terms(k);
    let mut v = Complex64::new(0.0, 0.0);
    let mut max_mag = 0.0f64;
    for j in 0..3 {
        let mu = alpha_pow(j) * lambda;
        let m1 = transform_terms(&terms, 1, mu, 0.0, 0.0, 1.0);
        max_mag = max_mag.max(m1.norm());
        v += alpha_pow(2 * j) * m1;
    }
    v *= -Complex64::i();
    Ok(SpectralEval::from_parts(lambda, v, max_mag))
}

/// Moments `int_0^1 y^m kappa(y) dy`; `kappa_hat'(0) = -i m_1`,
/// `kappa_hat''(0) = -m_2`.
pub fn kappa_moment(k: &FunctionSpec, m: usize) -> Complex64 {
    let terms = reflected_terms(k);
    transform_terms(&terms, m, Complex64::new(0.0, 0.0), 0.0, 0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Data combinations
// ---------------------------------------------------------------------------

/// `int_0^1 K(y) U(y) dy` (used for the compatibility check).
pub fn weighted_space_integral(k: &FunctionSpec, u: &FunctionSpec) -> Complex64 {
    if k.is_zero() || u.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let kt = k.lower();
    let ut = u.lower();
    gl_panels(
        &|y: f64| {
            crate::funcspec::eval_terms(&kt, y) * crate::funcspec::eval_terms(&ut, y)
        },
        0.0,
        1.0,
        64,
    )
}

/// `int_0^1 K(y) exp(i mu y) U_hat(mu; y, 1) dy`, the double-transform term
/// of `N1`. One-shot wrapper over [`CrossEngine`].
pub fn u_cross_term(k: &FunctionSpec, u: &FunctionSpec, mu: Complex64) -> Complex64 {
    CrossEngine::new(k, u).eval(mu)
}

/// Evaluator for the weighted double transform
/// `int_0^1 K(y) e^{i mu y} [int_y^1 e^{-i mu z} U(z) dz] dy`.
///
/// Wide (whole-interval) term lists use exact pairwise closed forms. Sampled
/// data use an iterated rule: the inner restricted transforms are assembled
/// from per-segment closed integrals with suffix sums cached per `mu`, and
/// the outer integral uses oscillation-scaled Gauss panels.
pub struct CrossEngine {
    k_terms: Vec<PolyExpTerm>,
    u_terms: Vec<PolyExpTerm>,
    zero: bool,
    wide_pairs: bool,
    /// Order-swapped fast path for polynomial weights over segmented data:
    /// `cross(mu) = int_0^1 U Q - Q(0) U_hat(mu)` with
    /// `Q = sum_k (-1)^k K^(k) / (i mu)^{k+1}`, so only the plain transform
    /// of U is needed per evaluation. Holds the combined weight polynomial
    /// and the precomputed moments `int_0^1 U(z) z^k dz`.
    swap: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

impl CrossEngine {
    pub fn new(k: &FunctionSpec, u: &FunctionSpec) -> Self {
        let zero = k.is_zero() || u.is_zero();
        let k_terms = k.lower();
        let u_terms = u.lower();
        let wide = |t: &PolyExpTerm| t.support.0 <= 0.0 && t.support.1 >= 1.0;
        let wide_pairs = k_terms.iter().all(wide)
            && u_terms.iter().all(wide)
            && k_terms.len() * u_terms.len() <= 64;
        let swap = if !zero
            && !wide_pairs
            && k_terms.iter().all(|t| wide(t) && t.freq.norm() == 0.0)
        {
            // combined weight polynomial
            let mut kp: Vec<Complex64> = Vec::new();
            for t in &k_terms {
                axpy_poly(&mut kp, Complex64::new(1.0, 0.0), &t.poly);
            }
            let zero_c = Complex64::new(0.0, 0.0);
            let moments: Vec<Complex64> = (0..kp.len())
                .map(|m| {
                    u_terms
                        .iter()
                        .map(|t| {
                            let (a, b) = (t.support.0.max(0.0), t.support.1.min(1.0));
                            if b > a {
                                crate::oscint::osc_poly_integral(
                                    &raise_poly(&t.poly, m),
                                    t.freq,
                                    zero_c,
                                    0.0,
                                    a,
                                    b,
                                )
                            } else {
                                zero_c
                            }
                        })
                        .sum()
                })
                .collect();
            Some((kp, moments))
        } else {
            None
        };
        CrossEngine {
            k_terms,
            u_terms,
            zero,
            wide_pairs,
            swap,
        }
    }

    pub fn eval(&self, mu: Complex64) -> Complex64 {
        if self.zero {
            return Complex64::new(0.0, 0.0);
        }
        if self.wide_pairs {
            let mut total = Complex64::new(0.0, 0.0);
            for tk in &self.k_terms {
                for tu in &self.u_terms {
                    total += cross_term_pair(tk, tu, mu);
                }
            }
            return total;
        }
        if let Some((kp, moments)) = &self.swap {
            if mu.norm() > 1.0 {
                // Q = sum_k (-1)^k K^(k) / (i mu)^{k+1}
                let imu_inv = 1.0 / (Complex64::i() * mu);
                let mut q = vec![Complex64::new(0.0, 0.0); 1];
                let mut cur = kp.clone();
                let mut fac = imu_inv;
                let mut sign = 1.0;
                while !cur.is_empty() {
                    axpy_poly(&mut q, fac * sign, &cur);
                    cur = crate::funcspec::poly_derivative(&cur);
                    fac *= imu_inv;
                    sign = -sign;
                }
                let part_poly: Complex64 =
                    q.iter().zip(moments.iter()).map(|(qk, m)| qk * m).sum();
                let uhat = transform_terms(&self.u_terms, 0, mu, 0.0, 0.0, 1.0);
                return part_poly - q[0] * uhat;
            }
        }
        // inner tail transform S(y) = int_y^1 e^{-i mu z} U(z) dz via
        // per-segment integrals and suffix sums, evaluated once per mu
        let segs: Vec<(f64, f64)> = self
            .u_terms
            .iter()
            .map(|t| (t.support.0.max(0.0), t.support.1.min(1.0)))
            .collect();
        let full: Vec<Complex64> = self
            .u_terms
            .iter()
            .zip(&segs)
            .map(|(t, &(a, b))| {
                if b > a {
                    crate::oscint::osc_poly_integral(&t.poly, t.freq, mu, 0.0, a, b)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut suffix = vec![Complex64::new(0.0, 0.0); full.len() + 1];
        for j in (0..full.len()).rev() {
            suffix[j] = suffix[j + 1] + full[j];
        }
        let segmented = self
            .u_terms
            .iter()
            .all(|t| t.support.0.is_finite() && t.support.1.is_finite())
            && segs.windows(2).all(|w| w[0].1 <= w[1].0 + 1e-15);
        let inner = |y: f64| -> Complex64 {
            if segmented {
                // first segment whose right end lies beyond y
                let j = segs.partition_point(|&(_, b)| b <= y);
                if j >= segs.len() {
                    return Complex64::new(0.0, 0.0);
                }
                let (a, b) = segs[j];
                let t = &self.u_terms[j];
                let partial = if y > a {
                    crate::oscint::osc_poly_integral(&t.poly, t.freq, mu, 0.0, y.min(b), b)
                } else {
                    full[j]
                };
                partial + suffix[j + 1]
            } else {
                self.u_terms
                    .iter()
                    .zip(&segs)
                    .map(|(t, &(a, b))| {
                        let lo = y.max(a);
                        if b > lo {
                            crate::oscint::osc_poly_integral(&t.poly, t.freq, mu, 0.0, lo, b)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .sum()
            }
        };
        osc_gl_quadrature(
            |y| {
                crate::funcspec::eval_terms(&self.k_terms, y)
                    * (Complex64::i() * mu * y).exp()
                    * inner(y)
            },
            2.0 * mu.norm(),
            0.0,
            1.0,
        )
    }
}

/// One (K-term, U-term) pair of the cross term, exact.
fn cross_term_pair(tk: &PolyExpTerm, tu: &PolyExpTerm, mu: Complex64) -> Complex64 {
    let chi = tu.freq - mu; // inner kernel frequency: int_y^1 P_u(z) e^{i chi z} dz
    let outer_freq = tk.freq + mu;
    if chi.norm() <= 0.8 {
        // Series branch: inner = C - R(y) with polynomial R.
        let mut r = vec![Complex64::new(0.0, 0.0); 1];
        let mut c = Complex64::new(0.0, 0.0);
        let mut fac = Complex64::new(1.0, 0.0); // (i chi)^m / m!
        for m in 0..40 {
            let zp = raise_poly(&tu.poly, m);
            let q = poly_antiderivative(&zp);
            c += fac * crate::funcspec::horner(&q, 1.0);
            axpy_poly(&mut r, fac, &q);
            let tail = fac.norm() / (m as f64 + 1.0);
            fac *= Complex64::i() * chi / (m as f64 + 1.0);
            if tail < 1e-19 {
                break;
            }
        }
        let part_const = c * osc_poly_integral(&tk.poly, outer_freq, Complex64::new(0.0, 0.0), 0.0, 0.0, 1.0);
        let pr = poly_mul(&tk.poly, &r);
        let part_poly = osc_poly_integral(&pr, outer_freq, Complex64::new(0.0, 0.0), 0.0, 0.0, 1.0);
        part_const - part_poly
    } else {
        // By-parts branch: inner = e^{i chi} G(1) - e^{i chi y} G(y).
        let ichi_inv = 1.0 / (Complex64::i() * chi);
        let mut g = vec![Complex64::new(0.0, 0.0); 1];
        let mut cur = tu.poly.clone();
        let mut fac = ichi_inv;
        let mut sign = 1.0;
        while !cur.is_empty() {
            axpy_poly(&mut g, fac * sign, &cur);
            cur = crate::funcspec::poly_derivative(&cur);
            fac *= ichi_inv;
            sign = -sign;
        }
        let g1 = crate::funcspec::horner(&g, 1.0) * (Complex64::i() * chi).exp();
        let part_const =
            g1 * osc_poly_integral(&tk.poly, outer_freq, Complex64::new(0.0, 0.0), 0.0, 0.0, 1.0);
        let pg = poly_mul(&tk.poly, &g);
        // frequency outer_freq + chi = tk.freq + tu.freq (lambda-free)
        let part_poly =
            osc_poly_integral(&pg, tk.freq + tu.freq, Complex64::new(0.0, 0.0), 0.0, 0.0, 1.0);
        part_const - part_poly
    }
}

fn poly_antiderivative(p: &[Complex64]) -> Vec<Complex64> {
    let mut q = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (k, &c) in p.iter().enumerate() {
        q[k + 1] = c / (k as f64 + 1.0);
    }
    q
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn axpy_poly(dst: &mut Vec<Complex64>, scale: Complex64, src: &[Complex64]) {
    if dst.len() < src.len() {
        dst.resize(src.len(), Complex64::new(0.0, 0.0));
    }
    for (d, &s) in dst.iter_mut().zip(src.iter()) {
        *d += scale * s;
    }
}

fn func_scale(f: &FunctionSpec) -> f64 {
    f.lower()
        .iter()
        .map(|t| t.poly.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-300)
}

/// `N1(lambda; t') = lambda^2 kh h0~ - i lambda kh h1~ - lambda^2 h2~ + cross`
/// with `kh = kappa_hat(lambda)` and `h~` the time transforms up to `t'`.
pub fn n1(
    data: &ProblemData,
    lambda: Complex64,
    t_prime: f64,
) -> Result<SpectralEval, SpectralError> {
    if data.initial.is_zero()
        && data.boundary0.is_zero()
        && data.boundary1.is_zero()
        && data.nonlocal.is_zero()
    {
        return Ok(SpectralEval::exact_zero(lambda));
    }
    let kh = kappa_hat(&data.weight, lambda)?.value;
    let h0t = time_transform(&data.boundary0, lambda, t_prime)?.value;
    let h1t = time_transform(&data.boundary1, lambda, t_prime)?.value;
    let h2t = time_transform(&data.nonlocal, lambda, t_prime)?.value;
    let cross = u_cross_term(&data.weight, &data.initial, lambda);
    let l2 = lambda * lambda;
    let terms = [
        l2 * kh * h0t,
        -Complex64::i() * lambda * kh * h1t,
        -l2 * h2t,
        cross,
    ];
    let v: Complex64 = terms.iter().sum();
    let max_mag = terms.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SpectralEval::from_parts(lambda, v, max_mag))
}

/// `n(lambda) = Delta(lambda)^{-1} sum_j alpha^j N1(alpha^j lambda; t')`.
pub fn n_combined(
    data: &ProblemData,
    lambda: Complex64,
    t_prime: f64,
) -> Result<SpectralEval, SpectralError> {
    if data.initial.is_zero()
        && data.boundary0.is_zero()
        && data.boundary1.is_zero()
        && data.nonlocal.is_zero()
    {
        return Ok(SpectralEval::exact_zero(lambda));
    }
    let kterms = reflected_terms(&data.weight);
    let kh = kappa_hat_rotated(&kterms, lambda);
    let dl = ALPHA * kh[1] + ALPHA2 * kh[2] + kh[0];
    let kh_max = kh.iter().map(|z| z.norm()).fold(0.0, f64::max);
    check_delta(lambda, dl, kh_max)?;
    let mut num = Complex64::new(0.0, 0.0);
    let mut max_mag = 0.0f64;
    for j in 0..3 {
        let nj = n1(data, alpha_pow(j) * lambda, t_prime)?;
        max_mag = max_mag.max(nj.value.norm());
        num += alpha_pow(j) * nj.value;
    }
    let v = crate::cdiv(num, dl);
    Ok(SpectralEval::from_parts(
        lambda,
        v,
        max_mag / dl.norm().max(1e-300),
    ))
}

fn check_delta(lambda: Complex64, dl: Complex64, scale: f64) -> Result<(), SpectralError> {
    let thresh = SINGULAR_DELTA_FACTOR * scale.max(1e-300);
    if dl.norm() < thresh {
        return Err(SpectralError::SingularDelta {
            lambda,
            mag: dl.norm(),
            thresh,
        });
    }
    Ok(())
}

/// `N0(lambda; t') = exp(-i lambda) [n + i lambda h1~ - lambda^2 h0~] - U_hat`,
/// assembled bracket-first so the cancellation diagnostic sees all terms.
pub fn n0(
    data: &ProblemData,
    lambda: Complex64,
    t_prime: f64,
) -> Result<SpectralEval, SpectralError> {
    if data.initial.is_zero()
        && data.boundary0.is_zero()
        && data.boundary1.is_zero()
        && data.nonlocal.is_zero()
    {
        return Ok(SpectralEval::exact_zero(lambda));
    }
    let n = n_combined(data, lambda, t_prime)?;
    let h0t = time_transform(&data.boundary0, lambda, t_prime)?.value;
    let h1t = time_transform(&data.boundary1, lambda, t_prime)?.value;
    let bracket = n.value + Complex64::i() * lambda * h1t - lambda * lambda * h0t;
    let e = (-Complex64::i() * lambda).exp();
    let uhat = kernel_transform(&data.initial, lambda, 0.0, 1.0);
    let v = e * bracket - uhat;
    let max_mag = (e * bracket).norm().max(uhat.norm());
    let mut out = SpectralEval::from_parts(lambda, v, max_mag);
    out.est_abs_error += n.est_abs_error * e.norm();
    out.cancellation_flag |= n.cancellation_flag;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Kernel-paired evaluations for the contour solver
// ---------------------------------------------------------------------------
//
// On the sector-boundary rays lambda^3 is real and exp(i lambda^3 t) has unit
// modulus, but time transforms paired with it must be computed as a single
// integral int_0^{t'} exp(i lambda^3 (t-s)) h(s) ds so that no intermediate
// exceeds the kernel magnitude actually attained.

/// Evaluation of a solution-representation integrand factor at one lambda.
#[derive(Debug, Clone, Copy)]
pub struct PairedEval {
    pub value: Complex64,
    pub max_mag: f64,
    pub cancelled: bool,
}

/// Context for paired evaluations at fixed (t, t').
pub struct PairedCtx<'a> {
    pub data: &'a ProblemData,
    pub t: f64,
    pub t_prime: f64,
    k_terms: Vec<PolyExpTerm>,
    cross: CrossEngine,
    h_terms: [Vec<PolyExpTerm>; 3],
    zero_data: bool,
}

impl<'a> PairedCtx<'a> {
    pub fn new(data: &'a ProblemData, t: f64, t_prime: f64) -> Self {
        PairedCtx {
            data,
            t,
            t_prime,
            k_terms: reflected_terms(&data.weight),
            cross: CrossEngine::new(&data.weight, &data.initial),
            h_terms: [
                data.boundary0.lower(),
                data.boundary1.lower(),
                data.nonlocal.lower(),
            ],
            zero_data: data.initial.is_zero()
                && data.boundary0.is_zero()
                && data.boundary1.is_zero()
                && data.nonlocal.is_zero(),
        }
    }

    /// `H_k(lambda) = int_0^{t'} exp(i lambda^3 (t - s)) h_k(s) ds`.
    fn paired_transforms(&self, lam3: Complex64) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (slot, terms) in out.iter_mut().zip(self.h_terms.iter()) {
            if !terms.is_empty() {
                *slot = transform_terms(terms, 0, lam3, self.t, 0.0, self.t_prime);
            }
        }
        out
    }

    /// `exp(i lambda^3 t) rc(lambda; t')` where
    /// `rc = n + i lambda h1~ - lambda^2 h0~` is the combination carried by
    /// the contours attached to the right endpoint.
    pub fn w_minus(&self, lambda: Complex64) -> Result<PairedEval, SpectralError> {
        if self.zero_data {
            return Ok(PairedEval {
                value: Complex64::new(0.0, 0.0),
                max_mag: 0.0,
                cancelled: false,
            });
        }
        let lam3 = lambda * lambda * lambda;
        let h = self.paired_transforms(lam3);
        let kh = kappa_hat_rotated(&self.k_terms, lambda);
        let dl = ALPHA * kh[1] + ALPHA2 * kh[2] + kh[0];
        let kh_max = kh.iter().map(|z| z.norm()).fold(0.0, f64::max);
        check_delta(lambda, dl, kh_max)?;
        let phase_t = (Complex64::i() * lam3 * self.t).exp();
        let mut num = Complex64::new(0.0, 0.0);
        let mut max_mag = 0.0f64;
        for j in 0..3 {
            let mu = alpha_pow(j) * lambda;
            let khj = kh[j as usize];
            let m2 = mu * mu;
            let cross = if self.data.initial.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                phase_t * self.cross.eval(mu)
            };
            let nj = m2 * khj * h[0] - Complex64::i() * mu * khj * h[1] - m2 * h[2] + cross;
            max_mag = max_mag.max(nj.norm());
            num += alpha_pow(j) * nj;
        }
        let n_paired = crate::cdiv(num, dl);
        let terms = [
            n_paired,
            Complex64::i() * lambda * h[1],
            -lambda * lambda * h[0],
        ];
        let v: Complex64 = terms.iter().sum();
        let mm = terms
            .iter()
            .map(|z| z.norm())
            .fold(max_mag / dl.norm().max(1e-300), f64::max);
        Ok(PairedEval {
            value: v,
            max_mag: mm,
            cancelled: v.norm() < CANCEL_FACTOR * mm,
        })
    }

    /// `exp(i lambda^3 t) N0(lambda; t')`, bracket-first assembly.
    pub fn w_plus(&self, lambda: Complex64) -> Result<PairedEval, SpectralError> {
        if self.zero_data {
            return Ok(PairedEval {
                value: Complex64::new(0.0, 0.0),
                max_mag: 0.0,
                cancelled: false,
            });
        }
        let rc = self.w_minus(lambda)?;
        let e = (-Complex64::i() * lambda).exp();
        let ub = self.u_hat_paired(lambda);
        let v = e * rc.value - ub;
        let mm = (e * rc.value).norm().max(ub.norm()).max(rc.max_mag);
        Ok(PairedEval {
            value: v,
            max_mag: mm,
            cancelled: v.norm() < CANCEL_FACTOR * mm,
        })
    }

    /// `exp(i lambda^3 t) U_hat(lambda)` (the transform of the initial datum
    /// paired with the propagator kernel).
    pub fn u_hat_paired(&self, lambda: Complex64) -> Complex64 {
        if self.data.initial.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let lam3 = lambda * lambda * lambda;
        let phase_t = (Complex64::i() * lam3 * self.t).exp();
        phase_t * kernel_transform(&self.data.initial, lambda, 0.0, 1.0)
    }

    /// Endpoint coefficients of the time transforms at the upper limit:
    /// `h_k~(lambda; t') = regular + exp(-i lambda^3 t') * end_k(lambda)` with
    /// `end_k = -[h_k(t')/(i lambda^3) + h_k'(t')/(i lambda^3)^2]`.
    fn end_coeffs(&self, lam3: Complex64) -> [Complex64; 3] {
        let il3 = Complex64::i() * lam3;
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (slot, h) in out.iter_mut().zip([
            &self.data.boundary0,
            &self.data.boundary1,
            &self.data.nonlocal,
        ]) {
            if !h.is_zero() {
                *slot = -(h.value(self.t_prime) / il3 + h.derivative(self.t_prime) / (il3 * il3));
            }
        }
        out
    }

    /// The endpoint (upper-limit) part of `exp(i lambda^3 t) rc`, i.e. the
    /// coefficient of `exp(i lambda^3 (t - t'))` in the large-lambda
    /// splitting. Assembled with the j = 0 contribution eliminated
    /// symbolically, which removes the subtractive cancellation the naive
    /// form suffers in the upper sectors:
    ///   rc_end = { lambda^2 e0 [(1-a) kh(a l) + (1-a^2) kh(a^2 l)]
    ///            - i lambda e1 [(a^2-a) kh(a l) + (a-a^2) kh(a^2 l)]
    ///            - 3 lambda^2 e2 } / Delta.
    pub fn rc_end(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        let (num, dl, kh_max) = self.rc_end_parts(lambda)?;
        check_delta(lambda, dl, kh_max)?;
        Ok(crate::cdiv(num, dl))
    }

    fn rc_end_parts(&self, lambda: Complex64) -> Result<(Complex64, Complex64, f64), SpectralError> {
        let lam3 = lambda * lambda * lambda;
        let e = self.end_coeffs(lam3);
        let kh = kappa_hat_rotated(&self.k_terms, lambda);
        let dl = ALPHA * kh[1] + ALPHA2 * kh[2] + kh[0];
        let kh_max = kh.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let l2 = lambda * lambda;
        let one = Complex64::new(1.0, 0.0);
        let num = l2 * e[0] * ((one - ALPHA) * kh[1] + (one - ALPHA2) * kh[2])
            - Complex64::i() * lambda * e[1] * ((ALPHA2 - ALPHA) * kh[1] + (ALPHA - ALPHA2) * kh[2])
            - 3.0 * l2 * e[2];
        Ok((num, dl, kh_max))
    }

    /// Endpoint part of `exp(i lambda^3 t) N0`, computed in the rescaled form
    /// `num * exp(i (alpha^{j*} - 1) lambda) / (exp(i alpha^{j*} lambda) Delta)`
    /// with j* the index of the dominant exponential, so the value stays
    /// finite in every sector.
    pub fn n0_end(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        let (num, _, _) = self.rc_end_parts(lambda)?;
        // dominant rotation index
        let mut jstar = 0;
        let mut best = f64::NEG_INFINITY;
        for j in 0..3 {
            let im = (alpha_pow(j) * lambda).im;
            if im > best {
                best = im;
                jstar = j;
            }
        }
        let ajs = alpha_pow(jstar);
        let mut dl_scaled = Complex64::new(0.0, 0.0);
        let mut term_max = 0.0f64;
        for j in 0..3 {
            let aj = alpha_pow(j);
            let khat_neg = kernel_transform(&self.data.weight, -(aj * lambda), 0.0, 1.0);
            let ph = (Complex64::i() * (ajs - aj) * lambda).exp();
            let term = aj * ph * khat_neg;
            term_max = term_max.max(term.norm());
            dl_scaled += term;
        }
        check_delta(lambda, dl_scaled, term_max)?;
        let ph_num = (Complex64::i() * (ajs - Complex64::new(1.0, 0.0)) * lambda).exp();
        Ok(crate::cdiv(num * ph_num, dl_scaled))
    }

    /// Large-lambda limit of the non-data part of `N0` in the upper sectors:
    /// `-3 h2(t') / K(0)`.
    pub fn nu0_limit(&self) -> Complex64 {
        -3.0 * self.data.nonlocal.value(self.t_prime) / self.data.weight.value(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::{InterpOrder, Mode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_space() -> FunctionSpec {
        FunctionSpec::real_polynomial(Domain::Space, &[1.0])
    }

    // -- fourier_restricted -------------------------------------------------

    #[test]
    fn fourier_restricted_examples() {
        let f = one_space();
        let v = fourier_restricted(&f, c(0.0, 0.0), 0.0, 1.0).unwrap();
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-15);

        let v = fourier_restricted(&f, c(3.3, -0.2), 0.5, 0.5).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
        assert_eq!(v.est_abs_error, 0.0);

        let pi = std::f64::consts::PI;
        let v = fourier_restricted(&f, c(pi, 0.0), 0.0, 1.0).unwrap();
        let want = c(2.0, 0.0) / (Complex64::i() * pi);
        assert!((v.value - want).norm() < 1e-14);
    }

    #[test]
    fn fourier_restricted_rejects_bad_interval() {
        let f = one_space();
        assert!(fourier_restricted(&f, c(1.0, 0.0), 0.7, 0.3).is_err());
        assert!(fourier_restricted(&f, c(1.0, 0.0), -0.1, 0.5).is_err());
    }

    // -- kappa_hat -----------------------------------------------------------

    #[test]
    fn kappa_hat_examples() {
        let k = one_space();
        let v = kappa_hat(&k, c(0.0, 0.0)).unwrap();
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-15);

        let lam = c(2.7, 0.0);
        let v = kappa_hat(&k, lam).unwrap();
        let want = (c(1.0, 0.0) - (-Complex64::i() * lam).exp()) / (Complex64::i() * lam);
        assert!((v.value - want).norm() < 1e-14);

        // K(y) = y: kappa(y) = 1 - y, integral 1/2 at lambda = 0
        let ky = FunctionSpec::real_polynomial(Domain::Space, &[0.0, 1.0]);
        let v = kappa_hat(&ky, c(0.0, 0.0)).unwrap();
        assert!((v.value - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kappa_hat_consistency_with_fourier() {
        // kappa_hat(K, lambda) = e^{-i lambda} fourier_restricted(K, -lambda, 0, 1)
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let specs = [
            one_space(),
            FunctionSpec::real_polynomial(Domain::Space, &[0.5, -1.0, 2.0]),
            FunctionSpec::modes(
                Domain::Space,
                vec![Mode {
                    freq: c(2.0, 0.0),
                    amp: c(1.0, 0.5),
                }],
            ),
        ];
        for k in &specs {
            for _ in 0..100 {
                let lam = c(rng.gen_range(-20.0..20.0), rng.gen_range(-3.0..3.0));
                let lhs = kappa_hat(k, lam).unwrap().value;
                let rhs = (-Complex64::i() * lam).exp()
                    * fourier_restricted(k, -lam, 0.0, 1.0).unwrap().value;
                assert!(
                    (lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()),
                    "lam={lam}: {lhs} vs {rhs}"
                );
            }
        }
    }

    // -- time_transform -------------------------------------------------------

    #[test]
    fn time_transform_examples() {
        let h = FunctionSpec::real_polynomial(Domain::Time, &[1.0]);
        let v = time_transform(&h, c(0.0, 0.0), 2.0).unwrap();
        assert!((v.value - c(2.0, 0.0)).norm() < 1e-15);

        let v = time_transform(&h, c(1.0, 0.0), 1.0).unwrap();
        let want = (c(1.0, 0.0) - (-Complex64::i()).exp()) / Complex64::i();
        assert!((v.value - want).norm() < 1e-14);

        // h = e^{i mu s}: integral (e^{i(mu - l^3)t'} - 1)/(i(mu - l^3))
        let mu = c(2.5, 0.0);
        let h = FunctionSpec::modes(
            Domain::Time,
            vec![Mode {
                freq: mu,
                amp: c(1.0, 0.0),
            }],
        );
        let lam = c(1.3, 0.0);
        let tp = 0.8;
        let v = time_transform(&h, lam, tp).unwrap();
        let d = mu - lam * lam * lam;
        let want = ((Complex64::i() * d * tp).exp() - 1.0) / (Complex64::i() * d);
        assert!((v.value - want).norm() < 1e-14);
    }

    // -- delta ---------------------------------------------------------------

    #[test]
    fn delta_examples() {
        let k = one_space();
        // Delta(0) = kappa_hat(0) * sum alpha^j = 0
        let v = delta(&k, c(0.0, 0.0)).unwrap();
        assert!(v.value.norm() < 1e-15);
        assert!(v.cancellation_flag);

        // closed form for K == 1: Delta(l) = (3 - sum_j e^{-i a^j l})/(i l)
        let pi = std::f64::consts::PI;
        let v = delta(&k, c(pi, 0.0)).unwrap();
        let want = (c(4.0, 0.0) - 2.0 * Complex64::i() * (pi * 3.0f64.sqrt() / 2.0).cosh())
            / (Complex64::i() * pi);
        assert!((v.value - want).norm() < 1e-13 * want.norm());
    }

    #[test]
    fn delta_rotation_symmetry() {
        // Delta(alpha lambda) = alpha^{-1} Delta(lambda)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = FunctionSpec::real_polynomial(Domain::Space, &[1.0, 0.3, -0.2]);
        for _ in 0..100 {
            let r = rng.gen_range(1.0..20.0);
            let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let lam = Complex64::from_polar(r, th);
            let d1 = delta(&k, ALPHA * lam).unwrap().value;
            let d0 = delta(&k, lam).unwrap().value;
            assert!(
                (d1 - d0 / ALPHA).norm() <= 1e-10 * (1.0 + d0.norm()),
                "lam = {lam}"
            );
        }
    }

    #[test]
    fn delta_prime_examples() {
        let k = one_space();
        // at 0: -i sum_j alpha^{2j} * 1/2 = 0
        let v = delta_prime(&k, c(0.0, 0.0)).unwrap();
        assert!(v.value.norm() < 1e-15);

        // central-difference oracle with h-sweep: error O(h^2)
        let lam = c(1.7, 0.9);
        let exact = delta_prime(&k, lam).unwrap().value;
        let mut errs = Vec::new();
        for &h in &[1e-2, 5e-3, 2.5e-3] {
            let hp = delta(&k, lam + c(h, 0.0)).unwrap().value;
            let hm = delta(&k, lam - c(h, 0.0)).unwrap().value;
            errs.push(((hp - hm) / (2.0 * h) - exact).norm());
        }
        assert!(errs[0] < 1e-3);
        // each halving should shrink the error by about 4
        assert!(errs[1] < 0.35 * errs[0]);
        assert!(errs[2] < 0.35 * errs[1]);

        // rotation: Delta'(alpha lambda) = alpha^{-2} Delta'(lambda)
        let d1 = delta_prime(&k, ALPHA * lam).unwrap().value;
        assert!((d1 - exact / (ALPHA * ALPHA)).norm() < 1e-12 * (1.0 + exact.norm()));
    }

    // -- data combinations ----------------------------------------------------

    fn manufactured_problem() -> ProblemData {
        // u = e^{i(x+t)}, K == 1
        let ei = c(1.0f64.cos(), 1.0f64.sin());
        let khat = (ei - c(1.0, 0.0)) / Complex64::i();
        ProblemData {
            initial: FunctionSpec::modes(
                Domain::Space,
                vec![Mode {
                    freq: c(1.0, 0.0),
                    amp: c(1.0, 0.0),
                }],
            ),
            weight: one_space(),
            boundary0: FunctionSpec::modes(
                Domain::Time,
                vec![Mode {
                    freq: c(1.0, 0.0),
                    amp: ei,
                }],
            ),
            boundary1: FunctionSpec::modes(
                Domain::Time,
                vec![Mode {
                    freq: c(1.0, 0.0),
                    amp: Complex64::i() * ei,
                }],
            ),
            nonlocal: FunctionSpec::modes(
                Domain::Time,
                vec![Mode {
                    freq: c(1.0, 0.0),
                    amp: khat,
                }],
            ),
            period: None,
            compatibility_tol: 1e-9,
        }
    }

    fn zero_problem() -> ProblemData {
        ProblemData {
            initial: FunctionSpec::zero(Domain::Space),
            weight: one_space(),
            boundary0: FunctionSpec::zero(Domain::Time),
            boundary1: FunctionSpec::zero(Domain::Time),
            nonlocal: FunctionSpec::zero(Domain::Time),
            period: None,
            compatibility_tol: 1e-9,
        }
    }

    /// Independent N1 oracle: assembles every term by high-resolution panel
    /// quadrature of the raw integrals, never touching the closed forms.
    fn n1_oracle(data: &ProblemData, lam: Complex64, tp: f64) -> Complex64 {
        let quad = |f: &dyn Fn(f64) -> Complex64, a: f64, b: f64| -> Complex64 {
            gl_panels(&|x| f(x), a, b, 400)
        };
        let kh = quad(
            &|y| data.weight.value(1.0 - y) * (-Complex64::i() * lam * y).exp(),
            0.0,
            1.0,
        );
        let tt = |h: &FunctionSpec| {
            quad(
                &|s| h.value(s) * (-Complex64::i() * lam * lam * lam * s).exp(),
                0.0,
                tp,
            )
        };
        let h0t = tt(&data.boundary0);
        let h1t = tt(&data.boundary1);
        let h2t = tt(&data.nonlocal);
        let cross = quad(
            &|y| {
                let inner = gl_panels(
                    &|z| data.initial.value(z) * (-Complex64::i() * lam * z).exp(),
                    y,
                    1.0,
                    200,
                );
                data.weight.value(y) * (Complex64::i() * lam * y).exp() * inner
            },
            0.0,
            1.0,
        );
        let l2 = lam * lam;
        l2 * kh * h0t - Complex64::i() * lam * kh * h1t - l2 * h2t + cross
    }

    #[test]
    fn cross_engine_paths_agree() {
        // sampled initial datum: the order-swapped fast path, the suffix
        // iterated path, and a brute quadrature must agree
        let n = 257;
        let vals: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                c((2.3 * x).sin() + 0.3 * x * x, 0.2 * x)
            })
            .collect();
        let u = FunctionSpec::samples(Domain::Space, vals, (0.0, 1.0), InterpOrder::Cubic)
            .unwrap();
        let k = FunctionSpec::real_polynomial(Domain::Space, &[1.0, -0.4]);
        let engine = CrossEngine::new(&k, &u);
        for &(re, im) in &[(3.7, 0.0), (11.0, 2.0), (-6.0, -1.5), (0.4, 0.1)] {
            let mu = c(re, im);
            let got = engine.eval(mu);
            let brute = gl_panels(
                &|y| {
                    let inner = gl_panels(
                        &|z| u.value(z) * (-Complex64::i() * mu * z).exp(),
                        y,
                        1.0,
                        200,
                    );
                    k.value(y) * (Complex64::i() * mu * y).exp() * inner
                },
                0.0,
                1.0,
                200,
            );
            assert!(
                (got - brute).norm() < 2e-9 * (1.0 + brute.norm()),
                "mu={mu}: {got} vs {brute}"
            );
        }
    }

    #[test]
    fn n1_zero_data_is_exact_zero() {
        let p = zero_problem();
        let v = n1(&p, c(3.0, 1.0), 2.0).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
    }

    #[test]
    fn n1_lambda_zero_reduces_to_double_integral() {
        let p = manufactured_problem();
        let v = n1(&p, c(0.0, 0.0), 0.7).unwrap();
        let want = gl_panels(
            &|y| {
                p.weight.value(y) * gl_panels(&|z| p.initial.value(z), y, 1.0, 100)
            },
            0.0,
            1.0,
            100,
        );
        assert!((v.value - want).norm() < 1e-10);
    }

    #[test]
    fn n1_matches_independent_oracle() {
        let p = manufactured_problem();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let lam = c(rng.gen_range(-4.0..4.0), rng.gen_range(-1.0..1.0));
            let tp = rng.gen_range(0.2..1.5);
            let got = n1(&p, lam, tp).unwrap().value;
            let want = n1_oracle(&p, lam, tp);
            assert!(
                (got - want).norm() < 1e-8 * (1.0 + want.norm()),
                "lam={lam} tp={tp}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn n1_linear_in_data() {
        let p = manufactured_problem();
        let mut doubled = p.clone();
        // doubling every datum doubles N1
        for f in [
            &mut doubled.initial,
            &mut doubled.boundary0,
            &mut doubled.boundary1,
            &mut doubled.nonlocal,
        ] {
            if let crate::funcspec::Kind::Modes(m) = &mut f.kind {
                for mode in m {
                    mode.amp *= 2.0;
                }
            }
        }
        let lam = c(2.2, 0.4);
        let a = n1(&p, lam, 0.9).unwrap().value;
        let b = n1(&doubled, lam, 0.9).unwrap().value;
        assert!((b - 2.0 * a).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn n_combined_zero_and_t_prime_independence() {
        let p = zero_problem();
        assert_eq!(n_combined(&p, c(2.0, 0.0), 1.0).unwrap().value, c(0.0, 0.0));

        // homogeneous problem with nonzero initial datum: n is independent of t'
        let mut hom = zero_problem();
        hom.initial = FunctionSpec::real_polynomial(Domain::Space, &[0.0, 0.0, 1.0, -2.0, 1.0]);
        let lam = c(3.0, 0.5);
        let a = n_combined(&hom, lam, 0.5).unwrap().value;
        let b = n_combined(&hom, lam, 2.5).unwrap().value;
        assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn n_combined_singular_denominator_reported() {
        // For K == 1 the determinant vanishes on the ray direction -i at the
        // first root of e^{-s} + 2 e^{s/2} cos(sqrt(3) s / 2) = 3.
        let p = manufactured_problem();
        let s = find_first_delta_zero_k1();
        let lam = c(0.0, -s);
        let err = n_combined(&p, lam, 1.0);
        assert!(matches!(err, Err(SpectralError::SingularDelta { .. })));
    }

    /// Root of the closed-form determinant factor for K == 1 on the -i ray.
    pub(crate) fn find_first_delta_zero_k1() -> f64 {
        let g = |s: f64| (-s).exp() + 2.0 * (s / 2.0).exp() * (3.0f64.sqrt() * s / 2.0).cos() - 3.0;
        let (mut a, mut b) = (4.0, 6.0);
        assert!(g(a) < 0.0 && g(b) > 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn n0_real_line_identity() {
        // U_hat(lambda) = -N0 + e^{-i lambda}[n + i lambda h1~ - lambda^2 h0~]
        let p = manufactured_problem();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let lam = c(rng.gen_range(-6.0..6.0), 0.0);
            if lam.norm() < 0.3 {
                continue;
            }
            let tp = 0.8;
            let n0v = n0(&p, lam, tp).unwrap().value;
            let nv = n_combined(&p, lam, tp).unwrap().value;
            let h0t = time_transform(&p.boundary0, lam, tp).unwrap().value;
            let h1t = time_transform(&p.boundary1, lam, tp).unwrap().value;
            let rc = nv + Complex64::i() * lam * h1t - lam * lam * h0t;
            let uhat = kernel_transform(&p.initial, lam, 0.0, 1.0);
            let recon = -n0v + (-Complex64::i() * lam).exp() * rc;
            assert!((recon - uhat).norm() < 1e-10 * (1.0 + uhat.norm()));
        }
    }

    #[test]
    fn n0_matches_independent_oracle() {
        let p = manufactured_problem();
        let lam = c(1.9, 0.0);
        let tp = 0.6;
        let got = n0(&p, lam, tp).unwrap().value;
        // oracle: assemble from the independently integrated pieces
        let n_or = {
            let kh = |j: i32| {
                gl_panels(
                    &|y| {
                        p.weight.value(1.0 - y)
                            * (-Complex64::i() * alpha_pow(j) * lam * y).exp()
                    },
                    0.0,
                    1.0,
                    300,
                )
            };
            let dl = kh(0) + ALPHA * kh(1) + ALPHA2 * kh(2);
            let num: Complex64 = (0..3)
                .map(|j| alpha_pow(j) * n1_oracle(&p, alpha_pow(j) * lam, tp))
                .sum();
            num / dl
        };
        let tt = |h: &FunctionSpec| {
            gl_panels(
                &|s| h.value(s) * (-Complex64::i() * lam * lam * lam * s).exp(),
                0.0,
                tp,
                400,
            )
        };
        let rc = n_or + Complex64::i() * lam * tt(&p.boundary1) - lam * lam * tt(&p.boundary0);
        let uhat = gl_panels(
            &|x| p.initial.value(x) * (-Complex64::i() * lam * x).exp(),
            0.0,
            1.0,
            300,
        );
        let want = (-Complex64::i() * lam).exp() * rc - uhat;
        assert!((got - want).norm() < 1e-8 * (1.0 + want.norm()));
    }

    #[test]
    fn n0_linear_superposition() {
        // The problem with summed data has summed n0: combine the
        // manufactured problem with a homogeneous-forcing problem whose
        // initial datum is a polynomial, representing the sum by sampling.
        let p = manufactured_problem();
        let hom = {
            let mut h = zero_problem();
            h.initial = FunctionSpec::real_polynomial(Domain::Space, &[0.0, 1.0, -1.0]);
            h
        };
        let lam = c(2.4, 0.0);
        let tp = 0.5;
        let a = n0(&p, lam, tp).unwrap().value;
        let b = n0(&hom, lam, tp).unwrap().value;
        let n = 801;
        let vals: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                p.initial.value(x) + hom.initial.value(x)
            })
            .collect();
        let mut comb = p.clone();
        comb.initial =
            FunctionSpec::samples(Domain::Space, vals, (0.0, 1.0), InterpOrder::Cubic).unwrap();
        let got = n0(&comb, lam, tp).unwrap().value;
        assert!(
            (got - (a + b)).norm() < 1e-7 * (1.0 + (a + b).norm()),
            "{got} vs {}",
            a + b
        );
    }

    #[test]
    fn paired_matches_plain_on_rays() {
        // On sector rays lambda^3 is real; the paired value must equal
        // exp(i lambda^3 t) times the plain assembly.
        let p = manufactured_problem();
        let t = 0.4;
        let tp = 0.9;
        let ctx = PairedCtx::new(&p, t, tp);
        for &s in &[1.5, 4.0, 9.0] {
            let lam = Complex64::from_polar(s, std::f64::consts::PI / 3.0);
            let lam3 = lam * lam * lam;
            let phase = (Complex64::i() * lam3 * t).exp();
            let plain = {
                let nv = n_combined(&p, lam, tp).unwrap().value;
                let h0t = time_transform(&p.boundary0, lam, tp).unwrap().value;
                let h1t = time_transform(&p.boundary1, lam, tp).unwrap().value;
                phase * (nv + Complex64::i() * lam * h1t - lam * lam * h0t)
            };
            let got = ctx.w_minus(lam).unwrap().value;
            assert!(
                (got - plain).norm() < 1e-10 * (1.0 + plain.norm()),
                "s={s}: {got} vs {plain}"
            );
        }
    }

    #[test]
    fn rc_end_matches_naive_in_lower_sector() {
        // Where no cancellation occurs the symbolically reduced form must
        // agree with the direct assembly of endpoint coefficients.
        let p = manufactured_problem();
        let ctx = PairedCtx::new(&p, 0.5, 0.5);
        let lam = Complex64::from_polar(8.0, -std::f64::consts::PI / 3.0);
        let lam3 = lam * lam * lam;
        let e = ctx.end_coeffs(lam3);
        let kh = kappa_hat_rotated(&ctx.k_terms, lam);
        let dl = kh[0] + ALPHA * kh[1] + ALPHA2 * kh[2];
        let mut num = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            let mu = alpha_pow(j) * lam;
            let nj = mu * mu * kh[j as usize] * e[0]
                - Complex64::i() * mu * kh[j as usize] * e[1]
                - mu * mu * e[2];
            num += alpha_pow(j) * nj;
        }
        let naive = num / dl + Complex64::i() * lam * e[1] - lam * lam * e[0];
        let got = ctx.rc_end(lam).unwrap();
        assert!((got - naive).norm() < 1e-9 * (1.0 + naive.norm()));
    }

    #[test]
    fn n0_end_decays_in_upper_sector() {
        // In the upper sectors the endpoint part of N0 tends to the nonlocal
        // limit -3 h2(t')/K(0).
        let p = manufactured_problem();
        let ctx = PairedCtx::new(&p, 0.5, 0.5);
        let lim = ctx.nu0_limit();
        let th = std::f64::consts::PI / 3.0;
        let a = ctx.n0_end(Complex64::from_polar(25.0, th)).unwrap();
        let b = ctx.n0_end(Complex64::from_polar(50.0, th)).unwrap();
        assert!(
            (b - lim).norm() < 0.6 * (a - lim).norm() + 1e-12,
            "no approach to limit: |a-lim|={:.3e} |b-lim|={:.3e}",
            (a - lim).norm(),
            (b - lim).norm()
        );
    }
}
