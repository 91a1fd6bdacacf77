//! Closed-form and quadrature integration of polynomial-times-exponential
//! integrands against oscillatory kernels.
//!
//! The workhorse is [`osc_poly_integral`], which computes
//! `int_a^b P(s) exp(i*nu*s) exp(-i*omega*(s - s0)) ds` exactly, switching
//! between a Taylor series (small total phase across the interval) and the
//! finite integration-by-parts formula (otherwise). Exponents are always
//! evaluated in combined form so no intermediate factor exceeds the kernel
//! magnitude actually attained on the interval.

use crate::funcspec::{poly_derivative, FunctionSpec, PolyExpTerm};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Shift polynomial coefficients: returns Q with Q(u) = P(x0 + u).
pub fn shift_poly(p: &[Complex64], x0: f64) -> Vec<Complex64> {
    let n = p.len();
    let mut q = p.to_vec();
    // Repeated synthetic division by (u - (-x0)) == Taylor shift.
    for j in 0..n {
        for k in (j + 1..n).rev() {
            let add = q[k] * x0;
            q[k - 1] += add;
        }
    }
    q
}

/// Multiply polynomial by x^m.
pub fn raise_poly(p: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut q = vec![Complex64::new(0.0, 0.0); p.len() + m];
    q[m..].copy_from_slice(p);
    q
}

/// `int_a^b P(s) exp(i*nu*s) exp(-i*omega*(s-s0)) ds`, exact.
///
/// `P` is in the global coordinate. The combined frequency is `mu = nu -
/// omega`; the kernel phase is referenced to `s0` so the result stays scaled
/// like the integrand even when `exp(-i*omega*s)` alone would overflow.
pub fn osc_poly_integral(
    p: &[Complex64],
    nu: Complex64,
    omega: Complex64,
    s0: f64,
    a: f64,
    b: f64,
) -> Complex64 {
    if a == b || p.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let mu = nu - omega;
    let x0 = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let q = shift_poly(p, x0);
    // exponent at local coordinate u: i*mu*(x0+u) + i*omega*s0
    let base = Complex64::i() * (mu * x0 + omega * s0);
    if mu.norm() * h.abs() <= 0.8 {
        // Taylor branch: int_{-h}^{h} u^k e^{i mu u} du summed over k.
        let pref = base.exp();
        let imu = Complex64::i() * mu;
        let mut total = Complex64::new(0.0, 0.0);
        for (k, &qk) in q.iter().enumerate() {
            if qk.norm_sqr() == 0.0 {
                continue;
            }
            let mut term_pow = Complex64::new(1.0, 0.0); // (i mu)^m / m!
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..48 {
                let km = k + m;
                if km % 2 == 0 {
                    let int_u = 2.0 * h.powi(km as i32 + 1) / (km as f64 + 1.0);
                    acc += term_pow * int_u;
                }
                term_pow = term_pow * imu / (m as f64 + 1.0);
                if term_pow.norm() * h.powi((k + m) as i32 + 1) < 1e-20 * (1.0 + acc.norm()) {
                    break;
                }
            }
            total += qk * acc;
        }
        pref * total
    } else {
        // Finite integration by parts:
        //   int Q e^{i mu u} du = e^{i mu u} sum_j (-1)^j Q^(j)(u) / (i mu)^{j+1}
        let imu_inv = 1.0 / (Complex64::i() * mu);
        let mut derivs = Vec::with_capacity(q.len());
        let mut cur = q.clone();
        while !cur.is_empty() {
            derivs.push(cur.clone());
            cur = poly_derivative(&cur);
        }
        let eval_at = |u: f64| -> Complex64 {
            let mut s = Complex64::new(0.0, 0.0);
            let mut fac = imu_inv;
            for (j, d) in derivs.iter().enumerate() {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                s += crate::funcspec::horner(d, u) * fac * sign;
                fac *= imu_inv;
            }
            // full exponent at this endpoint
            (base + Complex64::i() * mu * u).exp() * s
        };
        eval_at(h) - eval_at(-h)
    }
}

/// Integrate one lowered term against the kernel over `[a, b]` intersected
/// with the term's support, with an extra monomial weight `s^m`.
fn term_integral(
    t: &PolyExpTerm,
    moment: usize,
    omega: Complex64,
    s0: f64,
    a: f64,
    b: f64,
) -> Complex64 {
    let lo = a.max(t.support.0);
    let hi = b.min(t.support.1);
    if !(hi > lo) {
        return Complex64::new(0.0, 0.0);
    }
    let p = if moment == 0 {
        t.poly.clone()
    } else {
        raise_poly(&t.poly, moment)
    };
    osc_poly_integral(&p, t.freq, omega, s0, lo, hi)
}

/// `int_a^b s^m f(s) exp(-i*omega*(s-s0)) ds` for a lowered term list.
pub fn transform_terms(
    terms: &[PolyExpTerm],
    moment: usize,
    omega: Complex64,
    s0: f64,
    a: f64,
    b: f64,
) -> Complex64 {
    terms
        .iter()
        .map(|t| term_integral(t, moment, omega, s0, a, b))
        .sum()
}

/// `int_a^b f(x) exp(-i*lambda*x) dx`, exact per lowered term.
pub fn kernel_transform(f: &FunctionSpec, lambda: Complex64, a: f64, b: f64) -> Complex64 {
    if f.is_zero() || a == b {
        return Complex64::new(0.0, 0.0);
    }
    transform_terms(&f.lower(), 0, lambda, 0.0, a, b)
}

/// `int_a^b x^m f(x) exp(-i*lambda*x) dx`.
pub fn kernel_transform_moment(
    f: &FunctionSpec,
    m: usize,
    lambda: Complex64,
    a: f64,
    b: f64,
) -> Complex64 {
    if f.is_zero() || a == b {
        return Complex64::new(0.0, 0.0);
    }
    transform_terms(&f.lower(), m, lambda, 0.0, a, b)
}

/// `int_0^1 x^m f(x) dx`, the plain moment.
pub fn moment(f: &FunctionSpec, m: usize) -> Complex64 {
    kernel_transform_moment(f, m, Complex64::new(0.0, 0.0), 0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], computed
/// by Newton iteration on the Legendre recurrence and cached.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE16: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static CACHE32: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static CACHE64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let cell = match n {
        16 => &CACHE16,
        32 => &CACHE32,
        64 => &CACHE64,
        _ => panic!("unsupported Gauss-Legendre order {n}"),
    };
    cell.get_or_init(|| compute_gl(n))
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite 16-node Gauss-Legendre quadrature of a complex integrand over
/// `[a, b]` with panel count scaled to the oscillation `|lambda| (b-a)`:
/// `max(8, 2*ceil(|lambda|(b-a)/(2 pi)))` panels, so each panel spans at most
/// about pi of phase.
pub fn osc_gl_quadrature<F: Fn(f64) -> Complex64>(
    f: F,
    lambda_mag: f64,
    a: f64,
    b: f64,
) -> Complex64 {
    let len = (b - a).abs();
    let panels = ((lambda_mag * len / (2.0 * std::f64::consts::PI)).ceil() as usize * 2).max(8);
    gl_panels(&f, a, b, panels)
}

/// Plain composite GL16 with a fixed panel count.
pub fn gl_panels<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    let (nodes, weights) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += f(mid + half * x) * *w;
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::Domain;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gl_nodes_integrate_high_degree() {
        // 16-point GL is exact through degree 31.
        let val = gl_panels(&|x: f64| c(x.powi(20), 0.0), 0.0, 1.0, 1);
        assert!((val.re - 1.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn constant_against_unit_kernel() {
        let f = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
        let v = kernel_transform(&f, c(0.0, 0.0), 0.0, 1.0);
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_antiderivative() {
        // int_0^1 e^{-i pi x} dx = (1 - e^{-i pi})/(i pi) = 2/(i pi)
        let f = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
        let v = kernel_transform(&f, c(std::f64::consts::PI, 0.0), 0.0, 1.0);
        let want = c(2.0, 0.0) / (Complex64::i() * std::f64::consts::PI);
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature_for_poly() {
        let f = FunctionSpec::real_polynomial(Domain::Space, &[0.3, -1.1, 2.0, 0.7]);
        for &(re, im) in &[(0.0, 0.0), (3.7, 0.0), (12.0, -0.4), (0.31, 0.2), (40.0, 1.0)] {
            let lam = c(re, im);
            let exact = kernel_transform(&f, lam, 0.0, 1.0);
            let quad = osc_gl_quadrature(
                |x| f.value(x) * (-Complex64::i() * lam * x).exp(),
                lam.norm(),
                0.0,
                1.0,
            );
            assert!(
                (exact - quad).norm() < 1e-11 * (1.0 + exact.norm()),
                "lambda={lam}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn branch_boundary_is_seamless() {
        // straddle the series/by-parts switch |mu| h = 0.8
        let f = FunctionSpec::real_polynomial(Domain::Space, &[1.0, 1.0, 1.0]);
        for &m in &[1.55, 1.59, 1.61, 1.65] {
            let exact = kernel_transform(&f, c(m, 0.0), 0.0, 1.0);
            let quad = osc_gl_quadrature(
                |x| f.value(x) * (-Complex64::i() * c(m, 0.0) * x).exp(),
                m,
                0.0,
                1.0,
            );
            assert!((exact - quad).norm() < 1e-12);
        }
    }

    #[test]
    fn reference_point_keeps_scale() {
        // Paired kernel: int_0^t' e^{i w^3 (t-s)} h(s) ds with h = 1 and
        // purely imaginary w^3 so the kernel is huge at s=0 if referenced to
        // zero; referencing to s0=t keeps everything finite and matches the
        // directly computable antiderivative.
        let omega = c(0.0, 30.0); // i*30
        let t = 1.0;
        let tp = 1.0;
        let one = FunctionSpec::real_polynomial(Domain::Time, &[1.0]);
        let got = transform_terms(&one.lower(), 0, omega, t, 0.0, tp);
        // antiderivative: int_0^1 e^{i*omega*(t-s)} ds with omega = 30i:
        //   = int_0^1 e^{30(s-1)·(-1)}... compute directly: e^{i*30i*(1-s)} = e^{-30(1-s)}
        let want = (1.0 - (-30.0f64).exp()) / 30.0;
        assert!((got - c(want, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sampled_kind_transforms() {
        // sampled sine, compare against dense quadrature of the spline itself
        let n = 257;
        let vals: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                c((2.0 * x).sin(), 0.0)
            })
            .collect();
        let f = crate::funcspec::FunctionSpec::samples(
            Domain::Space,
            vals,
            (0.0, 1.0),
            crate::funcspec::InterpOrder::Cubic,
        )
        .unwrap();
        let lam = c(7.0, 0.0);
        let exact = kernel_transform(&f, lam, 0.0, 1.0);
        // panel edges aligned with the 256 spline segments so the quadrature
        // oracle never straddles a derivative kink
        let quad = gl_panels(
            &|x| f.value(x) * (-Complex64::i() * lam * x).exp(),
            0.0,
            1.0,
            256,
        );
        assert!((exact - quad).norm() < 1e-10);
    }

    #[test]
    fn moments_of_weight() {
        let f = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
        assert!((moment(&f, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((moment(&f, 1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((moment(&f, 2) - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }
}
