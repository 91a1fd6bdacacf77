//! Solver library for the Airy equation `u_t + u_xxx = 0` on the unit interval
//! with two boundary conditions at the right endpoint and one nonlocal
//! (weighted-integral) condition, via contour-integral representations built
//! from a spectral Dirichlet-to-Neumann map.
//!
//! The crate is organised around the scalar spectral functions (restricted
//! Fourier transforms, time transforms, the characteristic determinant and the
//! data combinations built from it), complex contour quadrature, the
//! initial-nonlocal-value solver, the time-periodic solver, long-time
//! asymptotics, and a manufactured-solution verification layer.

pub mod config;
pub mod contour;
pub mod funcspec;
pub mod invp;
pub mod longtime;
pub mod oscint;
pub mod periodic;
pub mod problem;
pub mod runner;
pub mod spectral;
pub mod verify;

pub use funcspec::{Domain, FunctionSpec};
pub use problem::ProblemData;

use num_complex::Complex64;

/// Primitive cube root of unity `alpha = exp(2*pi*i/3)`.
///
/// All rotation identities used by the solver reduce to `alpha^3 = 1`, so the
/// literal is written to full f64 precision once and reused everywhere.
pub const ALPHA: Complex64 = Complex64::new(-0.5, 0.866_025_403_784_438_6);

/// `alpha^2 = conj(alpha)`, the other primitive cube root of unity.
pub const ALPHA2: Complex64 = Complex64::new(-0.5, -0.866_025_403_784_438_6);

/// `alpha^j` for j mod 3.
#[inline]
pub fn alpha_pow(j: i32) -> Complex64 {
    match j.rem_euclid(3) {
        0 => Complex64::new(1.0, 0.0),
        1 => ALPHA,
        _ => ALPHA2,
    }
}

/// Overflow-safe complex division. The naive quotient formula squares the
/// denominator magnitude, which overflows for the exponentially large (but
/// mutually cancelling) determinant values that arise far out on the rays;
/// rescaling by the largest component first keeps the ratio finite.
#[inline]
pub fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    if s == 0.0 || !s.is_finite() {
        return a / b;
    }
    let inv = 1.0 / s;
    let bs = Complex64::new(b.re * inv, b.im * inv);
    Complex64::new(a.re * inv, a.im * inv) / bs
}
