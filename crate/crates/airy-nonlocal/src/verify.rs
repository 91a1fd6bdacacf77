//! Manufactured-solution generators, relation residual checks, and
//! argument-principle zero counting for the characteristic determinant.
//!
//! Manufactured fields are superpositions of modes `a * exp(i l x + i l^3 t)`,
//! each of which satisfies `u_t + u_xxx = 0` identically; problem data are
//! read off the exact field, so the solvers can be checked end to end against
//! a closed form. The residual operations evaluate both sides of the global
//! and periodic relations by direct quadrature of the exact field,
//! independent of the closed-form transform engine.

use crate::contour::{
    closed_sector_loop, integrate_contour, sectors_of, ContourPath, Piece, QuadratureSpec,
    SectorLabel,
};
use crate::funcspec::{Domain, FunctionSpec, Mode};
use crate::oscint::gl_panels;
use crate::problem::ProblemData;
use crate::spectral::{delta, delta_prime};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum ZeroCountError {
    #[error(
        "boundary too close to a zero: min |Delta|/scale = {ratio:.3e} on the \
         region boundary"
    )]
    BoundaryNearZero { ratio: f64 },
    #[error("winding integral {value} is {dist:.3e} from the nearest integer")]
    NonIntegerWinding { value: f64, dist: f64 },
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
}

/// Exact multi-mode solution together with the problem data read off it.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    /// (lambda_k, amplitude_k) of the modes `a e^{i l x + i l^3 t}`.
    pub modes: Vec<(Complex64, Complex64)>,
    pub problem: ProblemData,
}

impl ManufacturedCase {
    /// Exact field value.
    pub fn exact(&self, x: f64, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|&(l, a)| a * (Complex64::i() * (l * x + l * l * l * t)).exp())
            .sum()
    }

    /// Exact spatial derivative of order j.
    pub fn exact_dx(&self, j: u32, x: f64, t: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|&(l, a)| {
                (Complex64::i() * l).powu(j)
                    * a
                    * (Complex64::i() * (l * x + l * l * l * t)).exp()
            })
            .sum()
    }
}

/// Build the initial-value manufactured case: data read off
/// `u = sum a_k e^{i l_k x + i l_k^3 t}`.
pub fn make_manufactured_invp(
    modes: &[(Complex64, Complex64)],
    weight: &FunctionSpec,
) -> ManufacturedCase {
    assert!(!modes.is_empty(), "need at least one mode");
    let u_modes: Vec<Mode> = modes
        .iter()
        .map(|&(l, a)| Mode { freq: l, amp: a })
        .collect();
    let h0: Vec<Mode> = modes
        .iter()
        .map(|&(l, a)| Mode {
            freq: l * l * l,
            amp: a * (Complex64::i() * l).exp(),
        })
        .collect();
    let h1: Vec<Mode> = modes
        .iter()
        .map(|&(l, a)| Mode {
            freq: l * l * l,
            amp: a * Complex64::i() * l * (Complex64::i() * l).exp(),
        })
        .collect();
    let h2: Vec<Mode> = modes
        .iter()
        .map(|&(l, a)| Mode {
            freq: l * l * l,
            amp: a * crate::oscint::kernel_transform(weight, -l, 0.0, 1.0),
        })
        .collect();
    let problem = ProblemData {
        initial: FunctionSpec::modes(Domain::Space, u_modes),
        weight: weight.clone(),
        boundary0: FunctionSpec::modes(Domain::Time, h0),
        boundary1: FunctionSpec::modes(Domain::Time, h1),
        nonlocal: FunctionSpec::modes(Domain::Time, h2),
        period: None,
        compatibility_tol: 1e-9,
    };
    ManufacturedCase {
        modes: modes.to_vec(),
        problem,
    }
}

/// Build a time-periodic manufactured case from mode indices (n, j) with
/// spatial wavenumber `alpha^j lambda_n`, `lambda_n^3 = n omega`. Each mode
/// is T-periodic with T = 2 pi / omega and satisfies the equation exactly.
pub fn make_manufactured_periodic(
    mode_indices: &[(i64, u8)],
    omega: f64,
    weight: &FunctionSpec,
) -> ManufacturedCase {
    assert!(!mode_indices.is_empty());
    let modes: Vec<(Complex64, Complex64)> = mode_indices
        .iter()
        .map(|&(n, j)| {
            assert!(n != 0, "n = 0 gives a constant-in-time mode");
            assert!(j < 3, "rotation index must be 0, 1 or 2");
            let ln = crate::periodic::lambda_n(n, omega);
            (crate::alpha_pow(j as i32) * ln, Complex64::new(1.0, 0.0))
        })
        .collect();
    let mut case = make_manufactured_invp(&modes, weight);
    case.problem.period = Some(2.0 * PI / omega);
    case
}

// ---------------------------------------------------------------------------
// Relation residuals (direct quadrature of the exact field)
// ---------------------------------------------------------------------------

/// Oscillation-scaled panel count for the oracle quadratures.
fn panels_for(mag: f64, len: f64) -> usize {
    ((mag * len / (2.0 * PI)).ceil() as usize * 2 + 24).min(2000)
}

/// Residual of the global relation on `[y, z]` at `(lambda, t)`:
/// both sides evaluated by direct quadrature of the exact field.
pub fn global_relation_residual(
    case: &ManufacturedCase,
    lambda: Complex64,
    y: f64,
    z: f64,
    t: f64,
) -> f64 {
    assert!((0.0..=1.0).contains(&y) && (0.0..=1.0).contains(&z) && y <= z);
    if y == z {
        return 0.0;
    }
    let i = Complex64::i();
    let lam3 = lambda * lambda * lambda;
    let px = panels_for(lambda.norm(), z - y);
    let uhat_t = gl_panels(&|x| case.exact(x, t) * (-i * lambda * x).exp(), y, z, px);
    let lhs = (-i * lam3 * t).exp() * uhat_t;

    let uhat_0 = gl_panels(&|x| case.exact(x, 0.0) * (-i * lambda * x).exp(), y, z, px);
    let pt = panels_for(lam3.norm(), t);
    let f_combo = |xx: f64| -> Complex64 {
        gl_panels(
            &|s| {
                let combo = case.exact_dx(2, xx, s) + i * lambda * case.exact_dx(1, xx, s)
                    - lambda * lambda * case.exact_dx(0, xx, s);
                (-i * lam3 * s).exp() * combo
            },
            0.0,
            t,
            pt,
        )
    };
    let rhs = uhat_0 + (-i * lambda * y).exp() * f_combo(y) - (-i * lambda * z).exp() * f_combo(z);
    (lhs - rhs).norm()
}

/// Max residual of the periodic relation and the nonlocal periodic relation
/// at (n, lambda), all coefficients reconstructed by direct quadrature of the
/// exact periodic field.
pub fn periodic_relation_residual(case: &ManufacturedCase, n: i64, lambda: Complex64) -> f64 {
    let t_period = case
        .problem
        .period
        .expect("periodic relation needs a periodic case");
    let omega = 2.0 * PI / t_period;
    let i = Complex64::i();
    let lam3 = lambda * lambda * lambda;
    let n_t = 64usize;

    // time-coefficient of a callable via the uniform trapezoid rule
    let coeff = |f: &dyn Fn(f64) -> Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n_t {
            let t = t_period * k as f64 / n_t as f64;
            acc += f(t) * (-i * (n as f64) * omega * t).exp();
        }
        acc / n_t as f64
    };

    let px = panels_for(lambda.norm(), 1.0);
    let q_n = coeff(&|t| gl_panels(&|x| case.exact(x, t) * (-i * lambda * x).exp(), 0.0, 1.0, px));
    let p_n = coeff(&|t| {
        gl_panels(
            &|y| {
                let inner =
                    gl_panels(&|z| case.exact(z, t) * (-i * lambda * z).exp(), y, 1.0, px);
                case.problem.weight.value(y) * (i * lambda * y).exp() * inner
            },
            0.0,
            1.0,
            48,
        )
    });

    let g = |j: u32| coeff(&|t| case.exact_dx(j, 0.0, t));
    let gam = |j: u32| coeff(&|t| case.exact_dx(j, 1.0, t));
    let a_c = |j: u32| {
        coeff(&|t| {
            gl_panels(
                &|y| case.problem.weight.value(y) * case.exact_dx(j, y, t),
                0.0,
                1.0,
                48,
            )
        })
    };

    let pre = i * (n as f64) * omega - i * lam3;
    let el = (-i * lambda).exp();
    let khat_neg = gl_panels(
        &|w| case.problem.weight.value(w) * (i * lambda * w).exp(),
        0.0,
        1.0,
        px,
    );

    let r1 = pre * q_n - (g(2) + i * lambda * g(1) - lambda * lambda * g(0))
        + el * (gam(2) + i * lambda * gam(1) - lambda * lambda * gam(0));
    let r2 = pre * p_n - (a_c(2) + i * lambda * a_c(1) - lambda * lambda * a_c(0))
        + el * khat_neg * (gam(2) + i * lambda * gam(1) - lambda * lambda * gam(0));
    r1.norm().max(r2.norm())
}

// ---------------------------------------------------------------------------
// Zero counting
// ---------------------------------------------------------------------------

/// Region for zero scans.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Region {
    /// Annular sector between two angles.
    AnnularSector {
        th1: f64,
        th2: f64,
        r_inner: f64,
        r_outer: f64,
    },
    /// Rectangle around the ray through `direction`, radii
    /// `[r_inner, r_outer]`, given half-width across the ray.
    Strip {
        direction_re: f64,
        direction_im: f64,
        r_inner: f64,
        r_outer: f64,
        half_width: f64,
    },
}

impl Region {
    pub fn boundary(&self) -> ContourPath {
        match *self {
            Region::AnnularSector {
                th1,
                th2,
                r_inner,
                r_outer,
            } => closed_sector_loop(th1, th2, r_inner, r_outer),
            Region::Strip {
                direction_re,
                direction_im,
                r_inner,
                r_outer,
                half_width,
            } => {
                let d = Complex64::new(direction_re, direction_im);
                let d = d / d.norm();
                let corner = |a: f64, b: f64| d * Complex64::new(a, b);
                let pts = [
                    corner(r_inner, -half_width),
                    corner(r_outer, -half_width),
                    corner(r_outer, half_width),
                    corner(r_inner, half_width),
                ];
                ContourPath {
                    label: SectorLabel::Custom,
                    components: vec![vec![
                        Piece::Line {
                            a: pts[0],
                            b: pts[1],
                        },
                        Piece::Line {
                            a: pts[1],
                            b: pts[2],
                        },
                        Piece::Line {
                            a: pts[2],
                            b: pts[3],
                        },
                        Piece::Line {
                            a: pts[3],
                            b: pts[0],
                        },
                    ]],
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroCountReport {
    pub region: Region,
    pub winding_count: i64,
    pub min_abs_delta_on_boundary: f64,
    pub rounding_distance: f64,
}

/// Winding number of a function around a closed path:
/// `(1/(2 pi i)) \oint f'/f`, with a boundary prescan that refuses when the
/// path runs too close to a zero (relative to the local term scale).
pub fn winding_count<F, G, S>(
    f: F,
    fp: G,
    local_scale: S,
    path: &ContourPath,
) -> Result<(i64, f64, f64), ZeroCountError>
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
    S: Fn(Complex64) -> f64,
{
    let ratio_at = |piece: &Piece, t: f64| -> f64 {
        let (z, _) = piece.at(t);
        f(z).norm() / local_scale(z).max(1e-300)
    };
    let mut min_ratio = f64::INFINITY;
    let mut min_abs = f64::INFINITY;
    for comp in &path.components {
        let per_piece = (512 / comp.len().max(1)).max(16);
        for piece in comp {
            let mut best_t = 0.5;
            let mut best = f64::INFINITY;
            for k in 0..per_piece {
                let t = (k as f64 + 0.5) / per_piece as f64;
                let (z, _) = piece.at(t);
                let fv = f(z).norm();
                min_abs = min_abs.min(fv);
                let r = fv / local_scale(z).max(1e-300);
                if r < best {
                    best = r;
                    best_t = t;
                }
            }
            // refine the per-piece minimum by ternary search so a zero lying
            // between prescan samples cannot slip through
            let h = 1.0 / per_piece as f64;
            let (mut a, mut b) = ((best_t - h).max(0.0), (best_t + h).min(1.0));
            for _ in 0..50 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if ratio_at(piece, m1) < ratio_at(piece, m2) {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let refined = ratio_at(piece, 0.5 * (a + b)).min(best);
            min_ratio = min_ratio.min(refined);
        }
    }
    if min_ratio < 1e-4 {
        return Err(ZeroCountError::BoundaryNearZero { ratio: min_ratio });
    }
    let spec = QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        max_panels: 60_000,
        ..Default::default()
    };
    let r = integrate_contour(|z| fp(z) / f(z), path, &spec);
    let w = r.value / (2.0 * PI * Complex64::i());
    let rounded = w.re.round();
    let dist = ((w.re - rounded).powi(2) + w.im.powi(2)).sqrt();
    if dist > 1e-3 {
        return Err(ZeroCountError::NonIntegerWinding { value: w.re, dist });
    }
    Ok((rounded as i64, min_abs, dist))
}

/// Count zeros of `Delta` for the given weight inside a region.
pub fn count_delta_zeros(
    weight: &FunctionSpec,
    region: &Region,
) -> Result<ZeroCountReport, ZeroCountError> {
    let terms = crate::spectral::reflected_terms(weight);
    let f = |z: Complex64| delta(weight, z).map(|e| e.value).unwrap_or_default();
    let fp = |z: Complex64| delta_prime(weight, z).map(|e| e.value).unwrap_or_default();
    let scale = |z: Complex64| {
        crate::spectral::kappa_hat_rotated(&terms, z)
            .iter()
            .map(|k| k.norm())
            .fold(0.0, f64::max)
    };
    let path = region.boundary();
    let (count, min_abs, dist) = winding_count(f, fp, scale, &path)?;
    Ok(ZeroCountReport {
        region: region.clone(),
        winding_count: count,
        min_abs_delta_on_boundary: min_abs,
        rounding_distance: dist,
    })
}

/// Total zero count over the closures of the three D sectors between the two
/// radii (the solver gate).
pub fn count_delta_zeros_d_closure(
    weight: &FunctionSpec,
    r_inner: f64,
    r_outer: f64,
) -> Result<ZeroCountReport, ZeroCountError> {
    let mut total = 0i64;
    let mut min_abs = f64::INFINITY;
    let mut dist = 0.0f64;
    let mut last_region = None;
    for label in [SectorLabel::DPlus, SectorLabel::DMinus] {
        for (th1, th2) in sectors_of(label) {
            let region = Region::AnnularSector {
                th1,
                th2,
                r_inner,
                r_outer,
            };
            let rep = count_delta_zeros(weight, &region)?;
            total += rep.winding_count;
            min_abs = min_abs.min(rep.min_abs_delta_on_boundary);
            dist = dist.max(rep.rounding_distance);
            last_region = Some(region);
        }
    }
    Ok(ZeroCountReport {
        region: last_region.unwrap(),
        winding_count: total,
        min_abs_delta_on_boundary: min_abs,
        rounding_distance: dist,
    })
}

/// Locate zeros of `Delta` near the ray through `direction` by dense sampling
/// of `|Delta|` followed by complex Newton refinement with the analytic
/// derivative. Returns refined zeros sorted by modulus.
pub fn locate_delta_zeros_on_ray(
    weight: &FunctionSpec,
    direction: Complex64,
    r0: f64,
    r1: f64,
) -> Vec<Complex64> {
    let d = direction / direction.norm();
    let n = 4000;
    let mut mags = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = r0 + (r1 - r0) * k as f64 / n as f64;
        let z = d * s;
        mags.push((
            s,
            delta(weight, z).map(|e| e.value.norm()).unwrap_or(f64::MAX),
        ));
    }
    let k_terms = crate::spectral::reflected_terms(weight);
    let mut zeros: Vec<Complex64> = Vec::new();
    for k in 1..n {
        let (s, m) = mags[k];
        if m < mags[k - 1].1 && m < mags[k + 1].1 {
            let mut z = d * s;
            let mut ok = false;
            for _ in 0..60 {
                let dv = delta(weight, z).map(|e| e.value).unwrap_or_default();
                let dp = delta_prime(weight, z).map(|e| e.value).unwrap_or_default();
                if dp.norm() < 1e-300 {
                    break;
                }
                let step = dv / dp;
                z -= step;
                if step.norm() < 1e-13 * (1.0 + z.norm()) {
                    ok = true;
                    break;
                }
            }
            if ok {
                let m_ref = delta(weight, z).map(|e| e.value.norm()).unwrap_or(f64::MAX);
                let scale = crate::spectral::kappa_hat_rotated(&k_terms, z)
                    .iter()
                    .map(|k| k.norm())
                    .fold(0.0, f64::max);
                if m_ref < 1e-9 * scale.max(1e-300)
                    && z.norm() > r0 - 0.5
                    && z.norm() < r1 + 0.5
                    && !zeros.iter().any(|&prev| (prev - z).norm() < 1e-6)
                {
                    zeros.push(z);
                }
            }
        }
    }
    zeros.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn k_one() -> FunctionSpec {
        FunctionSpec::real_polynomial(Domain::Space, &[1.0])
    }

    #[test]
    fn manufactured_invp_data_closed_forms() {
        let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one());
        // h2(t) = K_hat(-1) e^{it} with K_hat(-1) = (e^i - 1)/i
        let want = ((Complex64::i()).exp() - 1.0) / Complex64::i();
        let h2_0 = case.problem.nonlocal.value(0.0);
        assert!((h2_0 - want).norm() < 1e-14);
        // compatibility residuals at t = 0 are at rounding level
        case.problem.validate().unwrap();

        // zero amplitudes give identically zero data
        let z = make_manufactured_invp(&[(c(1.0, 0.0), c(0.0, 0.0))], &k_one());
        assert!(z.problem.boundary0.is_zero());
        assert!(z.problem.nonlocal.is_zero());
    }

    #[test]
    fn manufactured_periodic_mode_shapes() {
        let case = make_manufactured_periodic(&[(8, 0)], 1.0, &k_one());
        // lambda_8 = 2: q = e^{2ix + 8it}
        assert!((case.modes[0].0 - c(2.0, 0.0)).norm() < 1e-12);
        let q = case.exact(0.3, 0.7);
        let want = (Complex64::i() * (2.0 * 0.3 + 8.0 * 0.7)).exp();
        assert!((q - want).norm() < 1e-14);

        // (n=1, j=1): complex wavenumber, bounded on [0,1]
        let case = make_manufactured_periodic(&[(1, 1)], 1.0, &k_one());
        for &x in &[0.0, 0.5, 1.0] {
            assert!(case.exact(x, 0.2).norm() < 10.0);
        }
    }

    #[test]
    fn global_relation_residual_examples() {
        let case = make_manufactured_invp(&[(c(1.0, 0.0), c(1.0, 0.0))], &k_one());
        // collapsed interval
        assert_eq!(
            global_relation_residual(&case, c(2.3, 0.2), 0.4, 0.4, 0.7),
            0.0
        );
        // random triples
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let lam = c(rng.gen_range(-5.0..5.0), rng.gen_range(-1.0..1.0));
            let mut y = rng.gen_range(0.0..1.0);
            let mut z = rng.gen_range(0.0..1.0);
            if y > z {
                std::mem::swap(&mut y, &mut z);
            }
            let t = rng.gen_range(0.1..1.5);
            let r = global_relation_residual(&case, lam, y, z, t);
            assert!(r <= 1e-8, "lam={lam} y={y} z={z} t={t}: residual {r:.3e}");
        }
        // lambda = 0 reduces to the integrated equation identity
        let r = global_relation_residual(&case, c(0.0, 0.0), 0.2, 0.9, 0.8);
        assert!(r <= 1e-10, "residual {r:.3e}");
    }

    #[test]
    fn periodic_relation_residual_examples() {
        let case = make_manufactured_periodic(&[(8, 0)], 1.0, &k_one());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..4 {
            let lam = c(rng.gen_range(-4.0..4.0), rng.gen_range(-0.5..0.5));
            let r = periodic_relation_residual(&case, 8, lam);
            assert!(r <= 1e-8, "lam={lam}: residual {r:.3e}");
        }
        // at lambda = lambda_n the relation collapses; the residual is the
        // deviation of the right side from zero
        let r = periodic_relation_residual(&case, 8, c(2.0, 0.0));
        assert!(r <= 1e-8, "residual at the root: {r:.3e}");
    }

    #[test]
    fn winding_calibration_square() {
        // f = z^2 on the unit circle: winding 2
        let path = ContourPath {
            label: SectorLabel::Custom,
            components: vec![vec![
                Piece::Arc {
                    r: 1.0,
                    th0: -PI,
                    th1: 0.0,
                },
                Piece::Arc {
                    r: 1.0,
                    th0: 0.0,
                    th1: PI,
                },
            ]],
        };
        let (count, _, dist) = winding_count(|z| z * z, |z| 2.0 * z, |_| 1.0, &path).unwrap();
        assert_eq!(count, 2);
        assert!(dist <= 1e-6);
    }

    #[test]
    fn d_closure_zero_free_for_unit_weight() {
        let rep = count_delta_zeros_d_closure(&k_one(), 3.0, 50.0).unwrap();
        assert_eq!(rep.winding_count, 0);
        assert!(rep.rounding_distance <= 1e-3);
    }

    #[test]
    fn strip_scan_finds_first_zero() {
        // Zeros for K == 1 lie along the -i direction at roots of
        // e^{-s} + 2 e^{s/2} cos(sqrt(3) s/2) = 3.
        let region = Region::Strip {
            direction_re: 0.0,
            direction_im: -1.0,
            r_inner: 3.0,
            r_outer: 50.0,
            half_width: 1.0,
        };
        let rep = count_delta_zeros(&k_one(), &region).unwrap();
        assert!(rep.winding_count >= 1, "count = {}", rep.winding_count);

        let zeros = locate_delta_zeros_on_ray(&k_one(), c(0.0, -1.0), 3.0, 50.0);
        assert!(!zeros.is_empty());
        // dense-sampling oracle for the first root
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
        let s_star = 0.5 * (a + b);
        let want = c(0.0, -s_star);
        assert!(
            (zeros[0] - want).norm() <= 1e-6,
            "zero {} vs oracle {want}",
            zeros[0]
        );
    }

    #[test]
    fn boundary_near_zero_is_refused() {
        // run the strip boundary straight through the first zero
        let zeros = locate_delta_zeros_on_ray(&k_one(), c(0.0, -1.0), 3.0, 50.0);
        let s0 = zeros[0].norm();
        let region = Region::Strip {
            direction_re: 0.0,
            direction_im: -1.0,
            r_inner: s0,
            r_outer: s0 + 5.0,
            half_width: 1.0,
        };
        let err = count_delta_zeros(&k_one(), &region);
        assert!(matches!(err, Err(ZeroCountError::BoundaryNearZero { .. })));
    }
}
