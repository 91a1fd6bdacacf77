//! Full problem statements: initial datum, weight, boundary and nonlocal
//! forcing, and optional period.

use crate::funcspec::{Domain, FunctionSpec};
use crate::oscint::kernel_transform;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("weight K must be nonzero at 0 (got |K(0)| = {0:.3e})")]
    WeightVanishesAtZero(f64),
    #[error("{0} must be a {1:?}-domain function")]
    WrongDomain(&'static str, Domain),
    #[error("period must be positive, got {0}")]
    BadPeriod(f64),
    #[error("compatibility violated: |{name}| = {value:.3e} exceeds tolerance {tol:.3e}")]
    Incompatible {
        name: &'static str,
        value: f64,
        tol: f64,
    },
    #[error("{0} is not T-periodic at the seam: |h(0)-h(T)| = {1:.3e} exceeds {2:.3e}")]
    NotPeriodic(&'static str, f64, f64),
}

/// Statement of an initial/periodic nonlocal value problem on [0,1]:
/// `u_t + u_xxx = 0` with `u(1,t) = h0`, `u_x(1,t) = h1`,
/// `int_0^1 K(y) u(y,t) dy = h2`, and either `u(x,0) = U(x)` or a
/// periodicity condition with period `T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemData {
    pub initial: FunctionSpec,
    pub weight: FunctionSpec,
    pub boundary0: FunctionSpec,
    pub boundary1: FunctionSpec,
    pub nonlocal: FunctionSpec,
    pub period: Option<f64>,
    pub compatibility_tol: f64,
}

impl ProblemData {
    /// Validate domains, the weight condition K(0) != 0, t=0 compatibility of
    /// the initial datum with the boundary/nonlocal data, and (when a period
    /// is present) periodicity of each forcing function at the seam.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.initial.domain != Domain::Space {
            return Err(ProblemError::WrongDomain("initial", Domain::Space));
        }
        if self.weight.domain != Domain::Space {
            return Err(ProblemError::WrongDomain("weight", Domain::Space));
        }
        for (name, f) in [
            ("boundary0", &self.boundary0),
            ("boundary1", &self.boundary1),
            ("nonlocal", &self.nonlocal),
        ] {
            if f.domain != Domain::Time {
                return Err(ProblemError::WrongDomain(name, Domain::Time));
            }
        }
        let k0 = self.weight.value(0.0).norm();
        if k0 < 1e-14 {
            return Err(ProblemError::WeightVanishesAtZero(k0));
        }
        if let Some(t) = self.period {
            if !(t > 0.0) {
                return Err(ProblemError::BadPeriod(t));
            }
            for (name, f) in [
                ("boundary0", &self.boundary0),
                ("boundary1", &self.boundary1),
                ("nonlocal", &self.nonlocal),
            ] {
                let seam = (f.value(0.0) - f.value(t)).norm();
                if seam > self.compatibility_tol {
                    return Err(ProblemError::NotPeriodic(name, seam, self.compatibility_tol));
                }
            }
        }
        self.check_compatibility()
    }

    /// Validation for purely periodic problems, which carry no initial datum:
    /// domains, the weight condition, a positive period, and seam
    /// periodicity, skipping the t = 0 compatibility of `initial`.
    pub fn validate_for_periodic(&self) -> Result<(), ProblemError> {
        if self.weight.domain != Domain::Space {
            return Err(ProblemError::WrongDomain("weight", Domain::Space));
        }
        for (name, f) in [
            ("boundary0", &self.boundary0),
            ("boundary1", &self.boundary1),
            ("nonlocal", &self.nonlocal),
        ] {
            if f.domain != Domain::Time {
                return Err(ProblemError::WrongDomain(name, Domain::Time));
            }
        }
        let k0 = self.weight.value(0.0).norm();
        if k0 < 1e-14 {
            return Err(ProblemError::WeightVanishesAtZero(k0));
        }
        let t = self.period.ok_or(ProblemError::BadPeriod(0.0))?;
        if !(t > 0.0) {
            return Err(ProblemError::BadPeriod(t));
        }
        for (name, f) in [
            ("boundary0", &self.boundary0),
            ("boundary1", &self.boundary1),
            ("nonlocal", &self.nonlocal),
        ] {
            let seam = (f.value(0.0) - f.value(t)).norm();
            if seam > self.compatibility_tol {
                return Err(ProblemError::NotPeriodic(name, seam, self.compatibility_tol));
            }
        }
        Ok(())
    }

    /// `|U(1) - h0(0)|`, `|U'(1) - h1(0)|`, `|int K U - h2(0)|` against the
    /// configured tolerance.
    pub fn check_compatibility(&self) -> Result<(), ProblemError> {
        let tol = self.compatibility_tol;
        let r0 = (self.initial.value(1.0) - self.boundary0.value(0.0)).norm();
        if r0 > tol {
            return Err(ProblemError::Incompatible {
                name: "U(1) - h0(0)",
                value: r0,
                tol,
            });
        }
        let r1 = (self.initial.derivative(1.0) - self.boundary1.value(0.0)).norm();
        if r1 > tol {
            return Err(ProblemError::Incompatible {
                name: "U'(1) - h1(0)",
                value: r1,
                tol,
            });
        }
        let r2 = (self.weighted_initial_integral() - self.nonlocal.value(0.0)).norm();
        if r2 > tol {
            return Err(ProblemError::Incompatible {
                name: "int K U - h2(0)",
                value: r2,
                tol,
            });
        }
        Ok(())
    }

    /// `int_0^1 K(y) U(y) dy` via the product of the lowered term lists.
    pub fn weighted_initial_integral(&self) -> Complex64 {
        crate::spectral::weighted_space_integral(&self.weight, &self.initial)
    }

    /// All three forcing functions identically zero.
    pub fn is_homogeneous(&self) -> bool {
        self.boundary0.is_zero() && self.boundary1.is_zero() && self.nonlocal.is_zero()
    }

    /// Problem with the same weight, zero forcing, and initial datum `v`.
    pub fn homogeneous_with_initial(&self, v: FunctionSpec) -> ProblemData {
        ProblemData {
            initial: v,
            weight: self.weight.clone(),
            boundary0: FunctionSpec::zero(Domain::Time),
            boundary1: FunctionSpec::zero(Domain::Time),
            nonlocal: FunctionSpec::zero(Domain::Time),
            period: None,
            compatibility_tol: self.compatibility_tol,
        }
    }

    /// `K_hat(-lambda) = int_0^1 K(w) exp(i*lambda*w) dw`.
    pub fn weight_hat_neg(&self, lambda: Complex64) -> Complex64 {
        kernel_transform(&self.weight, -lambda, 0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::Mode;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zero_problem() -> ProblemData {
        ProblemData {
            initial: FunctionSpec::zero(Domain::Space),
            weight: FunctionSpec::real_polynomial(Domain::Space, &[1.0]),
            boundary0: FunctionSpec::zero(Domain::Time),
            boundary1: FunctionSpec::zero(Domain::Time),
            nonlocal: FunctionSpec::zero(Domain::Time),
            period: None,
            compatibility_tol: 1e-9,
        }
    }

    #[test]
    fn zero_problem_validates() {
        zero_problem().validate().unwrap();
    }

    #[test]
    fn vanishing_weight_rejected() {
        let mut p = zero_problem();
        p.weight = FunctionSpec::real_polynomial(Domain::Space, &[0.0, 1.0]);
        assert!(matches!(
            p.validate(),
            Err(ProblemError::WeightVanishesAtZero(_))
        ));
    }

    #[test]
    fn incompatible_initial_rejected() {
        let mut p = zero_problem();
        p.initial = FunctionSpec::real_polynomial(Domain::Space, &[1.0]);
        assert!(matches!(p.validate(), Err(ProblemError::Incompatible { .. })));
    }

    #[test]
    fn manufactured_mode_is_compatible() {
        // u = e^{i(x+t)}: U = e^{ix}, h0 = e^{i} e^{it}, h1 = i e^{i} e^{it},
        // h2 = K_hat(-1) e^{it} for K == 1.
        let ei = c(1.0f64.cos(), 1.0f64.sin());
        let khat = (ei - c(1.0, 0.0)) / Complex64::i();
        let p = ProblemData {
            initial: FunctionSpec::modes(
                Domain::Space,
                vec![Mode {
                    freq: c(1.0, 0.0),
                    amp: c(1.0, 0.0),
                }],
            ),
            weight: FunctionSpec::real_polynomial(Domain::Space, &[1.0]),
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
            compatibility_tol: 1e-12,
        };
        p.validate().unwrap();
    }
}
