//! Machine-checkable convergence conditions on schedules and constants.
//!
//! The checks are advisory by default: `μ`, `ℓ` and `β` are often unknown, so
//! a failed or unverifiable check is reported and only becomes an error in
//! strict mode.

use std::fmt;

use crate::config::{AlgorithmConfig, Estimator};
use crate::error::{Error, Result};
use crate::game::Constants;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckId {
    /// `Σγ_k = ∞`, `Σγ_k² < ∞`.
    VanishingStep,
    /// `S^k ≥ c (k + k0)^(a+1)`.
    BatchGrowth,
    /// `γ_k ≤ 2μ/ℓ²`.
    StepBoundStrong,
    /// `γ_k ≤ 2β`.
    StepBoundCocoercive,
}

impl CheckId {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::VanishingStep => "vanishing-step",
            CheckId::BatchGrowth => "batch-growth",
            CheckId::StepBoundStrong => "step-bound-strong (gamma <= 2 mu / l^2)",
            CheckId::StepBoundCocoercive => "step-bound-cocoercive (gamma <= 2 beta)",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail(String),
    /// Constants needed for the check are not declared.
    Unknown(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: CheckId,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplianceReport {
    pub label: String,
    pub checks: Vec<Check>,
    /// Whether the configuration falls under one of the convergence results.
    pub covered: bool,
}

impl ComplianceReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| matches!(c.status, Status::Fail(_)))
    }

    /// Strict mode: error unless the configuration is covered.
    pub fn enforce(&self) -> Result<()> {
        if self.covered {
            return Ok(());
        }
        let mut reasons: Vec<String> = self
            .checks
            .iter()
            .filter_map(|c| match &c.status {
                Status::Pass => None,
                Status::Fail(d) | Status::Unknown(d) => Some(format!("{}: {d}", c.id.as_str())),
            })
            .collect();
        if reasons.is_empty() {
            reasons.push("no convergence condition applies".into());
        }
        Err(Error::Compliance(format!("{}: {}", self.label, reasons.join("; "))))
    }
}

impl fmt::Display for ComplianceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.label, if self.covered { "covered" } else { "NOT covered" })?;
        for c in &self.checks {
            match &c.status {
                Status::Pass => writeln!(f, "  pass     {}", c.id.as_str())?,
                Status::Fail(d) => writeln!(f, "  FAIL     {}: {d}", c.id.as_str())?,
                Status::Unknown(d) => writeln!(f, "  unknown  {}: {d}", c.id.as_str())?,
            }
        }
        Ok(())
    }
}

fn bound_check(id: CheckId, sup: f64, bound: Option<f64>, missing: &str) -> Check {
    let status = match bound {
        None => Status::Unknown(format!("{missing} not declared")),
        Some(b) if sup <= b => Status::Pass,
        Some(b) => Status::Fail(format!("max step {sup} exceeds bound {b}")),
    };
    Check { id, status }
}

/// One-sample runs need a vanishing step. Batched runs are covered either by
/// a vanishing step, or by a summably growing batch with a bounded step.
pub fn check(config: &AlgorithmConfig, constants: &Constants) -> ComplianceReport {
    let step = &config.step;
    let sup = step.supremum();
    let vanishing = Check {
        id: CheckId::VanishingStep,
        status: if step.is_vanishing_summable() {
            Status::Pass
        } else {
            Status::Fail("needs polynomial decay with exponent in (0.5, 1]".into())
        },
    };
    let missing = match (constants.strong_monotonicity, constants.lipschitz) {
        (None, None) => "mu and l",
        (None, _) => "mu",
        _ => "l",
    };
    let strong = bound_check(CheckId::StepBoundStrong, sup, constants.strong_step_bound(), missing);
    let coco = bound_check(CheckId::StepBoundCocoercive, sup, constants.cocoercive_step_bound(), "beta");
    let vanishing_ok = vanishing.status == Status::Pass;
    let bounded_ok = strong.status == Status::Pass || coco.status == Status::Pass;

    let mut checks = vec![vanishing];
    let covered = match &config.estimator {
        Estimator::Sa => vanishing_ok,
        Estimator::Vr { batch } => {
            let growth = Check {
                id: CheckId::BatchGrowth,
                status: if batch.is_summably_growing() {
                    Status::Pass
                } else {
                    Status::Fail("needs polynomial growth with positive scale, offset and exponent".into())
                },
            };
            let growth_ok = growth.status == Status::Pass;
            checks.push(growth);
            vanishing_ok || (growth_ok && bounded_ok)
        }
    };
    checks.push(strong);
    checks.push(coco);
    ComplianceReport { label: config.label().to_string(), checks, covered }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{BatchSchedule, StepSchedule};

    fn diag12() -> Constants {
        Constants { strong_monotonicity: Some(1.0), lipschitz: Some(2.0), cocoercivity: Some(0.5) }
    }

    #[test]
    fn one_sample_with_harmonic_step_is_covered() {
        let c = AlgorithmConfig::new("sfb", StepSchedule::harmonic_1000(), 10);
        let r = check(&c, &Constants::default());
        assert!(r.covered);
        assert!(r.enforce().is_ok());
    }

    #[test]
    fn oversized_constant_step_fails_strong_bound() {
        let c = AlgorithmConfig::new("sfb", StepSchedule::constant(0.6), 10)
            .with_estimator(Estimator::Vr { batch: BatchSchedule::polynomial(1.0, 1.0, 1.0) });
        let r = check(&c, &Constants { cocoercivity: None, ..diag12() });
        assert!(!r.covered);
        let err = r.enforce().unwrap_err().to_string();
        assert!(err.contains("step-bound-strong"), "{err}");
        assert!(err.contains("0.5"), "{err}");
    }

    #[test]
    fn batched_bounded_step_is_covered() {
        let c = AlgorithmConfig::new("sfb", StepSchedule::constant(0.25), 10)
            .with_estimator(Estimator::Vr { batch: BatchSchedule::polynomial(1.0, 1.0, 1.0) });
        assert!(check(&c, &diag12()).covered);
    }

    #[test]
    fn constant_batch_with_vanishing_step_is_covered() {
        let c = AlgorithmConfig::new("sfb", StepSchedule::harmonic_1000(), 10)
            .with_estimator(Estimator::Vr { batch: BatchSchedule::constant(8) });
        let r = check(&c, &Constants::default());
        assert!(r.covered);
        assert_eq!(r.failures().count(), 1);
    }
}
