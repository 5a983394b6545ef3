//! Step-size and batch-size sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar sequence indexed by iteration.
///
/// Used for the step size `γ_k` and for the decaying parameters of the
/// regularized schemes (Tikhonov weight, smoothing radius, ...).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSchedule {
    Constant {
        value: f64,
    },
    /// `scale * (offset + k)^(-exponent)`, optionally capped from above.
    Polynomial {
        scale: f64,
        offset: f64,
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<f64>,
    },
}

impl StepSchedule {
    pub fn constant(value: f64) -> Self {
        StepSchedule::Constant { value }
    }

    pub fn polynomial(scale: f64, offset: f64, exponent: f64) -> Self {
        StepSchedule::Polynomial { scale, offset, exponent, cap: None }
    }

    /// `(1000 + k)^(-1)`, the step rule of the comparative experiment.
    pub fn harmonic_1000() -> Self {
        Self::polynomial(1.0, 1000.0, 1.0)
    }

    pub fn at(&self, k: u64) -> f64 {
        match *self {
            StepSchedule::Constant { value } => value,
            StepSchedule::Polynomial { scale, offset, exponent, cap } => {
                let v = scale * (offset + k as f64).powf(-exponent);
                match cap {
                    Some(c) => v.min(c),
                    None => v,
                }
            }
        }
    }

    /// Largest value the sequence ever takes.
    pub fn supremum(&self) -> f64 {
        match *self {
            StepSchedule::Constant { value } => value,
            StepSchedule::Polynomial { exponent, .. } if exponent < 0.0 => f64::INFINITY,
            StepSchedule::Polynomial { .. } => self.at(0),
        }
    }

    /// Well-formedness for a nonnegative sequence.
    pub fn validate_nonnegative(&self) -> Result<()> {
        match *self {
            StepSchedule::Constant { value } => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::InvalidSchedule(format!("constant value {value} must be finite and >= 0")));
                }
            }
            StepSchedule::Polynomial { scale, offset, exponent, cap } => {
                if !(scale.is_finite() && scale >= 0.0) {
                    return Err(Error::InvalidSchedule(format!("scale {scale} must be finite and >= 0")));
                }
                if !exponent.is_finite() {
                    return Err(Error::InvalidSchedule("exponent must be finite".into()));
                }
                // k = 0 must give a finite value
                if !(offset.is_finite() && (offset > 0.0 || (offset == 0.0 && exponent <= 0.0))) {
                    return Err(Error::InvalidSchedule(format!(
                        "offset {offset} must be positive for exponent {exponent}"
                    )));
                }
                if let Some(c) = cap {
                    if !(c.is_finite() && c > 0.0) {
                        return Err(Error::InvalidSchedule(format!("cap {c} must be finite and > 0")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Well-formedness for a step-size sequence: every term strictly positive.
    pub fn validate_step(&self) -> Result<()> {
        self.validate_nonnegative()?;
        let positive = match *self {
            StepSchedule::Constant { value } => value > 0.0,
            StepSchedule::Polynomial { scale, .. } => scale > 0.0,
        };
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidSchedule("step sizes must be strictly positive".into()))
        }
    }

    /// `Σγ_k = ∞` and `Σγ_k² < ∞`, decided from the exponent alone.
    pub fn is_vanishing_summable(&self) -> bool {
        match *self {
            StepSchedule::Constant { .. } => false,
            StepSchedule::Polynomial { scale, exponent, .. } => scale > 0.0 && exponent > 0.5 && exponent <= 1.0,
        }
    }
}

/// Number of joint samples averaged at iteration `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatchSchedule {
    Constant { size: u64 },
    /// `⌈scale * (k + offset)^(exponent + 1)⌉`.
    Polynomial { scale: f64, offset: f64, exponent: f64 },
}

impl BatchSchedule {
    pub fn constant(size: u64) -> Self {
        BatchSchedule::Constant { size }
    }

    pub fn polynomial(scale: f64, offset: f64, exponent: f64) -> Self {
        BatchSchedule::Polynomial { scale, offset, exponent }
    }

    pub fn at(&self, k: u64) -> u64 {
        match *self {
            BatchSchedule::Constant { size } => size.max(1),
            BatchSchedule::Polynomial { scale, offset, exponent } => {
                let raw = scale * (k as f64 + offset).powf(exponent + 1.0);
                // powf is not exact on integer powers; snap to the nearest
                // integer when within rounding noise so the ceiling is minimal.
                let nearest = raw.round();
                let v = if (raw - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) { nearest } else { raw.ceil() };
                if v >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    (v as u64).max(1)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BatchSchedule::Constant { size } if size == 0 => {
                Err(Error::InvalidSchedule("batch size must be >= 1".into()))
            }
            BatchSchedule::Constant { .. } => Ok(()),
            BatchSchedule::Polynomial { scale, offset, exponent } => {
                for (name, v) in [("scale", scale), ("offset", offset), ("exponent", exponent)] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::InvalidSchedule(format!("batch {name} {v} must be finite and > 0")));
                    }
                }
                Ok(())
            }
        }
    }

    /// `S^k ≥ c (k + k0)^(a+1)` for some positive `c, k0, a`, which makes `1/S^k` summable.
    pub fn is_summably_growing(&self) -> bool {
        matches!(*self, BatchSchedule::Polynomial { scale, offset, exponent }
            if scale > 0.0 && offset > 0.0 && exponent > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_step() {
        let s = StepSchedule::harmonic_1000();
        assert_eq!(s.at(0), 0.001);
        assert_eq!(s.at(1000), 0.0005);
    }

    #[test]
    fn constant_step() {
        assert_eq!(StepSchedule::constant(0.25).at(7), 0.25);
    }

    #[test]
    fn cap_limits_early_steps() {
        let s = StepSchedule::Polynomial { scale: 1.0, offset: 1.0, exponent: 1.0, cap: Some(0.1) };
        assert_eq!(s.at(0), 0.1);
        assert_eq!(s.at(19), 0.05);
        assert_eq!(s.supremum(), 0.1);
    }

    #[test]
    fn batch_values() {
        let b = BatchSchedule::polynomial(1.0, 1.0, 1.0);
        assert_eq!(b.at(0), 1);
        assert_eq!(b.at(9), 100);
        assert_eq!(BatchSchedule::constant(5).at(123), 5);
    }

    #[test]
    fn batch_ceiling_is_minimal() {
        let b = BatchSchedule::polynomial(0.5, 1.0, 1.0);
        // 0.5 * 3^2 = 4.5
        assert_eq!(b.at(2), 5);
        // 0.5 * 4^2 = 8 exactly
        assert_eq!(b.at(3), 8);
    }

    #[test]
    fn vanishing_exponent_range() {
        assert!(StepSchedule::polynomial(1.0, 1000.0, 1.0).is_vanishing_summable());
        assert!(StepSchedule::polynomial(1.0, 1.0, 0.51).is_vanishing_summable());
        assert!(!StepSchedule::polynomial(1.0, 1.0, 0.5).is_vanishing_summable());
        assert!(!StepSchedule::polynomial(1.0, 1.0, 1.2).is_vanishing_summable());
        assert!(!StepSchedule::constant(0.1).is_vanishing_summable());
    }

    #[test]
    fn zero_offset_needs_nonpositive_exponent() {
        assert!(StepSchedule::polynomial(1.0, 0.0, 1.0).validate_step().is_err());
        assert!(StepSchedule::constant(0.0).validate_step().is_err());
        assert!(StepSchedule::constant(0.0).validate_nonnegative().is_ok());
        assert!(BatchSchedule::constant(0).validate().is_err());
    }

    #[test]
    fn schedules_parse_from_json() {
        let s: StepSchedule =
            serde_json::from_str(r#"{"kind":"polynomial","scale":1,"offset":1000,"exponent":1}"#).unwrap();
        assert_eq!(s, StepSchedule::harmonic_1000());
        let b: BatchSchedule = serde_json::from_str(r#"{"kind":"constant","size":4}"#).unwrap();
        assert_eq!(b, BatchSchedule::constant(4));
        assert!(serde_json::from_str::<StepSchedule>(r#"{"kind":"constant","value":1,"x":2}"#).is_err());
    }
}
