use crate::error::{Error, Result};

/// Tunables of the two-phase method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Strip width `R`.
    pub strip_width: f64,
    /// Constant in the Shishkin transition point.
    pub c_star: f64,
    /// Parameter offset trimmed off each outflow arc end when computing theta.
    pub delta_trim: f64,
    /// Relative padding of the enclosing rectangle.
    pub padding: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            strip_width: 0.1,
            c_star: 2.0,
            delta_trim: 0.0,
            padding: 1e-3,
        }
    }
}

impl SolverConfig {
    /// Finite/positive checks only; the geometric bound on `R` needs the
    /// domain and is checked by [`crate::pipeline::Layout::new`].
    pub fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("R", self.strip_width)?;
        positive("C*", self.c_star)?;
        if !(self.delta_trim >= 0.0 && self.delta_trim.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta_trim must be non-negative, got {}",
                self.delta_trim
            )));
        }
        if !(self.padding >= 0.0 && self.padding.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "padding must be non-negative, got {}",
                self.padding
            )));
        }
        Ok(())
    }
}
