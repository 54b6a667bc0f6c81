//! Integration time grid.

use crate::error::{QdError, Result};

/// Maximum number of fixed steps a grid may request.
pub const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    /// Requested step, ns. Segments between pulse edges are subdivided with a
    /// step no larger than this.
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        let g = TimeGrid { t_start, t_end, dt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(QdError::InvalidInput(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > self.t_start) {
            return Err(QdError::InvalidInput(format!(
                "t_end ({}) must exceed t_start ({})",
                self.t_end, self.t_start
            )));
        }
        let steps = (self.t_end - self.t_start) / self.dt;
        if steps > MAX_STEPS {
            return Err(QdError::InvalidInput(format!(
                "grid requests {steps:.3e} steps, limit is {MAX_STEPS:.0e}"
            )));
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }
}
