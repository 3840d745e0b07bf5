use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the free constant `c_s` in front of every kernel is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `c_s = 1`.
    #[default]
    Raw,
    /// `c_s = 1 - s`; recovers classical curvature of circles as `s -> 1`.
    LimitNormalized,
}

/// Which normal component the absolute kernel measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CodimMode {
    /// `|<x - y, n(y)>|` with the element normal.
    #[default]
    Hypersurface,
    /// `|Pi_perp(y)(x - y)|`, the projection onto the normal space at `y`.
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParameters {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub normalization: Normalization,
    pub codim_mode: CodimMode,
}

impl Default for EnergyParameters {
    fn default() -> Self {
        EnergyParameters {
            s: 0.5,
            p: 4.0,
            q: 6.0,
            normalization: Normalization::Raw,
            codim_mode: CodimMode::Hypersurface,
        }
    }
}

impl EnergyParameters {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        let params = EnergyParameters {
            s,
            p,
            ..Default::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_normalization(mut self, n: Normalization) -> Self {
        self.normalization = n;
        self
    }

    pub fn with_codim_mode(mut self, m: CodimMode) -> Self {
        self.codim_mode = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(invalid(alloc::format!("s = {} must lie in (0, 1)", self.s)));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(invalid(alloc::format!("p = {} must be positive", self.p)));
        }
        if !self.q.is_finite() {
            return Err(invalid("q must be finite"));
        }
        Ok(())
    }

    pub fn c_s(&self) -> f64 {
        match self.normalization {
            Normalization::Raw => 1.0,
            Normalization::LimitNormalized => 1.0 - self.s,
        }
    }

    /// `|c_s|^p`, the prefactor of the integrated energies.
    pub fn c_sp(&self) -> f64 {
        crate::math::powf(crate::math::abs(self.c_s()), self.p)
    }

    /// `p > d / s`: energies are not scale invariant and scale as `lambda^(d - s p)`.
    pub fn is_subcritical(&self, dim: usize) -> bool {
        self.p > dim as f64 / self.s
    }

    pub fn scaling_exponent(&self, dim: usize) -> f64 {
        dim as f64 - self.s * self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(EnergyParameters::new(1.5, 4.0).is_err());
        assert!(EnergyParameters::new(0.0, 4.0).is_err());
        assert!(EnergyParameters::new(0.5, -1.0).is_err());
        assert!(EnergyParameters::new(0.5, 4.0).is_ok());
    }

    #[test]
    fn subcritical_flag() {
        let p = EnergyParameters::new(0.5, 4.0).unwrap();
        assert!(p.is_subcritical(1));
        assert!(!p.is_subcritical(2));
        assert!(EnergyParameters::new(0.5, 4.5).unwrap().is_subcritical(2));
    }

    #[test]
    fn normalization_constant() {
        let p = EnergyParameters::new(0.3, 2.0)
            .unwrap()
            .with_normalization(Normalization::LimitNormalized);
        assert!((p.c_s() - 0.7).abs() < 1e-15);
        assert!((p.c_sp() - 0.49).abs() < 1e-15);
    }
}
