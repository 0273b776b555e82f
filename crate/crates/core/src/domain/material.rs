use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drag law relating the drag coefficient to permeability and solution fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DragLaw {
    /// alpha = mu0 / k
    Darcy,
    /// alpha = (mu0 / k) exp(beta_b p)
    Barus,
    /// alpha = (mu0 / k) (1 + beta_b p)
    LinearizedBarus,
    /// alpha = (mu0 / k) (1 + beta_f |v|)
    DarcyForchheimer,
}

impl DragLaw {
    pub fn name(self) -> &'static str {
        match self {
            DragLaw::Darcy => "darcy",
            DragLaw::Barus => "barus",
            DragLaw::LinearizedBarus => "linearized-barus",
            DragLaw::DarcyForchheimer => "darcy-forchheimer",
        }
    }
}

impl std::str::FromStr for DragLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "darcy" => Ok(DragLaw::Darcy),
            "barus" => Ok(DragLaw::Barus),
            "linearized-barus" | "linbarus" | "lb" => Ok(DragLaw::LinearizedBarus),
            "darcy-forchheimer" | "df" | "forchheimer" => Ok(DragLaw::DarcyForchheimer),
            other => Err(Error::Config(format!("unknown drag law '{other}'"))),
        }
    }
}

/// Fluid/drag description: law plus its coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialModel {
    pub law: DragLaw,
    pub mu0: f64,
    #[serde(default)]
    pub beta_b: f64,
    #[serde(default)]
    pub beta_f: f64,
}

impl MaterialModel {
    pub fn new(law: DragLaw, mu0: f64, beta_b: f64, beta_f: f64) -> Result<Self> {
        let m = Self {
            law,
            mu0,
            beta_b,
            beta_f,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn darcy(mu0: f64) -> Result<Self> {
        Self::new(DragLaw::Darcy, mu0, 0.0, 0.0)
    }

    pub fn barus(mu0: f64, beta_b: f64) -> Result<Self> {
        Self::new(DragLaw::Barus, mu0, beta_b, 0.0)
    }

    pub fn linearized_barus(mu0: f64, beta_b: f64) -> Result<Self> {
        Self::new(DragLaw::LinearizedBarus, mu0, beta_b, 0.0)
    }

    pub fn darcy_forchheimer(mu0: f64, beta_f: f64) -> Result<Self> {
        Self::new(DragLaw::DarcyForchheimer, mu0, 0.0, beta_f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            return Err(Error::Domain {
                name: "mu0",
                value: self.mu0,
                range: "(0, inf)",
            });
        }
        if !(self.beta_b.is_finite() && self.beta_b >= 0.0) {
            return Err(Error::Domain {
                name: "beta_b",
                value: self.beta_b,
                range: "[0, inf)",
            });
        }
        if !(self.beta_f.is_finite() && self.beta_f >= 0.0) {
            return Err(Error::Domain {
                name: "beta_f",
                value: self.beta_f,
                range: "[0, inf)",
            });
        }
        Ok(())
    }

    /// True when the drag coefficient depends on the solution fields.
    pub fn is_nonlinear(&self) -> bool {
        match self.law {
            DragLaw::Darcy => false,
            DragLaw::Barus | DragLaw::LinearizedBarus => self.beta_b != 0.0,
            DragLaw::DarcyForchheimer => self.beta_f != 0.0,
        }
    }

    pub fn depends_on_pressure(&self) -> bool {
        matches!(self.law, DragLaw::Barus | DragLaw::LinearizedBarus) && self.beta_b != 0.0
    }

    pub fn depends_on_speed(&self) -> bool {
        self.law == DragLaw::DarcyForchheimer && self.beta_f != 0.0
    }
}
