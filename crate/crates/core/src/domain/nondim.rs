//! Reference scalings for the one-dimensional benchmark problems.
//!
//! Pressure-driven problems scale by (pressure drop, length, viscosity at the
//! outlet pressure); velocity-driven problems by (inlet velocity, length,
//! linearized viscosity at the outlet pressure).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which boundary datum drives the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Driving {
    PressureDriven,
    VelocityDriven,
}

impl std::str::FromStr for Driving {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pressure" | "pressure-driven" => Ok(Driving::PressureDriven),
            "velocity" | "velocity-driven" => Ok(Driving::VelocityDriven),
            other => Err(Error::Config(format!("unknown driving '{other}'"))),
        }
    }
}

/// Dimensional inputs of a 1D two-end problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub length: f64,
    pub mu0: f64,
    pub beta_b: f64,
    pub beta_f: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub v_left: f64,
    pub permeabilities: Vec<f64>,
}

/// Nondimensional counterpart, carrying the reference quantities needed to
/// map back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondimParams {
    pub driving: Driving,
    pub p_ref: f64,
    pub l_ref: f64,
    pub mu_ref: f64,
    pub v_ref: f64,
    /// Pressure subtracted before scaling (the outlet pressure).
    pub p_base: f64,
    pub beta_b: f64,
    pub beta_f: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub v_left: f64,
    pub permeabilities: Vec<f64>,
}

pub fn nondimensionalize(params: &PhysicalParams, driving: Driving) -> Result<NondimParams> {
    let l = params.length;
    if !(l > 0.0) {
        return Err(Error::InvalidReference(format!(
            "length must be positive, got {l}"
        )));
    }
    let p_base = params.p_right;
    let (p_ref, mu_ref, v_ref) = match driving {
        Driving::PressureDriven => {
            let p_ref = params.p_left - params.p_right;
            if p_ref == 0.0 || !p_ref.is_finite() {
                return Err(Error::InvalidReference(
                    "pressure drop p_left - p_right is zero".into(),
                ));
            }
            let mu_ref = params.mu0 * (params.beta_b * p_base).exp();
            (p_ref, mu_ref, l * p_ref / mu_ref)
        }
        Driving::VelocityDriven => {
            let v_ref = params.v_left;
            if v_ref == 0.0 || !v_ref.is_finite() {
                return Err(Error::InvalidReference("reference velocity is zero".into()));
            }
            let mu_ref = params.mu0 * (1.0 + params.beta_b * p_base);
            (mu_ref * v_ref / l, mu_ref, v_ref)
        }
    };
    let beta_b = match driving {
        Driving::PressureDriven => params.beta_b * p_ref,
        Driving::VelocityDriven => params.beta_b * params.mu0 * v_ref / l,
    };
    Ok(NondimParams {
        driving,
        p_ref,
        l_ref: l,
        mu_ref,
        v_ref,
        p_base,
        beta_b,
        beta_f: params.beta_f * v_ref,
        p_left: (params.p_left - p_base) / p_ref,
        p_right: 0.0,
        v_left: params.v_left / v_ref,
        permeabilities: params.permeabilities.iter().map(|k| k / (l * l)).collect(),
    })
}

pub fn redimensionalize(nd: &NondimParams) -> PhysicalParams {
    let l = nd.l_ref;
    let (mu0, beta_b) = match nd.driving {
        Driving::PressureDriven => {
            let beta_b = nd.beta_b / nd.p_ref;
            (nd.mu_ref / (beta_b * nd.p_base).exp(), beta_b)
        }
        Driving::VelocityDriven => {
            // beta_b * mu0 = nd.beta_b * l / v_ref and mu_ref = mu0 + beta_b * mu0 * p_base
            let beta_mu0 = nd.beta_b * l / nd.v_ref;
            let mu0 = nd.mu_ref - beta_mu0 * nd.p_base;
            (mu0, beta_mu0 / mu0)
        }
    };
    PhysicalParams {
        length: l,
        mu0,
        beta_b,
        beta_f: nd.beta_f / nd.v_ref,
        p_left: nd.p_base + nd.p_left * nd.p_ref,
        p_right: nd.p_base + nd.p_right * nd.p_ref,
        v_left: nd.v_left * nd.v_ref,
        permeabilities: nd.permeabilities.iter().map(|k| k * l * l).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PhysicalParams {
        PhysicalParams {
            length: 1.0,
            mu0: 1.0,
            beta_b: 0.0,
            beta_f: 0.0,
            p_left: 100.0,
            p_right: 1.0,
            v_left: 1.0,
            permeabilities: vec![10.0, 1.0],
        }
    }

    #[test]
    fn pressure_reference_is_the_drop() {
        let nd = nondimensionalize(&base(), Driving::PressureDriven).unwrap();
        assert_eq!(nd.p_ref, 99.0);
        assert_eq!(nd.beta_b, 0.0);
        assert_eq!(nd.p_left, 1.0);
    }

    #[test]
    fn barus_coefficient_scales_with_reference_pressure() {
        let mut p = base();
        p.beta_b = 0.01;
        let nd = nondimensionalize(&p, Driving::PressureDriven).unwrap();
        assert!((nd.beta_b - 0.99).abs() < 1e-15);
    }

    #[test]
    fn forchheimer_coefficient_scales_with_reference_velocity() {
        let mut p = base();
        p.beta_f = 0.5;
        let nd = nondimensionalize(&p, Driving::VelocityDriven).unwrap();
        assert!((nd.beta_f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_references_are_rejected() {
        let mut p = base();
        p.p_left = p.p_right;
        assert!(matches!(
            nondimensionalize(&p, Driving::PressureDriven),
            Err(Error::InvalidReference(_))
        ));
        let mut p = base();
        p.v_left = 0.0;
        assert!(matches!(
            nondimensionalize(&p, Driving::VelocityDriven),
            Err(Error::InvalidReference(_))
        ));
    }
}
