//! Drag laws and the dissipation density.

use crate::domain::{DensityField, DragLaw, FlowState, MaterialModel, StructuredGrid};
use crate::error::{Error, Result};

/// Drag coefficient with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragEvaluation {
    pub alpha: f64,
    pub d_alpha_d_p: f64,
    pub d_alpha_d_speed: f64,
}

/// Permeability-free part of the drag law: alpha = mu0 * m / k.
/// Returns (m, dm/dp, dm/dspeed).
pub(crate) fn drag_factor(model: &MaterialModel, speed: f64, p: f64) -> Result<(f64, f64, f64)> {
    match model.law {
        DragLaw::Darcy => Ok((1.0, 0.0, 0.0)),
        DragLaw::Barus => {
            let e = (model.beta_b * p).exp();
            Ok((e, model.beta_b * e, 0.0))
        }
        DragLaw::LinearizedBarus => {
            let m = 1.0 + model.beta_b * p;
            if m <= 0.0 {
                return Err(Error::NonPositiveDrag {
                    alpha: model.mu0 * m,
                    pressure: p,
                });
            }
            Ok((m, model.beta_b, 0.0))
        }
        DragLaw::DarcyForchheimer => Ok((1.0 + model.beta_f * speed, 0.0, model.beta_f)),
    }
}

/// Evaluates alpha(k, |v|, p) for `model`. `p` is the relative pressure.
pub fn drag(model: &MaterialModel, k: f64, speed: f64, p: f64) -> Result<DragEvaluation> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidPermeability(k));
    }
    if !(speed >= 0.0) {
        return Err(Error::Domain {
            name: "speed",
            value: speed,
            range: "[0, inf)",
        });
    }
    let (m, dm_dp, dm_ds) = drag_factor(model, speed, p)?;
    let scale = model.mu0 / k;
    Ok(DragEvaluation {
        alpha: scale * m,
        d_alpha_d_p: scale * dm_dp,
        d_alpha_d_speed: scale * dm_ds,
    })
}

/// phi = alpha |v|^2.
pub fn dissipation_density(alpha: f64, v: &[f64]) -> f64 {
    alpha * v.iter().map(|x| x * x).sum::<f64>()
}

/// Total dissipation for a density field.
pub fn total_dissipation(
    grid: &StructuredGrid,
    density: &DensityField,
    model: &MaterialModel,
    flow: &FlowState,
) -> Result<f64> {
    if density.len() != grid.n_cells() {
        return Err(Error::Shape {
            what: "density",
            expected: grid.n_cells(),
            got: density.len(),
        });
    }
    total_dissipation_k(grid, &density.permeabilities(), model, flow)
}

/// Total dissipation for an explicit per-cell permeability field: the sum over
/// active cells of alpha |v_c|^2 vol_c with the cell-averaged velocity v_c.
pub fn total_dissipation_k(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    flow: &FlowState,
) -> Result<f64> {
    if k.len() != grid.n_cells() {
        return Err(Error::Shape {
            what: "permeability",
            expected: grid.n_cells(),
            got: k.len(),
        });
    }
    flow.check_shape(grid)?;
    let mut phi = 0.0;
    for c in grid.active_cells() {
        let v = flow.cell_velocity(grid, c);
        let speed = v[0].hypot(v[1]);
        let a = drag(model, k[c], speed, flow.pressure[c])?;
        phi += dissipation_density(a.alpha, &v) * grid.cell_volume(c);
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn darcy_has_no_partials() {
        let m = MaterialModel::darcy(1.0).unwrap();
        let d = drag(&m, 2.0, 3.0, 7.0).unwrap();
        assert_eq!(d.alpha, 0.5);
        assert_eq!(d.d_alpha_d_p, 0.0);
        assert_eq!(d.d_alpha_d_speed, 0.0);
    }

    #[test]
    fn forchheimer_hand_value() {
        let m = MaterialModel::darcy_forchheimer(1.0, 1.0).unwrap();
        let d = drag(&m, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(d.alpha, 2.0);
        assert_eq!(d.d_alpha_d_speed, 1.0);
    }

    #[test]
    fn nonpositive_permeability_is_rejected() {
        let m = MaterialModel::darcy(1.0).unwrap();
        assert!(matches!(
            drag(&m, 0.0, 1.0, 0.0),
            Err(Error::InvalidPermeability(_))
        ));
        assert!(matches!(
            drag(&m, -1.0, 1.0, 0.0),
            Err(Error::InvalidPermeability(_))
        ));
    }

    #[test]
    fn linearized_barus_rejects_negative_drag() {
        let m = MaterialModel::linearized_barus(1.0, 1.0).unwrap();
        assert!(matches!(
            drag(&m, 1.0, 0.0, -2.0),
            Err(Error::NonPositiveDrag { .. })
        ));
    }

    #[test]
    fn dissipation_density_examples() {
        assert_eq!(dissipation_density(0.5, &[2.0, 0.0]), 2.0);
        assert_eq!(dissipation_density(3.0, &[0.0, 0.0]), 0.0);
        assert_eq!(dissipation_density(1.0, &[3.0, 4.0]), 25.0);
    }
}
