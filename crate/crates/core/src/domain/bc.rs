use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::grid::{FaceOwner, StructuredGrid};
use crate::error::{Error, Result};

/// Condition applied on a tagged boundary segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// p = p0 on the segment.
    PrescribedPressure(f64),
    /// v . n = vn with n the outward unit normal (inflow is negative).
    PrescribedNormalVelocity(f64),
}

impl BoundaryCondition {
    pub fn is_pressure(&self) -> bool {
        matches!(self, BoundaryCondition::PrescribedPressure(_))
    }
}

/// Map from boundary tag to condition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    by_tag: BTreeMap<String, BoundaryCondition>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: impl Into<String>, bc: BoundaryCondition) -> Self {
        self.by_tag.insert(tag.into(), bc);
        self
    }

    pub fn pressure(self, tag: impl Into<String>, p0: f64) -> Self {
        self.with(tag, BoundaryCondition::PrescribedPressure(p0))
    }

    pub fn normal_velocity(self, tag: impl Into<String>, vn: f64) -> Self {
        self.with(tag, BoundaryCondition::PrescribedNormalVelocity(vn))
    }

    pub fn get(&self, tag: &str) -> Option<&BoundaryCondition> {
        self.by_tag.get(tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BoundaryCondition)> {
        self.by_tag.iter()
    }

    /// True when some segment carries a nonzero inflow velocity.
    pub fn has_velocity_inflow(&self) -> bool {
        self.by_tag
            .values()
            .any(|bc| matches!(bc, BoundaryCondition::PrescribedNormalVelocity(v) if *v < 0.0))
    }

    /// Checks that every boundary face of `grid` resolves to a condition and
    /// that at least one face carries a pressure condition.
    pub fn validate(&self, grid: &StructuredGrid) -> Result<()> {
        let mut any_pressure = false;
        for f in 0..grid.n_faces() {
            if !matches!(grid.face_owner(f), FaceOwner::Boundary { .. }) {
                continue;
            }
            let tag = grid.face_tag(f).ok_or_else(|| {
                Error::InvalidBoundary(format!("boundary face {f} has no segment tag"))
            })?;
            let bc = self.get(tag).ok_or_else(|| {
                Error::InvalidBoundary(format!("no condition given for boundary tag '{tag}'"))
            })?;
            any_pressure |= bc.is_pressure();
        }
        if !any_pressure {
            return Err(Error::IllPosed(
                "no prescribed-pressure boundary; pressure is only defined up to a constant".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_tag_is_rejected() {
        let g = StructuredGrid::interval(0.0, 1.0, 4).unwrap();
        let bcs = BoundaryConditions::new().pressure("left", 1.0);
        assert!(matches!(bcs.validate(&g), Err(Error::InvalidBoundary(_))));
    }

    #[test]
    fn pure_velocity_problem_is_ill_posed() {
        let g = StructuredGrid::interval(0.0, 1.0, 4).unwrap();
        let bcs = BoundaryConditions::new()
            .normal_velocity("left", -1.0)
            .normal_velocity("right", 1.0);
        assert!(matches!(bcs.validate(&g), Err(Error::IllPosed(_))));
    }

    #[test]
    fn inflow_detection() {
        let bcs = BoundaryConditions::new()
            .normal_velocity("left", -1.0)
            .pressure("right", 0.0);
        assert!(bcs.has_velocity_inflow());
        let walls = BoundaryConditions::new()
            .normal_velocity("wall", 0.0)
            .pressure("right", 0.0);
        assert!(!walls.has_velocity_inflow());
    }
}
