use serde::{Deserialize, Serialize};

use super::bc::BoundaryConditions;
use super::fields::Source;
use super::grid::StructuredGrid;
use crate::error::{check_range, Error, Result};
use crate::primal::SolverSettings;

/// Whether the design loop extremizes the dissipation upward or downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// Maximize for pressure-driven problems, Minimize as soon as a nonzero
    /// inflow velocity is prescribed.
    pub fn default_for(bcs: &BoundaryConditions) -> Self {
        if bcs.has_velocity_inflow() {
            Direction::Minimize
        } else {
            Direction::Maximize
        }
    }

    /// +1 for Minimize, -1 for Maximize: the sign turning the objective into a
    /// quantity to minimize.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Maximize => -1.0,
            Direction::Minimize => 1.0,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "maximize" => Ok(Direction::Maximize),
            "min" | "minimize" => Ok(Direction::Minimize),
            other => Err(Error::Config(format!("unknown direction '{other}'"))),
        }
    }
}

/// Knobs of the optimality-criteria loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    pub move_limit: f64,
    /// OC damping exponent.
    pub eta: f64,
    /// Filter radius in multiples of the smallest cell width (0 disables).
    pub filter_radius: f64,
    /// Stop once the largest density change drops below this.
    pub tolerance: f64,
    /// Maximum number of step halvings when an update worsens the objective.
    pub max_halvings: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            move_limit: 0.2,
            eta: 0.5,
            filter_radius: 1.5,
            tolerance: 1e-3,
            max_halvings: 12,
        }
    }
}

/// Everything needed to run one design optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub grid: StructuredGrid,
    pub bcs: BoundaryConditions,
    pub source: Source,
    pub direction: Direction,
    /// Bound on the volume fraction of high-permeability material.
    pub gamma: f64,
    pub kl: f64,
    pub kh: f64,
    pub penal: f64,
    pub optimizer: OptimizerSettings,
    pub solver: SolverSettings,
}

impl DesignProblem {
    /// Creates a problem with default SIMP/optimizer/solver settings and the
    /// direction inferred from the boundary conditions.
    pub fn new(
        grid: StructuredGrid,
        bcs: BoundaryConditions,
        source: Source,
        gamma: f64,
        kl: f64,
        kh: f64,
    ) -> Result<Self> {
        let direction = Direction::default_for(&bcs);
        let p = Self {
            grid,
            bcs,
            source,
            direction,
            gamma,
            kl,
            kh,
            penal: 3.0,
            optimizer: OptimizerSettings::default(),
            solver: SolverSettings::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_range("gamma", self.gamma, 0.0, 1.0, "[0, 1]")?;
        if !(self.kl > 0.0 && self.kh >= self.kl) {
            return Err(Error::InvalidPermeability(self.kl.min(self.kh)));
        }
        check_range("penal", self.penal, 1.0, f64::MAX, "[1, inf)")?;
        check_range(
            "move_limit",
            self.optimizer.move_limit,
            f64::MIN_POSITIVE,
            1.0,
            "(0, 1]",
        )?;
        check_range(
            "filter_radius",
            self.optimizer.filter_radius,
            0.0,
            f64::MAX,
            "[0, inf)",
        )?;
        self.source.check_shape(&self.grid)?;
        self.bcs.validate(&self.grid)?;
        self.solver.validate()
    }

    /// Volume budget for the high-permeability material.
    pub fn volume_bound(&self) -> f64 {
        self.gamma * self.grid.measure()
    }
}
