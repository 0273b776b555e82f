use serde::{Deserialize, Serialize};

use super::grid::StructuredGrid;
use crate::error::{Error, Result};
use crate::topopt::interpolate_permeability;

/// Relaxed two-material design field with its SIMP interpolation data.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    rho: Vec<f64>,
    kl: f64,
    kh: f64,
    penal: f64,
}

impl DensityField {
    pub fn new(rho: Vec<f64>, kl: f64, kh: f64, penal: f64) -> Result<Self> {
        if let Some(&r) = rho
            .iter()
            .find(|r| !(r.is_finite() && (0.0..=1.0).contains(*r)))
        {
            return Err(Error::Domain {
                name: "rho",
                value: r,
                range: "[0, 1]",
            });
        }
        if !(kl > 0.0 && kh >= kl && kh.is_finite()) {
            return Err(Error::InvalidPermeability(if kl > 0.0 { kh } else { kl }));
        }
        if !(penal >= 1.0 && penal.is_finite()) {
            return Err(Error::Domain {
                name: "penal",
                value: penal,
                range: "[1, inf)",
            });
        }
        Ok(Self { rho, kl, kh, penal })
    }

    pub fn uniform(n: usize, value: f64, kl: f64, kh: f64, penal: f64) -> Result<Self> {
        Self::new(vec![value; n], kl, kh, penal)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn kl(&self) -> f64 {
        self.kl
    }

    pub fn kh(&self) -> f64 {
        self.kh
    }

    pub fn penal(&self) -> f64 {
        self.penal
    }

    /// Rebuilds the field with a new density vector and the same materials.
    pub fn with_rho(&self, rho: Vec<f64>) -> Result<Self> {
        Self::new(rho, self.kl, self.kh, self.penal)
    }

    pub fn permeability(&self, c: usize) -> f64 {
        interpolate_permeability(self.rho[c], self.kl, self.kh, self.penal)
    }

    pub fn permeabilities(&self) -> Vec<f64> {
        (0..self.rho.len()).map(|c| self.permeability(c)).collect()
    }

    /// Volume occupied by the high-permeability material over active cells.
    pub fn volume(&self, grid: &StructuredGrid) -> f64 {
        grid.active_cells()
            .map(|c| self.rho[c] * grid.cell_volume(c))
            .sum()
    }
}

/// Result of one primal solve: cell pressures and face normal velocities
/// (component along the face's axis direction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub pressure: Vec<f64>,
    pub face_velocity: Vec<f64>,
    pub picard_iterations: usize,
    pub residual_norm: f64,
}

impl FlowState {
    pub fn zeros(grid: &StructuredGrid) -> Self {
        Self {
            pressure: vec![0.0; grid.n_cells()],
            face_velocity: vec![0.0; grid.n_faces()],
            picard_iterations: 0,
            residual_norm: 0.0,
        }
    }

    pub fn check_shape(&self, grid: &StructuredGrid) -> Result<()> {
        if self.pressure.len() != grid.n_cells() {
            return Err(Error::Shape {
                what: "pressure",
                expected: grid.n_cells(),
                got: self.pressure.len(),
            });
        }
        if self.face_velocity.len() != grid.n_faces() {
            return Err(Error::Shape {
                what: "face velocity",
                expected: grid.n_faces(),
                got: self.face_velocity.len(),
            });
        }
        Ok(())
    }

    /// Volumetric flux through face `f` along its axis direction.
    pub fn face_flux(&self, grid: &StructuredGrid, f: usize) -> f64 {
        self.face_velocity[f] * grid.face_area(f)
    }

    /// Cell-averaged velocity vector: mean of the two opposing face
    /// velocities along each axis.
    pub fn cell_velocity(&self, grid: &StructuredGrid, c: usize) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (axis, slot) in v.iter_mut().enumerate().take(grid.n_axes()) {
            let (lo, hi) = grid.cell_faces(c, axis);
            *slot = 0.5 * (self.face_velocity[lo] + self.face_velocity[hi]);
        }
        v
    }

    pub fn cell_speed(&self, grid: &StructuredGrid, c: usize) -> f64 {
        let v = self.cell_velocity(grid, c);
        v[0].hypot(v[1])
    }

    pub fn max_speed(&self, grid: &StructuredGrid) -> f64 {
        grid.active_cells()
            .map(|c| self.cell_speed(grid, c))
            .fold(0.0, f64::max)
    }

    /// Net volumetric outflow of cell `c`.
    pub fn cell_outflow(&self, grid: &StructuredGrid, c: usize) -> f64 {
        (0..grid.n_axes())
            .map(|axis| {
                let (lo, hi) = grid.cell_faces(c, axis);
                self.face_flux(grid, hi) - self.face_flux(grid, lo)
            })
            .sum()
    }
}

/// Volumetric source strength (T^-1), positive for a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Uniform(f64),
    PerCell(Vec<f64>),
}

impl Default for Source {
    fn default() -> Self {
        Source::Uniform(0.0)
    }
}

impl Source {
    pub fn value(&self, c: usize) -> f64 {
        match self {
            Source::Uniform(q) => *q,
            Source::PerCell(q) => q[c],
        }
    }

    pub fn total(&self, grid: &StructuredGrid) -> f64 {
        grid.active_cells()
            .map(|c| self.value(c) * grid.cell_volume(c))
            .sum()
    }

    pub fn check_shape(&self, grid: &StructuredGrid) -> Result<()> {
        match self {
            Source::PerCell(q) if q.len() != grid.n_cells() => Err(Error::Shape {
                what: "source",
                expected: grid.n_cells(),
                got: q.len(),
            }),
            _ => Ok(()),
        }
    }
}
