//! Built-in problem definitions.

use crate::analytic::{optimal_interface_2d, optimal_interface_3d};
use crate::domain::{
    BoundaryConditions, BoundarySegment, DesignProblem, Direction, Geometry, MaterialModel, Side,
    Source, StructuredGrid,
};
use crate::error::{Error, Result};

/// Names accepted by [`benchmark`].
pub const BENCHMARK_NAMES: &[&str] = &[
    "annulus-radial",
    "sphere-radial",
    "rect-pressure-q0",
    "rect-pressure-q10",
    "pipe-bend-square",
    "pipe-bend-rect",
    "annulus-cartesian",
    "channel-1d-pressure",
    "channel-1d-velocity",
];

/// A fully specified built-in problem.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: String,
    pub description: &'static str,
    pub grid: StructuredGrid,
    pub bcs: BoundaryConditions,
    pub source: Source,
    pub model: MaterialModel,
    pub gamma: f64,
    pub kl: f64,
    pub kh: f64,
    pub penal: f64,
    pub direction: Direction,
    /// Analytic optimal interface location, when one exists.
    pub oracle_interface: Option<f64>,
}

impl Benchmark {
    pub fn problem(&self) -> Result<DesignProblem> {
        let mut p = DesignProblem::new(
            self.grid.clone(),
            self.bcs.clone(),
            self.source.clone(),
            self.gamma,
            self.kl,
            self.kh,
        )?
        .with_direction(self.direction);
        p.penal = self.penal;
        p.validate()?;
        Ok(p)
    }
}

/// Default resolution: radial/1D cell count, or cells across the
/// short (vertical) side of planar domains.
pub fn default_resolution(name: &str) -> Option<usize> {
    Some(match name {
        "annulus-radial" | "sphere-radial" => 256,
        "rect-pressure-q0" | "rect-pressure-q10" | "pipe-bend-rect" => 30,
        "pipe-bend-square" => 40,
        "annulus-cartesian" => 64,
        "channel-1d-pressure" | "channel-1d-velocity" => 200,
        _ => return None,
    })
}

const THIRD: f64 = 1.0 / 3.0;

/// Splits `side` into wall / `tag` / wall with the tagged piece centred and
/// one third long.
fn centred_port(side: Side, tag: &str) -> Vec<BoundarySegment> {
    let wall = format!("wall-{}", side_name(side));
    vec![
        BoundarySegment::new(side, 0.0, THIRD, format!("{wall}-a")),
        BoundarySegment::new(side, THIRD, 2.0 * THIRD, tag),
        BoundarySegment::new(side, 2.0 * THIRD, 1.0, format!("{wall}-b")),
    ]
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
        Side::Bottom => "bottom",
        Side::Top => "top",
    }
}

/// Rectangle with an inlet on the left side and an outlet on `outlet_side`,
/// all other boundary impermeable.
fn ported_rectangle(
    width: f64,
    height: f64,
    ny: usize,
    outlet_side: Side,
) -> Result<(StructuredGrid, BoundaryConditions)> {
    let nx = ((width / height) * ny as f64).round() as usize;
    let mut segments = centred_port(Side::Left, "inlet");
    segments.extend(centred_port(outlet_side, "outlet"));
    for side in [Side::Right, Side::Bottom, Side::Top] {
        if side != outlet_side {
            segments.push(BoundarySegment::whole(
                side,
                format!("wall-{}", side_name(side)),
            ));
        }
    }
    let grid = StructuredGrid::with_segments(
        Geometry::Cartesian2D {
            x0: 0.0,
            x1: width,
            nx,
            y0: 0.0,
            y1: height,
            ny,
        },
        segments,
    )?;
    let mut bcs = BoundaryConditions::new()
        .pressure("inlet", 100.0)
        .pressure("outlet", 1.0);
    for tag in grid.tags() {
        if tag.starts_with("wall") {
            bcs = bcs.normal_velocity(tag, 0.0);
        }
    }
    Ok((grid, bcs))
}

/// Builds the named problem at `resolution` (or its default).
pub fn benchmark(name: &str, resolution: Option<usize>) -> Result<Benchmark> {
    let n = resolution
        .or_else(|| default_resolution(name))
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown benchmark '{name}'; known: {}",
                BENCHMARK_NAMES.join(", ")
            ))
        })?;
    if n == 0 {
        return Err(Error::Config("resolution must be positive".into()));
    }
    let darcy = MaterialModel::darcy(1.0)?;
    let radial_bcs = BoundaryConditions::new()
        .pressure("inner", 100.0)
        .pressure("outer", 1.0);
    let mut b = Benchmark {
        name: name.to_string(),
        description: "",
        grid: StructuredGrid::interval(0.0, 1.0, 1)?,
        bcs: BoundaryConditions::new(),
        source: Source::default(),
        model: darcy,
        gamma: 0.1,
        kl: 1.0,
        kh: 10.0,
        penal: 3.0,
        direction: Direction::Maximize,
        oracle_interface: None,
    };
    match name {
        "annulus-radial" => {
            b.description = "concentric cylinders r_i=0.1, r_o=1, p_i=100, p_o=1, gamma=0.3";
            b.grid = StructuredGrid::cylindrical(0.1, 1.0, n)?;
            b.bcs = radial_bcs;
            b.gamma = 0.3;
            b.penal = b.kh / b.kl;
            b.oracle_interface = Some(optimal_interface_2d(b.gamma, 0.1, 1.0, b.kl, b.kh)?.xi_hat);
        }
        "sphere-radial" => {
            b.description = "concentric spheres r_i=0.1, r_o=1, p_i=100, p_o=1, gamma=0.1";
            b.grid = StructuredGrid::spherical(0.1, 1.0, n)?;
            b.bcs = radial_bcs;
            b.gamma = 0.1;
            b.penal = b.kh / b.kl;
            b.oracle_interface = Some(optimal_interface_3d(b.gamma, 0.1, b.kl, b.kh)?.xi_hat);
        }
        "rect-pressure-q0" | "rect-pressure-q10" => {
            b.description = "2 x 1.5 rectangle, inlet p=100 on the left, outlet p=1 on the right";
            (b.grid, b.bcs) = ported_rectangle(2.0, 1.5, n, Side::Right)?;
            if name.ends_with("q10") {
                b.source = Source::Uniform(10.0);
            }
        }
        "pipe-bend-square" | "pipe-bend-rect" => {
            b.description = "pipe bend: inlet p=100 on the left, outlet p=1 on the bottom, Q=10";
            let (w, h) = if name.ends_with("square") {
                (1.0, 1.0)
            } else {
                (2.0, 1.5)
            };
            (b.grid, b.bcs) = ported_rectangle(w, h, n, Side::Bottom)?;
            b.source = Source::Uniform(10.0);
        }
        "annulus-cartesian" => {
            b.description = "annulus r_i=0.1, r_o=1 carved from a Cartesian square, gamma=0.3";
            let segments = [Side::Left, Side::Right, Side::Bottom, Side::Top]
                .into_iter()
                .map(|s| BoundarySegment::whole(s, "outer"))
                .collect();
            b.grid = StructuredGrid::with_segments(
                Geometry::Cartesian2D {
                    x0: -1.0,
                    x1: 1.0,
                    nx: n,
                    y0: -1.0,
                    y1: 1.0,
                    ny: n,
                },
                segments,
            )?
            .with_exclusion(|[x, y]| {
                let r = x.hypot(y);
                if r < 0.1 {
                    Some("inner".to_string())
                } else if r > 1.0 {
                    Some("outer".to_string())
                } else {
                    None
                }
            })?;
            b.bcs = radial_bcs;
            b.gamma = 0.3;
        }
        "channel-1d-pressure" => {
            b.description = "unit channel, p=1 on the left, p=0 on the right, gamma=0.3";
            b.grid = StructuredGrid::interval(0.0, 1.0, n)?;
            b.bcs = BoundaryConditions::new()
                .pressure("left", 1.0)
                .pressure("right", 0.0);
            b.gamma = 0.3;
        }
        "channel-1d-velocity" => {
            b.description = "unit channel, inflow v=1 on the left, p=0 on the right, gamma=0.3";
            b.grid = StructuredGrid::interval(0.0, 1.0, n)?;
            b.bcs = BoundaryConditions::new()
                .normal_velocity("left", -1.0)
                .pressure("right", 0.0);
            b.gamma = 0.3;
            b.direction = Direction::Minimize;
        }
        _ => unreachable!("default_resolution rejects unknown names"),
    }
    b.bcs.validate(&b.grid)?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds_and_validates() {
        for name in BENCHMARK_NAMES {
            let b = benchmark(name, None).unwrap();
            b.problem().unwrap();
        }
        assert!(matches!(benchmark("nope", None), Err(Error::Config(_))));
    }

    #[test]
    fn ports_are_centred_thirds() {
        let b = benchmark("rect-pressure-q0", Some(30)).unwrap();
        assert_eq!(b.grid.dims(), (40, 30));
        let inlet: usize = (0..b.grid.n_faces())
            .filter(|&f| b.grid.face_tag(f) == Some("inlet"))
            .count();
        assert_eq!(inlet, 10);
    }
}
