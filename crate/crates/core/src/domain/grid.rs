use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate metric of a one-axis grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Planar,
    Cylindrical,
    Spherical,
}

impl Metric {
    /// Exponent m of the area factor r^m.
    pub fn exponent(self) -> i32 {
        match self {
            Metric::Planar => 0,
            Metric::Cylindrical => 1,
            Metric::Spherical => 2,
        }
    }

    /// Area of a constant-radius surface (unit cross-section for planar).
    pub fn area(self, r: f64) -> f64 {
        match self {
            Metric::Planar => 1.0,
            Metric::Cylindrical => 2.0 * PI * r,
            Metric::Spherical => 4.0 * PI * r * r,
        }
    }

    /// Volume of the shell between `a` and `b`.
    pub fn shell_volume(self, a: f64, b: f64) -> f64 {
        match self {
            Metric::Planar => b - a,
            Metric::Cylindrical => PI * (b * b - a * a),
            Metric::Spherical => 4.0 / 3.0 * PI * (b * b * b - a * a * a),
        }
    }

    /// Flow resistance of the shell between `a` and `b` for unit permeability,
    /// i.e. the integral of dr / area(r).
    pub fn resistance(self, a: f64, b: f64) -> f64 {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match self {
            Metric::Planar => b - a,
            Metric::Cylindrical => (b / a).ln() / (2.0 * PI),
            Metric::Spherical => (1.0 / a - 1.0 / b) / (4.0 * PI),
        }
    }
}

/// Shape of a structured grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    #[serde(rename = "interval-1d")]
    Interval1D { x0: f64, x1: f64, n: usize },
    RadialCylindrical {
        r_inner: f64,
        r_outer: f64,
        n: usize,
    },
    RadialSpherical {
        r_inner: f64,
        r_outer: f64,
        n: usize,
    },
    #[serde(rename = "cartesian-2d")]
    Cartesian2D {
        x0: f64,
        x1: f64,
        nx: usize,
        y0: f64,
        y1: f64,
        ny: usize,
    },
}

impl Geometry {
    pub fn metric(&self) -> Metric {
        match self {
            Geometry::RadialCylindrical { .. } => Metric::Cylindrical,
            Geometry::RadialSpherical { .. } => Metric::Spherical,
            _ => Metric::Planar,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(
            self,
            Geometry::RadialCylindrical { .. } | Geometry::RadialSpherical { .. }
        )
    }

    pub fn is_two_dimensional(&self) -> bool {
        matches!(self, Geometry::Cartesian2D { .. })
    }

    /// Bounds and cell count of the first axis.
    fn axis0(&self) -> (f64, f64, usize) {
        match *self {
            Geometry::Interval1D { x0, x1, n } => (x0, x1, n),
            Geometry::RadialCylindrical {
                r_inner,
                r_outer,
                n,
                ..
            }
            | Geometry::RadialSpherical {
                r_inner,
                r_outer,
                n,
                ..
            } => (r_inner, r_outer, n),
            Geometry::Cartesian2D { x0, x1, nx, .. } => (x0, x1, nx),
        }
    }

    fn axis1(&self) -> (f64, f64, usize) {
        match *self {
            Geometry::Cartesian2D { y0, y1, ny, .. } => (y0, y1, ny),
            _ => (0.0, 1.0, 1),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b, n) = self.axis0();
        if n == 0 {
            return Err(Error::InvalidGrid("cell count must be positive".into()));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidGrid(format!(
                "axis bounds must satisfy lower < upper, got [{a}, {b}]"
            )));
        }
        if self.is_radial() && a <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "radial grids need 0 < r_inner < r_outer, got r_inner = {a}"
            )));
        }
        if let Geometry::Cartesian2D { y0, y1, ny, .. } = *self {
            if ny == 0 {
                return Err(Error::InvalidGrid("cell count must be positive".into()));
            }
            if !(y0.is_finite() && y1.is_finite() && y1 > y0) {
                return Err(Error::InvalidGrid(format!(
                    "axis bounds must satisfy lower < upper, got [{y0}, {y1}]"
                )));
            }
        }
        Ok(())
    }
}

/// Side of the domain. One-axis grids use `Left` (x0 or inner radius) and
/// `Right` (x1 or outer radius) only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const INNER: Side = Side::Left;
    pub const OUTER: Side = Side::Right;

    pub fn axis(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    /// True when the outward normal points along +axis.
    pub fn is_upper(self) -> bool {
        matches!(self, Side::Right | Side::Top)
    }
}

/// A tagged piece of one side, parametrised by t in [0, 1] along the side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub side: Side,
    pub start: f64,
    pub end: f64,
    pub tag: String,
}

impl BoundarySegment {
    pub fn new(side: Side, start: f64, end: f64, tag: impl Into<String>) -> Self {
        Self {
            side,
            start,
            end,
            tag: tag.into(),
        }
    }

    pub fn whole(side: Side, tag: impl Into<String>) -> Self {
        Self::new(side, 0.0, 1.0, tag)
    }
}

/// Tag assigned to a face on the boundary of the active region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceOwner {
    /// Both neighbours are active cells.
    Interior { lo: usize, hi: usize },
    /// Only one neighbour is active; `upper` is true when the boundary lies on
    /// the +axis side of `cell`.
    Boundary { cell: usize, upper: bool },
    /// Neither neighbour is active.
    Inactive,
}

/// Rectilinear cell-centred mesh with tagged boundary segments and an optional
/// set of excluded cells (used to carve non-rectangular regions out of a
/// Cartesian box).
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredGrid {
    geometry: Geometry,
    segments: Vec<BoundarySegment>,
    /// Per-cell exclusion tag; empty when every cell is active.
    excluded: Vec<Option<String>>,
    hx: f64,
    hy: f64,
}

const SEGMENT_TOL: f64 = 1e-12;

impl StructuredGrid {
    /// Builds a grid whose sides carry one segment each, tagged by side name
    /// (`inner`/`outer` for radial grids, `left`/`right`/`bottom`/`top` otherwise).
    pub fn new(geometry: Geometry) -> Result<Self> {
        let sides: &[(Side, &str)] = match geometry {
            Geometry::Cartesian2D { .. } => &[
                (Side::Left, "left"),
                (Side::Right, "right"),
                (Side::Bottom, "bottom"),
                (Side::Top, "top"),
            ],
            Geometry::Interval1D { .. } => &[(Side::Left, "left"), (Side::Right, "right")],
            _ => &[(Side::Left, "inner"), (Side::Right, "outer")],
        };
        let segments = sides
            .iter()
            .map(|(s, t)| BoundarySegment::whole(*s, *t))
            .collect();
        Self::with_segments(geometry, segments)
    }

    pub fn with_segments(geometry: Geometry, segments: Vec<BoundarySegment>) -> Result<Self> {
        geometry.validate()?;
        let (a, b, n) = geometry.axis0();
        let (c, d, m) = geometry.axis1();
        let grid = Self {
            geometry,
            segments,
            excluded: Vec::new(),
            hx: (b - a) / n as f64,
            hy: (d - c) / m as f64,
        };
        grid.validate_segments()?;
        Ok(grid)
    }

    pub fn interval(x0: f64, x1: f64, n: usize) -> Result<Self> {
        Self::new(Geometry::Interval1D { x0, x1, n })
    }

    pub fn cylindrical(r_inner: f64, r_outer: f64, n: usize) -> Result<Self> {
        Self::new(Geometry::RadialCylindrical {
            r_inner,
            r_outer,
            n,
        })
    }

    pub fn spherical(r_inner: f64, r_outer: f64, n: usize) -> Result<Self> {
        Self::new(Geometry::RadialSpherical {
            r_inner,
            r_outer,
            n,
        })
    }

    pub fn cartesian(x: (f64, f64), nx: usize, y: (f64, f64), ny: usize) -> Result<Self> {
        Self::new(Geometry::Cartesian2D {
            x0: x.0,
            x1: x.1,
            nx,
            y0: y.0,
            y1: y.1,
            ny,
        })
    }

    /// Removes cells from the active region. `classify` receives a cell centre
    /// and returns the boundary tag carried by faces adjacent to that cell if it
    /// is to be excluded. Only Cartesian grids support exclusion.
    pub fn with_exclusion<F>(mut self, classify: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> Option<String>,
    {
        if !self.geometry.is_two_dimensional() {
            return Err(Error::InvalidGrid(
                "cell exclusion is only supported on Cartesian grids".into(),
            ));
        }
        let excluded: Vec<Option<String>> = (0..self.n_cells())
            .map(|c| classify(self.cell_center(c)))
            .collect();
        if excluded.iter().all(Option::is_some) {
            return Err(Error::InvalidGrid("every cell is excluded".into()));
        }
        self.excluded = excluded;
        Ok(self)
    }

    fn validate_segments(&self) -> Result<()> {
        let sides: &[Side] = if self.geometry.is_two_dimensional() {
            &[Side::Left, Side::Right, Side::Bottom, Side::Top]
        } else {
            &[Side::Left, Side::Right]
        };
        for seg in &self.segments {
            if !sides.contains(&seg.side) {
                return Err(Error::InvalidGrid(format!(
                    "segment '{}' lies on side {:?}, which this geometry does not have",
                    seg.tag, seg.side
                )));
            }
            if !(seg.start >= 0.0 && seg.end <= 1.0 && seg.start < seg.end) {
                return Err(Error::InvalidGrid(format!(
                    "segment '{}' has invalid range [{}, {}]",
                    seg.tag, seg.start, seg.end
                )));
            }
        }
        for &side in sides {
            let mut on_side: Vec<&BoundarySegment> =
                self.segments.iter().filter(|s| s.side == side).collect();
            on_side.sort_by(|a, b| a.start.total_cmp(&b.start));
            let mut cursor = 0.0;
            for seg in &on_side {
                if (seg.start - cursor).abs() > SEGMENT_TOL {
                    return Err(Error::InvalidGrid(format!(
                        "segments on side {side:?} leave a gap or overlap at t = {cursor}"
                    )));
                }
                cursor = seg.end;
            }
            if (cursor - 1.0).abs() > SEGMENT_TOL {
                return Err(Error::InvalidGrid(format!(
                    "segments on side {side:?} do not cover the whole side"
                )));
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn metric(&self) -> Metric {
        self.geometry.metric()
    }

    pub fn segments(&self) -> &[BoundarySegment] {
        &self.segments
    }

    /// Every distinct boundary tag, including exclusion tags.
    pub fn tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = self.segments.iter().map(|s| s.tag.clone()).collect();
        tags.extend(self.excluded.iter().flatten().cloned());
        tags.sort();
        tags.dedup();
        tags
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.geometry.axis0().2, self.geometry.axis1().2)
    }

    pub fn n_axes(&self) -> usize {
        if self.geometry.is_two_dimensional() {
            2
        } else {
            1
        }
    }

    pub fn n_cells(&self) -> usize {
        let (nx, ny) = self.dims();
        nx * ny
    }

    /// Uniform cell width along `axis` (radial width for radial grids).
    pub fn cell_width(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.hx
        } else {
            self.hy
        }
    }

    pub fn min_cell_width(&self) -> f64 {
        if self.n_axes() == 2 {
            self.hx.min(self.hy)
        } else {
            self.hx
        }
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.dims().0 + i
    }

    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        let nx = self.dims().0;
        (c % nx, c / nx)
    }

    pub fn is_active(&self, c: usize) -> bool {
        self.excluded.is_empty() || self.excluded[c].is_none()
    }

    pub fn has_exclusions(&self) -> bool {
        !self.excluded.is_empty()
    }

    pub fn active_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_cells()).filter(move |&c| self.is_active(c))
    }

    /// Lower coordinate of the cell edge `i` along axis 0.
    fn edge0(&self, i: usize) -> f64 {
        self.geometry.axis0().0 + i as f64 * self.hx
    }

    fn edge1(&self, j: usize) -> f64 {
        self.geometry.axis1().0 + j as f64 * self.hy
    }

    pub fn cell_center(&self, c: usize) -> [f64; 2] {
        let (i, j) = self.cell_ij(c);
        let x = self.edge0(i) + 0.5 * self.hx;
        if self.n_axes() == 2 {
            [x, self.edge1(j) + 0.5 * self.hy]
        } else {
            [x, 0.0]
        }
    }

    /// Cell edges along axis 0.
    pub fn cell_bounds0(&self, c: usize) -> (f64, f64) {
        let (i, _) = self.cell_ij(c);
        let a = self.edge0(i);
        let b = if i + 1 == self.dims().0 {
            self.geometry.axis0().1
        } else {
            self.edge0(i + 1)
        };
        (a, b)
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        let (a, b) = self.cell_bounds0(c);
        match self.metric() {
            Metric::Planar if self.n_axes() == 2 => self.hx * self.hy,
            m => m.shell_volume(a, b),
        }
    }

    /// Sum of active cell volumes.
    pub fn measure(&self) -> f64 {
        self.active_cells().map(|c| self.cell_volume(c)).sum()
    }

    /// Closed-form measure of the full domain.
    pub fn exact_measure(&self) -> f64 {
        match self.geometry {
            Geometry::Interval1D { x0, x1, .. } => x1 - x0,
            Geometry::RadialCylindrical {
                r_inner, r_outer, ..
            } => Metric::Cylindrical.shell_volume(r_inner, r_outer),
            Geometry::RadialSpherical {
                r_inner, r_outer, ..
            } => Metric::Spherical.shell_volume(r_inner, r_outer),
            Geometry::Cartesian2D { x0, x1, y0, y1, .. } => (x1 - x0) * (y1 - y0),
        }
    }

    /// Number of axis-0 faces.
    fn n_faces0(&self) -> usize {
        let (nx, ny) = self.dims();
        (nx + 1) * ny
    }

    pub fn n_faces(&self) -> usize {
        let (nx, ny) = self.dims();
        if self.n_axes() == 2 {
            self.n_faces0() + nx * (ny + 1)
        } else {
            nx + 1
        }
    }

    /// Face index of the axis-0 face at lattice position (i, j), 0 <= i <= nx.
    pub fn face0(&self, i: usize, j: usize) -> usize {
        j * (self.dims().0 + 1) + i
    }

    /// Face index of the axis-1 face at lattice position (i, j), 0 <= j <= ny.
    pub fn face1(&self, i: usize, j: usize) -> usize {
        self.n_faces0() + j * self.dims().0 + i
    }

    pub fn face_axis(&self, f: usize) -> usize {
        if f < self.n_faces0() {
            0
        } else {
            1
        }
    }

    /// Lattice position of a face: (i, j) as used by `face0`/`face1`.
    pub fn face_ij(&self, f: usize) -> (usize, usize) {
        let nx = self.dims().0;
        if f < self.n_faces0() {
            (f % (nx + 1), f / (nx + 1))
        } else {
            let g = f - self.n_faces0();
            (g % nx, g / nx)
        }
    }

    pub fn face_center(&self, f: usize) -> [f64; 2] {
        let (i, j) = self.face_ij(f);
        if self.face_axis(f) == 0 {
            let x = if i == self.dims().0 {
                self.geometry.axis0().1
            } else {
                self.edge0(i)
            };
            if self.n_axes() == 2 {
                [x, self.edge1(j) + 0.5 * self.hy]
            } else {
                [x, 0.0]
            }
        } else {
            [self.edge0(i) + 0.5 * self.hx, self.edge1(j)]
        }
    }

    pub fn face_area(&self, f: usize) -> f64 {
        if self.n_axes() == 2 {
            if self.face_axis(f) == 0 {
                self.hy
            } else {
                self.hx
            }
        } else {
            self.metric().area(self.face_center(f)[0])
        }
    }

    /// The two cells on either side of a face along its axis (raw lattice
    /// neighbours, ignoring exclusion).
    fn face_neighbours(&self, f: usize) -> (Option<usize>, Option<usize>) {
        let (nx, ny) = self.dims();
        let (i, j) = self.face_ij(f);
        if self.face_axis(f) == 0 {
            let lo = (i > 0).then(|| self.cell_index(i - 1, j));
            let hi = (i < nx).then(|| self.cell_index(i, j));
            (lo, hi)
        } else {
            let lo = (j > 0).then(|| self.cell_index(i, j - 1));
            let hi = (j < ny).then(|| self.cell_index(i, j));
            (lo, hi)
        }
    }

    pub fn face_owner(&self, f: usize) -> FaceOwner {
        let (lo, hi) = self.face_neighbours(f);
        let lo = lo.filter(|&c| self.is_active(c));
        let hi = hi.filter(|&c| self.is_active(c));
        match (lo, hi) {
            (Some(lo), Some(hi)) => FaceOwner::Interior { lo, hi },
            (Some(cell), None) => FaceOwner::Boundary { cell, upper: true },
            (None, Some(cell)) => FaceOwner::Boundary { cell, upper: false },
            (None, None) => FaceOwner::Inactive,
        }
    }

    /// Boundary tag of a face on the edge of the active region.
    pub fn face_tag(&self, f: usize) -> Option<&str> {
        let FaceOwner::Boundary { upper, .. } = self.face_owner(f) else {
            return None;
        };
        let (lo, hi) = self.face_neighbours(f);
        let outside = if upper { hi } else { lo };
        if let Some(c) = outside {
            return self.excluded.get(c).and_then(|t| t.as_deref());
        }
        let axis = self.face_axis(f);
        let side = match (axis, upper) {
            (0, false) => Side::Left,
            (0, true) => Side::Right,
            (_, false) => Side::Bottom,
            (_, true) => Side::Top,
        };
        let center = self.face_center(f);
        let t = if self.n_axes() == 1 {
            0.5
        } else if axis == 0 {
            let (y0, y1, _) = self.geometry.axis1();
            (center[1] - y0) / (y1 - y0)
        } else {
            let (x0, x1, _) = self.geometry.axis0();
            (center[0] - x0) / (x1 - x0)
        };
        self.segments
            .iter()
            .filter(|s| s.side == side)
            .find(|s| t >= s.start && (t < s.end || (s.end >= 1.0 && t <= 1.0)))
            .map(|s| s.tag.as_str())
    }

    /// Faces bounding cell `c` along `axis`: (lower face, upper face).
    pub fn cell_faces(&self, c: usize, axis: usize) -> (usize, usize) {
        let (i, j) = self.cell_ij(c);
        if axis == 0 {
            (self.face0(i, j), self.face0(i + 1, j))
        } else {
            (self.face1(i, j), self.face1(i, j + 1))
        }
    }

    /// Distance-like resistance (for unit permeability) between the centre of
    /// cell `c` and face `f`, exact for the grid metric.
    pub fn half_resistance(&self, c: usize, f: usize) -> f64 {
        let axis = self.face_axis(f);
        let rc = self.cell_center(c)[axis];
        let rf = self.face_center(f)[axis];
        if self.n_axes() == 2 {
            (rf - rc).abs() / self.face_area(f)
        } else {
            self.metric().resistance(rc, rf)
        }
    }
}
