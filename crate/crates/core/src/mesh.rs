//! Uniform quadrilateral meshes of axis-aligned rectangles.
//!
//! Numbering:
//! - element `(i, j)` (column `i`, row `j`) has id `j * nx + i`;
//! - vertical faces come first, column-major: the face on `x = x0 + i hx`
//!   spanning row `j` has id `i * ny + j`, `i` in `0..=nx`;
//! - horizontal faces follow: the face on `y = y0 + j hy` spanning column `i`
//!   has id `(nx + 1) * ny + i * (ny + 1) + j`.
//!
//! Vertical faces store the normal `+x`, horizontal faces `+y`. Each element
//! lists its faces in the local order bottom, right, top, left together with
//! the sign that turns the stored normal into its outward normal. Faces are
//! parametrized by increasing coordinate, which both neighbours share.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, lo, hi)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Intersection, or `None` when it has zero area.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.x0.max(other.x0),
            self.x1.min(other.x1),
            self.y0.max(other.y0),
            self.y1.min(other.y1),
        );
        (r.x1 > r.x0 && r.y1 > r.y0).then_some(r)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]x[{},{}]", self.x0, self.x1, self.y0, self.y1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Constant `x`, normal `+x`.
    Vertical,
    /// Constant `y`, normal `+y`.
    Horizontal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: usize,
    pub orientation: Orientation,
    /// Start and end points, in increasing coordinate order.
    pub endpoints: [[f64; 2]; 2],
    pub normal: [f64; 2],
    pub boundary: bool,
    /// `[element the normal points out of, element it points into]`.
    pub elements: [Option<usize>; 2],
}

impl Face {
    pub fn length(&self) -> f64 {
        let [a, b] = self.endpoints;
        (b[0] - a[0]).abs() + (b[1] - a[1]).abs()
    }

    pub fn midpoint(&self) -> [f64; 2] {
        let [a, b] = self.endpoints;
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Point at reference coordinate `s` in [-1, 1].
    pub fn point(&self, s: f64) -> [f64; 2] {
        let [a, b] = self.endpoints;
        let t = 0.5 * (s + 1.0);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// The element on the other side, if any.
    pub fn other(&self, e: usize) -> Option<usize> {
        match self.elements {
            [Some(a), b] if a == e => b,
            [a, Some(b)] if b == e => a,
            _ => None,
        }
    }
}

/// One entry of an element's boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementFace {
    pub face: usize,
    /// `+1.0` or `-1.0`; outward normal = sign * stored normal.
    pub sign: f64,
    /// 0 bottom, 1 right, 2 top, 3 left.
    pub local: usize,
}

pub const BOTTOM: usize = 0;
pub const RIGHT: usize = 1;
pub const TOP: usize = 2;
pub const LEFT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadMesh {
    pub nx: usize,
    pub ny: usize,
    pub domain: Rect,
    pub hx: f64,
    pub hy: f64,
    pub faces: Vec<Face>,
    element_faces: Vec<[ElementFace; 4]>,
}

pub fn build_uniform_quad_mesh(nx: usize, ny: usize, domain: Rect) -> Result<QuadMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid(format!("element counts must be positive, got {nx}x{ny}")));
    }
    let (w, h) = (domain.width(), domain.height());
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::invalid(format!("degenerate domain {domain}")));
    }
    let hx = w / nx as f64;
    let hy = h / ny as f64;
    let xs = |i: usize| if i == nx { domain.x1 } else { domain.x0 + i as f64 * hx };
    let ys = |j: usize| if j == ny { domain.y1 } else { domain.y0 + j as f64 * hy };
    let n_vertical = (nx + 1) * ny;
    let v_id = |i: usize, j: usize| i * ny + j;
    let h_id = |i: usize, j: usize| n_vertical + i * (ny + 1) + j;

    let mut faces = Vec::with_capacity(n_vertical + nx * (ny + 1));
    for i in 0..=nx {
        for j in 0..ny {
            let left = (i > 0).then(|| j * nx + i - 1);
            let right = (i < nx).then(|| j * nx + i);
            faces.push(Face {
                id: v_id(i, j),
                orientation: Orientation::Vertical,
                endpoints: [[xs(i), ys(j)], [xs(i), ys(j + 1)]],
                normal: [1.0, 0.0],
                boundary: i == 0 || i == nx,
                elements: [left, right],
            });
        }
    }
    for i in 0..nx {
        for j in 0..=ny {
            let below = (j > 0).then(|| (j - 1) * nx + i);
            let above = (j < ny).then(|| j * nx + i);
            faces.push(Face {
                id: h_id(i, j),
                orientation: Orientation::Horizontal,
                endpoints: [[xs(i), ys(j)], [xs(i + 1), ys(j)]],
                normal: [0.0, 1.0],
                boundary: j == 0 || j == ny,
                elements: [below, above],
            });
        }
    }

    let mut element_faces = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            element_faces.push([
                ElementFace { face: h_id(i, j), sign: -1.0, local: BOTTOM },
                ElementFace { face: v_id(i + 1, j), sign: 1.0, local: RIGHT },
                ElementFace { face: h_id(i, j + 1), sign: 1.0, local: TOP },
                ElementFace { face: v_id(i, j), sign: -1.0, local: LEFT },
            ]);
        }
    }

    Ok(QuadMesh {
        nx,
        ny,
        domain,
        hx,
        hy,
        faces,
        element_faces,
    })
}

impl QuadMesh {
    pub fn n_elements(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Column and row of an element.
    pub fn element_ij(&self, e: usize) -> (usize, usize) {
        (e % self.nx, e / self.nx)
    }

    pub fn element_rect(&self, e: usize) -> Rect {
        let (i, j) = self.element_ij(e);
        let d = &self.domain;
        let x0 = d.x0 + i as f64 * self.hx;
        let y0 = d.y0 + j as f64 * self.hy;
        let x1 = if i + 1 == self.nx { d.x1 } else { x0 + self.hx };
        let y1 = if j + 1 == self.ny { d.y1 } else { y0 + self.hy };
        Rect::new(x0, x1, y0, y1)
    }

    pub fn element_center(&self, e: usize) -> [f64; 2] {
        let r = self.element_rect(e);
        [0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)]
    }

    /// Physical point of the reference coordinates `(xi, eta)` on element `e`.
    pub fn map_point(&self, e: usize, xi: f64, eta: f64) -> [f64; 2] {
        let r = self.element_rect(e);
        [
            r.x0 + 0.5 * (xi + 1.0) * (r.x1 - r.x0),
            r.y0 + 0.5 * (eta + 1.0) * (r.y1 - r.y0),
        ]
    }

    pub fn faces_of_element(&self, e: usize) -> Result<&[ElementFace; 4]> {
        self.element_faces.get(e).ok_or(Error::OutOfRange {
            what: "element",
            index: e,
            len: self.n_elements(),
        })
    }

    /// Unchecked variant for hot loops.
    pub(crate) fn element_faces(&self, e: usize) -> &[ElementFace; 4] {
        &self.element_faces[e]
    }

    pub fn face(&self, f: usize) -> Result<&Face> {
        self.faces.get(f).ok_or(Error::OutOfRange {
            what: "face",
            index: f,
            len: self.n_faces(),
        })
    }

    /// Element containing a point, with points on shared edges going to the
    /// element with the larger index.
    pub fn locate(&self, x: f64, y: f64) -> Option<usize> {
        if !self.domain.contains_point(x, y) {
            return None;
        }
        let i = (((x - self.domain.x0) / self.hx) as usize).min(self.nx - 1);
        let j = (((y - self.domain.y0) / self.hy) as usize).min(self.ny - 1);
        Some(j * self.nx + i)
    }
}

/// Free-function form of [`QuadMesh::faces_of_element`].
pub fn faces_of_element(mesh: &QuadMesh, e: usize) -> Result<&[ElementFace; 4]> {
    mesh.faces_of_element(e)
}
