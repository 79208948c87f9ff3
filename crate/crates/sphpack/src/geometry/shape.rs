use nalgebra::{SVector, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::polygon::Polygon;
use crate::geometry::trimesh::TriMesh;
use crate::Vect;

/// Geometry of one body as a signed-distance function (negative inside).
///
/// `Polygon` is only constructible for `D = 2` and `TriMesh` for `D = 3`;
/// the constructors enforce this.
#[derive(Debug, Clone)]
pub enum Shape<const D: usize> {
    /// Circle (2D) or sphere (3D).
    Ball { center: Vect<D>, radius: f64 },
    /// Axis-aligned box.
    Cuboid { min: Vect<D>, max: Vect<D> },
    Polygon(Polygon),
    TriMesh(TriMesh),
    /// Boolean subtraction: `outer` with the `inners` carved out.
    Subtraction { outer: Box<Shape<D>>, inners: Vec<Shape<D>> },
}

impl<const D: usize> Shape<D> {
    pub fn ball(center: Vect<D>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::ShapeValidation(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::ShapeValidation("ball center is not finite".into()));
        }
        Ok(Shape::Ball { center, radius })
    }

    pub fn cuboid(min: Vect<D>, max: Vect<D>) -> Result<Self> {
        for k in 0..D {
            if !min[k].is_finite() || !max[k].is_finite() || min[k] >= max[k] {
                return Err(Error::ShapeValidation(format!(
                    "box must satisfy min < max per axis, got axis {k}: [{}, {}]",
                    min[k], max[k]
                )));
            }
        }
        Ok(Shape::Cuboid { min, max })
    }

    /// Boolean subtraction of `inners` from `outer`. Each inner shape must
    /// lie strictly inside the outer interior; violations are detected by
    /// probing points near each inner surface.
    pub fn subtraction(outer: Shape<D>, inners: Vec<Shape<D>>) -> Result<Self> {
        if inners.is_empty() {
            return Err(Error::ShapeValidation("subtraction needs at least one inner shape".into()));
        }
        let (omin, omax) = outer.bounding_box();
        for (n, inner) in inners.iter().enumerate() {
            let (imin, imax) = inner.bounding_box();
            for k in 0..D {
                if imin[k] <= omin[k] || imax[k] >= omax[k] {
                    return Err(Error::ShapeValidation(format!(
                        "inner shape {n} is not strictly inside the outer bounding box"
                    )));
                }
            }
            // Probe a grid over the inner bounding box; every point near the
            // inner surface must be strictly interior to the outer shape.
            const N: usize = 24;
            let span = imax - imin;
            let step = span / N as f64;
            let near = step.norm();
            let mut idx = [0usize; D];
            loop {
                let p = Vect::<D>::from_fn(|k, _| imin[k] + (idx[k] as f64 + 0.5) * step[k]);
                if inner.signed_distance(p).abs() <= near && outer.signed_distance(p) >= 0.0 {
                    return Err(Error::ShapeValidation(format!(
                        "inner shape {n} touches or crosses the outer surface near {:?}",
                        p.as_slice()
                    )));
                }
                let mut k = 0;
                loop {
                    idx[k] += 1;
                    if idx[k] < N {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                    if k == D {
                        break;
                    }
                }
                if k == D {
                    break;
                }
            }
        }
        Ok(Shape::Subtraction { outer: Box::new(outer), inners })
    }

    /// Signed distance to the surface, negative inside. Exact for primitives,
    /// polygons and meshes; for subtraction nodes the CSG rule
    /// `max(phi_outer, -min_k phi_inner_k)` is a lower bound on the true
    /// distance, exact away from re-entrant corners.
    pub fn signed_distance(&self, p: Vect<D>) -> f64 {
        match self {
            Shape::Ball { center, radius } => (p - center).norm() - radius,
            Shape::Cuboid { min, max } => {
                let center = (min + max) * 0.5;
                let half = (max - min) * 0.5;
                let q = (p - center).abs() - half;
                let outside = q.map(|v| v.max(0.0)).norm();
                let inside = q.max().min(0.0);
                outside + inside
            }
            Shape::Polygon(poly) => {
                debug_assert_eq!(D, 2);
                poly.signed_distance(Vector2::new(p[0], p[1]))
            }
            Shape::TriMesh(mesh) => {
                debug_assert_eq!(D, 3);
                mesh.signed_distance(Vector3::new(p[0], p[1], p[2]))
            }
            Shape::Subtraction { outer, inners } => {
                let phi_outer = outer.signed_distance(p);
                let phi_inner_min = inners
                    .iter()
                    .map(|s| s.signed_distance(p))
                    .fold(f64::INFINITY, f64::min);
                phi_outer.max(-phi_inner_min)
            }
        }
    }

    /// Axis-aligned bounding box of the surface.
    pub fn bounding_box(&self) -> (Vect<D>, Vect<D>) {
        match self {
            Shape::Ball { center, radius } => {
                (center - SVector::repeat(*radius), center + SVector::repeat(*radius))
            }
            Shape::Cuboid { min, max } => (*min, *max),
            Shape::Polygon(poly) => {
                let (min, max) = poly.bounding_box();
                (Vect::<D>::from_fn(|k, _| min[k]), Vect::<D>::from_fn(|k, _| max[k]))
            }
            Shape::TriMesh(mesh) => {
                let (min, max) = mesh.bounding_box();
                (Vect::<D>::from_fn(|k, _| min[k]), Vect::<D>::from_fn(|k, _| max[k]))
            }
            Shape::Subtraction { outer, .. } => outer.bounding_box(),
        }
    }
}

impl Shape<2> {
    pub fn circle(center: Vector2<f64>, radius: f64) -> Result<Self> {
        Self::ball(center, radius)
    }

    pub fn polygon(poly: Polygon) -> Self {
        Shape::Polygon(poly)
    }
}

impl Shape<3> {
    pub fn sphere(center: Vector3<f64>, radius: f64) -> Result<Self> {
        Self::ball(center, radius)
    }

    pub fn trimesh(mesh: TriMesh) -> Self {
        Shape::TriMesh(mesh)
    }
}
