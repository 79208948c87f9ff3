use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Closed simple polygon in the plane. Vertices are stored without the
/// duplicated terminal vertex; the closing edge is implicit.
#[derive(Debug, Clone)]
pub struct Polygon {
    vertices: Vec<Vector2<f64>>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Vector2<f64>>) -> Result<Self> {
        if let Some(first) = vertices.first().copied() {
            if vertices.len() > 1 && *vertices.last().unwrap() == first {
                vertices.pop();
            }
        }
        if vertices.len() < 3 {
            return Err(Error::ShapeValidation(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::ShapeValidation("polygon vertex is not finite".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::ShapeValidation(format!(
                    "polygon has a zero-length edge at vertex {i}"
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                // Edges sharing a vertex (consecutive, including the closing
                // pair) are allowed to touch there and nowhere else.
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
                let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(Error::ShapeValidation(format!(
                        "polygon is self-intersecting (edges {i} and {j})"
                    )));
                }
            }
        }
        let poly = Self { vertices };
        if poly.area() <= 0.0 {
            return Err(Error::ShapeValidation("polygon has zero area".into()));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    /// Enclosed area (shoelace, orientation-independent).
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            twice += a.x * b.y - b.x * a.y;
        }
        0.5 * twice.abs()
    }

    /// Even-odd ray-crossing containment test.
    pub fn contains(&self, p: Vector2<f64>) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Unsigned distance to the boundary.
    pub fn distance(&self, p: Vector2<f64>) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            best = best.min(point_segment_distance(p, a, b));
        }
        best
    }

    pub fn signed_distance(&self, p: Vector2<f64>) -> f64 {
        let d = self.distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    pub fn bounding_box(&self) -> (Vector2<f64>, Vector2<f64>) {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        (min, max)
    }
}

fn point_segment_distance(p: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn orient(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Vector2<f64>, b: Vector2<f64>, p: Vector2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Intersection test for closed segments, touching included.
fn segments_intersect(
    a1: Vector2<f64>,
    a2: Vector2<f64>,
    b1: Vector2<f64>,
    b2: Vector2<f64>,
) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b1, b2, a1))
        || (d2 == 0.0 && on_segment(b1, b2, a2))
        || (d3 == 0.0 && on_segment(a1, a2, b1))
        || (d4 == 0.0 && on_segment(a1, a2, b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn square_area_and_distance() {
        let sq = unit_square();
        assert_eq!(sq.area(), 1.0);
        assert_eq!(sq.signed_distance(Vector2::new(0.5, 0.5)), -0.5);
        assert_eq!(sq.signed_distance(Vector2::new(2.0, 0.5)), 1.0);
        assert!(sq.contains(Vector2::new(0.1, 0.9)));
        assert!(!sq.contains(Vector2::new(1.1, 0.5)));
    }

    #[test]
    fn duplicate_terminal_vertex_dropped() {
        let sq = Polygon::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(sq.vertices().len(), 4);
    }

    #[test]
    fn bow_tie_rejected() {
        let r = Polygon::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn too_few_vertices_rejected() {
        assert!(Polygon::new(vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn concave_polygon_sign() {
        // L-shape; the notch interior is outside.
        let l = Polygon::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(2.0, 0.0),
            Vector2::new(2.0, 1.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(1.0, 2.0),
            Vector2::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(l.signed_distance(Vector2::new(0.5, 0.5)) < 0.0);
        assert!(l.signed_distance(Vector2::new(1.5, 1.5)) > 0.0);
    }
}
