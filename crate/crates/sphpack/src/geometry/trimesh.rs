use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Watertight, consistently oriented triangle mesh with signed-distance
/// queries. The sign comes from the angle-weighted pseudonormal of the
/// closest feature (Baerentzen-Aanaes), with a ray-parity fallback when the
/// pseudonormal test is degenerate.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[u32; 3]>,
    face_normals: Vec<Vector3<f64>>,
    vertex_normals: Vec<Vector3<f64>>,
    edge_normals: HashMap<(u32, u32), Vector3<f64>>,
    bvh: Bvh,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vector3<f64>>, mut triangles: Vec<[u32; 3]>) -> Result<Self> {
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite() || !v.z.is_finite()) {
            return Err(Error::ShapeValidation("mesh vertex is not finite".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i as usize >= vertices.len() {
                    return Err(Error::ShapeValidation(format!(
                        "triangle {t} references vertex {i} out of range"
                    )));
                }
            }
            let [a, b, c] = *tri;
            if a == b || b == c || a == c {
                return Err(Error::ShapeValidation(format!("triangle {t} is degenerate")));
            }
            let cross = (vertices[b as usize] - vertices[a as usize])
                .cross(&(vertices[c as usize] - vertices[a as usize]));
            if cross.norm() == 0.0 {
                return Err(Error::ShapeValidation(format!("triangle {t} has zero area")));
            }
        }
        if triangles.is_empty() {
            return Err(Error::ShapeValidation("mesh has no triangles".into()));
        }

        check_watertight(&triangles)?;

        // Canonicalize to outward orientation so pseudonormals point out.
        let signed = signed_volume(&vertices, &triangles);
        if signed == 0.0 {
            return Err(Error::ShapeValidation("mesh encloses no volume".into()));
        }
        if signed < 0.0 {
            for tri in &mut triangles {
                tri.swap(1, 2);
            }
        }

        let face_normals: Vec<Vector3<f64>> = triangles
            .iter()
            .map(|&[a, b, c]| {
                (vertices[b as usize] - vertices[a as usize])
                    .cross(&(vertices[c as usize] - vertices[a as usize]))
                    .normalize()
            })
            .collect();

        let mut vertex_normals = vec![Vector3::zeros(); vertices.len()];
        let mut edge_normals: HashMap<(u32, u32), Vector3<f64>> = HashMap::new();
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let n = face_normals[t];
            let (pa, pb, pc) =
                (vertices[a as usize], vertices[b as usize], vertices[c as usize]);
            vertex_normals[a as usize] += n * angle_at(pa, pb, pc);
            vertex_normals[b as usize] += n * angle_at(pb, pc, pa);
            vertex_normals[c as usize] += n * angle_at(pc, pa, pb);
            for (i, j) in [(a, b), (b, c), (c, a)] {
                let key = (i.min(j), i.max(j));
                *edge_normals.entry(key).or_insert_with(Vector3::zeros) += n;
            }
        }

        let bvh = Bvh::build(&vertices, &triangles);
        Ok(Self { vertices, triangles, face_normals, vertex_normals, edge_normals, bvh })
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Enclosed volume by the divergence theorem (positive after the
    /// orientation canonicalization in `new`).
    pub fn volume(&self) -> f64 {
        signed_volume(&self.vertices, &self.triangles)
    }

    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices {
            min = min.inf(v);
            max = max.sup(v);
        }
        (min, max)
    }

    pub fn signed_distance(&self, p: Vector3<f64>) -> f64 {
        let hit = self.bvh.nearest(p, &self.vertices, &self.triangles);
        let dist = (p - hit.point).norm();
        if dist == 0.0 {
            return 0.0;
        }
        let normal = self.feature_normal(hit.triangle, hit.feature);
        let dot = (p - hit.point).dot(&normal);
        if dot.abs() > 1e-9 * dist {
            return if dot > 0.0 { dist } else { -dist };
        }
        if self.contains_by_parity(p) {
            -dist
        } else {
            dist
        }
    }

    fn feature_normal(&self, tri: usize, feature: Feature) -> Vector3<f64> {
        let [a, b, c] = self.triangles[tri];
        match feature {
            Feature::Face => self.face_normals[tri],
            Feature::Vertex(k) => self.vertex_normals[[a, b, c][k] as usize],
            Feature::Edge(k) => {
                let (i, j) = [(a, b), (b, c), (c, a)][k];
                self.edge_normals[&(i.min(j), i.max(j))]
            }
        }
    }

    fn contains_by_parity(&self, p: Vector3<f64>) -> bool {
        // Skewed direction to avoid grazing edges of axis-aligned meshes.
        let dir = Vector3::new(0.577_350_1, 0.211_324_9, 0.788_675_2).normalize();
        let crossings = self.bvh.ray_crossings(p, dir, &self.vertices, &self.triangles);
        crossings % 2 == 1
    }
}

fn angle_at(apex: Vector3<f64>, p: Vector3<f64>, q: Vector3<f64>) -> f64 {
    let u = (p - apex).normalize();
    let v = (q - apex).normalize();
    u.dot(&v).clamp(-1.0, 1.0).acos()
}

fn signed_volume(vertices: &[Vector3<f64>], triangles: &[[u32; 3]]) -> f64 {
    let mut six_v = 0.0;
    for &[a, b, c] in triangles {
        let (a, b, c) = (vertices[a as usize], vertices[b as usize], vertices[c as usize]);
        six_v += a.dot(&b.cross(&c));
    }
    six_v / 6.0
}

fn check_watertight(triangles: &[[u32; 3]]) -> Result<()> {
    let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
    for &[a, b, c] in triangles {
        for (i, j) in [(a, b), (b, c), (c, a)] {
            *directed.entry((i, j)).or_insert(0) += 1;
        }
    }
    let mut boundary: Vec<(u32, u32)> = Vec::new();
    for (&(i, j), &n) in &directed {
        if n > 1 {
            return Err(Error::ShapeValidation(format!(
                "mesh is non-manifold: directed edge ({i}, {j}) appears {n} times"
            )));
        }
        if !directed.contains_key(&(j, i)) {
            boundary.push((i, j));
        }
    }
    if !boundary.is_empty() {
        boundary.sort_unstable();
        boundary.truncate(10);
        let list: Vec<String> = boundary.iter().map(|(i, j)| format!("({i}, {j})")).collect();
        return Err(Error::ShapeValidation(format!(
            "mesh is not watertight; boundary edges: {}",
            list.join(", ")
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Feature {
    Vertex(usize),
    Edge(usize),
    Face,
}

struct NearestHit {
    triangle: usize,
    point: Vector3<f64>,
    feature: Feature,
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision
/// Detection 5.1.5), with the Voronoi feature it falls on.
fn closest_point_on_triangle(
    p: Vector3<f64>,
    a: Vector3<f64>,
    b: Vector3<f64>,
    c: Vector3<f64>,
) -> (Vector3<f64>, Feature) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, Feature::Vertex(0));
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, Feature::Vertex(1));
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (a + ab * t, Feature::Edge(0));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, Feature::Vertex(2));
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (a + ac * t, Feature::Edge(2));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * t, Feature::Edge(1));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, Feature::Face)
}

#[derive(Debug, Clone)]
struct BvhNode {
    bb_min: Vector3<f64>,
    bb_max: Vector3<f64>,
    // Leaf when count > 0; then `start..start+count` indexes `order`.
    left: u32,
    right: u32,
    start: u32,
    count: u32,
}

#[derive(Debug, Clone)]
struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
}

const BVH_LEAF_SIZE: usize = 4;

impl Bvh {
    fn build(vertices: &[Vector3<f64>], triangles: &[[u32; 3]]) -> Self {
        let centroids: Vec<Vector3<f64>> = triangles
            .iter()
            .map(|&[a, b, c]| {
                (vertices[a as usize] + vertices[b as usize] + vertices[c as usize]) / 3.0
            })
            .collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::new();
        let n = order.len();
        build_node(vertices, triangles, &centroids, &mut order, 0, n, &mut nodes);
        Self { nodes, order }
    }

    fn nearest(
        &self,
        p: Vector3<f64>,
        vertices: &[Vector3<f64>],
        triangles: &[[u32; 3]],
    ) -> NearestHit {
        let mut best = NearestHit { triangle: 0, point: vertices[0], feature: Feature::Vertex(0) };
        let mut best_d2 = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if aabb_distance_squared(p, node.bb_min, node.bb_max) >= best_d2 {
                continue;
            }
            if node.count > 0 {
                for k in node.start..node.start + node.count {
                    let t = self.order[k as usize] as usize;
                    let [a, b, c] = triangles[t];
                    let (cp, feature) = closest_point_on_triangle(
                        p,
                        vertices[a as usize],
                        vertices[b as usize],
                        vertices[c as usize],
                    );
                    let d2 = (p - cp).norm_squared();
                    if d2 < best_d2 {
                        best_d2 = d2;
                        best = NearestHit { triangle: t, point: cp, feature };
                    }
                }
            } else {
                // Visit the closer child first for tighter pruning.
                let l = node.left as usize;
                let r = node.right as usize;
                let dl = aabb_distance_squared(p, self.nodes[l].bb_min, self.nodes[l].bb_max);
                let dr = aabb_distance_squared(p, self.nodes[r].bb_min, self.nodes[r].bb_max);
                if dl < dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }

    fn ray_crossings(
        &self,
        origin: Vector3<f64>,
        dir: Vector3<f64>,
        vertices: &[Vector3<f64>],
        triangles: &[[u32; 3]],
    ) -> usize {
        let mut count = 0;
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !ray_hits_aabb(origin, dir, node.bb_min, node.bb_max) {
                continue;
            }
            if node.count > 0 {
                for k in node.start..node.start + node.count {
                    let t = self.order[k as usize] as usize;
                    let [a, b, c] = triangles[t];
                    if ray_hits_triangle(
                        origin,
                        dir,
                        vertices[a as usize],
                        vertices[b as usize],
                        vertices[c as usize],
                    ) {
                        count += 1;
                    }
                }
            } else {
                stack.push(node.left as usize);
                stack.push(node.right as usize);
            }
        }
        count
    }
}

fn build_node(
    vertices: &[Vector3<f64>],
    triangles: &[[u32; 3]],
    centroids: &[Vector3<f64>],
    order: &mut [u32],
    start: usize,
    count: usize,
    nodes: &mut Vec<BvhNode>,
) -> u32 {
    let mut bb_min = Vector3::repeat(f64::INFINITY);
    let mut bb_max = Vector3::repeat(f64::NEG_INFINITY);
    for &t in &order[start..start + count] {
        for &v in &triangles[t as usize] {
            bb_min = bb_min.inf(&vertices[v as usize]);
            bb_max = bb_max.sup(&vertices[v as usize]);
        }
    }
    let index = nodes.len() as u32;
    nodes.push(BvhNode { bb_min, bb_max, left: 0, right: 0, start: start as u32, count: 0 });

    if count <= BVH_LEAF_SIZE {
        nodes[index as usize].count = count as u32;
        return index;
    }

    let mut cmin = Vector3::repeat(f64::INFINITY);
    let mut cmax = Vector3::repeat(f64::NEG_INFINITY);
    for &t in &order[start..start + count] {
        cmin = cmin.inf(&centroids[t as usize]);
        cmax = cmax.sup(&centroids[t as usize]);
    }
    let extent = cmax - cmin;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = count / 2;
    order[start..start + count].select_nth_unstable_by(mid, |&x, &y| {
        centroids[x as usize][axis]
            .partial_cmp(&centroids[y as usize][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let left = build_node(vertices, triangles, centroids, order, start, mid, nodes);
    let right = build_node(vertices, triangles, centroids, order, start + mid, count - mid, nodes);
    nodes[index as usize].left = left;
    nodes[index as usize].right = right;
    index
}

fn aabb_distance_squared(p: Vector3<f64>, min: Vector3<f64>, max: Vector3<f64>) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let d = (min[k] - p[k]).max(0.0).max(p[k] - max[k]);
        d2 += d * d;
    }
    d2
}

fn ray_hits_aabb(origin: Vector3<f64>, dir: Vector3<f64>, min: Vector3<f64>, max: Vector3<f64>) -> bool {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        let inv = 1.0 / dir[k];
        let mut ta = (min[k] - origin[k]) * inv;
        let mut tb = (max[k] - origin[k]) * inv;
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Moeller-Trumbore, counting strictly forward hits.
fn ray_hits_triangle(
    origin: Vector3<f64>,
    dir: Vector3<f64>,
    a: Vector3<f64>,
    b: Vector3<f64>,
    c: Vector3<f64>,
) -> bool {
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-14 {
        return false;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(&e1);
    let v = inv * dir.dot(&q);
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    inv * e2.dot(&q) > 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Unit cube triangulated with outward winding.
    pub(crate) fn cube_mesh() -> TriMesh {
        let v = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(1.0, 0.0, 1.0),
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(0.0, 1.0, 1.0),
        ];
        let t = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [2, 3, 7],
            [2, 7, 6],
            [1, 2, 6],
            [1, 6, 5],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriMesh::new(v, t).unwrap()
    }

    #[test]
    fn cube_volume_and_distance() {
        let m = cube_mesh();
        assert_relative_eq!(m.volume(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            m.signed_distance(Vector3::new(0.5, 0.5, 0.5)),
            -0.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            m.signed_distance(Vector3::new(2.0, 0.5, 0.5)),
            1.0,
            epsilon = 1e-12
        );
        // Closest feature is a vertex; pseudonormal must still classify it.
        assert_relative_eq!(
            m.signed_distance(Vector3::new(-1.0, -1.0, -1.0)),
            3.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn inward_winding_is_canonicalized() {
        let flipped: Vec<[u32; 3]> =
            cube_mesh().triangles.iter().map(|&[a, b, c]| [a, c, b]).collect();
        let m = TriMesh::new(cube_mesh().vertices.clone(), flipped).unwrap();
        assert!(m.volume() > 0.0);
        assert!(m.signed_distance(Vector3::new(0.5, 0.5, 0.5)) < 0.0);
    }

    #[test]
    fn open_mesh_rejected() {
        let v = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ];
        let err = TriMesh::new(v, vec![[0, 1, 2]]).unwrap_err();
        assert!(err.to_string().contains("watertight"));
    }

    #[test]
    fn sign_matches_parity_on_random_points() {
        let m = cube_mesh();
        // Low-discrepancy-ish sweep around the cube.
        let mut x = 0.12f64;
        for _ in 0..500 {
            x = (x * 997.0 + 0.618_033_9).fract();
            let y = (x * 613.0 + 0.414_213_6).fract();
            let z = (x * 353.0 + 0.732_050_8).fract();
            let p = Vector3::new(x * 3.0 - 1.0, y * 3.0 - 1.0, z * 3.0 - 1.0);
            let inside_exact = (0.0..1.0).contains(&p.x)
                && (0.0..1.0).contains(&p.y)
                && (0.0..1.0).contains(&p.z);
            let sd = m.signed_distance(p);
            if sd.abs() > 1e-9 {
                assert_eq!(sd < 0.0, inside_exact, "at {p:?}");
            }
        }
    }
}
