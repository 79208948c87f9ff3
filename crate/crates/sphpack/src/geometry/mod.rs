//! Body geometry as signed-distance functions, discretized level-set fields
//! with surface normals, Boolean subtraction for gap-free outer domains, and
//! the precomputed static-confinement integrals.

mod levelset;
mod polygon;
mod shape;
mod trimesh;

pub use levelset::{heaviside, sign_disagreement_cells, LevelSetField};
pub use polygon::Polygon;
pub use shape::Shape;
pub use trimesh::TriMesh;
