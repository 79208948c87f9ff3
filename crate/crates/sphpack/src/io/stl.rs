use std::collections::HashMap;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::TriMesh;

/// Absolute vertex-welding tolerance.
const WELD: f64 = 1e-9;

/// Load a binary or ASCII STL file into a validated watertight mesh.
/// Vertices closer than 1e-9 are welded into one.
pub fn load_stl(path: &Path) -> Result<TriMesh> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let soup = if is_binary(&bytes) {
        parse_binary(&bytes)?
    } else {
        parse_ascii(path, &bytes)?
    };
    weld(soup)
}

fn is_binary(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    bytes.len() == 84 + 50 * count
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Vector3<f64>; 3]>> {
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let mut soup = Vec::with_capacity(count);
    for t in 0..count {
        let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
        let mut tri = [Vector3::zeros(); 3];
        for (v, item) in tri.iter_mut().enumerate() {
            // Skip the 12-byte normal; vertices start at offset 12.
            let base = 12 + 12 * v;
            let f = |o: usize| {
                f32::from_le_bytes(rec[base + 4 * o..base + 4 * o + 4].try_into().unwrap()) as f64
            };
            *item = Vector3::new(f(0), f(1), f(2));
        }
        soup.push(tri);
    }
    Ok(soup)
}

fn parse_ascii(path: &Path, bytes: &[u8]) -> Result<Vec<[Vector3<f64>; 3]>> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::format(path, "malformed header: neither binary STL nor UTF-8 text"))?;
    if !text.trim_start().starts_with("solid") {
        return Err(Error::format(path, "malformed header: expected `solid` or binary STL"));
    }
    let mut vertices = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("vertex") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::format(path, format!("line {}: vertex needs 3 coordinates", n + 1)));
            }
            let mut v = Vector3::zeros();
            for (k, part) in parts.iter().enumerate() {
                v[k] = part.parse::<f64>().map_err(|_| {
                    Error::format(path, format!("line {}: bad coordinate `{part}`", n + 1))
                })?;
            }
            vertices.push(v);
        }
    }
    if vertices.is_empty() || vertices.len() % 3 != 0 {
        return Err(Error::format(
            path,
            format!("expected a multiple of 3 vertices, got {}", vertices.len()),
        ));
    }
    Ok(vertices.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

fn weld(soup: Vec<[Vector3<f64>; 3]>) -> Result<TriMesh> {
    let mut keys: HashMap<[i64; 3], u32> = HashMap::new();
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut triangles = Vec::with_capacity(soup.len());
    for tri in soup {
        let mut indices = [0u32; 3];
        for (k, v) in tri.iter().enumerate() {
            let key = [
                (v.x / WELD).round() as i64,
                (v.y / WELD).round() as i64,
                (v.z / WELD).round() as i64,
            ];
            indices[k] = *keys.entry(key).or_insert_with(|| {
                vertices.push(*v);
                vertices.len() as u32 - 1
            });
        }
        triangles.push(indices);
    }
    TriMesh::new(vertices, triangles)
}

/// Encode a triangle soup as binary STL (fixture/output helper).
pub fn encode_binary_stl(triangles: &[[Vector3<f64>; 3]]) -> Vec<u8> {
    let mut bytes = vec![0u8; 80];
    bytes.extend_from_slice(&(triangles.len() as u32).to_le_bytes());
    for tri in triangles {
        let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n, tri[0], tri[1], tri[2]] {
            for k in 0..3 {
                bytes.extend_from_slice(&(v[k] as f32).to_le_bytes());
            }
        }
        bytes.extend_from_slice(&0u16.to_le_bytes());
    }
    bytes
}

/// Encode a triangle soup as ASCII STL. Coordinates are quantized to f32
/// first (as binary STL would) and printed in round-trip form, so ASCII and
/// binary encodings of the same soup load identically.
pub fn encode_ascii_stl(triangles: &[[Vector3<f64>; 3]]) -> String {
    use std::fmt::Write;
    let mut out = String::from("solid sphpack\n");
    for tri in triangles {
        let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        let c = |v: Vector3<f64>, k: usize| v[k] as f32 as f64;
        writeln!(out, "  facet normal {:e} {:e} {:e}", c(n, 0), c(n, 1), c(n, 2)).unwrap();
        out.push_str("    outer loop\n");
        for v in tri {
            writeln!(out, "      vertex {:e} {:e} {:e}", c(*v, 0), c(*v, 1), c(*v, 2)).unwrap();
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    out.push_str("endsolid sphpack\n");
    out
}

/// The twelve vertices `(0, +-1, +-t)` cyclic and twenty faces of an
/// icosahedron with scale parameter `t` (the golden ratio gives the regular
/// one); enclosed volume is `4/3 (1 + 3 t^2 + t^3)`.
pub fn icosahedron(t: f64) -> Vec<[Vector3<f64>; 3]> {
    let v = [
        Vector3::new(-1.0, t, 0.0),
        Vector3::new(1.0, t, 0.0),
        Vector3::new(-1.0, -t, 0.0),
        Vector3::new(1.0, -t, 0.0),
        Vector3::new(0.0, -1.0, t),
        Vector3::new(0.0, 1.0, t),
        Vector3::new(0.0, -1.0, -t),
        Vector3::new(0.0, 1.0, -t),
        Vector3::new(t, 0.0, -1.0),
        Vector3::new(t, 0.0, 1.0),
        Vector3::new(-t, 0.0, -1.0),
        Vector3::new(-t, 0.0, 1.0),
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    faces.iter().map(|f| [v[f[0]], v[f[1]], v[f[2]]]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn golden_f32() -> f64 {
        ((1.0 + 5.0f64.sqrt()) / 2.0) as f32 as f64
    }

    #[test]
    fn icosahedron_binary_volume_matches_closed_form() {
        // STL stores f32 coordinates, so the closed form is evaluated at the
        // f32-quantized scale parameter.
        let t = golden_f32();
        let bytes = encode_binary_stl(&icosahedron(t));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ico.stl");
        std::fs::write(&path, bytes).unwrap();
        let mesh = load_stl(&path).unwrap();
        assert_eq!(mesh.triangle_count(), 20);
        let expected = 4.0 / 3.0 * (1.0 + 3.0 * t * t + t * t * t);
        assert_relative_eq!(mesh.volume(), expected, epsilon = 1e-9);
    }

    #[test]
    fn single_triangle_rejected_as_open() {
        let soup = vec![[
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ]];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri.stl");
        std::fs::write(&path, encode_binary_stl(&soup)).unwrap();
        let err = load_stl(&path).unwrap_err();
        assert!(err.to_string().contains("watertight"));
    }

    #[test]
    fn ascii_and_binary_load_identically() {
        let soup = icosahedron(golden_f32());
        let dir = tempfile::tempdir().unwrap();
        let bin_path = dir.path().join("ico_bin.stl");
        let asc_path = dir.path().join("ico_asc.stl");
        std::fs::write(&bin_path, encode_binary_stl(&soup)).unwrap();
        std::fs::write(&asc_path, encode_ascii_stl(&soup)).unwrap();
        let a = load_stl(&bin_path).unwrap();
        let b = load_stl(&asc_path).unwrap();
        assert_eq!(a.triangle_count(), b.triangle_count());
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.volume().to_bits(), b.volume().to_bits());
    }

    #[test]
    fn malformed_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.stl");
        std::fs::write(&path, b"not an stl at all").unwrap();
        let err = load_stl(&path).unwrap_err();
        assert!(err.to_string().contains("header"));
    }
}
