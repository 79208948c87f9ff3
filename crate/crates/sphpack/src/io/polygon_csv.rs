use std::path::Path;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::geometry::Polygon;

/// Load a closed polygon from a CSV of `x,y` vertex lines (one per line,
/// `#` comments allowed, closure implicit; a duplicated terminal vertex is
/// tolerated and dropped).
pub fn load_polygon_csv(path: &Path) -> Result<Polygon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vertices = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (x, y) = line.split_once(',').ok_or_else(|| {
            Error::format(path, format!("line {}: expected `x,y`, got `{line}`", n + 1))
        })?;
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| {
                Error::format(path, format!("line {}: bad number `{}`", n + 1, s.trim()))
            })?;
            if !v.is_finite() {
                return Err(Error::format(path, format!("line {}: non-finite coordinate", n + 1)));
            }
            Ok(v)
        };
        vertices.push(Vector2::new(parse(x)?, parse(y)?));
    }
    Polygon::new(vertices).map_err(|e| Error::format(path, e.to_string()))
}
