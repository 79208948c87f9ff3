use std::io::Write as _;
use std::path::Path;

use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::io::config::OutputFormat;
use crate::particles::ParticleSet;
use crate::relaxation::StepRecord;

/// 17 significant digits: round-trips every finite f64 bit-exactly.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write particle sets (outer body first) with their diagnostics to CSV or
/// legacy ASCII VTK. Reports must be present for every body or for none;
/// without reports only the geometry columns are written (CSV) or emitted
/// as zeros (VTK point data is omitted entirely).
pub fn write_particles<const D: usize>(
    bodies: &[(&ParticleSet<D>, Option<&DiagnosticsReport<D>>)],
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    let with_reports = bodies.iter().filter(|(_, r)| r.is_some()).count();
    if with_reports != 0 && with_reports != bodies.len() {
        return Err(Error::ShapeValidation(
            "either every body or no body may carry a diagnostics report".into(),
        ));
    }
    let text = match format {
        OutputFormat::Csv => render_csv(bodies, with_reports > 0),
        OutputFormat::Vtk => render_vtk(bodies, with_reports > 0),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn render_csv<const D: usize>(
    bodies: &[(&ParticleSet<D>, Option<&DiagnosticsReport<D>>)],
    with_reports: bool,
) -> String {
    let mut out = String::new();
    let axes = ["x", "y", "z"];
    out.push_str("body_id");
    for k in 0..D {
        out.push(',');
        out.push_str(axes[k]);
    }
    out.push_str(",volume");
    if with_reports {
        for k in 0..D {
            out.push_str(",kgs_");
            out.push_str(axes[k]);
        }
        out.push_str(",kgs_mag,density,interface_layer");
    }
    out.push('\n');
    for (set, report) in bodies {
        for i in 0..set.len() {
            out.push_str(&set.body_id.to_string());
            for k in 0..D {
                out.push(',');
                out.push_str(&full(set.positions[i][k]));
            }
            out.push(',');
            out.push_str(&full(set.volume[i]));
            if let Some(r) = report {
                for k in 0..D {
                    out.push(',');
                    out.push_str(&full(r.kgs[i][k]));
                }
                out.push(',');
                out.push_str(&full(r.kgs_mag[i]));
                out.push(',');
                out.push_str(&full(r.density[i]));
                out.push(',');
                out.push_str(if r.interface[i] { "1" } else { "0" });
            }
            out.push('\n');
        }
    }
    out
}

fn render_vtk<const D: usize>(
    bodies: &[(&ParticleSet<D>, Option<&DiagnosticsReport<D>>)],
    with_reports: bool,
) -> String {
    use std::fmt::Write;
    let n: usize = bodies.iter().map(|(s, _)| s.len()).sum();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("sphpack particle distribution\n");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {n} double").unwrap();
    for (set, _) in bodies {
        for p in &set.positions {
            let z = if D > 2 { full(p[2]) } else { "0".to_string() };
            writeln!(out, "{} {} {}", full(p[0]), full(p[1]), z).unwrap();
        }
    }
    writeln!(out, "CELLS {n} {}", 2 * n).unwrap();
    for i in 0..n {
        writeln!(out, "1 {i}").unwrap();
    }
    writeln!(out, "CELL_TYPES {n}").unwrap();
    for _ in 0..n {
        out.push_str("1\n");
    }
    writeln!(out, "POINT_DATA {n}").unwrap();
    out.push_str("SCALARS body_id int 1\nLOOKUP_TABLE default\n");
    for (set, _) in bodies {
        for _ in 0..set.len() {
            writeln!(out, "{}", set.body_id).unwrap();
        }
    }
    out.push_str("SCALARS volume double 1\nLOOKUP_TABLE default\n");
    for (set, _) in bodies {
        for v in &set.volume {
            writeln!(out, "{}", full(*v)).unwrap();
        }
    }
    if with_reports {
        out.push_str("VECTORS kgs double\n");
        for (_, report) in bodies {
            let r = report.unwrap();
            for g in &r.kgs {
                let z = if D > 2 { full(g[2]) } else { "0".to_string() };
                writeln!(out, "{} {} {}", full(g[0]), full(g[1]), z).unwrap();
            }
        }
        for (name, field) in [("kgs_mag", 0usize), ("density", 1)] {
            writeln!(out, "SCALARS {name} double 1").unwrap();
            out.push_str("LOOKUP_TABLE default\n");
            for (_, report) in bodies {
                let r = report.unwrap();
                let values = if field == 0 { &r.kgs_mag } else { &r.density };
                for v in values {
                    writeln!(out, "{}", full(*v)).unwrap();
                }
            }
        }
        out.push_str("SCALARS interface_layer int 1\nLOOKUP_TABLE default\n");
        for (_, report) in bodies {
            for flag in &report.unwrap().interface {
                writeln!(out, "{}", *flag as u8).unwrap();
            }
        }
    }
    out
}

/// One row of a reloaded particle CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvParticle {
    pub body_id: usize,
    pub position: Vec<f64>,
    pub volume: f64,
}

/// Read back the geometry columns of a particle CSV written by
/// [`write_particles`]; positions round-trip bit-exactly.
pub fn read_particles_csv(path: &Path) -> Result<Vec<CsvParticle>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(path, "empty particle file"))?;
    let columns: Vec<&str> = header.split(',').collect();
    let dim = if columns.get(..4) == Some(&["body_id", "x", "y", "z"]) {
        3
    } else if columns.get(..3) == Some(&["body_id", "x", "y"]) {
        2
    } else {
        return Err(Error::format(path, format!("unrecognized header `{header}`")));
    };
    let vol_col = 1 + dim;
    if columns.get(vol_col) != Some(&"volume") {
        return Err(Error::format(path, "missing `volume` column"));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < vol_col + 1 {
            return Err(Error::format(path, format!("line {}: too few columns", n + 2)));
        }
        let body_id: usize = fields[0]
            .parse()
            .map_err(|_| Error::format(path, format!("line {}: bad body id", n + 2)))?;
        let mut position = Vec::with_capacity(dim);
        for k in 0..dim {
            position.push(fields[1 + k].parse::<f64>().map_err(|_| {
                Error::format(path, format!("line {}: bad coordinate `{}`", n + 2, fields[1 + k]))
            })?);
        }
        let volume = fields[vol_col]
            .parse::<f64>()
            .map_err(|_| Error::format(path, format!("line {}: bad volume", n + 2)))?;
        rows.push(CsvParticle { body_id, position, volume });
    }
    Ok(rows)
}

/// Write the per-step relaxation history as
/// `step,dt,e_all,e_interface,e_normalized`.
pub fn write_energy_history(history: &[StepRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "step,dt,e_all,e_interface,e_normalized").map_err(io_err)?;
    for r in history {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.step,
            full(r.dt),
            full(r.e_all),
            full(r.e_interface),
            full(r.e_norm)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::BodyRole;
    use nalgebra::Vector2;

    fn four_particle_set() -> ParticleSet<2> {
        ParticleSet {
            body_id: 0,
            role: BodyRole::OuterFluid,
            positions: vec![
                Vector2::new(0.25, 0.25),
                Vector2::new(0.75, 0.25),
                Vector2::new(0.25, 0.75),
                Vector2::new(0.75, 0.75),
            ],
            accelerations: vec![Vector2::zeros(); 4],
            volume: vec![0.25; 4],
            mass: vec![0.25; 4],
            spacing: 0.5,
            smoothing_length: 0.65,
            rho0: 1.0,
            p0: 1.0,
        }
    }

    #[test]
    fn csv_has_header_plus_one_line_per_particle() {
        let set = four_particle_set();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_particles(&[(&set, None)], OutputFormat::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("body_id,x,y,volume\n"));
    }

    #[test]
    fn csv_positions_roundtrip_bitwise() {
        let mut set = four_particle_set();
        set.positions[2] = Vector2::new(1.0 / 3.0, std::f64::consts::PI / 7.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_particles(&[(&set, None)], OutputFormat::Csv, &path).unwrap();
        let rows = read_particles_csv(&path).unwrap();
        assert_eq!(rows.len(), 4);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.body_id, 0);
            for k in 0..2 {
                assert_eq!(row.position[k].to_bits(), set.positions[i][k].to_bits());
            }
            assert_eq!(row.volume.to_bits(), set.volume[i].to_bits());
        }
    }

    #[test]
    fn vtk_points_count_matches() {
        let set = four_particle_set();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.vtk");
        write_particles(&[(&set, None)], OutputFormat::Vtk, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let points_line = text.lines().find(|l| l.starts_with("POINTS")).unwrap();
        let declared: usize = points_line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(declared, set.len());
        let points_idx = text.lines().position(|l| l.starts_with("POINTS")).unwrap();
        let coord_lines = text.lines().skip(points_idx + 1).take(declared);
        assert!(coord_lines
            .clone()
            .all(|l| l.split_whitespace().count() == 3));
        assert_eq!(coord_lines.count(), declared);
        assert!(text.contains("CELL_TYPES 4"));
    }
}
