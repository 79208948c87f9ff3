use std::path::{Path, PathBuf};

use crate::diagnostics::{report_for_body, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::geometry::{sign_disagreement_cells, LevelSetField, Shape};
use crate::io::config::{Mode, RunConfig, ShapeDecl};
use crate::io::output::{read_particles_csv, write_energy_history, write_particles, CsvParticle};
use crate::io::polygon_csv::load_polygon_csv;
use crate::io::stl::load_stl;
use crate::kernel::SmoothingKernel;
use crate::particles::{lattice_seed, BodyRole, ParticleSet};
use crate::relaxation::{
    relax_complex, relax_separate, InnerBody, MultiBodyOutcome, MultiBodySystem, OuterBody,
    RelaxationConfig,
};
use crate::Vect;

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub files: Vec<PathBuf>,
    pub converged: bool,
    /// Interface cells where the inner and outer level sets disagree in
    /// sign (gaps or overlaps); zero under Boolean-subtracted geometry.
    pub gap_cells: usize,
    /// Particle count per body, outer body first.
    pub particle_counts: Vec<usize>,
}

/// Seed the lattice distribution and write it out.
pub fn run_seed(cfg: &RunConfig) -> Result<RunArtifacts> {
    match cfg.dimension {
        2 => seed_pipeline::<2>(cfg),
        _ => seed_pipeline::<3>(cfg),
    }
}

/// Run the configured relaxation end to end and write particles,
/// diagnostics and energy histories. A non-converged run still writes its
/// outputs; the flag is reported in the artifacts.
pub fn run_relax(cfg: &RunConfig) -> Result<RunArtifacts> {
    match cfg.dimension {
        2 => relax_pipeline::<2>(cfg),
        _ => relax_pipeline::<3>(cfg),
    }
}

/// Recompute diagnostics for an existing particle CSV under this config's
/// geometry.
pub fn run_diagnose(cfg: &RunConfig, particles: &Path) -> Result<RunArtifacts> {
    match cfg.dimension {
        2 => diagnose_pipeline::<2>(cfg, particles),
        _ => diagnose_pipeline::<3>(cfg, particles),
    }
}

fn resolve_shape<const D: usize>(decl: &ShapeDecl) -> Result<Shape<D>> {
    match decl {
        ShapeDecl::Box { min, max } => {
            Shape::cuboid(vect_from::<D>(min), vect_from::<D>(max))
        }
        ShapeDecl::Circle { center, radius } => Shape::ball(vect_from::<D>(center), *radius),
        ShapeDecl::Sphere { center, radius } => Shape::ball(vect_from::<D>(center), *radius),
        ShapeDecl::PolygonFile { path } => {
            debug_assert_eq!(D, 2);
            Ok(Shape::Polygon(load_polygon_csv(path)?))
        }
        ShapeDecl::StlFile { path } => {
            debug_assert_eq!(D, 3);
            Ok(Shape::TriMesh(load_stl(path)?))
        }
    }
}

fn vect_from<const D: usize>(v: &[f64]) -> Vect<D> {
    Vect::<D>::from_fn(|k, _| v[k])
}

/// Padding that keeps the whole confinement band and its kernel support
/// inside the grid, rounded up to whole cells.
fn grid_pad(cutoff: f64, lf: f64) -> f64 {
    (((2.0 * cutoff + 2.0 * lf) / lf).ceil() + 1.0) * lf
}

/// Expand a bounding box by `pad` and snap it outward onto the grid lines
/// `anchor + k * lf`, so fields sharing an anchor have coincident cell
/// centers wherever they overlap.
fn padded_grid_bounds<const D: usize>(
    bb: (Vect<D>, Vect<D>),
    pad: f64,
    lf: f64,
    anchor: Vect<D>,
) -> (Vect<D>, Vect<D>) {
    let min = Vect::<D>::from_fn(|k, _| {
        anchor[k] + ((bb.0[k] - pad - anchor[k]) / lf).floor() * lf
    });
    let max = Vect::<D>::from_fn(|k, _| {
        anchor[k] + ((bb.1[k] + pad - anchor[k]) / lf).ceil() * lf
    });
    (min, max)
}

struct GeometryContext<const D: usize> {
    domain_shape: Shape<D>,
    outer_field: LevelSetField<D>,
    external_field: Option<LevelSetField<D>>,
    inner_fields: Vec<LevelSetField<D>>,
}

/// Build all level-set fields for the configured mode. Under `complex` and
/// `separate` every grid is anchored to the domain bounding box; under
/// `separate-no-boolean` each inner grid is anchored to its own body's
/// bounding box, reproducing the discretization-origin gap artifact.
fn build_geometry<const D: usize>(cfg: &RunConfig, with_bands: bool) -> Result<GeometryContext<D>> {
    let domain_shape = resolve_shape::<D>(&cfg.domain.shape)?;
    let inner_shapes: Vec<Shape<D>> =
        cfg.bodies.iter().map(|b| resolve_shape::<D>(&b.shape)).collect::<Result<_>>()?;
    let outer_shape = if inner_shapes.is_empty() {
        domain_shape.clone()
    } else {
        Shape::subtraction(domain_shape.clone(), inner_shapes.clone())?
    };

    let lf = cfg.lf;
    let fluid_kernel = SmoothingKernel::<D>::new(cfg.h_fluid * cfg.dx)?;
    let solid_kernel = SmoothingKernel::<D>::new(cfg.h_solid * cfg.dx)?;
    let eps = cfg.eps_factor * lf;
    let pad_fluid = grid_pad(fluid_kernel.cutoff(), lf);
    let pad_solid = grid_pad(solid_kernel.cutoff(), lf);

    let domain_bb = domain_shape.bounding_box();
    let anchor = domain_bb.0;
    let outer_bounds = padded_grid_bounds(domain_bb, pad_fluid, lf, anchor);

    let mut outer_field = LevelSetField::build(&outer_shape, outer_bounds, lf)?;
    let outer_needs_band = cfg.mode != Mode::Complex || inner_shapes.is_empty();
    if with_bands && outer_needs_band {
        outer_field.precompute_confinement(&fluid_kernel, eps)?;
    }

    let external_field = if cfg.mode == Mode::Complex && !inner_shapes.is_empty() {
        let mut f = LevelSetField::build(&domain_shape, outer_bounds, lf)?;
        if with_bands {
            f.precompute_confinement(&fluid_kernel, eps)?;
        }
        Some(f)
    } else {
        None
    };

    let mut inner_fields = Vec::with_capacity(inner_shapes.len());
    for shape in &inner_shapes {
        let bb = shape.bounding_box();
        let inner_anchor = if cfg.mode == Mode::SeparateNoBoolean { bb.0 } else { anchor };
        let bounds = padded_grid_bounds(bb, pad_solid, lf, inner_anchor);
        let mut field = LevelSetField::build(shape, bounds, lf)?;
        if with_bands {
            field.precompute_confinement(&solid_kernel, eps)?;
        }
        inner_fields.push(field);
    }

    Ok(GeometryContext { domain_shape, outer_field, external_field, inner_fields })
}

fn seed_system<const D: usize>(
    cfg: &RunConfig,
    geometry: GeometryContext<D>,
) -> Result<MultiBodySystem<D>> {
    let mut outer_set = lattice_seed(&geometry.outer_field, cfg.dx, BodyRole::OuterFluid)?;
    outer_set.body_id = 0;
    outer_set.smoothing_length = cfg.h_fluid * cfg.dx;
    outer_set.p0 = cfg.domain.p0.unwrap_or(cfg.p0);

    let mut inners = Vec::with_capacity(geometry.inner_fields.len());
    for (n, field) in geometry.inner_fields.into_iter().enumerate() {
        let mut set = lattice_seed(&field, cfg.dx, BodyRole::InnerSolid)?;
        set.body_id = n + 1;
        set.smoothing_length = cfg.h_solid * cfg.dx;
        set.p0 = cfg.bodies[n].p0.unwrap_or(cfg.p0);
        inners.push(InnerBody { set, field });
    }

    Ok(MultiBodySystem {
        inners,
        outer: OuterBody {
            set: outer_set,
            field: geometry.outer_field,
            external_field: geometry.external_field,
        },
    })
}

fn count_gap_cells<const D: usize>(system: &MultiBodySystem<D>, domain: &Shape<D>) -> usize {
    system
        .inners
        .iter()
        .map(|b| sign_disagreement_cells(&system.outer.field, &b.field, domain).len())
        .sum()
}

fn relaxation_config(cfg: &RunConfig) -> RelaxationConfig {
    RelaxationConfig {
        p0: cfg.p0,
        cfl: cfg.cfl,
        max_steps: cfg.max_steps,
        threshold: cfg.threshold,
        bounding_slack: 0.1,
    }
}

fn seed_pipeline<const D: usize>(cfg: &RunConfig) -> Result<RunArtifacts> {
    let geometry = build_geometry::<D>(cfg, false)?;
    let system = seed_system(cfg, geometry)?;
    write_system(cfg, &system, None, "particles", 0)
}

fn relax_pipeline<const D: usize>(cfg: &RunConfig) -> Result<RunArtifacts> {
    let geometry = build_geometry::<D>(cfg, true)?;
    let domain_shape = geometry.domain_shape.clone();
    let mut system = seed_system(cfg, geometry)?;
    let gap_cells = count_gap_cells(&system, &domain_shape);
    let rcfg = relaxation_config(cfg);
    let outcome = match cfg.mode {
        Mode::Complex => relax_complex(&mut system, &rcfg)?,
        Mode::Separate | Mode::SeparateNoBoolean => relax_separate(&mut system, &rcfg)?,
    };
    write_system(cfg, &system, Some(&outcome), "particles", gap_cells)
}

fn diagnose_pipeline<const D: usize>(cfg: &RunConfig, particles: &Path) -> Result<RunArtifacts> {
    let geometry = build_geometry::<D>(cfg, false)?;
    let rows = read_particles_csv(particles)?;
    let system = system_from_rows(cfg, geometry, &rows, particles)?;
    write_system(cfg, &system, None, "diagnostics", 0)
}

fn system_from_rows<const D: usize>(
    cfg: &RunConfig,
    geometry: GeometryContext<D>,
    rows: &[CsvParticle],
    source: &Path,
) -> Result<MultiBodySystem<D>> {
    let n_bodies = cfg.bodies.len() + 1;
    let mut positions: Vec<Vec<Vect<D>>> = vec![Vec::new(); n_bodies];
    let mut volumes: Vec<Vec<f64>> = vec![Vec::new(); n_bodies];
    for row in rows {
        if row.position.len() != D {
            return Err(Error::format(
                source,
                format!("particle dimension {} does not match the {}D config", row.position.len(), D),
            ));
        }
        if row.body_id >= n_bodies {
            return Err(Error::format(
                source,
                format!("body id {} exceeds the {} configured bodies", row.body_id, n_bodies),
            ));
        }
        positions[row.body_id].push(vect_from::<D>(&row.position));
        volumes[row.body_id].push(row.volume);
    }

    let build_set = |body_id: usize, role: BodyRole, h: f64, p0: f64| -> Result<ParticleSet<D>> {
        let pos = positions[body_id].clone();
        if pos.is_empty() {
            return Err(Error::format(source, format!("no particles for body {body_id}")));
        }
        let vol = volumes[body_id].clone();
        let rho0 = 1.0;
        Ok(ParticleSet {
            body_id,
            role,
            accelerations: vec![Vect::<D>::zeros(); pos.len()],
            mass: vol.iter().map(|v| rho0 * v).collect(),
            volume: vol,
            positions: pos,
            spacing: cfg.dx,
            smoothing_length: h,
            rho0,
            p0,
        })
    };

    let outer_set =
        build_set(0, BodyRole::OuterFluid, cfg.h_fluid * cfg.dx, cfg.domain.p0.unwrap_or(cfg.p0))?;
    let mut inners = Vec::new();
    for (n, field) in geometry.inner_fields.into_iter().enumerate() {
        let set = build_set(
            n + 1,
            BodyRole::InnerSolid,
            cfg.h_solid * cfg.dx,
            cfg.bodies[n].p0.unwrap_or(cfg.p0),
        )?;
        inners.push(InnerBody { set, field });
    }
    Ok(MultiBodySystem {
        inners,
        outer: OuterBody {
            set: outer_set,
            field: geometry.outer_field,
            external_field: geometry.external_field,
        },
    })
}

fn write_system<const D: usize>(
    cfg: &RunConfig,
    system: &MultiBodySystem<D>,
    outcome: Option<&MultiBodyOutcome>,
    stem: &str,
    gap_cells: usize,
) -> Result<RunArtifacts> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let mut files = Vec::new();

    // Diagnostics reports for every body on relax/diagnose; none on seed.
    let with_reports = outcome.is_some() || stem == "diagnostics";
    let reports: Vec<Option<DiagnosticsReport<D>>> = if with_reports {
        let mut reports = Vec::with_capacity(system.inners.len() + 1);
        reports.push(Some(report_for_body(system, 0, outcome.map(|o| &o.outer))?));
        for n in 0..system.inners.len() {
            reports.push(Some(report_for_body(
                system,
                n + 1,
                outcome.map(|o| &o.inners[n]),
            )?));
        }
        reports
    } else {
        vec![None; system.inners.len() + 1]
    };

    let mut bodies: Vec<(&ParticleSet<D>, Option<&DiagnosticsReport<D>>)> =
        vec![(&system.outer.set, reports[0].as_ref())];
    for (n, inner) in system.inners.iter().enumerate() {
        bodies.push((&inner.set, reports[n + 1].as_ref()));
    }

    for format in &cfg.formats {
        let path = cfg.output_dir.join(format!("{stem}.{}", format.as_str()));
        write_particles(&bodies, *format, &path)?;
        files.push(path);
    }

    if let Some(outcome) = outcome {
        let path = cfg.output_dir.join("energy_history.csv");
        write_energy_history(&outcome.outer.history, &path)?;
        files.push(path);
        for (n, inner) in outcome.inners.iter().enumerate() {
            let path =
                cfg.output_dir.join(format!("energy_history_{}.csv", cfg.bodies[n].name));
            write_energy_history(&inner.history, &path)?;
            files.push(path);
        }
    }

    Ok(RunArtifacts {
        files,
        converged: outcome.map(|o| o.converged).unwrap_or(true),
        gap_cells,
        particle_counts: std::iter::once(system.outer.set.len())
            .chain(system.inners.iter().map(|b| b.set.len()))
            .collect(),
    })
}
