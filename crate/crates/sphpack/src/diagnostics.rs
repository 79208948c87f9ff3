//! Distribution-quality metrics: kernel gradient summation (zero-order
//! consistency), kinetic-energy convergence histories, SPH density
//! summation, and interface-layer extraction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::LevelSetField;
use crate::kernel::SmoothingKernel;
use crate::particles::{build_cell_list, CellList, ParticleSet};
use crate::relaxation::{MultiBodySystem, RelaxOutcome};
use crate::Vect;

/// Kernel gradient summation over one body's own particles.
///
/// Neighbor contributions are accumulated in ascending particle order so the
/// result is independent of the cell-list bucket layout.
pub fn kgs_single<const D: usize>(
    set: &ParticleSet<D>,
    list: &CellList<D>,
) -> Result<Vec<Vect<D>>> {
    let kernel = SmoothingKernel::<D>::new(set.smoothing_length)?;
    let cutoff = kernel.cutoff();
    let positions = &set.positions;
    let volume = &set.volume;
    Ok((0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut js: Vec<usize> = Vec::new();
            list.for_each_within(positions, positions[i], cutoff, |j, _, _| {
                if j != i {
                    js.push(j);
                }
            });
            js.sort_unstable();
            let mut acc = Vect::<D>::zeros();
            for j in js {
                acc += kernel.gradient(positions[i] - positions[j]) * volume[j];
            }
            acc
        })
        .collect())
}

/// Kernel gradient summation for the outer fluid body: own-fluid neighbors
/// plus contacting solid neighbors, all within the fluid kernel support.
/// The external-boundary confinement term is deliberately excluded; this
/// measures raw particle-only consistency.
pub fn kgs_outer<const D: usize>(
    outer: &ParticleSet<D>,
    outer_list: &CellList<D>,
    inners: &[(&ParticleSet<D>, &CellList<D>)],
) -> Result<Vec<Vect<D>>> {
    let kernel = SmoothingKernel::<D>::new(outer.smoothing_length)?;
    let cutoff = kernel.cutoff();
    let positions = &outer.positions;
    Ok((0..outer.len())
        .into_par_iter()
        .map(|i| {
            let p = positions[i];
            let mut js: Vec<usize> = Vec::new();
            outer_list.for_each_within(positions, p, cutoff, |j, _, _| {
                if j != i {
                    js.push(j);
                }
            });
            js.sort_unstable();
            let mut acc = Vect::<D>::zeros();
            for j in js {
                acc += kernel.gradient(p - positions[j]) * outer.volume[j];
            }
            for (solid, solid_list) in inners {
                let mut ks: Vec<usize> = Vec::new();
                solid_list.for_each_within(&solid.positions, p, cutoff, |k, _, _| ks.push(k));
                ks.sort_unstable();
                for k in ks {
                    acc += kernel.gradient(p - solid.positions[k]) * solid.volume[k];
                }
            }
            acc
        })
        .collect())
}

/// Kernel gradient summation for one body of a system; body 0 is the outer
/// fluid (with contact-solid contributions), bodies 1.. are the inner
/// solids in order. Neighbor lists are built from the current positions.
pub fn kernel_gradient_summation<const D: usize>(
    system: &MultiBodySystem<D>,
    body: usize,
) -> Result<Vec<Vect<D>>> {
    if body == 0 {
        let cutoff = system.outer.set.kernel_cutoff();
        let outer_list = build_cell_list(&system.outer.set, cutoff);
        let inner_lists: Vec<CellList<D>> = system
            .inners
            .iter()
            .map(|b| build_cell_list(&b.set, b.set.kernel_cutoff().max(cutoff)))
            .collect();
        let contact: Vec<(&ParticleSet<D>, &CellList<D>)> =
            system.inners.iter().map(|b| &b.set).zip(inner_lists.iter()).collect();
        kgs_outer(&system.outer.set, &outer_list, &contact)
    } else {
        let inner = system.inners.get(body - 1).ok_or(Error::UnknownBody(body))?;
        let list = build_cell_list(&inner.set, inner.set.kernel_cutoff());
        kgs_single(&inner.set, &list)
    }
}

/// Kinetic energy of the step just taken, with the per-step velocity proxy
/// `v_i = |F_i| dt`: `E = 1/2 sum m_i (|F_i| dt)^2`, optionally restricted
/// to a particle filter.
pub fn kinetic_energy<const D: usize>(
    set: &ParticleSet<D>,
    dt: f64,
    filter: Option<&[bool]>,
) -> f64 {
    let mut e = 0.0;
    for i in 0..set.len() {
        if let Some(flags) = filter {
            if !flags[i] {
                continue;
            }
        }
        let v = set.accelerations[i].norm() * dt;
        e += 0.5 * set.mass[i] * v * v;
    }
    e
}

/// Flag the first-layer fluid particles: those within one particle spacing
/// of any inner body's surface. Positions outside an inner field's grid are
/// treated as far away.
pub fn interface_layer<const D: usize>(
    outer: &ParticleSet<D>,
    inner_fields: &[&LevelSetField<D>],
) -> Vec<bool> {
    let dx = outer.spacing;
    outer
        .positions
        .iter()
        .map(|p| {
            inner_fields.iter().any(|f| match f.interpolate_phi(*p) {
                Ok(phi) => phi.abs() <= dx,
                Err(_) => false,
            })
        })
        .collect()
}

/// SPH density summation `rho_i = sum_j m_j W_ij` over same-body neighbors
/// (including the self contribution) and, for the outer body, the
/// contacting solid neighbors.
pub fn density_summation<const D: usize>(
    set: &ParticleSet<D>,
    list: &CellList<D>,
    contacts: &[(&ParticleSet<D>, &CellList<D>)],
) -> Result<Vec<f64>> {
    let kernel = SmoothingKernel::<D>::new(set.smoothing_length)?;
    let cutoff = kernel.cutoff();
    let positions = &set.positions;
    Ok((0..set.len())
        .into_par_iter()
        .map(|i| {
            let p = positions[i];
            let mut rho = set.mass[i] * kernel.value(0.0);
            let mut js: Vec<usize> = Vec::new();
            list.for_each_within(positions, p, cutoff, |j, _, _| {
                if j != i {
                    js.push(j);
                }
            });
            js.sort_unstable();
            for j in js {
                rho += set.mass[j] * kernel.value((p - positions[j]).norm());
            }
            for (other, other_list) in contacts {
                let mut ks: Vec<usize> = Vec::new();
                other_list.for_each_within(&other.positions, p, cutoff, |k, _, _| ks.push(k));
                ks.sort_unstable();
                for k in ks {
                    rho += other.mass[k] * kernel.value((p - other.positions[k]).norm());
                }
            }
            rho
        })
        .collect())
}

/// Quality report for one body of a relaxed system.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport<const D: usize> {
    pub kgs: Vec<Vect<D>>,
    pub kgs_mag: Vec<f64>,
    pub density: Vec<f64>,
    pub interface: Vec<bool>,
    /// Normalized kinetic-energy series of the body's relaxation run.
    pub energy_norm: Vec<f64>,
    pub converged: bool,
}

/// Assemble the full report for one body; body 0 is the outer fluid.
pub fn report_for_body<const D: usize>(
    system: &MultiBodySystem<D>,
    body: usize,
    outcome: Option<&RelaxOutcome>,
) -> Result<DiagnosticsReport<D>> {
    let kgs = kernel_gradient_summation(system, body)?;
    let kgs_mag: Vec<f64> = kgs.iter().map(|v| v.norm()).collect();
    let inner_fields: Vec<&LevelSetField<D>> = system.inners.iter().map(|b| &b.field).collect();
    let (density, interface) = if body == 0 {
        let set = &system.outer.set;
        let cutoff = set.kernel_cutoff();
        let list = build_cell_list(set, cutoff);
        let inner_lists: Vec<CellList<D>> = system
            .inners
            .iter()
            .map(|b| build_cell_list(&b.set, b.set.kernel_cutoff().max(cutoff)))
            .collect();
        let contacts: Vec<(&ParticleSet<D>, &CellList<D>)> =
            system.inners.iter().map(|b| &b.set).zip(inner_lists.iter()).collect();
        (density_summation(set, &list, &contacts)?, interface_layer(set, &inner_fields))
    } else {
        let inner = system.inners.get(body - 1).ok_or(Error::UnknownBody(body))?;
        let list = build_cell_list(&inner.set, inner.set.kernel_cutoff());
        (density_summation(&inner.set, &list, &[])?, vec![false; inner.set.len()])
    };
    Ok(DiagnosticsReport {
        kgs,
        kgs_mag,
        density,
        interface,
        energy_norm: outcome.map(|o| o.history.iter().map(|r| r.e_norm).collect()).unwrap_or_default(),
        converged: outcome.map(|o| o.converged).unwrap_or(false),
    })
}
