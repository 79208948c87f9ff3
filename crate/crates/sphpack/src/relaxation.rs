//! Physics-driven relaxation: particles evolve under a constant background
//! pressure, with velocities reset every step so each step's displacement is
//! `r += F dt^2 / 2`. Boundary support comes from the precomputed
//! confinement integrals of the level set; multi-body (complex) relaxation
//! additionally couples outer-fluid particles to the contacting solid
//! particles across the interface.

use rayon::prelude::*;

use crate::diagnostics::{interface_layer, kinetic_energy};
use crate::error::{Error, Result};
use crate::geometry::LevelSetField;
use crate::kernel::SmoothingKernel;
use crate::particles::{build_cell_list, CellList, ParticleSet};
use crate::Vect;

#[derive(Debug, Clone)]
pub struct RelaxationConfig {
    /// Background pressure assigned to bodies without an explicit value.
    pub p0: f64,
    /// Body-force time-step factor, at most 0.25.
    pub cfl: f64,
    pub max_steps: usize,
    /// Convergence threshold on the normalized kinetic energy.
    pub threshold: f64,
    /// Post-bounding slack on `phi <= -dx/2`, as a fraction of `dx`.
    pub bounding_slack: f64,
}

impl Default for RelaxationConfig {
    fn default() -> Self {
        Self { p0: 1.0, cfl: 0.25, max_steps: 10_000, threshold: 1e-4, bounding_slack: 0.1 }
    }
}

impl RelaxationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.25) {
            return Err(Error::ShapeValidation(format!(
                "cfl factor must lie in (0, 0.25], got {}",
                self.cfl
            )));
        }
        if !(self.p0 > 0.0) {
            return Err(Error::ShapeValidation(format!(
                "background pressure must be positive, got {}",
                self.p0
            )));
        }
        if self.max_steps < 1 {
            return Err(Error::ShapeValidation("max steps must be at least 1".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::ShapeValidation(format!(
                "convergence threshold must be non-negative, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Per-step force summary.
#[derive(Debug, Clone, Copy)]
pub struct ForceStats {
    pub max_force: f64,
    /// `|sum_i m_i F_i|` over the same-body pairwise force terms, relative
    /// to `sum_i m_i |F_i|`; zero in exact arithmetic by antisymmetry.
    pub momentum_residual: f64,
}

fn pairwise_stats<const D: usize>(
    set: &ParticleSet<D>,
    pair: &[Vect<D>],
    coeff: f64,
) -> ForceStats {
    let mut momentum = Vect::<D>::zeros();
    let mut denom = 0.0;
    for i in 0..set.len() {
        let f = pair[i] * coeff;
        momentum += f * set.mass[i];
        denom += set.mass[i] * f.norm();
    }
    let momentum_residual = if denom > 0.0 { momentum.norm() / denom } else { 0.0 };
    let max_force =
        set.accelerations.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    ForceStats { max_force, momentum_residual }
}

/// Background-pressure force with static confinement (single body):
/// `F_i = -(2 p0 V_i / m_i) [ sum_j grad W_ij V_j + I(r_i) ]`,
/// written into `set.accelerations`.
pub fn pressure_force_confined<const D: usize>(
    set: &mut ParticleSet<D>,
    list: &CellList<D>,
    field: &LevelSetField<D>,
) -> Result<ForceStats> {
    let kernel = SmoothingKernel::<D>::new(set.smoothing_length)?;
    let cutoff = kernel.cutoff();
    let positions = &set.positions;
    let volume = &set.volume;
    let pair: Vec<Vect<D>> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Vect::<D>::zeros();
            list.for_each_within(positions, positions[i], cutoff, |j, rvec, _| {
                if j != i {
                    acc += kernel.gradient(rvec) * volume[j];
                }
            });
            acc
        })
        .collect();
    let band: Vec<Vect<D>> = positions
        .par_iter()
        .map(|p| field.confinement_gradient(*p))
        .collect::<Result<_>>()?;

    let coeff = -2.0 * set.p0 / set.rho0;
    for i in 0..set.len() {
        set.accelerations[i] = (pair[i] + band[i]) * coeff;
    }
    Ok(pairwise_stats(set, &pair, coeff))
}

/// Complex relaxation force for the outer fluid body (per-body background
/// pressures): fluid neighbors, contacting solid neighbors within the fluid
/// kernel support, plus the external-boundary confinement term interpolated
/// from `external_field`.
pub fn pressure_force_complex<const D: usize>(
    outer: &mut ParticleSet<D>,
    list: &CellList<D>,
    inners: &[(&ParticleSet<D>, &CellList<D>)],
    external_field: &LevelSetField<D>,
) -> Result<ForceStats> {
    let kernel = SmoothingKernel::<D>::new(outer.smoothing_length)?;
    let cutoff = kernel.cutoff();
    let positions = &outer.positions;
    let volume = &outer.volume;

    let pair: Vec<Vect<D>> = (0..outer.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Vect::<D>::zeros();
            list.for_each_within(positions, positions[i], cutoff, |j, rvec, _| {
                if j != i {
                    acc += kernel.gradient(rvec) * volume[j];
                }
            });
            acc
        })
        .collect();

    let cross: Vec<Vect<D>> = (0..outer.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Vect::<D>::zeros();
            for (solid, solid_list) in inners {
                let mut body = Vect::<D>::zeros();
                solid_list.for_each_within(&solid.positions, positions[i], cutoff, |j, rvec, _| {
                    body += kernel.gradient(rvec) * solid.volume[j];
                });
                acc += body * solid.p0;
            }
            acc
        })
        .collect();

    let band: Vec<Vect<D>> = positions
        .par_iter()
        .map(|p| external_field.confinement_gradient(*p))
        .collect::<Result<_>>()?;

    let scale = -2.0 / outer.rho0;
    let p0_f = outer.p0;
    for i in 0..outer.len() {
        outer.accelerations[i] = (pair[i] * p0_f + cross[i] + band[i] * p0_f) * scale;
    }
    Ok(pairwise_stats(outer, &pair, scale * p0_f))
}

/// Body-force time-step criterion `dt = cfl sqrt(h / max|F|)`. With all
/// forces zero the returned flag marks the body as converged and the step
/// size falls back to the `1e-12 h` force floor.
pub fn relax_time_step<const D: usize>(
    set: &ParticleSet<D>,
    cfg: &RelaxationConfig,
) -> (f64, bool) {
    let max_f = set.accelerations.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    let h = set.smoothing_length;
    if max_f == 0.0 {
        let floor = 1e-12 * h;
        (cfg.cfl * (h / floor).sqrt(), true)
    } else {
        (cfg.cfl * (h / max_f).sqrt(), false)
    }
}

/// Position update `r += F dt^2 / 2`; the advection velocity is reset to
/// zero at the start of every step, so no velocity state persists.
pub fn advance_positions<const D: usize>(set: &mut ParticleSet<D>, dt: f64) {
    let half_dt2 = 0.5 * dt * dt;
    for i in 0..set.len() {
        let a = set.accelerations[i];
        set.positions[i] += a * half_dt2;
    }
}

/// Surface bounding: pull every particle with `phi >= -dx/2` back onto the
/// half-spacing offset surface along the level-set normal. Particles whose
/// normal is degenerate are skipped this step; the count is returned.
pub fn surface_bound<const D: usize>(
    set: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
) -> Result<usize> {
    let half = 0.5 * set.spacing;
    let mut skipped = 0;
    for i in 0..set.len() {
        let p = set.positions[i];
        let phi = field.interpolate_phi(p)?;
        if phi >= -half {
            match field.normal_at(p) {
                Ok(normal) => set.positions[i] = p - normal * (phi + half),
                Err(Error::UndefinedNormal(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(skipped)
}

/// One body's per-step relaxation record.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub step: usize,
    pub dt: f64,
    pub e_all: f64,
    pub e_interface: f64,
    /// Convergence metric normalized by its first nonzero value.
    pub e_norm: f64,
    pub momentum_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RelaxOutcome {
    pub converged: bool,
    pub steps: usize,
    pub history: Vec<StepRecord>,
}

fn normalize(e: f64, reference: &mut Option<f64>) -> f64 {
    match reference {
        Some(r) => e / *r,
        None => {
            if e > 0.0 {
                *reference = Some(e);
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Single-body driver with an optional set of interface fields used only to
/// record the interface-layer energy (separate-mode bookkeeping). The
/// convergence metric is the all-particle normalized kinetic energy.
pub(crate) fn relax_body<const D: usize>(
    set: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
    cfg: &RelaxationConfig,
    layer_fields: &[&LevelSetField<D>],
) -> Result<RelaxOutcome> {
    cfg.validate()?;
    let cutoff = set.kernel_cutoff();
    let mut history = Vec::new();
    let mut reference = None;
    let mut converged = false;
    for step in 1..=cfg.max_steps {
        let list = build_cell_list(set, cutoff);
        let stats = pressure_force_confined(set, &list, field)?;
        let (dt, zero_force) = relax_time_step(set, cfg);
        advance_positions(set, dt);
        surface_bound(set, field)?;
        let e_all = kinetic_energy(set, dt, None);
        let e_interface = if layer_fields.is_empty() {
            0.0
        } else {
            let layer = interface_layer(set, layer_fields);
            kinetic_energy(set, dt, Some(&layer))
        };
        let e_norm = normalize(e_all, &mut reference);
        history.push(StepRecord {
            step,
            dt,
            e_all,
            e_interface,
            e_norm,
            momentum_residual: stats.momentum_residual,
        });
        if zero_force || (reference.is_some() && e_norm < cfg.threshold) {
            converged = true;
            break;
        }
    }
    Ok(RelaxOutcome { converged, steps: history.len(), history })
}

/// Relax one body to its converged, body-fitted state.
pub fn relax_single_body<const D: usize>(
    set: &mut ParticleSet<D>,
    field: &LevelSetField<D>,
    cfg: &RelaxationConfig,
) -> Result<RelaxOutcome> {
    relax_body(set, field, cfg, &[])
}

/// One inner solid body: particles plus the level set of its own shape.
#[derive(Debug, Clone)]
pub struct InnerBody<const D: usize> {
    pub set: ParticleSet<D>,
    pub field: LevelSetField<D>,
}

/// The outer fluid body. `field` is built from the Boolean subtraction of
/// the inner shapes from the domain; `external_field` is built from the
/// domain shape alone and carries the confinement band and bounding surface
/// for the external (non-contact) boundary.
#[derive(Debug, Clone)]
pub struct OuterBody<const D: usize> {
    pub set: ParticleSet<D>,
    pub field: LevelSetField<D>,
    pub external_field: Option<LevelSetField<D>>,
}

#[derive(Debug, Clone)]
pub struct MultiBodySystem<const D: usize> {
    pub inners: Vec<InnerBody<D>>,
    pub outer: OuterBody<D>,
}

impl<const D: usize> MultiBodySystem<D> {
    /// The inner and outer level sets must agree on the shared interface:
    /// `phi_outer = -phi_inner` within twice the cell size, at every
    /// near-surface cell of each inner grid.
    pub fn validate_interface(&self) -> Result<()> {
        for (n, inner) in self.inners.iter().enumerate() {
            let l_f = inner.field.cell_size();
            for i in 0..inner.field.cell_count() {
                let phi_in = inner.field.phi_at(i);
                if phi_in.abs() > l_f {
                    continue;
                }
                let c = inner.field.cell_center(i);
                let phi_out = match self.outer.field.interpolate_phi(c) {
                    Ok(v) => v,
                    Err(_) => {
                        return Err(Error::FieldsInconsistent(format!(
                            "inner body {n} surface leaves the outer field at {:?}",
                            c.as_slice()
                        )))
                    }
                };
                if (phi_out + phi_in).abs() > 2.0 * l_f {
                    return Err(Error::FieldsInconsistent(format!(
                        "inner body {n}: phi_outer = {phi_out} vs -phi_inner = {} at {:?}",
                        -phi_in,
                        c.as_slice()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MultiBodyOutcome {
    pub outer: RelaxOutcome,
    pub inners: Vec<RelaxOutcome>,
    pub converged: bool,
    pub steps: usize,
}

/// Physics-driven complex relaxation of a multi-body system. Each step
/// relaxes the inner solids first (confined force, step, update, bounding),
/// then the outer fluid against the updated solids (complex force with the
/// external confinement band, step, update, bounding onto the non-contact
/// surface), then rebuilds the neighbor configurations. Terminates on joint
/// convergence of all bodies or after `max_steps`.
pub fn relax_complex<const D: usize>(
    system: &mut MultiBodySystem<D>,
    cfg: &RelaxationConfig,
) -> Result<MultiBodyOutcome> {
    cfg.validate()?;
    let MultiBodySystem { inners, outer } = system;
    if inners.is_empty() {
        let outcome = relax_body(&mut outer.set, &outer.field, cfg, &[])?;
        return Ok(MultiBodyOutcome {
            converged: outcome.converged,
            steps: outcome.steps,
            inners: Vec::new(),
            outer: outcome,
        });
    }
    system.validate_interface()?;
    let MultiBodySystem { inners, outer } = system;
    let external_field = outer.external_field.as_ref().ok_or_else(|| {
        Error::ShapeValidation(
            "complex relaxation of a multi-body system needs the external-boundary field".into(),
        )
    })?;

    let fluid_cutoff = outer.set.kernel_cutoff();
    let inner_cutoffs: Vec<f64> =
        inners.iter().map(|b| b.set.kernel_cutoff().max(fluid_cutoff)).collect();
    let mut inner_lists: Vec<CellList<D>> =
        inners.iter().zip(&inner_cutoffs).map(|(b, &c)| build_cell_list(&b.set, c)).collect();
    let mut outer_list = build_cell_list(&outer.set, fluid_cutoff);

    let n_inner = inners.len();
    let mut inner_histories: Vec<Vec<StepRecord>> = vec![Vec::new(); n_inner];
    let mut inner_refs_e: Vec<Option<f64>> = vec![None; n_inner];
    let mut outer_history: Vec<StepRecord> = Vec::new();
    let mut outer_ref_e: Option<f64> = None;
    let mut converged = false;
    let mut steps = 0;

    for step in 1..=cfg.max_steps {
        steps = step;

        for (b, inner) in inners.iter_mut().enumerate() {
            let stats = pressure_force_confined(&mut inner.set, &inner_lists[b], &inner.field)?;
            let (dt, _) = relax_time_step(&inner.set, cfg);
            advance_positions(&mut inner.set, dt);
            surface_bound(&mut inner.set, &inner.field)?;
            let e_all = kinetic_energy(&inner.set, dt, None);
            let e_norm = normalize(e_all, &mut inner_refs_e[b]);
            inner_histories[b].push(StepRecord {
                step,
                dt,
                e_all,
                e_interface: 0.0,
                e_norm,
                momentum_residual: stats.momentum_residual,
            });
        }

        // The fluid reacts to the updated solid positions this same step.
        for (b, inner) in inners.iter().enumerate() {
            inner_lists[b] = build_cell_list(&inner.set, inner_cutoffs[b]);
        }

        let contact: Vec<(&ParticleSet<D>, &CellList<D>)> =
            inners.iter().map(|b| &b.set).zip(inner_lists.iter()).collect();
        let stats = pressure_force_complex(&mut outer.set, &outer_list, &contact, external_field)?;
        let (dt, zero_force) = relax_time_step(&outer.set, cfg);
        advance_positions(&mut outer.set, dt);
        surface_bound(&mut outer.set, external_field)?;
        outer_list = build_cell_list(&outer.set, fluid_cutoff);

        let inner_fields: Vec<&LevelSetField<D>> = inners.iter().map(|b| &b.field).collect();
        let layer = interface_layer(&outer.set, &inner_fields);
        let e_all = kinetic_energy(&outer.set, dt, None);
        let e_interface = kinetic_energy(&outer.set, dt, Some(&layer));
        let e_norm = normalize(e_interface, &mut outer_ref_e);
        outer_history.push(StepRecord {
            step,
            dt,
            e_all,
            e_interface,
            e_norm,
            momentum_residual: stats.momentum_residual,
        });

        // The configured threshold applies to the normalized interface
        // kinetic energy; the inner solids keep relaxing in the same loop
        // until the system reaches it.
        if zero_force || (outer_ref_e.is_some() && e_norm < cfg.threshold) {
            converged = true;
            break;
        }
    }

    Ok(MultiBodyOutcome {
        outer: RelaxOutcome {
            converged,
            steps,
            history: outer_history,
        },
        inners: inner_histories
            .into_iter()
            .map(|history| RelaxOutcome { converged, steps: history.len(), history })
            .collect(),
        converged,
        steps,
    })
}

/// Baseline: every body undergoes an independent particle generation
/// process (its own confinement band and bounding surface, no cross-body
/// coupling). Interface-layer energies are still recorded on the outer
/// body's history for comparison against complex relaxation.
pub fn relax_separate<const D: usize>(
    system: &mut MultiBodySystem<D>,
    cfg: &RelaxationConfig,
) -> Result<MultiBodyOutcome> {
    cfg.validate()?;
    let MultiBodySystem { inners, outer } = system;
    let mut inner_outcomes = Vec::with_capacity(inners.len());
    for inner in inners.iter_mut() {
        inner_outcomes.push(relax_body(&mut inner.set, &inner.field, cfg, &[])?);
    }
    let inner_fields: Vec<&LevelSetField<D>> = inners.iter().map(|b| &b.field).collect();
    let outer_outcome = relax_body(&mut outer.set, &outer.field, cfg, &inner_fields)?;
    let converged =
        outer_outcome.converged && inner_outcomes.iter().all(|o| o.converged);
    let steps = outer_outcome.steps;
    Ok(MultiBodyOutcome { outer: outer_outcome, inners: inner_outcomes, converged, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::particles::{lattice_seed, BodyRole};
    use nalgebra::Vector2;

    fn set_from_positions(positions: Vec<Vector2<f64>>, dx: f64, h: f64) -> ParticleSet<2> {
        let n = positions.len();
        let vol = dx * dx;
        ParticleSet {
            body_id: 0,
            role: BodyRole::OuterFluid,
            accelerations: vec![Vector2::zeros(); n],
            volume: vec![vol; n],
            mass: vec![vol; n],
            positions,
            spacing: dx,
            smoothing_length: h,
            rho0: 1.0,
            p0: 1.0,
        }
    }

    /// Large box field with a fluid-kernel confinement band; particles near
    /// the center are far from every wall.
    fn big_box_field(l_f: f64, h: f64) -> LevelSetField<2> {
        let shape = Shape::cuboid(Vector2::new(-5.0, -5.0), Vector2::new(5.0, 5.0)).unwrap();
        let kernel = SmoothingKernel::<2>::new(h).unwrap();
        let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
        let mut field = LevelSetField::build(
            &shape,
            (Vector2::new(-5.0 - pad, -5.0 - pad), Vector2::new(5.0 + pad, 5.0 + pad)),
            l_f,
        )
        .unwrap();
        field.precompute_confinement(&kernel, 0.75 * l_f).unwrap();
        field
    }

    #[test]
    fn isolated_deep_particle_feels_no_force() {
        let dx = 0.1;
        let h = 1.3 * dx;
        let field = big_box_field(0.05, h);
        let mut set = set_from_positions(vec![Vector2::new(0.3, -0.2)], dx, h);
        let list = build_cell_list(&set, set.kernel_cutoff());
        pressure_force_confined(&mut set, &list, &field).unwrap();
        assert_eq!(set.accelerations[0], Vector2::zeros());
    }

    #[test]
    fn pair_forces_are_equal_and_opposite() {
        let dx = 0.1;
        let h = 1.3 * dx;
        let field = big_box_field(0.05, h);
        let mut set = set_from_positions(
            vec![Vector2::new(0.0, 0.0), Vector2::new(0.07, 0.11)],
            dx,
            h,
        );
        let list = build_cell_list(&set, set.kernel_cutoff());
        let stats = pressure_force_confined(&mut set, &list, &field).unwrap();
        assert_eq!(set.accelerations[0], -set.accelerations[1]);
        assert!(set.accelerations[0].norm() > 0.0);
        assert!(stats.momentum_residual <= 1e-10);
        // The force pushes the particles apart.
        let sep = set.positions[0] - set.positions[1];
        assert!(set.accelerations[0].dot(&sep) > 0.0);
    }

    #[test]
    fn interior_lattice_particle_force_cancels() {
        let dx = 0.1;
        let h = 1.3 * dx;
        let field = big_box_field(0.05, h);
        let mut positions = Vec::new();
        for i in -4..=4 {
            for j in -4..=4 {
                positions.push(Vector2::new(i as f64 * dx, j as f64 * dx));
            }
        }
        let center = positions.iter().position(|p| *p == Vector2::zeros()).unwrap();
        let mut set = set_from_positions(positions, dx, h);
        let list = build_cell_list(&set, set.kernel_cutoff());
        pressure_force_confined(&mut set, &list, &field).unwrap();
        let scale = 2.0 * set.p0 / set.rho0 / dx;
        assert!(set.accelerations[center].norm() <= 1e-10 * scale);
    }

    #[test]
    fn complex_force_reduces_to_confined_away_from_bodies() {
        let dx = 0.1;
        let h = 1.3 * dx;
        let field = big_box_field(0.05, h);
        let positions =
            vec![Vector2::new(0.0, 0.0), Vector2::new(0.08, 0.03), Vector2::new(-0.05, 0.09)];
        let mut confined = set_from_positions(positions.clone(), dx, h);
        let list = build_cell_list(&confined, confined.kernel_cutoff());
        pressure_force_confined(&mut confined, &list, &field).unwrap();

        let mut complex = set_from_positions(positions, dx, h);
        let list = build_cell_list(&complex, complex.kernel_cutoff());
        pressure_force_complex(&mut complex, &list, &[], &field).unwrap();
        for i in 0..3 {
            assert_eq!(confined.accelerations[i], complex.accelerations[i]);
        }
    }

    #[test]
    fn fluid_particle_between_mirrored_walls_is_balanced() {
        let dx = 0.1;
        let h = 1.3 * dx;
        let field = big_box_field(0.05, h);
        // Two vertical solid walls mirrored about x = 0.
        let mut left = Vec::new();
        let mut right = Vec::new();
        for j in -5..=5 {
            for col in 0..3 {
                let x = 0.15 + col as f64 * dx;
                left.push(Vector2::new(-x, j as f64 * dx));
                right.push(Vector2::new(x, j as f64 * dx));
            }
        }
        let solid_h = 1.05 * dx;
        let left = set_from_positions(left, dx, solid_h);
        let right = set_from_positions(right, dx, solid_h);
        let mut fluid = set_from_positions(vec![Vector2::new(0.0, 0.0)], dx, h);
        let cutoff = fluid.kernel_cutoff();
        let left_list = build_cell_list(&left, cutoff);
        let right_list = build_cell_list(&right, cutoff);
        let fluid_list = build_cell_list(&fluid, cutoff);
        pressure_force_complex(
            &mut fluid,
            &fluid_list,
            &[(&left, &left_list), (&right, &right_list)],
            &field,
        )
        .unwrap();
        assert!(fluid.accelerations[0].norm() <= 1e-12 / dx);
    }

    #[test]
    fn aligned_half_lattices_complete_each_other() {
        let dx = 0.1;
        let field = big_box_field(0.05, 1.3 * dx);
        // Solid fills y < 0, fluid fills y > 0, same lattice.
        let mut solid = Vec::new();
        let mut fluid = Vec::new();
        for i in -6..=6 {
            for j in 1..=5 {
                let x = i as f64 * dx;
                solid.push(Vector2::new(x, -(j as f64 - 0.5) * dx));
                fluid.push(Vector2::new(x, (j as f64 - 0.5) * dx));
            }
        }
        let interface = fluid
            .iter()
            .position(|p| *p == Vector2::new(0.0, 0.05))
            .unwrap();
        let solid = set_from_positions(solid, dx, 1.05 * dx);
        let mut fluid = set_from_positions(fluid, dx, 1.3 * dx);
        let cutoff = fluid.kernel_cutoff();
        let solid_list = build_cell_list(&solid, cutoff);
        let fluid_list = build_cell_list(&fluid, cutoff);
        pressure_force_complex(&mut fluid, &fluid_list, &[(&solid, &solid_list)], &field)
            .unwrap();
        let scale = 2.0 * fluid.p0 / fluid.rho0 / dx;
        assert!(
            fluid.accelerations[interface].norm() <= 1e-10 * scale,
            "interface residual {}",
            fluid.accelerations[interface].norm()
        );
    }

    #[test]
    fn time_step_examples() {
        let cfg = RelaxationConfig::default();
        let mut set = set_from_positions(vec![Vector2::zeros()], 0.1, 1.0);
        set.accelerations[0] = Vector2::new(1.0, 0.0);
        let (dt, converged) = relax_time_step(&set, &cfg);
        assert_eq!(dt, 0.25);
        assert!(!converged);

        set.smoothing_length = 0.01;
        set.accelerations[0] = Vector2::new(0.0, 100.0);
        let (dt, _) = relax_time_step(&set, &cfg);
        assert!((dt - 2.5e-3).abs() < 1e-18);

        set.accelerations[0] = Vector2::zeros();
        let (_, converged) = relax_time_step(&set, &cfg);
        assert!(converged);
    }

    #[test]
    fn advance_positions_examples() {
        let mut set = set_from_positions(
            vec![Vector2::new(1.0, 2.0), Vector2::new(-1.0, 2.0)],
            0.1,
            0.13,
        );
        advance_positions(&mut set, 0.5);
        assert_eq!(set.positions[0], Vector2::new(1.0, 2.0));

        set.accelerations[0] = Vector2::new(2.0, 0.0);
        set.accelerations[1] = Vector2::new(-2.0, 0.0);
        advance_positions(&mut set, 1.0);
        assert_eq!(set.positions[0], Vector2::new(2.0, 2.0));
        assert_eq!(set.positions[1], Vector2::new(-2.0, 2.0));
    }

    /// Field whose top face lies at y = 0.17, linear around it.
    fn shelf_field() -> LevelSetField<2> {
        let shape = Shape::cuboid(Vector2::new(0.0, -1.0), Vector2::new(1.0, 0.17)).unwrap();
        LevelSetField::build(
            &shape,
            (Vector2::new(-0.4, -1.4), Vector2::new(1.4, 0.57)),
            0.025,
        )
        .unwrap()
    }

    #[test]
    fn surface_bounding_projects_and_leaves_interior_alone() {
        let field = shelf_field();
        let mut set = set_from_positions(vec![Vector2::new(0.5, 0.2)], 0.1, 0.13);
        let skipped = surface_bound(&mut set, &field).unwrap();
        assert_eq!(skipped, 0);
        assert!((set.positions[0] - Vector2::new(0.5, 0.12)).norm() < 1e-12);

        // phi = -0.06 < -dx/2: untouched.
        let mut set = set_from_positions(vec![Vector2::new(0.5, 0.11)], 0.1, 0.13);
        surface_bound(&mut set, &field).unwrap();
        assert_eq!(set.positions[0], Vector2::new(0.5, 0.11));

        // phi = -dx/2 exactly: zero-length shift.
        let mut set = set_from_positions(vec![Vector2::new(0.5, 0.12)], 0.1, 0.13);
        surface_bound(&mut set, &field).unwrap();
        assert!((set.positions[0] - Vector2::new(0.5, 0.12)).norm() < 1e-14);
    }

    #[test]
    fn equilibrated_set_converges_immediately() {
        let dx = 0.1;
        let h = 1.3 * dx;
        let field = big_box_field(0.05, h);
        let mut set = set_from_positions(vec![Vector2::new(0.0, 0.0)], dx, h);
        let outcome = relax_single_body(&mut set, &field, &RelaxationConfig::default()).unwrap();
        assert!(outcome.converged);
        assert!(outcome.steps <= 2);
    }

    #[test]
    fn p0_rescaling_leaves_displacements_unchanged() {
        // Scaling p0 by 4 scales forces by 4 and dt by 1/2 exactly, so the
        // per-step displacement is bit-identical.
        let shape = Shape::circle(Vector2::new(0.0, 0.0), 0.5).unwrap();
        let l_f = 0.025;
        let kernel = SmoothingKernel::<2>::new(1.3 * 0.05).unwrap();
        let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
        let mut field = LevelSetField::build(
            &shape,
            (Vector2::new(-0.5 - pad, -0.5 - pad), Vector2::new(0.5 + pad, 0.5 + pad)),
            l_f,
        )
        .unwrap();
        field.precompute_confinement(&kernel, 0.75 * l_f).unwrap();

        let run_one_step = |p0: f64| -> Vec<Vector2<f64>> {
            let mut set = lattice_seed(&field, 0.05, BodyRole::OuterFluid).unwrap();
            set.p0 = p0;
            let list = build_cell_list(&set, set.kernel_cutoff());
            pressure_force_confined(&mut set, &list, &field).unwrap();
            let (dt, _) = relax_time_step(&set, &RelaxationConfig::default());
            advance_positions(&mut set, dt);
            set.positions
        };
        let base = run_one_step(1.0);
        let scaled = run_one_step(4.0);
        assert_eq!(base, scaled);
    }

    #[test]
    fn inconsistent_fields_are_rejected() {
        // Outer field built from the domain alone (no subtraction) cannot
        // agree with the inner field on the interface.
        let domain = Shape::cuboid(Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0)).unwrap();
        let disk = Shape::circle(Vector2::new(0.5, 0.5), 0.2).unwrap();
        let l_f = 0.02;
        let bounds = (Vector2::new(-0.4, -0.4), Vector2::new(1.4, 1.4));
        let outer_field = LevelSetField::build(&domain, bounds, l_f).unwrap();
        let inner_field = LevelSetField::build(
            &disk,
            (Vector2::new(0.1, 0.1), Vector2::new(0.9, 0.9)),
            l_f,
        )
        .unwrap();
        let outer_set = lattice_seed(&outer_field, 0.04, BodyRole::OuterFluid).unwrap();
        let inner_set = lattice_seed(&inner_field, 0.04, BodyRole::InnerSolid).unwrap();
        let mut system = MultiBodySystem {
            inners: vec![InnerBody { set: inner_set, field: inner_field }],
            outer: OuterBody { set: outer_set, field: outer_field, external_field: None },
        };
        let err = relax_complex(&mut system, &RelaxationConfig::default()).unwrap_err();
        assert!(matches!(err, Error::FieldsInconsistent(_)));
    }
}
