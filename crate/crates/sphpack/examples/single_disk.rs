//! Relax a single disk body to a body-fitted, isotropic distribution and
//! report the convergence history, bounding safety and density uniformity.
//!
//! ```bash
//! cargo run --release --example single_disk
//! ```

use nalgebra::Vector2;
use sphpack::diagnostics::{density_summation, kgs_single};
use sphpack::geometry::{LevelSetField, Shape};
use sphpack::kernel::SmoothingKernel;
use sphpack::particles::{build_cell_list, lattice_seed, BodyRole};
use sphpack::relaxation::{relax_single_body, RelaxationConfig};

fn main() -> sphpack::Result<()> {
    let radius = 1.0;
    let dx = 1.0 / 25.0;
    let l_f = dx / 2.0;

    let disk = Shape::circle(Vector2::new(0.0, 0.0), radius)?;
    let kernel = SmoothingKernel::<2>::new(1.3 * dx)?;
    let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
    let half = radius + pad;
    let mut field = LevelSetField::build(
        &disk,
        (Vector2::new(-half, -half), Vector2::new(half, half)),
        l_f,
    )?;
    field.precompute_confinement(&kernel, 0.75 * l_f)?;

    let mut set = lattice_seed(&field, dx, BodyRole::OuterFluid)?;
    println!("seeded {} particles at dx = {dx}", set.len());

    let cfg = RelaxationConfig { threshold: 1e-4, max_steps: 5000, ..Default::default() };
    let outcome = relax_single_body(&mut set, &field, &cfg)?;
    println!(
        "relaxation {} after {} steps",
        if outcome.converged { "converged" } else { "did NOT converge" },
        outcome.steps
    );
    for r in outcome.history.iter().step_by(outcome.steps.div_ceil(20).max(1)) {
        println!("  step {:5}  dt {:9.3e}  E {:9.3e}  E/E1 {:9.3e}", r.step, r.dt, r.e_all, r.e_norm);
    }
    if let Some(last) = outcome.history.last() {
        println!("terminal normalized energy {:.3e}", last.e_norm);
        println!("max momentum residual {:.3e}", outcome
            .history
            .iter()
            .map(|r| r.momentum_residual)
            .fold(0.0f64, f64::max));
    }

    // Bounding safety: every particle at least half a spacing inside.
    let worst_phi = set
        .positions
        .iter()
        .map(|p| field.interpolate_phi(*p).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    println!("max phi after bounding: {worst_phi:.5} (limit {:.5})", -dx / 2.0 + 0.1 * dx);

    // Density spread over the interior (full kernel support inside).
    let list = build_cell_list(&set, set.kernel_cutoff());
    let density = density_summation(&set, &list, &[])?;
    let interior: Vec<f64> = set
        .positions
        .iter()
        .zip(&density)
        .filter(|(p, _)| field.interpolate_phi(**p).unwrap() <= -set.kernel_cutoff())
        .map(|(_, rho)| *rho)
        .collect();
    let (min, max) = interior
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = interior.iter().sum::<f64>() / interior.len() as f64;
    println!(
        "interior density: mean {mean:.5}, spread {:.3}% over {} particles",
        100.0 * (max - min) / mean,
        interior.len()
    );

    let kgs = kgs_single(&set, &list)?;
    let mean_kgs_dx =
        kgs.iter().map(|g| g.norm()).sum::<f64>() / kgs.len() as f64 * dx;
    println!("mean |KGS| dx = {mean_kgs_dx:.3e}");
    Ok(())
}
