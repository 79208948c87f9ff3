//! Scratch probe: relax a wall-bounded strip and inspect the final layer
//! structure, per-layer forces, and the energy plateau.

use nalgebra::Vector2;
use sphpack::geometry::{LevelSetField, Shape};
use sphpack::kernel::SmoothingKernel;
use sphpack::particles::{build_cell_list, lattice_seed, BodyRole};
use sphpack::relaxation::{pressure_force_confined, relax_single_body, RelaxationConfig};

fn main() {
    let dx = 0.04f64;
    let l_f = dx / 2.0;
    let h = 1.3 * dx;
    let kernel = SmoothingKernel::<2>::new(h).unwrap();
    // Strip 2 wide, 0.4 tall (10 layers); interior below y = 0.
    let shape = Shape::cuboid(Vector2::new(0.0, -0.4), Vector2::new(2.0, 0.0)).unwrap();
    let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
    let mut field = LevelSetField::build(
        &shape,
        (Vector2::new(-pad, -0.4 - pad), Vector2::new(2.0 + pad, pad)),
        l_f,
    )
    .unwrap();
    field.precompute_confinement(&kernel, 0.75 * l_f).unwrap();

    let mut set = lattice_seed(&field, dx, BodyRole::OuterFluid).unwrap();
    println!("{} particles", set.len());
    let cfg = RelaxationConfig { max_steps: 4000, threshold: 1e-6, ..Default::default() };
    let outcome = relax_single_body(&mut set, &field, &cfg).unwrap();
    println!("converged: {}, steps {}", outcome.converged, outcome.steps);
    for r in outcome.history.iter().step_by(400) {
        println!("  step {:5} E/E1 {:9.3e}", r.step, r.e_norm);
    }
    println!("  last E/E1 {:9.3e}", outcome.history.last().unwrap().e_norm);

    // Final forces (recompute) and a column profile near x = 1.
    let list = build_cell_list(&set, set.kernel_cutoff());
    pressure_force_confined(&mut set, &list, &field).unwrap();
    let mut column: Vec<(f64, f64)> = set
        .positions
        .iter()
        .zip(&set.accelerations)
        .filter(|(p, _)| (p.x - 1.0).abs() < 0.6 * dx)
        .map(|(p, a)| (p.y, a.y))
        .collect();
    column.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("column near x=1 (y/dx, F_y), top 6 layers:");
    for (y, fy) in column.iter().take(6) {
        println!("  y = {:7.3} dx   F_y = {:+9.3e}", y / dx, fy);
    }
    let max_f = set.accelerations.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    let which = set
        .accelerations
        .iter()
        .position(|a| a.norm() == max_f)
        .unwrap();
    println!(
        "max |F| = {max_f:.3e} at y = {:.3} dx, phi = {:.3} dx",
        set.positions[which].y / dx,
        field.interpolate_phi(set.positions[which]).unwrap() / dx
    );
}
