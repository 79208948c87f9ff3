//! Scratch probe: does the smoothing-length factor change the bounded-layer
//! plateau? Compares h = 1.05 dx (solid) with h = 1.3 dx (fluid) on the
//! criterion-4 disk.

use nalgebra::Vector2;
use sphpack::geometry::{LevelSetField, Shape};
use sphpack::kernel::SmoothingKernel;
use sphpack::particles::{build_cell_list, lattice_seed, BodyRole};
use sphpack::relaxation::{pressure_force_confined, relax_single_body, RelaxationConfig};

fn main() {
    let dx = 1.0 / 25.0;
    let l_f = dx / 2.0;
    let disk = Shape::circle(Vector2::new(0.0, 0.0), 1.0).unwrap();
    for (role, h_factor) in [(BodyRole::InnerSolid, 1.05), (BodyRole::OuterFluid, 1.3)] {
        let h = h_factor * dx;
        let kernel = SmoothingKernel::<2>::new(h).unwrap();
        let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
        let mut field = LevelSetField::build(
            &disk,
            (Vector2::repeat(-1.0 - pad), Vector2::repeat(1.0 + pad)),
            l_f,
        )
        .unwrap();
        field.precompute_confinement(&kernel, 0.75 * l_f).unwrap();
        let mut set = lattice_seed(&field, dx, role).unwrap();
        let cfg = RelaxationConfig { max_steps: 5000, threshold: 1e-3, ..Default::default() };
        let t0 = std::time::Instant::now();
        let outcome = relax_single_body(&mut set, &field, &cfg).unwrap();
        let last = outcome.history.last().unwrap();
        println!(
            "h = {h_factor} dx: converged {} at step {} in {:.1}s, terminal E/E1 = {:9.3e}",
            outcome.converged,
            outcome.steps,
            t0.elapsed().as_secs_f64(),
            last.e_norm
        );

        // Density spread over the full-support interior.
        let list = build_cell_list(&set, set.kernel_cutoff());
        let density = sphpack::diagnostics::density_summation(&set, &list, &[]).unwrap();
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
            "    density spread {:.3}% over {} interior particles; worst phi {:.4} dx",
            100.0 * (max - min) / mean,
            interior.len(),
            set.positions
                .iter()
                .map(|p| field.interpolate_phi(*p).unwrap())
                .fold(f64::NEG_INFINITY, f64::max)
                / dx
        );
        // Where is the terminal max force?
        pressure_force_confined(&mut set, &list, &field).unwrap();
        let max_f = set.accelerations.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
        let at = set.accelerations.iter().position(|a| a.norm() == max_f).unwrap();
        println!(
            "    terminal max |F| = {max_f:.3e} at phi = {:.3} dx",
            field.interpolate_phi(set.positions[at]).unwrap() / dx
        );
    }
}
