//! Scratch probe: density-spread profile vs interior cut depth, and the
//! long-run energy plateau for the criterion-4 disk.

use nalgebra::Vector2;
use sphpack::geometry::{LevelSetField, Shape};
use sphpack::kernel::SmoothingKernel;
use sphpack::particles::{build_cell_list, lattice_seed, BodyRole};
use sphpack::relaxation::{relax_single_body, RelaxationConfig};

fn main() {
    let dx = 1.0 / 25.0;
    let l_f = dx / 2.0;
    let h = 1.3 * dx;
    let disk = Shape::circle(Vector2::new(0.0, 0.0), 1.0).unwrap();
    let kernel = SmoothingKernel::<2>::new(h).unwrap();
    let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
    let mut field = LevelSetField::build(
        &disk,
        (Vector2::repeat(-1.0 - pad), Vector2::repeat(1.0 + pad)),
        l_f,
    )
    .unwrap();
    field.precompute_confinement(&kernel, 0.75 * l_f).unwrap();
    let mut set = lattice_seed(&field, dx, BodyRole::OuterFluid).unwrap();
    let cfg = RelaxationConfig { max_steps: 20_000, threshold: 1e-4, ..Default::default() };
    let outcome = relax_single_body(&mut set, &field, &cfg).unwrap();
    for r in outcome.history.iter().step_by(2000) {
        println!("step {:6}  E/E1 {:9.3e}", r.step, r.e_norm);
    }
    println!("last  E/E1 {:9.3e}", outcome.history.last().unwrap().e_norm);

    let list = build_cell_list(&set, set.kernel_cutoff());
    let density = sphpack::diagnostics::density_summation(&set, &list, &[]).unwrap();
    let cutoff = set.kernel_cutoff();
    for extra in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
        let cut = -(cutoff + extra * dx);
        let interior: Vec<f64> = set
            .positions
            .iter()
            .zip(&density)
            .filter(|(p, _)| field.interpolate_phi(**p).unwrap() <= cut)
            .map(|(_, rho)| *rho)
            .collect();
        if interior.is_empty() {
            continue;
        }
        let (min, max) = interior
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        println!(
            "cut phi <= -(2h + {extra:3.1} dx): spread {:6.3}% over {:4} particles (mean {mean:.5})",
            100.0 * (max - min) / mean,
            interior.len()
        );
    }
}
