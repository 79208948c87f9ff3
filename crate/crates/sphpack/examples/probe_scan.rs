//! Scratch probe: plateau level of the wall strip and a small disk as a
//! function of the level-set resolution and Heaviside half-width.

use nalgebra::Vector2;
use sphpack::geometry::{LevelSetField, Shape};
use sphpack::kernel::SmoothingKernel;
use sphpack::particles::{lattice_seed, BodyRole};
use sphpack::relaxation::{relax_single_body, RelaxationConfig};

fn plateau(shape: &Shape<2>, dx: f64, lf_factor: f64, eps_factor: f64, steps: usize) -> (f64, bool) {
    let l_f = dx * lf_factor;
    let h = 1.3 * dx;
    let kernel = SmoothingKernel::<2>::new(h).unwrap();
    let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
    let (bmin, bmax) = shape.bounding_box();
    let mut field = LevelSetField::build(
        shape,
        (bmin - Vector2::repeat(pad), bmax + Vector2::repeat(pad)),
        l_f,
    )
    .unwrap();
    field.precompute_confinement(&kernel, eps_factor * l_f).unwrap();
    let mut set = lattice_seed(&field, dx, BodyRole::OuterFluid).unwrap();
    let cfg = RelaxationConfig { max_steps: steps, threshold: 1e-4, ..Default::default() };
    let outcome = relax_single_body(&mut set, &field, &cfg).unwrap();
    (outcome.history.last().unwrap().e_norm, outcome.converged)
}

fn main() {
    let dx = 0.04f64;
    let strip = Shape::cuboid(Vector2::new(0.0, -0.4), Vector2::new(2.0, 0.0)).unwrap();
    let disk = Shape::circle(Vector2::new(0.0, 0.0), 0.5).unwrap();
    for (lf_factor, eps_factor) in [
        (0.5, 0.75),
        (0.5, 0.375),
        (0.5, 0.1),
        (1.0, 0.75),
        (1.0, 0.5),
        (1.0, 0.25),
    ] {
        let (e_strip, c_strip) = plateau(&strip, dx, lf_factor, eps_factor, 3000);
        let (e_disk, c_disk) = plateau(&disk, dx, lf_factor, eps_factor, 3000);
        println!(
            "lf = {lf_factor:4.2} dx, eps = {eps_factor:5.3} lf:  strip E/E1 = {e_strip:9.3e} ({})  disk E/E1 = {e_disk:9.3e} ({})",
            if c_strip { "conv" } else { "plat" },
            if c_disk { "conv" } else { "plat" },
        );
    }
}
