use nalgebra::Vector2;
use sphpack::geometry::{heaviside, LevelSetField, Shape};
use sphpack::kernel::SmoothingKernel;

fn quad(depth: f64, kernel: &SmoothingKernel<2>, eps: f64, step: f64) -> Vector2<f64> {
    let cutoff = kernel.cutoff();
    let n = (2.0 * cutoff / step).ceil() as i64;
    let mut acc = Vector2::zeros();
    for i in 0..n {
        for j in 0..n {
            let ox = -cutoff + (i as f64 + 0.5) * step;
            let oy = -cutoff + (j as f64 + 0.5) * step;
            let sample_y = -depth + oy;
            if sample_y <= 0.0 { continue; }
            acc += kernel.gradient(Vector2::new(-ox, -oy)) * heaviside(sample_y, eps) * step * step;
        }
    }
    acc
}

fn main() {
    let l_f = 0.05;
    let kernel = SmoothingKernel::<2>::new(0.13).unwrap();
    let eps = 0.75 * l_f;
    let shape = Shape::cuboid(Vector2::new(0.0, -4.0), Vector2::new(4.0, 0.0)).unwrap();
    let pad = ((2.0 * kernel.cutoff() + 4.0 * l_f) / l_f).ceil() * l_f;
    let mut field = LevelSetField::build(
        &shape,
        (Vector2::new(-pad, -4.0 - pad), Vector2::new(4.0 + pad, pad)),
        l_f,
    ).unwrap();
    field.precompute_confinement(&kernel, eps).unwrap();
    let probe_x = 2.0 + 0.5 * l_f;
    for k in 1..=5 {
        let depth = (k as f64 - 0.5) * l_f;
        let p = Vector2::new(probe_x, -depth);
        let mut best = (f64::INFINITY, 0usize);
        for i in 0..field.cell_count() {
            let d = (field.cell_center(i) - p).norm();
            if d < best.0 { best = (d, i); }
        }
        let stored = field.band_value(best.1).unwrap();
        let oracle = quad(depth, &kernel, eps, l_f / 8.0);
        println!("depth {:4.2} lf: stored {:9.4} oracle {:9.4} rel {:6.3}%",
            depth / l_f, stored.y, oracle.y, 100.0 * (stored - oracle).norm() / oracle.norm());
    }
}
