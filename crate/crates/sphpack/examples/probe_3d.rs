//! Scratch probe: 3D sphere-in-cube complex vs separate at dx = 0.02.

use std::path::Path;

use sphpack::io::{parse_config, run_relax};

fn interface_kgs(dir: &str) -> (usize, f64) {
    let text = std::fs::read_to_string(format!("{dir}/particles.csv")).unwrap();
    let mut sum = 0.0;
    let mut count = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let body: usize = fields[0].parse().unwrap();
        let kgs_mag: f64 = fields[8].parse().unwrap();
        let layer: i32 = fields[11].parse().unwrap();
        if body == 0 && layer == 1 {
            sum += kgs_mag;
            count += 1;
        }
    }
    (count, sum / count as f64 * 0.02)
}

fn main() {
    for (mode, steps) in [("complex", 1500), ("separate", 1500)] {
        let cfg_text = format!(
            "\
dx = 0.02
mode = {mode}
max_steps = {steps}
threshold = 1e-4
output_dir = target/probe_3d_{mode}

[domain]
shape = box
min = 0, 0, 0
max = 1, 1, 1

[body.ball]
shape = sphere
center = 0.5, 0.5, 0.5
radius = 0.15
"
        );
        let cfg = parse_config(&cfg_text, Path::new(".")).unwrap();
        let t0 = std::time::Instant::now();
        let artifacts = run_relax(&cfg).unwrap();
        let (layer_count, mean_kgs_dx) = interface_kgs(&format!("target/probe_3d_{mode}"));
        println!(
            "{mode:9}: {:6.1}s, converged {}, counts {:?}, layer {} particles, mean |KGS| dx = {:.4e}",
            t0.elapsed().as_secs_f64(),
            artifacts.converged,
            artifacts.particle_counts,
            layer_count,
            mean_kgs_dx
        );
    }
}
