//! Scratch probe: disk-in-box complex vs separate relaxation, interface
//! metrics (criterion-5 setup at dx = 1/50).

use std::path::Path;

use sphpack::io::{parse_config, run_relax};

fn energy_tail(dir: &str) -> (f64, f64) {
    let text = std::fs::read_to_string(format!("{dir}/energy_history.csv")).unwrap();
    let mut first_interface = None;
    let mut last_interface = 0.0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let e_int: f64 = fields[3].parse().unwrap();
        if first_interface.is_none() && e_int > 0.0 {
            first_interface = Some(e_int);
        }
        last_interface = e_int;
    }
    (first_interface.unwrap_or(0.0), last_interface)
}

fn main() {
    for mode in ["complex", "separate"] {
        let cfg_text = format!(
            "\
dx = 0.02
mode = {mode}
max_steps = 4000
threshold = 1e-4
output_dir = target/probe_complex_{mode}

[domain]
shape = box
min = 0, 0
max = 1, 1

[body.disk]
shape = circle
center = 0.5, 0.5
radius = 0.25
"
        );
        let cfg = parse_config(&cfg_text, Path::new(".")).unwrap();
        let t0 = std::time::Instant::now();
        let artifacts = run_relax(&cfg).unwrap();
        let (e_int_first, e_int_last) = energy_tail(&format!("target/probe_complex_{mode}"));
        println!(
            "{mode:9}: converged {} in {:5.1}s, particles {:?}, gap cells {}, \
             interface E first {:9.3e} last {:9.3e} ratio {:9.3e}",
            artifacts.converged,
            t0.elapsed().as_secs_f64(),
            artifacts.particle_counts,
            artifacts.gap_cells,
            e_int_first,
            e_int_last,
            e_int_last / e_int_first,
        );

        // Interface-layer mean |KGS| dx from the particles file.
        let text =
            std::fs::read_to_string(format!("target/probe_complex_{mode}/particles.csv")).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let body: usize = fields[0].parse().unwrap();
            let kgs_mag: f64 = fields[6].parse().unwrap();
            let layer: i32 = fields[8].parse().unwrap();
            if body == 0 && layer == 1 {
                sum += kgs_mag;
                count += 1;
            }
        }
        println!(
            "{mode:9}: interface layer {} particles, mean |KGS| dx = {:9.3e}",
            count,
            sum / count as f64 * 0.02
        );
    }
}
