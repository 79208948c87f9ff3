//! End-to-end command-line interface tests: subcommands, exit codes, and
//! the files a run leaves behind.

use sphpack::cli::cli_main;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("sphpack".to_string()).chain(args.iter().map(|s| s.to_string())))
}

fn disk_in_box_config(out_dir: &std::path::Path, max_steps: usize) -> String {
    format!(
        "\
dx = 0.04
mode = complex
max_steps = {max_steps}
threshold = 1e-4
output_dir = {}
format = csv,vtk

[domain]
shape = box
min = 0, 0
max = 1, 1

[body.disk]
shape = circle
center = 0.5, 0.5
radius = 0.25
",
        out_dir.display()
    )
}

#[test]
fn relax_writes_three_files_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_path = tmp.path().join("disk_in_box.cfg");
    std::fs::write(&cfg_path, disk_in_box_config(&out_dir, 4000)).unwrap();

    let code = run(&["relax", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    for name in ["particles.csv", "particles.vtk", "energy_history.csv"] {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
}

#[test]
fn non_convergence_exits_two_but_still_writes() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_path = tmp.path().join("one_step.cfg");
    std::fs::write(&cfg_path, disk_in_box_config(&out_dir, 1)).unwrap();

    let code = run(&["relax", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 2);
    for name in ["particles.csv", "particles.vtk", "energy_history.csv"] {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
}

#[test]
fn missing_config_exits_one() {
    assert_eq!(run(&["relax", "--config", "/nonexistent/path.cfg"]), 1);
    assert_eq!(run(&["relax"]), 1);
    assert_eq!(run(&["frobnicate"]), 1);
}

#[test]
fn version_subcommand_exits_zero() {
    assert_eq!(run(&["version"]), 0);
}

#[test]
fn seed_then_diagnose_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_path = tmp.path().join("seed.cfg");
    std::fs::write(&cfg_path, disk_in_box_config(&out_dir, 10)).unwrap();

    assert_eq!(run(&["seed", "--config", cfg_path.to_str().unwrap()]), 0);
    let particles = out_dir.join("particles.csv");
    assert!(particles.is_file());
    // Seeded output carries geometry columns only.
    let header = std::fs::read_to_string(&particles)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "body_id,x,y,volume");

    assert_eq!(
        run(&[
            "diagnose",
            "--config",
            cfg_path.to_str().unwrap(),
            "--particles",
            particles.to_str().unwrap(),
        ]),
        0
    );
    let diag = out_dir.join("diagnostics.csv");
    assert!(diag.is_file());
    let header = std::fs::read_to_string(&diag).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "body_id,x,y,volume,kgs_x,kgs_y,kgs_mag,density,interface_layer");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = tmp.path().join(name);
        let cfg_path = tmp.path().join(format!("{name}.cfg"));
        std::fs::write(&cfg_path, disk_in_box_config(&out_dir, 300)).unwrap();
        assert_eq!(run(&["relax", "--config", cfg_path.to_str().unwrap()]), 2);
        outputs.push((
            std::fs::read(out_dir.join("particles.csv")).unwrap(),
            std::fs::read(out_dir.join("energy_history.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}
