use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Relaxation treatment, matching the three compared setups: complex
/// multi-body relaxation, separate per-body relaxation on Boolean-subtracted
/// geometry, and separate relaxation on independently discretized geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Complex,
    Separate,
    SeparateNoBoolean,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Complex => "complex",
            Mode::Separate => "separate",
            Mode::SeparateNoBoolean => "separate-no-boolean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Vtk,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Vtk => "vtk",
        }
    }
}

/// Geometry declaration of one body, before file resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeDecl {
    Box { min: Vec<f64>, max: Vec<f64> },
    Circle { center: [f64; 2], radius: f64 },
    Sphere { center: [f64; 3], radius: f64 },
    PolygonFile { path: PathBuf },
    StlFile { path: PathBuf },
}

impl ShapeDecl {
    pub fn dimension(&self) -> usize {
        match self {
            ShapeDecl::Box { min, .. } => min.len(),
            ShapeDecl::Circle { .. } | ShapeDecl::PolygonFile { .. } => 2,
            ShapeDecl::Sphere { .. } | ShapeDecl::StlFile { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyDecl {
    pub name: String,
    pub shape: ShapeDecl,
    /// Per-body background pressure; falls back to the global default.
    pub p0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dx: f64,
    /// Level-set cell size, default `dx / 2`.
    pub lf: f64,
    pub mode: Mode,
    pub cfl: f64,
    pub max_steps: usize,
    pub threshold: f64,
    /// Smoothing-length multiples of `dx`.
    pub h_solid: f64,
    pub h_fluid: f64,
    /// Heaviside half-width as a multiple of `lf`.
    pub eps_factor: f64,
    pub p0: f64,
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub domain: BodyDecl,
    pub bodies: Vec<BodyDecl>,
    pub dimension: usize,
}

const GLOBAL_KEYS: &[&str] = &[
    "dx",
    "lf",
    "mode",
    "cfl",
    "max_steps",
    "threshold",
    "h_solid",
    "h_fluid",
    "eps_factor",
    "p0",
    "output_dir",
    "format",
];
const SHAPE_KEYS: &[&str] = &["shape", "min", "max", "center", "radius", "file", "p0"];

struct Entry {
    value: String,
    line: usize,
}

type Section = BTreeMap<String, Entry>;

/// Parse the plain-text `key = value` run configuration. Relative geometry
/// file paths resolve against `base_dir` and must exist.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut globals: Section = Section::new();
    let mut sections: Vec<(String, usize, Section)> = Vec::new();
    let mut current: Option<usize> = None;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line_no, "unterminated section header".to_string()))?
                .trim()
                .to_string();
            if name != "domain" && !name.starts_with("body.") {
                return Err(Error::config(
                    line_no,
                    format!("unknown section [{name}]; expected [domain] or [body.<name>]"),
                ));
            }
            if name.strip_prefix("body.").is_some_and(str::is_empty) {
                return Err(Error::config(line_no, "body section needs a name".to_string()));
            }
            if sections.iter().any(|(s, _, _)| *s == name) {
                return Err(Error::config(line_no, format!("duplicate section [{name}]")));
            }
            sections.push((name, line_no, Section::new()));
            current = Some(sections.len() - 1);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(line_no, format!("expected `key = value`, got `{line}`"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = match current {
            Some(s) => &mut sections[s].2,
            None => &mut globals,
        };
        let allowed = if current.is_some() { SHAPE_KEYS } else { GLOBAL_KEYS };
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(line_no, format!("unknown key `{key}`")));
        }
        if section.insert(key.clone(), Entry { value, line: line_no }).is_some() {
            return Err(Error::config(line_no, format!("duplicate key `{key}`")));
        }
    }

    let dx = require_f64(&globals, "dx")?;
    if !(dx > 0.0) {
        let line = globals["dx"].line;
        return Err(Error::config(line, format!("`dx` must be positive, got {dx}")));
    }
    let lf = optional_f64(&globals, "lf")?.unwrap_or(dx / 2.0);
    if !(lf > 0.0) {
        let line = globals["lf"].line;
        return Err(Error::config(line, format!("`lf` must be positive, got {lf}")));
    }
    let mode = match globals.get("mode") {
        None => Mode::Complex,
        Some(e) => match e.value.as_str() {
            "complex" => Mode::Complex,
            "separate" => Mode::Separate,
            "separate-no-boolean" => Mode::SeparateNoBoolean,
            other => {
                return Err(Error::config(
                    e.line,
                    format!("`mode` must be complex, separate or separate-no-boolean, got `{other}`"),
                ))
            }
        },
    };
    let cfl = optional_f64(&globals, "cfl")?.unwrap_or(0.25);
    if !(cfl > 0.0 && cfl <= 0.25) {
        let line = globals.get("cfl").map(|e| e.line).unwrap_or(0);
        return Err(Error::config(line, format!("`cfl` must lie in (0, 0.25], got {cfl}")));
    }
    let max_steps = match globals.get("max_steps") {
        None => 10_000,
        Some(e) => e.value.parse::<usize>().map_err(|_| {
            Error::config(e.line, format!("`max_steps` is not a positive integer: `{}`", e.value))
        })?,
    };
    if max_steps < 1 {
        let line = globals.get("max_steps").map(|e| e.line).unwrap_or(0);
        return Err(Error::config(line, "`max_steps` must be at least 1".to_string()));
    }
    let threshold = optional_f64(&globals, "threshold")?.unwrap_or(1e-4);
    if !(threshold >= 0.0) {
        let line = globals.get("threshold").map(|e| e.line).unwrap_or(0);
        return Err(Error::config(line, "`threshold` must be non-negative".to_string()));
    }
    let h_solid = optional_f64(&globals, "h_solid")?.unwrap_or(1.05);
    let h_fluid = optional_f64(&globals, "h_fluid")?.unwrap_or(1.3);
    let eps_factor = optional_f64(&globals, "eps_factor")?.unwrap_or(0.75);
    for (key, v) in [("h_solid", h_solid), ("h_fluid", h_fluid), ("eps_factor", eps_factor)] {
        if !(v > 0.0) {
            let line = globals.get(key).map(|e| e.line).unwrap_or(0);
            return Err(Error::config(line, format!("`{key}` must be positive, got {v}")));
        }
    }
    let p0 = optional_f64(&globals, "p0")?.unwrap_or(1.0);
    if !(p0 > 0.0) {
        let line = globals.get("p0").map(|e| e.line).unwrap_or(0);
        return Err(Error::config(line, format!("`p0` must be positive, got {p0}")));
    }
    let output_dir =
        PathBuf::from(globals.get("output_dir").map(|e| e.value.clone()).unwrap_or("out".into()));
    let formats = match globals.get("format") {
        None => vec![OutputFormat::Csv],
        Some(e) => {
            let mut formats = Vec::new();
            for part in e.value.split(',') {
                let f = match part.trim() {
                    "csv" => OutputFormat::Csv,
                    "vtk" => OutputFormat::Vtk,
                    other => {
                        return Err(Error::config(
                            e.line,
                            format!("`format` entries must be csv or vtk, got `{other}`"),
                        ))
                    }
                };
                if !formats.contains(&f) {
                    formats.push(f);
                }
            }
            formats
        }
    };

    let mut domain = None;
    let mut bodies = Vec::new();
    for (name, line, section) in &sections {
        let decl = parse_body(name, *line, section, base_dir)?;
        if name == "domain" {
            domain = Some(decl);
        } else {
            bodies.push(decl);
        }
    }
    let domain =
        domain.ok_or_else(|| Error::config(0, "missing required [domain] section".to_string()))?;

    let dimension = domain.shape.dimension();
    for body in &bodies {
        if body.shape.dimension() != dimension {
            return Err(Error::config(
                0,
                format!(
                    "body `{}` is {}D but the domain is {}D",
                    body.name,
                    body.shape.dimension(),
                    dimension
                ),
            ));
        }
    }

    Ok(RunConfig {
        dx,
        lf,
        mode,
        cfl,
        max_steps,
        threshold,
        h_solid,
        h_fluid,
        eps_factor,
        p0,
        output_dir,
        formats,
        domain,
        bodies,
        dimension,
    })
}

fn parse_body(name: &str, header_line: usize, section: &Section, base_dir: &Path) -> Result<BodyDecl> {
    let kind = section
        .get("shape")
        .ok_or_else(|| Error::config(header_line, format!("[{name}] is missing `shape`")))?;
    let shape = match kind.value.as_str() {
        "box" => {
            let min = require_point(section, "min", name, header_line)?;
            let max = require_point(section, "max", name, header_line)?;
            if min.len() != max.len() {
                return Err(Error::config(
                    kind.line,
                    format!("[{name}] `min` and `max` have different dimensions"),
                ));
            }
            ShapeDecl::Box { min, max }
        }
        "circle" => {
            let c = require_point(section, "center", name, header_line)?;
            if c.len() != 2 {
                return Err(Error::config(
                    section["center"].line,
                    format!("[{name}] circle `center` needs 2 components"),
                ));
            }
            ShapeDecl::Circle {
                center: [c[0], c[1]],
                radius: require_f64_in(section, "radius", name, header_line)?,
            }
        }
        "sphere" => {
            let c = require_point(section, "center", name, header_line)?;
            if c.len() != 3 {
                return Err(Error::config(
                    section["center"].line,
                    format!("[{name}] sphere `center` needs 3 components"),
                ));
            }
            ShapeDecl::Sphere {
                center: [c[0], c[1], c[2]],
                radius: require_f64_in(section, "radius", name, header_line)?,
            }
        }
        "polygon" | "stl" => {
            let entry = section
                .get("file")
                .ok_or_else(|| Error::config(header_line, format!("[{name}] is missing `file`")))?;
            let path = base_dir.join(&entry.value);
            if !path.is_file() {
                return Err(Error::config(
                    entry.line,
                    format!("`file` does not exist: {}", path.display()),
                ));
            }
            if kind.value == "polygon" {
                ShapeDecl::PolygonFile { path }
            } else {
                ShapeDecl::StlFile { path }
            }
        }
        other => {
            return Err(Error::config(
                kind.line,
                format!("[{name}] `shape` must be box, circle, sphere, polygon or stl, got `{other}`"),
            ))
        }
    };
    let p0 = match section.get("p0") {
        None => None,
        Some(e) => {
            let v = e
                .value
                .parse::<f64>()
                .map_err(|_| Error::config(e.line, format!("`p0` is not a number: `{}`", e.value)))?;
            if !(v > 0.0) {
                return Err(Error::config(e.line, format!("`p0` must be positive, got {v}")));
            }
            Some(v)
        }
    };
    // Reject keys that do not belong to this shape kind.
    let relevant: &[&str] = match kind.value.as_str() {
        "box" => &["shape", "min", "max", "p0"],
        "circle" | "sphere" => &["shape", "center", "radius", "p0"],
        _ => &["shape", "file", "p0"],
    };
    for (key, entry) in section {
        if !relevant.contains(&key.as_str()) {
            return Err(Error::config(
                entry.line,
                format!("key `{key}` does not apply to shape `{}`", kind.value),
            ));
        }
    }
    Ok(BodyDecl { name: name.strip_prefix("body.").unwrap_or(name).to_string(), shape, p0 })
}

fn require_f64(section: &Section, key: &str) -> Result<f64> {
    let entry = section
        .get(key)
        .ok_or_else(|| Error::config(0, format!("missing required key `{key}`")))?;
    entry
        .value
        .parse::<f64>()
        .map_err(|_| Error::config(entry.line, format!("`{key}` is not a number: `{}`", entry.value)))
}

fn optional_f64(section: &Section, key: &str) -> Result<Option<f64>> {
    match section.get(key) {
        None => Ok(None),
        Some(entry) => entry
            .value
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::config(entry.line, format!("`{key}` is not a number: `{}`", entry.value))),
    }
}

fn require_f64_in(section: &Section, key: &str, name: &str, header_line: usize) -> Result<f64> {
    let entry = section
        .get(key)
        .ok_or_else(|| Error::config(header_line, format!("[{name}] is missing `{key}`")))?;
    entry
        .value
        .parse::<f64>()
        .map_err(|_| Error::config(entry.line, format!("`{key}` is not a number: `{}`", entry.value)))
}

fn require_point(section: &Section, key: &str, name: &str, header_line: usize) -> Result<Vec<f64>> {
    let entry = section
        .get(key)
        .ok_or_else(|| Error::config(header_line, format!("[{name}] is missing `{key}`")))?;
    let parts: Vec<&str> = entry.value.split(',').map(str::trim).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(Error::config(
            entry.line,
            format!("`{key}` needs 2 or 3 comma-separated components, got {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                Error::config(entry.line, format!("`{key}` component is not a number: `{s}`"))
            })
        })
        .collect()
}

/// Canonical text form; `parse_config(render_config(c), ..) == c` for every
/// valid config (floats print in shortest round-trip form).
pub fn render_config(cfg: &RunConfig) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "dx = {}", cfg.dx).unwrap();
    writeln!(out, "lf = {}", cfg.lf).unwrap();
    writeln!(out, "mode = {}", cfg.mode.as_str()).unwrap();
    writeln!(out, "cfl = {}", cfg.cfl).unwrap();
    writeln!(out, "max_steps = {}", cfg.max_steps).unwrap();
    writeln!(out, "threshold = {}", cfg.threshold).unwrap();
    writeln!(out, "h_solid = {}", cfg.h_solid).unwrap();
    writeln!(out, "h_fluid = {}", cfg.h_fluid).unwrap();
    writeln!(out, "eps_factor = {}", cfg.eps_factor).unwrap();
    writeln!(out, "p0 = {}", cfg.p0).unwrap();
    writeln!(out, "output_dir = {}", cfg.output_dir.display()).unwrap();
    let formats: Vec<&str> = cfg.formats.iter().map(|f| f.as_str()).collect();
    writeln!(out, "format = {}", formats.join(",")).unwrap();
    render_body(&mut out, "domain", &cfg.domain);
    for body in &cfg.bodies {
        render_body(&mut out, &format!("body.{}", body.name), body);
    }
    out
}

fn render_body(out: &mut String, section: &str, body: &BodyDecl) {
    use std::fmt::Write;
    writeln!(out, "\n[{section}]").unwrap();
    match &body.shape {
        ShapeDecl::Box { min, max } => {
            writeln!(out, "shape = box").unwrap();
            writeln!(out, "min = {}", join_floats(min)).unwrap();
            writeln!(out, "max = {}", join_floats(max)).unwrap();
        }
        ShapeDecl::Circle { center, radius } => {
            writeln!(out, "shape = circle").unwrap();
            writeln!(out, "center = {}", join_floats(center)).unwrap();
            writeln!(out, "radius = {radius}").unwrap();
        }
        ShapeDecl::Sphere { center, radius } => {
            writeln!(out, "shape = sphere").unwrap();
            writeln!(out, "center = {}", join_floats(center)).unwrap();
            writeln!(out, "radius = {radius}").unwrap();
        }
        ShapeDecl::PolygonFile { path } => {
            writeln!(out, "shape = polygon").unwrap();
            writeln!(out, "file = {}", path.display()).unwrap();
        }
        ShapeDecl::StlFile { path } => {
            writeln!(out, "shape = stl").unwrap();
            writeln!(out, "file = {}", path.display()).unwrap();
        }
    }
    if let Some(p0) = body.p0 {
        writeln!(out, "p0 = {p0}").unwrap();
    }
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
dx = 0.02

[domain]
shape = box
min = 0, 0
max = 1, 1

[body.disk]
shape = circle
center = 0.5, 0.5
radius = 0.25
";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(cfg.dx, 0.02);
        assert_eq!(cfg.lf, 0.01);
        assert_eq!(cfg.cfl, 0.25);
        assert_eq!(cfg.mode, Mode::Complex);
        assert_eq!(cfg.max_steps, 10_000);
        assert_eq!(cfg.threshold, 1e-4);
        assert_eq!(cfg.h_solid, 1.05);
        assert_eq!(cfg.h_fluid, 1.3);
        assert_eq!(cfg.formats, vec![OutputFormat::Csv]);
        assert_eq!(cfg.dimension, 2);
        assert_eq!(cfg.bodies.len(), 1);
        assert_eq!(cfg.bodies[0].name, "disk");
    }

    #[test]
    fn negative_dx_names_the_key() {
        let text = MINIMAL.replace("dx = 0.02", "dx = -0.1");
        let err = parse_config(&text, Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dx"), "{msg}");
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn no_boolean_mode_parses() {
        let text = format!("mode = separate-no-boolean\n{MINIMAL}");
        let cfg = parse_config(&text, Path::new(".")).unwrap();
        assert_eq!(cfg.mode, Mode::SeparateNoBoolean);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = format!("{MINIMAL}\nwibble = 3\n");
        let err = parse_config(&text, Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("wibble"), "{msg}");
    }

    #[test]
    fn unparsable_number_rejected() {
        let text = MINIMAL.replace("radius = 0.25", "radius = quarter");
        let err = parse_config(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("radius"));
    }

    #[test]
    fn missing_domain_rejected() {
        let err = parse_config("dx = 0.1\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("domain"));
    }

    #[test]
    fn dangling_file_rejected() {
        let text = "\
dx = 0.05

[domain]
shape = box
min = 0, 0
max = 1, 1

[body.wing]
shape = polygon
file = does_not_exist.csv
";
        let err = parse_config(text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("does_not_exist.csv"));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let text = "\
dx = 0.05

[domain]
shape = box
min = 0, 0, 0
max = 1, 1, 1

[body.disk]
shape = circle
center = 0.5, 0.5
radius = 0.2
";
        let err = parse_config(text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("2D"));
    }

    #[test]
    fn render_round_trips() {
        let text = format!("mode = separate\nthreshold = 3.5e-5\n{MINIMAL}");
        let cfg = parse_config(&text, Path::new(".")).unwrap();
        let rendered = render_config(&cfg);
        let back = parse_config(&rendered, Path::new(".")).unwrap();
        assert_eq!(cfg, back);
    }
}
