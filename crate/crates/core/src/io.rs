//! File formats and run configuration.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. Unreachable field cells are written as
//! the literal `nan`.
//!
//! Field CSV layout:
//!
//! ```text
//! # prr3 field
//! # {"geometry":{"R":..,"r":..,"l":..,"delta_deg":..},"mode":1,"kind":"Abar","L":..,...}
//! x,y,kappa,theta_star
//! -4.9749999999999996e0,-4.9749999999999996e0,nan,nan
//! ```

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::analysis::{ContourSet, FieldMeta, GridSpec, MatrixKind, ScalarField, SweepRow, ThetaSearch};
use crate::conditioning::conditioning_report;
use crate::error::{Error, Result};
use crate::geometry::{Configuration, Geometry, WorkingMode};
use crate::isotropy::IsotropyReport;
use crate::kinetostatics::{classify, KinetostaticMatrices, SingularityKind};
use crate::linalg::Mat3;

pub const DEFAULT_RESOLUTION: usize = 100;

/// Formats a number with 17 significant digits; NaN as `nan`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Compact JSON with 17-significant-digit floats.
struct SigFormatter;

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter);
    value.serialize(&mut ser).map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// Geometry as stored in files: lengths plus the phase in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    #[serde(rename = "R")]
    pub base_radius: f64,
    pub r: f64,
    pub l: f64,
    #[serde(default)]
    pub delta_deg: f64,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<Geometry<f64>> {
        Geometry::new(self.base_radius, self.r, self.l, self.delta_deg.to_radians())
    }
}

impl From<&Geometry<f64>> for GeometrySpec {
    fn from(g: &Geometry<f64>) -> Self {
        Self {
            base_radius: g.base_radius,
            r: g.platform_radius,
            l: g.leg_length,
            delta_deg: g.phase.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl From<GridSpec<f64>> for GridFile {
    fn from(g: GridSpec<f64>) -> Self {
        Self { xmin: g.xmin, xmax: g.xmax, ymin: g.ymin, ymax: g.ymax, nx: g.nx, ny: g.ny }
    }
}

impl GridFile {
    pub fn build(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.xmin, self.xmax, self.ymin, self.ymax, self.nx, self.ny)
    }
}

/// Characteristic length setting: a positive number or `"auto"` (`√2·r`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LengthSetting {
    #[default]
    Auto,
    Fixed(f64),
}

impl LengthSetting {
    pub fn resolve(self, platform_radius: f64) -> f64 {
        match self {
            LengthSetting::Auto => std::f64::consts::SQRT_2 * platform_radius,
            LengthSetting::Fixed(v) => v,
        }
    }
}

impl std::str::FromStr for LengthSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LengthSetting::Auto);
        }
        s.parse::<f64>()
            .map(LengthSetting::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("L must be a number or \"auto\", got '{s}'")))
    }
}

impl<'de> Deserialize<'de> for LengthSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(LengthSetting::Fixed(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Run configuration file. Every key is optional; command-line flags take
/// precedence over values read here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "R")]
    pub base_radius: Option<f64>,
    pub r: Option<f64>,
    pub l: Option<f64>,
    pub delta_deg: Option<f64>,
    pub mode: Option<i64>,
    pub kind: Option<String>,
    #[serde(rename = "L")]
    pub char_len: Option<LengthSetting>,
    pub grid: Option<GridFile>,
    pub theta_samples: Option<usize>,
    pub refine_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Fully merged run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base_radius: Option<f64>,
    pub r: Option<f64>,
    pub l: Option<f64>,
    pub delta_deg: f64,
    pub mode: i64,
    pub kind: String,
    pub char_len: LengthSetting,
    /// `None` covers the reachable set at 100×100.
    pub grid: Option<GridFile>,
    pub theta_samples: usize,
    pub refine_tol: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            base_radius: None,
            r: None,
            l: None,
            delta_deg: 0.0,
            mode: 1,
            kind: "Abar".into(),
            char_len: LengthSetting::Auto,
            grid: None,
            theta_samples: 120,
            refine_tol: 1e-6,
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Settings after validation against the library's preconditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedRun {
    pub geometry: Geometry<f64>,
    pub mode: WorkingMode,
    pub kind: MatrixKind,
    pub char_len: f64,
    pub grid: GridSpec<f64>,
    pub search: ThetaSearch<f64>,
}

impl RunConfig {
    pub fn apply_file(&mut self, f: &ConfigFile) {
        if f.base_radius.is_some() {
            self.base_radius = f.base_radius;
        }
        if f.r.is_some() {
            self.r = f.r;
        }
        if f.l.is_some() {
            self.l = f.l;
        }
        if let Some(d) = f.delta_deg {
            self.delta_deg = d;
        }
        if let Some(m) = f.mode {
            self.mode = m;
        }
        if let Some(k) = &f.kind {
            self.kind = k.clone();
        }
        if let Some(l) = f.char_len {
            self.char_len = l;
        }
        if f.grid.is_some() {
            self.grid = f.grid;
        }
        if let Some(n) = f.theta_samples {
            self.theta_samples = n;
        }
        if let Some(t) = f.refine_tol {
            self.refine_tol = t;
        }
    }

    pub fn geometry(&self) -> Result<Geometry<f64>> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidGeometry(format!("missing {name}")))
        };
        GeometrySpec {
            base_radius: need(self.base_radius, "R")?,
            r: need(self.r, "r")?,
            l: need(self.l, "l")?,
            delta_deg: self.delta_deg,
        }
        .build()
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let geometry = self.geometry()?;
        let mode = WorkingMode::new(self.mode)?;
        let kind: MatrixKind = self.kind.parse()?;
        let char_len = self.char_len.resolve(geometry.platform_radius);
        if !(char_len > 0.0) || !char_len.is_finite() {
            return Err(Error::InvalidArgument(format!("L must be positive, got {char_len}")));
        }
        let grid = match self.grid {
            Some(g) => g.build()?,
            None => GridSpec::covering(&geometry, DEFAULT_RESOLUTION, DEFAULT_RESOLUTION)?,
        };
        let search = ThetaSearch::new(self.theta_samples, self.refine_tol)?;
        Ok(ResolvedRun { geometry, mode, kind, char_len, grid, search })
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
}

/// Reads a config file and merges it over the defaults.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    let file = parse_config(&text)?;
    let mut cfg = RunConfig::default();
    cfg.apply_file(&file);
    Ok(cfg)
}

fn mat_json(m: &Mat3<f64>) -> Value {
    json!(m.0)
}

pub fn configuration_json(c: &Configuration<f64>) -> Value {
    let legs: Vec<Value> = c
        .legs
        .iter()
        .map(|l| {
            json!({
                "rho": l.rho,
                "a": l.a.to_array(),
                "b": l.b.to_array(),
                "l": l.lvec.to_array(),
                "m": l.m,
                "k": l.k,
                "gamma": l.gamma,
                "eta": l.eta,
            })
        })
        .collect();
    json!({
        "geometry": GeometrySpec::from(&c.geometry),
        "pose": {"x": c.pose.x, "y": c.pose.y, "theta": c.pose.theta},
        "mode": c.mode.index(),
        "signs": c.mode.signs(),
        "rho": c.rho(),
        "legs": legs,
    })
}

fn singularity_name(k: SingularityKind) -> &'static str {
    match k {
        SingularityKind::Regular => "Regular",
        SingularityKind::Serial => "Serial",
        SingularityKind::Parallel => "Parallel",
        SingularityKind::SerialAndParallel => "SerialAndParallel",
    }
}

/// Matrices, their conditioning and the singularity class of one configuration.
pub fn matrices_json(m: &KinetostaticMatrices<f64>) -> Value {
    let cond = |mat: &Mat3<f64>| {
        let r = conditioning_report(mat);
        json!({"sigma": r.sigma, "kappa": r.kappa, "degenerate": r.degenerate})
    };
    let sing = classify(m);
    let kappa_kbar = m.kbar.as_ref().map_or(0.0, |k| conditioning_report(k).kappa);
    json!({
        "A": mat_json(&m.a),
        "B": mat_json(&m.b),
        "Abar": mat_json(&m.abar),
        "Kbar": m.kbar.as_ref().map(mat_json),
        "J": m.j.as_ref().map(mat_json),
        "K": m.k.as_ref().map(mat_json),
        "detA": m.det_a,
        "detB": m.det_b,
        "L": m.char_len,
        "kappaAbar": conditioning_report(&m.abar).kappa,
        "kappaB": conditioning_report(&m.b).kappa,
        "kappaKbar": kappa_kbar,
        "conditioning": {
            "Abar": cond(&m.abar),
            "B": cond(&m.b),
            "Kbar": m.kbar.as_ref().map(cond),
        },
        "singularity": {
            "kind": singularity_name(sing.kind),
            "serial_margin": sing.serial_margin,
            "parallel_margin": sing.parallel_margin,
        },
    })
}

pub fn isotropy_json(c: &Configuration<f64>, rep: &IsotropyReport<f64>) -> Value {
    json!({
        "gamma": rep.gamma,
        "L": rep.char_len,
        "tau": rep.tau,
        "residuals": rep.residuals,
        "configuration": configuration_json(c),
    })
}

fn meta_json(meta: &FieldMeta<f64>, grid: &GridSpec<f64>) -> Value {
    json!({
        "geometry": GeometrySpec::from(&meta.geometry),
        "mode": meta.mode.index(),
        "kind": meta.kind.name(),
        "L": meta.char_len,
        "theta_samples": meta.search.samples,
        "refine_tol": meta.search.refine_tol,
        "grid": GridFile::from(*grid),
    })
}

pub fn write_field_csv(field: &ScalarField<f64>) -> Result<String> {
    let mut out = String::new();
    out.push_str("# prr3 field\n");
    writeln!(out, "# {}", to_json_string(&meta_json(&field.meta, &field.grid))?).unwrap();
    out.push_str("x,y,kappa,theta_star\n");
    for k in 0..field.grid.len() {
        let c = field.grid.center_of(k);
        writeln!(
            out,
            "{},{},{},{}",
            fmt_num(c.x),
            fmt_num(c.y),
            fmt_num(field.values[k]),
            fmt_num(field.theta_star[k])
        )
        .unwrap();
    }
    Ok(out)
}

#[derive(Deserialize)]
struct FieldMetaFile {
    geometry: GeometrySpec,
    mode: i64,
    kind: String,
    #[serde(rename = "L")]
    char_len: f64,
    theta_samples: usize,
    refine_tol: f64,
    grid: GridFile,
}

fn parse_cell(s: &str, line: usize) -> Result<f64> {
    match s.trim() {
        "nan" | "NaN" => Ok(f64::NAN),
        t => t.parse().map_err(|_| Error::Format(format!("line {line}: bad number '{t}'"))),
    }
}

/// Reads a field written by [`write_field_csv`].
pub fn read_field_csv(text: &str) -> Result<ScalarField<f64>> {
    let mut meta: Option<FieldMetaFile> = None;
    let mut values = Vec::new();
    let mut theta_star = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest.starts_with('{') {
                meta = Some(
                    serde_json::from_str(rest)
                        .map_err(|e| Error::Format(format!("line {lineno}: field metadata: {e}")))?,
                );
            }
            continue;
        }
        if line.starts_with("x,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Format(format!("line {lineno}: expected 4 columns, got {}", cols.len())));
        }
        values.push(parse_cell(cols[2], lineno)?);
        theta_star.push(parse_cell(cols[3], lineno)?);
    }
    let meta = meta.ok_or_else(|| Error::Format("field CSV has no metadata line".into()))?;
    let grid = meta.grid.build()?;
    if values.len() != grid.len() {
        return Err(Error::Format(format!(
            "field CSV has {} rows, grid expects {}",
            values.len(),
            grid.len()
        )));
    }
    Ok(ScalarField {
        grid,
        values,
        theta_star,
        meta: FieldMeta {
            geometry: meta.geometry.build()?,
            mode: WorkingMode::new(meta.mode)?,
            kind: meta.kind.parse()?,
            char_len: meta.char_len,
            search: ThetaSearch { samples: meta.theta_samples, refine_tol: meta.refine_tol },
        },
    })
}

pub fn write_contours_csv(set: &ContourSet<f64>) -> String {
    let mut out = String::from("level,polyline_id,x,y\n");
    let mut id = 0usize;
    for (level, lines) in set.levels.iter().zip(&set.polylines) {
        for line in lines {
            for p in line {
                writeln!(out, "{},{},{},{}", fmt_num(*level), id, fmt_num(p.x), fmt_num(p.y)).unwrap();
            }
            id += 1;
        }
    }
    out
}

pub fn write_workspace_csv(
    geometry: &Geometry<f64>,
    grid: &GridSpec<f64>,
    theta_samples: usize,
    mask: &[bool],
    area: f64,
) -> Result<String> {
    let meta = json!({
        "geometry": GeometrySpec::from(geometry),
        "theta_samples": theta_samples,
        "grid": GridFile::from(*grid),
        "S": area,
    });
    let mut out = String::from("# prr3 workspace\n");
    writeln!(out, "# {}", to_json_string(&meta)?).unwrap();
    writeln!(out, "# S={}", fmt_num(area)).unwrap();
    out.push_str("x,y,reachable\n");
    for (k, &inside) in mask.iter().enumerate() {
        let c = grid.center_of(k);
        writeln!(out, "{},{},{}", fmt_num(c.x), fmt_num(c.y), u8::from(inside)).unwrap();
    }
    Ok(out)
}

/// Rows that failed with `EmptyWorkspace` are written with `S = 0` and `nan`
/// averages; any other row error is returned.
pub fn write_sweep_csv(ratios: &[f64], rows: &[Result<SweepRow<f64>>], meta: &Value) -> Result<String> {
    let mut out = String::from("# prr3 sweep\n");
    writeln!(out, "# {}", to_json_string(meta)?).unwrap();
    out.push_str("ratio,S,kbarA1,kbarA2,kbarB,kbarK1,kbarK2\n");
    for (&ratio, row) in ratios.iter().zip(rows) {
        let r = match row {
            Ok(r) => *r,
            Err(Error::EmptyWorkspace) => SweepRow {
                ratio,
                area: 0.0,
                kbar_a1: f64::NAN,
                kbar_a2: f64::NAN,
                kbar_b: f64::NAN,
                kbar_k1: f64::NAN,
                kbar_k2: f64::NAN,
            },
            Err(e) => return Err(e.clone()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_num(r.ratio),
            fmt_num(r.area),
            fmt_num(r.kbar_a1),
            fmt_num(r.kbar_a2),
            fmt_num(r.kbar_b),
            fmt_num(r.kbar_k1),
            fmt_num(r.kbar_k2)
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::scan_field;

    #[test]
    fn numbers_have_17_digits() {
        assert_eq!(fmt_num(3f64.sqrt()), "1.7320508075688772e0");
        assert_eq!(fmt_num(18.0), "1.8000000000000000e1");
        assert_eq!(fmt_num(f64::NAN), "nan");
        let s = to_json_string(&json!({"a": [0.1, -2.5], "b": f64::NAN})).unwrap();
        assert_eq!(s, r#"{"a":[1.0000000000000001e-1,-2.5000000000000000e0],"b":null}"#);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][0].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn minimal_config_defaults() {
        let f = parse_config(r#"{"R":2,"r":1,"l":2}"#).unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&f);
        let run = cfg.resolve().unwrap();
        assert_eq!(run.mode.index(), 1);
        assert_eq!(run.kind, MatrixKind::Abar);
        assert_eq!(run.char_len, std::f64::consts::SQRT_2);
        assert_eq!(run.grid, GridSpec::covering(&run.geometry, 100, 100).unwrap());
        assert_eq!(run.search.samples, 120);
    }

    #[test]
    fn config_validation_and_precedence() {
        let f = parse_config(r#"{"R":2,"r":1,"l":2,"mode":9}"#).unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&f);
        assert!(matches!(cfg.resolve(), Err(Error::InvalidMode(9))));

        let f = parse_config(r#"{"R":2,"r":1,"l":2,"mode":1,"L":"auto","kind":"B"}"#).unwrap();
        let mut cfg = RunConfig::default();
        cfg.apply_file(&f);
        cfg.mode = 2; // flag applied after the file
        let run = cfg.resolve().unwrap();
        assert_eq!(run.mode.index(), 2);
        assert_eq!(run.kind, MatrixKind::B);

        let err = parse_config("{\"R\":2,\n\"rr\":1}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("rr"), "{msg}");

        let f = parse_config(r#"{"R":2,"r":1,"l":2,"L":1.5}"#).unwrap();
        assert_eq!(f.char_len, Some(LengthSetting::Fixed(1.5)));
        assert!(parse_config(r#"{"L":"big"}"#).is_err());
    }

    #[test]
    fn field_csv_round_trip() {
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let grid = GridSpec::new(-2.1, 2.3, -1.7, 2.2, 7, 5).unwrap();
        let f = scan_field(&g, WorkingMode::new(2).unwrap(), MatrixKind::Kbar, &grid, 1.3, &ThetaSearch::default())
            .unwrap();
        let text = write_field_csv(&f).unwrap();
        assert!(text.contains("nan"));
        let back = read_field_csv(&text).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.meta.mode, f.meta.mode);
        assert_eq!(back.meta.kind, f.meta.kind);
        assert_eq!(back.meta.char_len, f.meta.char_len);
        assert_eq!(back.meta.geometry.base_radius, 2.0);
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
        assert_eq!(write_field_csv(&back).unwrap(), text);

        let g = Geometry::new(2.0, 1.0, 2.0, 0.1).unwrap();
        let f = scan_field(&g, WorkingMode::new(1).unwrap(), MatrixKind::B, &grid, 1.3, &ThetaSearch::default())
            .unwrap();
        let back = read_field_csv(&write_field_csv(&f).unwrap()).unwrap();
        assert!((back.meta.geometry.phase - 0.1).abs() < 1e-16);
        assert_eq!(back.grid, grid);
    }

    #[test]
    fn field_csv_errors() {
        assert!(read_field_csv("x,y,kappa,theta_star\n1,2,3,4\n").is_err());
        let g = Geometry::new(2.0, 1.0, 2.0, 0.0).unwrap();
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 2, 2).unwrap();
        let f = scan_field(&g, WorkingMode::new(1).unwrap(), MatrixKind::B, &grid, 1.0, &ThetaSearch::default()).unwrap();
        let text = write_field_csv(&f).unwrap();
        let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(read_field_csv(&truncated).is_err());
        assert!(read_field_csv(&text.replace("x,y,kappa,theta_star\n", "x,y,kappa,theta_star\n1,2,3\n")).is_err());
    }
}
