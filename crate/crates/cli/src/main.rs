#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use prr3::io::{
    configuration_json, isotropy_json, load_config, matrices_json, read_field_csv, to_json_string,
    write_contours_csv, write_field_csv, write_sweep_csv, write_workspace_csv, GridFile, LengthSetting,
    OutputFormat, RunConfig, DEFAULT_RESOLUTION,
};
use prr3::{
    build_matrices, design_sweep, extract_contours, inverse_kinematics, scan_field, symmetric_isotropic_config,
    workspace_area, workspace_mask, Error, GridSpec64, Pose64, ThetaSearch, WorkingMode,
};

#[derive(Parser)]
#[command(name = "prr3", version, about = "Kinetostatic analysis of the planar 3-PRR parallel manipulator")]
struct Cli {
    /// Worker threads for grid scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inverse kinematics of one pose.
    Ik {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true)]
        pose: String,
    },
    /// Kinetostatic matrices, conditioning and singularity class of one pose.
    Jac {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, allow_hyphen_values = true)]
        pose: String,
    },
    /// Centered isotropic configuration and its characteristic length.
    Isotropic {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Orientation-optimized condition number over a grid.
    Field {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Isolines of a field written by `field`.
    Contours {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated levels in (0, 1).
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        levels: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Reachable-cell mask and workspace area.
    Workspace {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Workspace area and average conditioning as functions of R/r.
    Sweep {
        /// Comma-separated list, or start:stop:step.
        #[arg(long, default_value = "0.25:4:0.25")]
        ratios: String,
        #[arg(long = "l-over-r", default_value_t = 2.0)]
        l_over_r: f64,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long = "theta-samples")]
        theta_samples: Option<usize>,
        #[arg(long = "refine-tol")]
        refine_tol: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inscribed radius of the rail triangle.
    #[arg(long = "R")]
    base_radius: Option<f64>,
    /// Platform circumradius.
    #[arg(long = "r")]
    r: Option<f64>,
    /// Leg length.
    #[arg(long = "l")]
    l: Option<f64>,
    /// Platform phase in degrees.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mode: Option<i64>,
    /// Abar, B or Kbar.
    #[arg(long)]
    kind: Option<String>,
    /// Characteristic length, or "auto" for √2·r.
    #[arg(long = "L")]
    char_len: Option<String>,
    #[arg(long = "theta-samples")]
    theta_samples: Option<usize>,
    #[arg(long = "refine-tol")]
    refine_tol: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ymin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ymax: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: IoError: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Ik { run, pose } => {
            let cfg = run.merged()?;
            let pose = parse_pose(&pose)?;
            let geometry = cfg.geometry()?;
            let config = inverse_kinematics(&geometry, &pose, WorkingMode::new(cfg.mode)?)?;
            emit(cfg.output.as_deref(), &json_text(&configuration_json(&config))?)
        }
        Command::Jac { run, pose } => {
            let cfg = run.merged()?;
            let pose = parse_pose(&pose)?;
            let geometry = cfg.geometry()?;
            let config = inverse_kinematics(&geometry, &pose, WorkingMode::new(cfg.mode)?)?;
            let mats = build_matrices(&config, cfg.char_len.resolve(geometry.platform_radius))?;
            let mut out = matrices_json(&mats);
            out["configuration"] = configuration_json(&config);
            emit(cfg.output.as_deref(), &json_text(&out)?)
        }
        Command::Isotropic { run } => {
            let cfg = run.merged()?;
            let geometry = cfg.geometry()?;
            let (config, report) = symmetric_isotropic_config(&geometry, WorkingMode::new(cfg.mode)?)?;
            emit(cfg.output.as_deref(), &json_text(&isotropy_json(&config, &report))?)
        }
        Command::Field { run, grid } => {
            let mut cfg = run.merged()?;
            grid.apply(&mut cfg)?;
            let res = cfg.resolve()?;
            let field = scan_field(&res.geometry, res.mode, res.kind, &res.grid, res.char_len, &res.search)?;
            let text = match cfg.format {
                OutputFormat::Csv => write_field_csv(&field)?,
                OutputFormat::Json => json_text(&json!({
                    "grid": GridFile::from(field.grid),
                    "mode": field.meta.mode.index(),
                    "kind": field.meta.kind.name(),
                    "L": field.meta.char_len,
                    "kappa": field.values,
                    "theta_star": field.theta_star,
                }))?,
            };
            emit(cfg.output.as_deref(), &text)
        }
        Command::Contours { input, levels, output } => {
            let levels = parse_list(&levels, "--levels")?;
            if let Some(bad) = levels.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
                return Err(Failure::Usage(format!("--levels: {bad} is outside (0, 1)")));
            }
            let text = fs::read_to_string(&input).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
            let field = read_field_csv(&text)?;
            let set = extract_contours(&field, &levels);
            emit(output.as_deref(), &write_contours_csv(&set))
        }
        Command::Workspace { run, grid } => {
            let mut cfg = run.merged()?;
            grid.apply(&mut cfg)?;
            let res = cfg.resolve()?;
            let area = workspace_area(&res.geometry, &res.grid, res.search.samples)?;
            let text = match cfg.format {
                OutputFormat::Csv => {
                    let mask = workspace_mask(&res.geometry, &res.grid, res.search.samples)?;
                    write_workspace_csv(&res.geometry, &res.grid, res.search.samples, &mask, area)?
                }
                OutputFormat::Json => json_text(&json!({"S": area, "grid": GridFile::from(res.grid)}))?,
            };
            emit(cfg.output.as_deref(), &text)
        }
        Command::Sweep { ratios, l_over_r, resolution, theta_samples, refine_tol, output } => {
            let ratios = parse_ratios(&ratios)?;
            let defaults = ThetaSearch::<f64>::default();
            let search = ThetaSearch::new(
                theta_samples.unwrap_or(defaults.samples),
                refine_tol.unwrap_or(defaults.refine_tol),
            )?;
            let rows = design_sweep(&ratios, l_over_r, resolution, &search)?;
            let meta = json!({
                "l_over_r": l_over_r,
                "r": 1.0,
                "L": std::f64::consts::SQRT_2,
                "resolution": resolution,
                "theta_samples": search.samples,
                "refine_tol": search.refine_tol,
            });
            emit(output.as_deref(), &write_sweep_csv(&ratios, &rows, &meta)?)
        }
    }
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    fn merged(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path).map_err(|e| Failure::Usage(format!("--config: {e}")))?,
            None => RunConfig::default(),
        };
        if self.base_radius.is_some() {
            cfg.base_radius = self.base_radius;
        }
        if self.r.is_some() {
            cfg.r = self.r;
        }
        if self.l.is_some() {
            cfg.l = self.l;
        }
        if let Some(d) = self.delta {
            cfg.delta_deg = d;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(k) = &self.kind {
            k.parse::<prr3::MatrixKind>().map_err(|e| Failure::Usage(format!("--kind: {e}")))?;
            cfg.kind = k.clone();
        }
        if let Some(s) = &self.char_len {
            cfg.char_len = s.parse::<LengthSetting>().map_err(|e| Failure::Usage(format!("--L: {e}")))?;
        }
        if let Some(n) = self.theta_samples {
            cfg.theta_samples = n;
        }
        if let Some(t) = self.refine_tol {
            cfg.refine_tol = t;
        }
        cfg.output = self.output.clone();
        if let Some(f) = self.format {
            cfg.format = match f {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
        }
        Ok(cfg)
    }
}

impl GridArgs {
    /// Explicit bounds need all four; `--nx/--ny` alone resize the covering grid.
    fn apply(&self, cfg: &mut RunConfig) -> CliResult<()> {
        let bounds = [self.xmin, self.xmax, self.ymin, self.ymax];
        let given = bounds.iter().filter(|b| b.is_some()).count();
        match given {
            0 => {}
            4 => {
                let base = cfg.grid;
                cfg.grid = Some(GridFile {
                    xmin: self.xmin.unwrap(),
                    xmax: self.xmax.unwrap(),
                    ymin: self.ymin.unwrap(),
                    ymax: self.ymax.unwrap(),
                    nx: self.nx.or(base.map(|g| g.nx)).unwrap_or(DEFAULT_RESOLUTION),
                    ny: self.ny.or(base.map(|g| g.ny)).unwrap_or(DEFAULT_RESOLUTION),
                });
                return Ok(());
            }
            _ => return Err(Failure::Usage("--xmin, --xmax, --ymin and --ymax must be given together".into())),
        }
        if self.nx.is_none() && self.ny.is_none() {
            return Ok(());
        }
        cfg.grid = Some(match cfg.grid {
            Some(g) => GridFile { nx: self.nx.unwrap_or(g.nx), ny: self.ny.unwrap_or(g.ny), ..g },
            None => {
                let nx = self.nx.unwrap_or(DEFAULT_RESOLUTION);
                let ny = self.ny.unwrap_or(DEFAULT_RESOLUTION);
                GridSpec64::covering(&cfg.geometry()?, nx, ny)?.into()
            }
        });
        Ok(())
    }
}

/// `x,y,theta` with theta in radians, or degrees when suffixed `deg`.
fn parse_pose(s: &str) -> CliResult<Pose64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!("--pose: expected x,y,theta, got '{s}'")));
    }
    let num = |t: &str| t.parse::<f64>().map_err(|_| Failure::Usage(format!("--pose: bad number '{t}'")));
    let theta = if let Some(d) = parts[2].strip_suffix("deg") {
        num(d.trim())?.to_radians()
    } else if let Some(r) = parts[2].strip_suffix("rad") {
        num(r.trim())?
    } else {
        num(parts[2])?
    };
    Ok(Pose64::new(num(parts[0])?, num(parts[1])?, theta))
}

fn parse_list(s: &str, flag: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("{flag}: bad number '{t}'"))))
        .collect()
}

fn parse_ratios(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => parse_list(s, "--ratios"),
        3 => {
            let v = parse_list(&parts.join(","), "--ratios")?;
            let (start, stop, step) = (v[0], v[1], v[2]);
            if !(step > 0.0) || stop < start {
                return Err(Failure::Usage(format!("--ratios: bad range '{s}'")));
            }
            // index-based so that e.g. 0.25:4:0.25 hits 4 exactly
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + step * i as f64).collect())
        }
        _ => Err(Failure::Usage(format!("--ratios: expected a list or start:stop:step, got '{s}'"))),
    }
}

fn json_text(v: &Value) -> CliResult<String> {
    let mut s = to_json_string(v)?;
    s.push('\n');
    Ok(s)
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
