//! Command-line front end.
//!
//! Settings come from an optional `key = value` file, overridden by flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cases::{case_names, find_case};
use crate::dec::TimeNodes;
use crate::error::SolverError;
use crate::scheme::SchemeKind;
use crate::solver::{
    convergence, format_convergence_table, Simulation, SimulationConfig, DEFAULT_CFL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gfswe",
    version,
    about = "Global flux WENO solver for the 1D shallow water equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one case and write snapshot files.
    Run(RunArgs),
    /// Run a case on several meshes and write an error table.
    Convergence(ConvergenceArgs),
    /// List the available cases.
    List,
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Plain-text `key = value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub case: Option<String>,
    /// gf_wb, gf_nonwb or classical.
    #[arg(long)]
    pub scheme: Option<String>,
    /// WENO order, 3 or 5.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub tend: Option<f64>,
    /// equispaced or lobatto.
    #[arg(long)]
    pub dec_nodes: Option<String>,
    /// Output directory (run) or file (convergence).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub cells: Option<usize>,
    /// Comma-separated snapshot times.
    #[arg(long)]
    pub snapshots: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated mesh sizes.
    #[arg(long)]
    pub meshes: Option<String>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

fn classify(e: SolverError) -> CliError {
    if e.is_solver_failure() {
        CliError::Solver(e.to_string())
    } else {
        CliError::Config(e.to_string())
    }
}

/// Parses a `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| CliError::Config(format!("bad {what} entry '{t}'")))
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(s: &str, key: &str) -> Result<T, CliError> {
    s.parse()
        .map_err(|_| CliError::Config(format!("bad value '{s}' for {key}")))
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub sim: SimulationConfig,
    pub out: PathBuf,
    pub meshes: Vec<usize>,
}

const KNOWN_KEYS: [&str; 10] = [
    "case",
    "scheme",
    "order",
    "cells",
    "cfl",
    "tend",
    "dec_nodes",
    "out",
    "snapshots",
    "meshes",
];

fn resolve(
    common: &CommonArgs,
    cells: Option<usize>,
    snapshots: Option<&str>,
    meshes: Option<&str>,
) -> Result<RunConfig, CliError> {
    let mut file = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown setting '{k}'")));
    }
    let mut take = |key: &str, flag: Option<String>| flag.or_else(|| file.remove(key));

    let case = take("case", common.case.clone())
        .ok_or_else(|| CliError::Config("no case given".into()))?;
    let spec = find_case(&case).map_err(classify)?;
    let scheme: SchemeKind = take("scheme", common.scheme.clone())
        .unwrap_or_else(|| "gf_wb".into())
        .parse()
        .map_err(classify)?;
    let order = match take("order", common.order.map(|v| v.to_string())) {
        Some(s) => parse_value(&s, "order")?,
        None => 5,
    };
    let n_cells = match take("cells", cells.map(|v| v.to_string())) {
        Some(s) => parse_value(&s, "cells")?,
        None => spec.default_cells,
    };
    let mut sim = SimulationConfig::new(scheme, order, n_cells);
    sim.cfl = match take("cfl", common.cfl.map(|v| v.to_string())) {
        Some(s) => parse_value(&s, "cfl")?,
        None => DEFAULT_CFL,
    };
    if let Some(s) = take("tend", common.tend.map(|v| v.to_string())) {
        sim.t_end = Some(parse_value(&s, "tend")?);
    }
    if let Some(s) = take("dec_nodes", common.dec_nodes.clone()) {
        sim.dec_nodes = TimeNodes::parse(&s).map_err(classify)?;
    }
    if let Some(s) = take("snapshots", snapshots.map(str::to_string)) {
        sim.snapshots = Some(parse_list(&s, "snapshot")?);
    }
    let meshes = match take("meshes", meshes.map(str::to_string)) {
        Some(s) => parse_list(&s, "mesh")?,
        None => vec![25, 50, 100, 200],
    };
    let out = take("out", common.out.as_ref().map(|p| p.display().to_string()))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    sim.validate().map_err(classify)?;
    if meshes.is_empty() || meshes.contains(&0) {
        return Err(CliError::Config("mesh sizes must be positive".into()));
    }
    Ok(RunConfig {
        case,
        sim,
        out,
        meshes,
    })
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        resolve(&self.common, self.cells, self.snapshots.as_deref(), None)
    }
}

impl ConvergenceArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        resolve(&self.common, None, None, self.meshes.as_deref())
    }
}

fn file_stem(cfg: &RunConfig) -> String {
    format!(
        "{}_{}_p{}_N{}",
        cfg.case, cfg.sim.scheme, cfg.sim.order, cfg.sim.n_cells
    )
}

/// Snapshot table: `x h q u b eta K pert`, `K` only for global flux schemes.
pub fn snapshot_text(sim: &mut Simulation) -> Result<String, SolverError> {
    let k = sim.k()?;
    let x = sim.x();
    let b = sim.b();
    let pert = sim.perturbation_field();
    let (h, q) = (sim.h(), sim.q());
    let mut s = String::new();
    s.push_str(if k.is_some() {
        "x h q u b eta K pert\n"
    } else {
        "x h q u b eta pert\n"
    });
    for i in 0..x.len() {
        let mut row = vec![x[i], h[i], q[i], q[i] / h[i], b[i], h[i] + b[i]];
        if let Some(k) = &k {
            row.push(k[i]);
        }
        row.push(pert[i]);
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite(format!(
                "snapshot value {v} in cell {i}"
            )));
        }
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Runs a case; returns the text printed to stdout.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = find_case(&cfg.case).map_err(classify)?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Config(format!("{}: {e}", cfg.out.display())))?;
    let stem = file_stem(cfg);
    let mut sim = Simulation::new(spec, cfg.sim.clone()).map_err(classify)?;
    let out_dir = cfg.out.clone();
    let mut written: Vec<PathBuf> = Vec::new();
    let result = sim.run(|s, t| {
        let text = snapshot_text(s)?;
        let path = out_dir.join(format!("{stem}_t{t}.dat"));
        fs::write(&path, text)
            .map_err(|e| SolverError::InvalidParameter(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    });
    let summary = result.map_err(|e| {
        let msg = format!("{e} (t = {})", sim.time());
        if e.is_solver_failure() {
            CliError::Solver(msg)
        } else {
            CliError::Config(msg)
        }
    })?;
    let final_text = snapshot_text(&mut sim).map_err(classify)?;
    write_file(&cfg.out.join(format!("{stem}_final.dat")), &final_text)?;
    let json =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&cfg.out.join(format!("{stem}_summary.json")), &json)?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} {} p={} N={} t={} steps={} converged={}",
        summary.case,
        summary.scheme,
        summary.order,
        summary.n_cells,
        summary.t_final,
        summary.steps,
        summary.converged
    );
    let e = &summary.errors;
    if let (Some(h), Some(q)) = (e.l2_h, e.l2_q) {
        let _ = writeln!(s, "L2(h) = {h:.4E}  L2(q) = {q:.4E}");
    }
    if let Some(d) = e.q_drift {
        let _ = writeln!(s, "max|q - q0| = {d:.4E}");
    }
    if let Some(d) = e.k_drift {
        let _ = writeln!(s, "max|K - K0| = {d:.4E}");
    }
    if let Some(p) = summary.max_perturbation {
        let _ = writeln!(s, "max|h - h_eq| = {p:.4E}");
    }
    Ok(s)
}

/// Runs the mesh study and writes the table; returns the table.
pub fn run_convergence(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = find_case(&cfg.case).map_err(classify)?;
    let rows = convergence(&spec, &cfg.sim, &cfg.meshes).map_err(classify)?;
    let table = format_convergence_table(&rows);
    if let Some(parent) = cfg.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("{}: {e}", parent.display())))?;
    }
    write_file(&cfg.out, &table)?;
    Ok(table)
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::List => Ok(case_names().join("\n") + "\n"),
        Command::Run(a) => a.resolve().and_then(|c| run(&c)),
        Command::Convergence(a) => a.resolve().and_then(|mut c| {
            if a.common.out.is_none() && c.out == Path::new("out") {
                c.out = PathBuf::from(format!(
                    "{}_{}_p{}_convergence.txt",
                    c.case, c.sim.scheme, c.sim.order
                ));
            }
            run_convergence(&c)
        }),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let m = parse_config_file(
            "# comment\ncase = subcritical\norder=3 # inline\n\ndec-nodes = lobatto\n",
        )
        .unwrap();
        assert_eq!(m["case"], "subcritical");
        assert_eq!(m["order"], "3");
        assert_eq!(m["dec_nodes"], "lobatto");
        assert!(parse_config_file("nonsense").is_err());
    }

    #[test]
    fn flags_override_and_validate() {
        let mut common = CommonArgs {
            case: Some("lake_at_rest".into()),
            ..Default::default()
        };
        let cfg = resolve(&common, None, Some("0, 0.5"), None).unwrap();
        assert_eq!(cfg.sim.n_cells, 25);
        assert_eq!(cfg.sim.order, 5);
        assert_eq!(cfg.sim.snapshots, Some(vec![0.0, 0.5]));
        common.scheme = Some("roe".into());
        assert!(matches!(
            resolve(&common, None, None, None),
            Err(CliError::Config(_))
        ));
        common.scheme = None;
        common.order = Some(4);
        assert_eq!(
            resolve(&common, None, None, None).unwrap_err().exit_code(),
            EXIT_CONFIG
        );
        let common = CommonArgs {
            case: Some("nowhere".into()),
            ..Default::default()
        };
        assert!(resolve(&common, None, None, None).is_err());
    }

    #[test]
    fn bad_flags_exit_with_config_code() {
        assert_eq!(
            main_with_args(["gfswe", "run", "--cells", "abc"]),
            EXIT_CONFIG
        );
        assert_eq!(
            main_with_args(["gfswe", "run", "--case", "lake_at_rest", "--order", "7"]),
            EXIT_CONFIG
        );
    }
}
