use awe_core::hjsolver::{
    brs_query, load_controls, load_value, save_controls, save_value, solve_brs, GriddedValueFunction, SafetyGame,
    NDIM,
};
use awe_core::sim::{power_report, read_trace, simulate, write_trace, Outcome, RunConfig, SafetyTables};
use clap::{Parser, Subcommand};
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_RUPTURE: u8 = 3;

/// Safety synthesis and closed-loop simulation for a tethered aircraft.
#[derive(Parser)]
#[command(name = "awe", version)]
struct Cli {
    /// Worker threads (defaults to AWE_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the reach-avoid game and write the value and control tables.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "value.awevf")]
        value: PathBuf,
        #[arg(long, default_value = "controls.awect")]
        controls: PathBuf,
        /// Print one progress line per time step.
        #[arg(long)]
        progress: bool,
    },
    /// Run one closed-loop episode and write its trace.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use the hybrid controller (needs --value and --controls).
        #[arg(long)]
        hybrid: bool,
        #[arg(long)]
        value: Option<PathBuf>,
        #[arg(long)]
        controls: Option<PathBuf>,
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a table header, or a (s, σ) slice of the value function as CSV.
    Inspect {
        table: PathBuf,
        /// Fixed coordinates, e.g. htau=250,va=30,chi=0,gamma=0,dt=0.015
        #[arg(long)]
        slice: Option<String>,
    },
    /// Power figures of a recorded trace.
    Power {
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, kind: "usage", message: message.into() }
    }

    fn runtime(kind: &'static str, e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_RUNTIME, kind, message: e.to_string() }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, Failure> {
    match path {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::runtime("config", e)),
        None => Ok(RunConfig::default()),
    }
}

fn synth(cfg: &RunConfig, value: &Path, controls: &Path, progress: bool) -> Result<(), Failure> {
    let grid = cfg.synthesis.grid.grid().map_err(|e| Failure::runtime("config", e))?;
    let game = SafetyGame::new(cfg.safety_model(), cfg.game_config())
        .with_grid(&grid)
        .map_err(|e| Failure::runtime("solver", e))?;
    let start = Instant::now();
    let mut observe = |k: usize, v: &GriddedValueFunction, _: &[f64]| {
        if progress {
            let inside = v.values.iter().filter(|&&x| x <= 0.0).count();
            eprintln!(
                "step {k}: t = {:.4} s, {inside} of {} nodes inside, {:.1} s elapsed",
                v.t,
                v.values.len(),
                start.elapsed().as_secs_f64()
            );
        }
    };
    let sol = solve_brs(&game, &grid, &cfg.synthesis.solver, Some(&mut observe)).map_err(|e| Failure::runtime("solver", e))?;
    save_value(value, &sol.value).map_err(|e| Failure::runtime("io", e))?;
    save_controls(controls, &sol.controls).map_err(|e| Failure::runtime("io", e))?;
    let inside = sol.value.values.iter().filter(|&&x| x <= 0.0).count();
    println!(
        "{}",
        json!({
            "nodes": grid.len(),
            "steps": sol.steps,
            "dt": sol.dt,
            "inside": inside,
            "seconds": start.elapsed().as_secs_f64(),
        })
    );
    Ok(())
}

fn run_simulation(
    mut cfg: RunConfig,
    hybrid: bool,
    value: Option<PathBuf>,
    controls: Option<PathBuf>,
    trace: &Path,
    seed: Option<u64>,
) -> Result<u8, Failure> {
    cfg.sim.hybrid |= hybrid;
    if let Some(s) = seed {
        cfg.sim.seed = s;
    }
    let tables = match (value, controls) {
        (Some(v), Some(c)) => Some(SafetyTables {
            value: load_value(&v).map_err(|e| Failure::runtime("table", e))?,
            controls: load_controls(&c).map_err(|e| Failure::runtime("table", e))?,
        }),
        (None, None) => None,
        _ => return Err(Failure::usage("--value and --controls go together")),
    };
    if cfg.sim.hybrid && tables.is_none() {
        return Err(Failure::usage("hybrid mode needs --value and --controls"));
    }
    let res = simulate(&cfg, tables.as_ref()).map_err(|e| Failure::runtime("simulation", e))?;
    let file = File::create(trace).map_err(|e| Failure::runtime("io", e))?;
    let mut w = BufWriter::new(file);
    write_trace(&mut w, &res.trace).map_err(|e| Failure::runtime("io", e))?;
    w.flush().map_err(|e| Failure::runtime("io", e))?;
    println!(
        "{}",
        json!({
            "outcome": res.outcome.as_str(),
            "reason": res.reason,
            "duration": res.duration,
            "cycles": res.cycles,
            "max_force": res.max_force,
            "safety_fraction": res.safety_fraction,
            "power": res.report,
        })
    );
    Ok(if res.outcome == Outcome::Ruptured { EXIT_RUPTURE } else { 0 })
}

fn parse_slice(spec: &str) -> Result<[f64; 5], Failure> {
    let keys = ["htau", "va", "chi", "gamma", "dt"];
    let mut vals = [None; 5];
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Failure::usage(format!("bad slice entry '{part}'")))?;
        let i = keys
            .iter()
            .position(|&n| n == k.trim())
            .ok_or_else(|| Failure::usage(format!("unknown slice key '{k}'")))?;
        vals[i] = Some(v.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad number '{v}'")))?);
    }
    let mut out = [0.0; 5];
    for (i, v) in vals.iter().enumerate() {
        out[i] = v.ok_or_else(|| Failure::usage(format!("slice needs {}", keys[i])))?;
    }
    Ok(out)
}

fn inspect(table: &Path, slice: Option<String>) -> Result<(), Failure> {
    let bytes = std::fs::read(table).map_err(|e| Failure::runtime("io", e))?;
    let grid = match awe_core::hjsolver::table_io::decode_value(&bytes) {
        Ok(v) => {
            if let Some(spec) = slice {
                return print_slice(&v, &parse_slice(&spec)?);
            }
            v.grid
        }
        Err(_) => {
            if slice.is_some() {
                return Err(Failure::usage("slices need a value table"));
            }
            awe_core::hjsolver::table_io::decode_controls(&bytes).map_err(|e| Failure::runtime("table", e))?.grid
        }
    };
    let axes: Vec<_> = awe_core::hjsolver::grid::AXIS_NAMES
        .iter()
        .zip(&grid.axes)
        .map(|(name, a)| json!({"name": name, "n": a.n, "min": a.min, "max": a.max, "periodic": a.periodic}))
        .collect();
    println!("{}", json!({"nodes": grid.len(), "axes": axes}));
    Ok(())
}

fn print_slice(v: &GriddedValueFunction, fixed: &[f64; 5]) -> Result<(), Failure> {
    let g = &v.grid;
    let out = std::io::stdout();
    let mut w = BufWriter::new(out.lock());
    let io = |e: std::io::Error| Failure::runtime("io", e);
    writeln!(w, "s,sigma,value,inside").map_err(io)?;
    for i in 0..g.axes[0].n {
        for j in 0..g.axes[1].n {
            let mut x = [0.0; NDIM];
            x[0] = g.axes[0].coord(i);
            x[1] = g.axes[1].coord(j);
            x[2..].copy_from_slice(fixed);
            let (val, inside) = brs_query(v, &x).map_err(|e| Failure::runtime("table", e))?;
            writeln!(w, "{:.10e},{:.10e},{:.10e},{}", x[0], x[1], val, inside as u8).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn power(trace: &Path, config: &Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let text = std::fs::read_to_string(trace).map_err(|e| Failure::runtime("io", e))?;
    let rows = read_trace(&text).map_err(|e| Failure::runtime("trace", e))?;
    let report = power_report(&rows, &cfg).map_err(|e| Failure::runtime("power", e))?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

fn threads(cli: Option<usize>) -> Result<Option<usize>, Failure> {
    if cli.is_some() {
        return Ok(cli);
    }
    match std::env::var("AWE_THREADS") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| Failure::usage(format!("AWE_THREADS='{s}' is not a count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::runtime("threads", e))?;
    }
    match cli.cmd {
        Cmd::Synth { config, value, controls, progress } => synth(&load_config(&config)?, &value, &controls, progress).map(|_| 0),
        Cmd::Simulate { config, hybrid, value, controls, trace, seed } => {
            run_simulation(load_config(&config)?, hybrid, value, controls, &trace, seed)
        }
        Cmd::Inspect { table, slice } => inspect(&table, slice).map(|_| 0),
        Cmd::Power { trace, config } => power(&trace, &config).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({"error": f.kind, "message": f.message}));
            ExitCode::from(f.code)
        }
    }
}
