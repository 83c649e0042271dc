//! `rearrange`: validate, plan, run and sweep assembly scenarios.
//!
//! Exit codes: 0 ok, 1 malformed input or I/O failure, 2 assumption
//! warnings (`validate` only), 3 no plan, 4 run failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use rearrange_core::io::{render_svg, write_trajectory_csv};
use rearrange_core::world::validate_assumptions;
use rearrange_core::{
    deliberative_plan, load_scenario, run_plan, Drive, IoError, Plan, RefPath, RunSummary, Scenario, SimConfig,
};

const EXIT_MALFORMED: u8 = 1;
const EXIT_WARNINGS: u8 = 2;
const EXIT_NO_PLAN: u8 = 3;
const EXIT_RUN_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(name = "rearrange", version, about = "Plan and simulate sensor-based object rearrangement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check obstacle separation, goal clearance and the wall-following band.
    Validate { file: PathBuf },
    /// Compute a symbolic plan on the known map and print it.
    Plan {
        file: PathBuf,
        /// Precede every action with comment lines sampling its path.
        #[arg(long)]
        show_paths: bool,
        /// Write `plan.txt` into this directory instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a plan in simulation and write per-action trajectories.
    Run {
        file: PathBuf,
        /// Plan file to execute; planned on the known map when absent.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write `run.svg` with the workspace, paths and traces.
        #[arg(long)]
        svg: bool,
        /// Use the holonomic controller for free navigation.
        #[arg(long)]
        holonomic: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run every scenario in a directory over a parameter grid.
    Sweep {
        dir: PathBuf,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
        /// Wall-following band values; the scenario's own when omitted.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        rays: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
        #[arg(long)]
        max_steps: Option<u64>,
    },
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// Integration step in seconds.
    #[arg(long)]
    h: Option<f64>,
    /// Wall-following band in meters.
    #[arg(long)]
    eps: Option<f64>,
    /// Controller gain.
    #[arg(long)]
    k: Option<f64>,
    /// LIDAR rays per scan.
    #[arg(long)]
    rays: Option<usize>,
    /// Step cap per action.
    #[arg(long)]
    max_steps: Option<u64>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) {
        let p = &mut s.params;
        if let Some(h) = self.h {
            p.h = h;
        }
        if let Some(eps) = self.eps {
            p.eps = Some(eps);
        }
        if let Some(k) = self.k {
            p.k = k;
        }
        if let Some(n) = self.rays {
            p.rays = n;
        }
        if let Some(m) = self.max_steps {
            p.max_steps = m;
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Plan { file, show_paths, out } => cmd_plan(&file, show_paths, out.as_deref()),
        Command::Run {
            file,
            plan,
            out,
            svg,
            holonomic,
            overrides,
        } => cmd_run(&file, plan.as_deref(), &out, svg, holonomic, &overrides),
        Command::Sweep {
            dir,
            out,
            eps,
            k,
            rays,
            h,
            max_steps,
        } => cmd_sweep(&dir, &out, &Grid { eps, k, rays, h }, max_steps),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_MALFORMED)
        }
    }
}

/// Loads a scenario, turning parse failures into exit code 1 with the
/// diagnostic on stderr.
fn load(file: &Path) -> Result<Scenario, ExitCode> {
    load_scenario(file).map_err(|e| {
        match &e {
            IoError::File { .. } => eprintln!("error: {e}"),
            _ => eprintln!("error: {}: {e}", file.display()),
        }
        ExitCode::from(EXIT_MALFORMED)
    })
}

fn cmd_validate(file: &Path) -> Result<ExitCode> {
    let s = match load(file) {
        Ok(s) => s,
        Err(code) => return Ok(code),
    };
    let report = validate_assumptions(&s);
    println!("scenario: {}", s.name);
    println!("obstacles: {} ({} known)", s.obstacles.len(), s.obstacles.iter().filter(|o| o.known).count());
    println!("objects: {}", s.objects.len());
    println!("eta: {:.4} m", report.eta);
    println!("required separation 2(r + max rho): {:.4} m", report.required_separation);
    println!("separation margin: {:.4} m", report.separation_margin());
    println!("eps: {:.4} m (bound {:.4} m)", report.eps, report.eps_bound);
    for g in &report.goals {
        println!(
            "goal of object {}: clearance {:.4} m, required {:.4} m, {}",
            g.object,
            g.clearance,
            g.required,
            if g.ok { "ok" } else { "violated" }
        );
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    if report.all_hold() {
        println!("assumptions hold");
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_WARNINGS))
    }
}

fn cmd_plan(file: &Path, show_paths: bool, out: Option<&Path>) -> Result<ExitCode> {
    let s = match load(file) {
        Ok(s) => s,
        Err(code) => return Ok(code),
    };
    let plan = match deliberative_plan(&s) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("no plan: {e}");
            return Ok(ExitCode::from(EXIT_NO_PLAN));
        }
    };
    let text = plan.to_text(show_paths);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("plan.txt");
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{} actions written to {}", plan.actions.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn read_plan(path: &Path, s: &Scenario) -> Result<Option<Plan>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match Plan::parse(&text).and_then(|p| p.check(s).map(|_| p)) {
        Ok(p) => Ok(Some(p)),
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            Ok(None)
        }
    }
}

fn sim_config(s: &Scenario, holonomic: bool) -> SimConfig {
    let mut cfg = SimConfig::from_scenario(s);
    if holonomic {
        cfg.drive = Drive::Holonomic;
    }
    cfg
}

fn cmd_run(
    file: &Path,
    plan_file: Option<&Path>,
    out: &Path,
    svg: bool,
    holonomic: bool,
    overrides: &Overrides,
) -> Result<ExitCode> {
    let mut s = match load(file) {
        Ok(s) => s,
        Err(code) => return Ok(code),
    };
    overrides.apply(&mut s);
    for w in validate_assumptions(&s).warnings {
        eprintln!("warning: {w}");
    }
    let plan = match plan_file {
        Some(p) => match read_plan(p, &s)? {
            Some(plan) => plan,
            None => return Ok(ExitCode::from(EXIT_MALFORMED)),
        },
        None => match deliberative_plan(&s) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("no plan: {e}");
                return Ok(ExitCode::from(EXIT_NO_PLAN));
            }
        },
    };

    let started = Instant::now();
    let summary = run_plan(&s, &plan, sim_config(&s, holonomic));
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for report in &summary.actions {
        let path = out.join(format!("action_{:02}_{}.csv", report.index, report.kind.name()));
        let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_trajectory_csv(std::io::BufWriter::new(f), &report.records)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let table = summary_table(&s, &summary);
    fs::write(out.join("summary.txt"), &table).context("writing summary")?;
    print!("{table}");
    println!("wall time: {elapsed:.2} s");

    if svg {
        let paths: Vec<RefPath> = plan.actions.iter().map(|a| a.path.clone()).collect();
        let traces: Vec<&[_]> = summary.actions.iter().map(|a| a.records.as_slice()).collect();
        let path = out.join("run.svg");
        fs::write(&path, render_svg(&s, &paths, &traces)).with_context(|| format!("writing {}", path.display()))?;
    }

    Ok(if summary.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_RUN_FAILURE)
    })
}

fn summary_table(s: &Scenario, summary: &RunSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:>3}  {:<20} {:<10} {:>8} {:>12} {:>6} {:>10}  detail",
        "#", "action", "outcome", "steps", "min clear", "walls", "placement"
    );
    for a in &summary.actions {
        let (outcome, detail) = match &a.outcome {
            Ok(()) => ("ok", String::new()),
            Err(e) => ("FAILED", e.to_string()),
        };
        let placement = a.placement_error.map_or("-".to_string(), |e| format!("{e:.4}"));
        let _ = writeln!(
            t,
            "{:>3}  {:<20} {:<10} {:>8} {:>12.4e} {:>6} {:>10}  {detail}",
            a.index,
            a.kind.to_string(),
            outcome,
            a.steps,
            a.min_clearance,
            a.episodes.len(),
            placement
        );
    }
    for (o, e) in s.objects.iter().zip(&summary.placement_errors) {
        let _ = writeln!(t, "object {} final distance to goal: {e:.4} m", o.id);
    }
    let _ = writeln!(t, "min clearance: {:.4e} m", summary.min_clearance);
    let _ = writeln!(t, "wall-following episodes: {}", summary.wall_episodes);
    let _ = writeln!(t, "result: {}", if summary.success { "success" } else { "failure" });
    t
}

struct Grid {
    eps: Vec<f64>,
    k: Vec<f64>,
    rays: Vec<usize>,
    h: Vec<f64>,
}

/// One grid point; `None` keeps the scenario's value.
#[derive(Clone, Copy)]
struct Point {
    eps: Option<f64>,
    k: Option<f64>,
    rays: Option<usize>,
    h: Option<f64>,
}

impl Grid {
    fn points(&self) -> Vec<Point> {
        fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &eps in &axis(&self.eps) {
            for &k in &axis(&self.k) {
                for &rays in &axis(&self.rays) {
                    for &h in &axis(&self.h) {
                        out.push(Point { eps, k, rays, h });
                    }
                }
            }
        }
        out
    }
}

struct SweepRow {
    scenario: String,
    eps: f64,
    k: f64,
    rays: usize,
    h: f64,
    eps_bound: f64,
    status: String,
    actions_ok: usize,
    actions: usize,
    min_clearance: f64,
    max_placement_error: f64,
    wall_episodes: usize,
    steps: u64,
}

impl SweepRow {
    const HEADER: &'static str = "scenario,eps,k,rays,h,eps_bound,eps_above_bound,status,actions_ok,actions,min_clearance,max_placement_error,wall_episodes,steps";

    fn success(&self) -> bool {
        self.status == "success"
    }

    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.eps,
            self.k,
            self.rays,
            self.h,
            self.eps_bound,
            self.eps >= self.eps_bound,
            self.status,
            self.actions_ok,
            self.actions,
            self.min_clearance,
            self.max_placement_error,
            self.wall_episodes,
            self.steps
        )
    }
}

fn sweep_one(name: &str, base: &Scenario, p: Point, max_steps: Option<u64>) -> SweepRow {
    let mut s = base.clone();
    Overrides {
        h: p.h,
        eps: p.eps,
        k: p.k,
        rays: p.rays,
        max_steps,
    }
    .apply(&mut s);
    let mut row = SweepRow {
        scenario: name.to_string(),
        eps: s.epsilon(),
        k: s.params.k,
        rays: s.params.rays,
        h: s.params.h,
        eps_bound: s.eps_bound(),
        status: String::new(),
        actions_ok: 0,
        actions: 0,
        min_clearance: f64::NAN,
        max_placement_error: f64::NAN,
        wall_episodes: 0,
        steps: 0,
    };
    let plan = match deliberative_plan(&s) {
        Ok(p) => p,
        Err(_) => {
            row.status = "no-plan".into();
            return row;
        }
    };
    let summary = run_plan(&s, &plan, sim_config(&s, false));
    row.actions = plan.actions.len();
    row.actions_ok = summary.actions.iter().filter(|a| a.succeeded()).count();
    row.min_clearance = summary.min_clearance;
    row.max_placement_error = summary.placement_errors.iter().copied().fold(0.0, f64::max);
    row.wall_episodes = summary.wall_episodes;
    row.steps = summary.actions.iter().map(|a| a.steps).sum();
    row.status = if summary.success {
        "success".into()
    } else {
        summary
            .actions
            .iter()
            .find_map(|a| a.outcome.as_ref().err())
            .map_or("failure".to_string(), |e| format!("failure: {}", e.to_string().replace(',', ";")))
    };
    row
}

fn cmd_sweep(dir: &Path, out: &Path, grid: &Grid, max_steps: Option<u64>) -> Result<ExitCode> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();

    let mut malformed = false;
    let mut scenarios = Vec::new();
    for f in &files {
        match load(f) {
            Ok(s) => {
                let name = f.file_stem().map_or(s.name.clone(), |n| n.to_string_lossy().into_owned());
                scenarios.push((name, s));
            }
            Err(_) => malformed = true,
        }
    }

    let points = grid.points();
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
        .collect();
    // `collect` on an indexed parallel iterator keeps input order.
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, j)| sweep_one(&scenarios[i].0, &scenarios[i].1, points[j], max_steps))
        .collect();

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut detail = format!("{}\n", SweepRow::HEADER);
    for r in &rows {
        detail.push_str(&r.csv());
        detail.push('\n');
    }
    fs::write(out.join("sweep.csv"), detail).context("writing sweep.csv")?;

    let mut summary = String::from("eps,k,rays,h,runs,successes,success_rate,mean_min_clearance,flagged\n");
    for (j, _) in points.iter().enumerate() {
        let group: Vec<&SweepRow> = rows.iter().skip(j).step_by(points.len().max(1)).collect();
        if group.is_empty() {
            continue;
        }
        let successes = group.iter().filter(|r| r.success()).count();
        let clear: Vec<f64> = group.iter().map(|r| r.min_clearance).filter(|c| c.is_finite()).collect();
        let mean = if clear.is_empty() {
            f64::NAN
        } else {
            clear.iter().sum::<f64>() / clear.len() as f64
        };
        let flagged = group.iter().filter(|r| r.eps >= r.eps_bound).count();
        let p = points[j];
        let show = |v: Option<String>| v.unwrap_or_else(|| "default".into());
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{successes},{},{mean},{flagged}",
            show(p.eps.map(|v| v.to_string())),
            show(p.k.map(|v| v.to_string())),
            show(p.rays.map(|v| v.to_string())),
            show(p.h.map(|v| v.to_string())),
            group.len(),
            successes as f64 / group.len() as f64,
        );
    }
    fs::write(out.join("sweep_summary.csv"), &summary).context("writing sweep_summary.csv")?;

    let ok = rows.iter().filter(|r| r.success()).count();
    println!(
        "{} runs over {} scenarios and {} grid points: {ok} succeeded; results in {}",
        rows.len(),
        scenarios.len(),
        points.len(),
        out.display()
    );
    for r in rows.iter().filter(|r| r.eps >= r.eps_bound) {
        println!(
            "flagged: {} eps {} is not below the bound {:.4}",
            r.scenario, r.eps, r.eps_bound
        );
    }
    Ok(if malformed {
        ExitCode::from(EXIT_MALFORMED)
    } else {
        ExitCode::SUCCESS
    })
}
