//! Command-line interface.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or configuration
//! error. Every task writes its results under the output directory
//! (flag `--out`, else `GROWTHBIF_OUTDIR`, else the config file, else
//! `out/`).

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::checks::{self, SuiteOptions};
use crate::config::RunConfig;
use crate::continuation::{self, ContinuationConfig};
use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::model::NutrientFn;
use crate::modes;
use crate::radial;
use crate::report::{write_csv, Payload, ResultFile};
use crate::spectrum::{self, SymbolTable};
use crate::svg;

#[derive(Parser, Debug)]
#[command(
    name = "growthbif",
    about = "Steady states and bifurcation branches of a tumor-growth free boundary model",
    version
)]
struct Cli {
    /// Configuration file (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Result directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelFlags {
    /// Apoptosis/mitosis balance A.
    #[arg(long)]
    a: Option<f64>,

    /// Michaelis-Menten rate (switches the law when set).
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial equilibrium: radius and nutrient profile.
    Radial {
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Mode family boundary data (n, u_n(1), u_n'(1), ratio).
    Modes {
        #[command(flatten)]
        model: ModelFlags,
        /// Highest mode index.
        #[arg(long, default_value_t = 32)]
        n_max: usize,
    },
    /// Symbol table rows (k, d_k, G_k).
    Spectrum {
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Bifurcation catalog for one symmetry order.
    Bifpoints {
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Finite-difference validation of one multiplier entry.
    VerifyMultiplier {
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        g: f64,
        /// Probe amplitude.
        #[arg(long)]
        eps: Option<f64>,
        /// Acceptance bound on the relative error.
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
    },
    /// Trace the branch of mode k*l from its catalog value.
    Trace {
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        l: usize,
        /// Index within the symmetry class (mode = k*l).
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        eps_max: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Bifurcation diagram and outline snapshots from result files.
    Diagram {
        /// Catalog result file (JSON).
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Branch result files (JSON, repeatable).
        #[arg(long)]
        branch: Vec<PathBuf>,
        /// Output SVG name.
        #[arg(long, default_value = "diagram.svg")]
        file: String,
    },
    /// Run the property suite over modules 1-7.
    CheckAll {
        /// Trimmed sample counts for a quicker pass.
        #[arg(long)]
        fast: bool,
    },
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(failures) => {
            if failures == 0 {
                0
            } else {
                1
            }
        }
        Err(Error::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(cli_config: &Option<PathBuf>, out: &Option<PathBuf>) -> Result<RunConfig> {
    let mut cfg = match cli_config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_env();
    if let Some(dir) = out {
        cfg.output.dir = dir.display().to_string();
    }
    Ok(cfg)
}

fn apply_model_flags(cfg: &mut RunConfig, flags: &ModelFlags) {
    if let Some(a) = flags.a {
        cfg.model.a = a;
    }
    if let Some(sigma) = flags.sigma {
        cfg.model.f = "michaelis-menten".to_string();
        cfg.model.sigma = sigma;
    }
}

struct Task {
    cfg: RunConfig,
    f: NutrientFn,
    out_dir: PathBuf,
    started: Instant,
}

impl Task {
    fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let f = cfg.nutrient_fn()?;
        let out_dir = PathBuf::from(&cfg.output.dir);
        Ok(Task {
            cfg,
            f,
            out_dir,
            started: Instant::now(),
        })
    }

    fn wall_ms(&self) -> u64 {
        self.started.elapsed().as_millis() as u64
    }

    fn write_table(
        &self,
        stem: &str,
        columns: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<()> {
        write_csv(&self.out_dir.join(format!("{stem}.csv")), &columns, &rows)?;
        ResultFile::new(&self.cfg, Payload::Table { columns, rows }, self.wall_ms())
            .write(&self.out_dir.join(format!("{stem}.json")))?;
        Ok(())
    }
}

fn dispatch(cli: Cli) -> Result<usize> {
    let mut cfg = load_config(&cli.config, &cli.out)?;
    match cli.command {
        Command::Radial { model } => {
            apply_model_flags(&mut cfg, &model);
            let task = Task::new(cfg)?;
            let eq = radial::find_ra(task.cfg.model.a, &task.f, &task.cfg.radial_config())?;
            println!(
                "A = {:.12}: R_A = {:.12}, v0(0) = {:.12}, residual {:.2e}",
                eq.a, eq.r_a, eq.c_a, eq.residual
            );
            let mut rows = Vec::new();
            for (s, v) in eq.nodes().iter().zip(eq.values()) {
                rows.push(vec![Some(*s), Some(*v)]);
            }
            task.write_table("radial", vec!["s".to_string(), "v0".to_string()], rows)?;
            Ok(0)
        }
        Command::Modes { model, n_max } => {
            apply_model_flags(&mut cfg, &model);
            let task = Task::new(cfg)?;
            let eq = radial::find_ra(task.cfg.model.a, &task.f, &task.cfg.radial_config())?;
            let sols = modes::solve_modes(0..=n_max, &eq, &task.f, task.cfg.numerics.mode_grid)?;
            let mut rows = Vec::new();
            for s in &sols {
                rows.push(vec![
                    Some(s.n as f64),
                    Some(s.u1),
                    Some(s.du1),
                    Some(s.ratio()),
                ]);
                println!("n = {:>3}: u(1) = {:.10}, u'(1) = {:.10}", s.n, s.u1, s.du1);
            }
            task.write_table(
                "modes",
                ["n", "u1", "du1", "ratio"].map(String::from).to_vec(),
                rows,
            )?;
            Ok(0)
        }
        Command::Spectrum { model, k_max } => {
            apply_model_flags(&mut cfg, &model);
            if let Some(k) = k_max {
                cfg.numerics.k_max = k;
            }
            let task = Task::new(cfg)?;
            let eq = radial::find_ra(task.cfg.model.a, &task.f, &task.cfg.radial_config())?;
            let table = SymbolTable::build(
                &eq,
                &task.f,
                task.cfg.numerics.k_max,
                task.cfg.numerics.mode_grid,
            )?;
            let mut rows = Vec::new();
            for k in 0..=table.k_max() {
                let g = if k >= 2 {
                    table.bif_value(k).ok()
                } else {
                    None
                };
                rows.push(vec![Some(k as f64), Some(table.denom[k]), g]);
            }
            println!(
                "R_A = {:.10}; d_0 = {:+.6e}; first roots: {:?}",
                table.r_a,
                table.denom[0],
                (2..=4.min(table.k_max()))
                    .filter_map(|k| table.bif_value(k).ok())
                    .collect::<Vec<_>>()
            );
            task.write_table(
                "spectrum",
                ["k", "d_k", "g_k"].map(String::from).to_vec(),
                rows,
            )?;
            Ok(0)
        }
        Command::Bifpoints { model, l, count } => {
            apply_model_flags(&mut cfg, &model);
            let task = Task::new(cfg)?;
            let eq = radial::find_ra(task.cfg.model.a, &task.f, &task.cfg.radial_config())?;
            let (k1, table) = spectrum::find_k1_stable(
                &eq,
                &task.f,
                task.cfg.numerics.k_max,
                task.cfg.numerics.mode_grid,
            )?;
            let g_bullet = spectrum::g_bullet(&table, k1)?;
            let points = spectrum::catalog(l, count, &table)?;
            let mut rows = Vec::new();
            for p in &points {
                println!(
                    "mode {:>3} (k = {}, l = {}): G = {:.8}",
                    p.mode, p.k, p.l, p.g
                );
                rows.push(vec![
                    Some(p.mode as f64),
                    Some(p.k as f64),
                    Some(p.l as f64),
                    Some(p.g),
                ]);
            }
            write_csv(
                &task.out_dir.join("bifpoints.csv"),
                &["mode", "k", "l", "g"].map(String::from),
                &rows,
            )?;
            ResultFile::new(
                &task.cfg,
                Payload::Catalog {
                    points,
                    g_bullet,
                    k1,
                },
                task.wall_ms(),
            )
            .write(&task.out_dir.join("bifpoints.json"))?;
            Ok(0)
        }
        Command::VerifyMultiplier {
            model,
            k,
            g,
            eps,
            rel_tol,
        } => {
            apply_model_flags(&mut cfg, &model);
            if let Some(e) = eps {
                cfg.numerics.multiplier_eps = e;
            }
            let task = Task::new(cfg)?;
            let eq = radial::find_ra(task.cfg.model.a, &task.f, &task.cfg.radial_config())?;
            let table = SymbolTable::build(
                &eq,
                &task.f,
                task.cfg.numerics.k_max,
                task.cfg.numerics.mode_grid,
            )?;
            let ctx = FieldContext::new(&eq, &task.f, task.cfg.field_config())?;
            let check = ctx
                .multiplier_checks(&table, k, &[g], task.cfg.numerics.multiplier_eps)?
                .remove(0);
            println!(
                "measured = {:+.8e}, reference = {:+.8e}, relative error = {:.3e}",
                check.measured, check.reference, check.rel_error
            );
            let ok = check.ok(rel_tol);
            if !ok {
                println!(
                    "FAIL: tolerance {rel_tol:.1e}, leakage {:.3e} (budget {:.3e})",
                    check.leak_strict, check.leak_tol
                );
            }
            Ok(usize::from(!ok))
        }
        Command::Trace {
            model,
            l,
            k,
            eps_max,
            steps,
        } => {
            apply_model_flags(&mut cfg, &model);
            let task = Task::new(cfg)?;
            let eq = radial::find_ra(task.cfg.model.a, &task.f, &task.cfg.radial_config())?;
            let table = SymbolTable::build(
                &eq,
                &task.f,
                task.cfg.numerics.k_max,
                task.cfg.numerics.mode_grid,
            )?;
            let points = spectrum::catalog(l, k, &table)?;
            let point = points
                .iter()
                .find(|p| p.k == k)
                .ok_or_else(|| Error::domain(format!("mode {}*{l} not in the catalog", k)))?
                .clone();
            let ctx = FieldContext::new(&eq, &task.f, task.cfg.field_config())?;
            let ccfg = ContinuationConfig {
                k_trunc: task.cfg.numerics.k_trunc,
                newton_tol: task.cfg.numerics.corrector_tol,
                ..Default::default()
            };
            let branch = continuation::trace_branch(&ctx, &point, eps_max, steps, &ccfg)?;
            println!(
                "branch from G_{} = {:.6}: {} points, max residual {:.2e}",
                point.mode,
                point.g,
                branch.points.len(),
                branch.max_residual()
            );
            if let Some(w) = &branch.warning {
                println!("warning: {w}");
            }
            if branch.points.len() >= 5 {
                let fit = continuation::fit_asymptotics(&branch)?;
                println!(
                    "fit: G(eps) ~ {:.6} {:+.4} eps, quadratic defect {:.4}",
                    fit.g_intercept, fit.g_slope, fit.quadratic_defect
                );
            }
            let mut rows = Vec::new();
            for p in &branch.points {
                let mut row = vec![Some(p.eps), Some(p.g), Some(p.residual)];
                row.extend(p.shape.a.iter().map(|c| Some(*c)));
                rows.push(row);
            }
            let mut columns = vec!["eps".to_string(), "g".to_string(), "residual".to_string()];
            columns.extend((0..=task.cfg.numerics.k_trunc).map(|m| format!("a{m}")));
            write_csv(&task.out_dir.join("branch.csv"), &columns, &rows)?;
            let warned = branch.warning.is_some();
            // outline snapshot of the last accepted shape
            if let Some(last) = branch.points.last() {
                svg::emit_outline(
                    &last.shape,
                    eq.r_a,
                    &task.out_dir.join(format!("outline_mode{}.svg", point.mode)),
                )?;
            }
            ResultFile::new(&task.cfg, Payload::Branch(branch), task.wall_ms())
                .write(&task.out_dir.join("branch.json"))?;
            Ok(usize::from(warned))
        }
        Command::Diagram {
            catalog,
            branch,
            file,
        } => {
            let task = Task::new(cfg)?;
            let mut points = Vec::new();
            if let Some(path) = catalog {
                match ResultFile::read(&path)?.payload {
                    Payload::Catalog { points: p, .. } => points = p,
                    _ => {
                        return Err(Error::config(format!(
                            "{} does not hold a catalog payload",
                            path.display()
                        )))
                    }
                }
            }
            let mut branches = Vec::new();
            let mut branch_configs = Vec::new();
            for path in branch {
                let rf = ResultFile::read(&path)?;
                match rf.payload {
                    Payload::Branch(b) => {
                        branches.push(b);
                        branch_configs.push(rf.config);
                    }
                    _ => {
                        return Err(Error::config(format!(
                            "{} does not hold a branch payload",
                            path.display()
                        )))
                    }
                }
            }
            if points.is_empty() && branches.is_empty() {
                return Err(Error::config(
                    "need at least one catalog or branch file".to_string(),
                ));
            }
            let path = task.out_dir.join(&file);
            svg::emit_diagram(&points, &branches, &path)?;
            println!("wrote {}", path.display());
            // per-branch outline snapshots at the largest amplitude,
            // scaled by the equilibrium radius of the producing run
            for (b, bcfg) in branches.iter().zip(&branch_configs) {
                if let Some(last) = b.points.last() {
                    let bf = bcfg.nutrient_fn()?;
                    let eq = radial::find_ra(bcfg.model.a, &bf, &bcfg.radial_config())?;
                    let out = task.out_dir.join(format!("outline_mode{}.svg", b.mode()));
                    svg::emit_outline(&last.shape, eq.r_a, &out)?;
                    println!("wrote {}", out.display());
                }
            }
            Ok(0)
        }
        Command::CheckAll { fast } => {
            let task = Task::new(cfg)?;
            let results = checks::run_all(SuiteOptions { fast }, &task.cfg)?;
            let mut failures = 0usize;
            for r in &results {
                println!("{}", r.line());
                if !r.passed {
                    failures += 1;
                }
            }
            let flagged = results.iter().filter(|r| r.flagged).count();
            println!(
                "{} checks: {} passed, {failures} failed, {flagged} advisory flags",
                results.len(),
                results.len() - failures
            );
            ResultFile::new(
                &task.cfg,
                Payload::Checks {
                    lines: results.iter().map(|r| r.to_check_line()).collect(),
                },
                task.wall_ms(),
            )
            .write(&task.out_dir.join("check_all.json"))?;
            Ok(failures)
        }
    }
}
