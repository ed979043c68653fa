//! Subcommand pipelines. Every file written here starts with the background
//! hash and the flattened effective config.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use stratwave::background::StratifiedBackground;
use stratwave::diagnostics::diagnose;
use stratwave::eulerian::{dj_inverse, redimensionalize};
use stratwave::grid::{HeightField, SlitGrid};
use stratwave::height_solver::{
    branch_point, continue_branch, newton_solve, Discretization, StopReason,
};
use stratwave::io::{
    load_background, load_field, save_field, write_background_report, BranchRow, BRANCH_CSV_HEADER,
};
use stratwave::profile::Side;
use stratwave::reduced_model::{ansatz_at, elevation_ansatz, elevation_seed, ReducedModel};
use stratwave::sturm_liouville::{critical_data, CriticalData};

use crate::config::{auto_length, RunConfig};
use crate::{Fail, Status};

#[derive(Debug)]
pub enum Task {
    Critical,
    Reduced,
    Solve,
    Continue { resume: bool },
    Diagnose { field: PathBuf },
    DiagnoseBranch { dir: Option<PathBuf> },
    Reconstruct { field: PathBuf },
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::Critical => "critical",
            Task::Reduced => "reduced",
            Task::Solve => "solve",
            Task::Continue { .. } => "continue",
            Task::Diagnose { .. } => "diagnose",
            Task::DiagnoseBranch { .. } => "diagnose-branch",
            Task::Reconstruct { .. } => "reconstruct",
        }
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    bg: StratifiedBackground,
    out: PathBuf,
    /// Values derived during the run, echoed under `[resolved]`.
    resolved: toml::Table,
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Fail {
    Fail::Config(format!("{}: {e}", path.display()))
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn header(&self) -> String {
        let mut h = String::new();
        writeln!(h, "# background_hash = {}", self.bg.hash()).ok();
        for (k, v) in self.cfg.flat() {
            writeln!(h, "# config.{k} = {v}").ok();
        }
        h
    }

    fn field_extras(&self, more: &[(&str, String)]) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self
            .cfg
            .flat()
            .into_iter()
            .map(|(k, x)| (format!("config.{k}"), x))
            .collect();
        v.extend(more.iter().map(|(k, x)| (k.to_string(), x.clone())));
        v
    }

    /// Creates `name` in the output directory with the standard header.
    fn create(&self, name: &str) -> Result<BufWriter<File>, Fail> {
        let p = self.path(name);
        let mut w = BufWriter::new(File::create(&p).map_err(|e| io_fail(&p, e))?);
        w.write_all(self.header().as_bytes())
            .map_err(|e| io_fail(&p, e))?;
        Ok(w)
    }

    fn resolve(&mut self, key: &str, v: impl Into<toml::Value>) {
        self.resolved.insert(key.to_string(), v.into());
    }

    fn write_effective_config(&self, command: &str) -> Result<(), Fail> {
        let mut text = self.cfg.to_toml();
        let mut r = toml::Table::new();
        r.insert("command".into(), command.into());
        r.insert("background_hash".into(), self.bg.hash().into());
        r.extend(self.resolved.clone());
        let mut wrap = toml::Table::new();
        wrap.insert("resolved".into(), toml::Value::Table(r));
        text.push('\n');
        text.push_str(&toml::to_string(&wrap).expect("resolved table serializes"));
        let p = self.path("effective_config.toml");
        std::fs::write(&p, text).map_err(|e| io_fail(&p, e))
    }

    fn load_field(&self, path: &Path) -> Result<HeightField, Fail> {
        let f = load_field(path).map_err(|e| io_fail(path, e))?;
        if f.bg_hash != self.bg.hash() {
            return Err(Fail::Config(format!(
                "{}: field was computed on background {}, config gives {}",
                path.display(),
                f.bg_hash,
                self.bg.hash()
            )));
        }
        Ok(f)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Fail> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.jobs)
            .build()
            .map_err(|e| Fail::Config(format!("jobs: {e}")))
    }

    fn model(&self, crit: &CriticalData) -> Result<ReducedModel, Fail> {
        Ok(ReducedModel::new(
            &self.bg,
            crit,
            self.cfg.normalization()?,
        )?)
    }

    fn grid(&self, eps: f64, b1: f64) -> Result<SlitGrid, Fail> {
        let g = &self.cfg.grid;
        let l = if g.l > 0.0 { g.l } else { auto_length(eps, b1) };
        Ok(SlitGrid::new(
            l,
            g.nq,
            g.np_minus,
            g.np_plus,
            self.bg.p_hat,
        )?)
    }
}

pub fn run(cfg: &RunConfig, task: &Task) -> Result<Status, Fail> {
    let bg = load_background(&cfg.background).map_err(|e| io_fail(&cfg.background, e))?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| io_fail(&cfg.out, e))?;
    let mut ctx = Ctx {
        cfg,
        bg,
        out: cfg.out.clone(),
        resolved: toml::Table::new(),
    };
    ctx.write_effective_config(task.name())?;
    info!("{} on background {}", task.name(), ctx.bg.hash());
    let status = match task {
        Task::Critical => critical(&mut ctx),
        Task::Reduced => reduced(&mut ctx),
        Task::Solve => solve(&mut ctx),
        Task::Continue { resume } => continuation(&mut ctx, *resume),
        Task::Diagnose { field } => diagnose_one(&mut ctx, field),
        Task::DiagnoseBranch { dir } => {
            let dir = dir.clone().unwrap_or_else(|| ctx.path("branch"));
            let n = summarize_branch(&mut ctx, &dir)?;
            println!("points = {n}");
            println!("summary = {}", ctx.path("branch_summary.csv").display());
            Ok(Status::Done)
        }
        Task::Reconstruct { field } => reconstruct(&mut ctx, field),
    };
    // the echo is refreshed even after a numerical failure
    ctx.write_effective_config(task.name())?;
    status
}

fn critical(ctx: &mut Ctx) -> Result<Status, Fail> {
    let crit = critical_data(&ctx.bg, ctx.cfg.critical.count)?;
    println!("mu_cr = {:.15e}", crit.mu_cr);
    println!("F_cr = {:.12}", crit.f_cr);
    println!("dA/dmu = {:.15e}", crit.a_slope);
    for (n, nu) in crit.spectrum.iter().enumerate() {
        println!("nu_{n} = {nu:.15e}");
    }
    ctx.resolve("mu_cr", crit.mu_cr);
    ctx.resolve("f_cr", crit.f_cr);

    let n = ctx.cfg.critical.table_points;
    let mut w = ctx.create("phi0.txt")?;
    let mut body = String::from("# p phi0\n");
    for (side, a, b) in [
        (Side::Lower, -1.0, ctx.bg.p_hat),
        (Side::Upper, ctx.bg.p_hat, 0.0),
    ] {
        for k in 0..=n {
            let p = a + (b - a) * k as f64 / n as f64;
            writeln!(body, "{:.14e} {:.14e}", p, crit.phi0.value(p, side)).ok();
        }
    }
    w.write_all(body.as_bytes())
        .map_err(stratwave::Error::from)?;
    w.flush().map_err(stratwave::Error::from)?;

    let mut r = ctx.create("background.txt")?;
    write_background_report(&ctx.bg, n, &mut r)?;
    r.flush().map_err(stratwave::Error::from)?;
    Ok(Status::Done)
}

fn reduced(ctx: &mut Ctx) -> Result<Status, Fail> {
    let crit = critical_data(&ctx.bg, 1)?;
    let model = ctx.model(&crit)?;
    println!("normalization = {}", ctx.cfg.normalization);
    println!("B1 = {:.15e}", model.b1);
    println!("B2 = {:.15e}", model.b2);
    println!("B1_bordered = {:.15e}", model.b1_bordered);
    println!("B2_bordered = {:.15e}", model.b2_bordered);
    ctx.resolve("b1", model.b1);
    ctx.resolve("b2", model.b2);
    let mut lengths = Vec::new();
    for (k, &eps) in ctx.cfg.solve.eps.iter().enumerate() {
        let g = ctx.grid(eps, model.b1)?;
        lengths.push(toml::Value::from(g.l));
        let v = elevation_seed(&model, eps)?;
        let seed = elevation_ansatz(&model, &ctx.bg, eps, &v, &g)?;
        println!(
            "eps = {eps:.6e}  F = {:.15e}  v(0) = {:.15e}  L = {:.6e}",
            seed.f,
            v.value(0.0),
            g.l
        );
        let mut w = ctx.create(&format!("seed_v_{k:02}.txt"))?;
        let mut body = format!("# eps = {eps:e}\n# q v\n");
        for i in 0..g.nq {
            let q = g.q(i);
            writeln!(body, "{:.16e} {:.16e}", q, v.value(q)).ok();
        }
        w.write_all(body.as_bytes())
            .map_err(stratwave::Error::from)?;
        w.flush().map_err(stratwave::Error::from)?;
        let extras = ctx.field_extras(&[("kind", "reduced seed".into())]);
        save_field(&seed, &extras, &ctx.path(&format!("seed_{k:02}.field")))?;
    }
    ctx.resolve("l", lengths);
    Ok(Status::Done)
}

fn discrete_mu_cr(ctx: &Ctx, g: &SlitGrid, mu_cr: f64) -> Result<f64, Fail> {
    Ok(Discretization::new(&ctx.bg, g)?.discrete_mu_cr(mu_cr)?)
}

fn solve(ctx: &mut Ctx) -> Result<Status, Fail> {
    let crit = critical_data(&ctx.bg, 1)?;
    let model = ctx.model(&crit)?;
    let opts = ctx.cfg.newton_options();
    let jobs: Vec<(usize, f64)> = ctx.cfg.solve.eps.iter().copied().enumerate().collect();
    let pool = ctx.pool()?;
    let c: &Ctx = ctx;
    let results: Vec<Result<_, Fail>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, eps)| {
                let g = c.grid(eps, model.b1)?;
                let f = if c.cfg.solve.froude > 0.0 {
                    c.cfg.solve.froude
                } else {
                    let muh = discrete_mu_cr(c, &g, crit.mu_cr)?;
                    if muh <= eps * eps {
                        return Err(Fail::Config(format!(
                            "eps = {eps} exceeds the discrete critical value {muh}"
                        )));
                    }
                    1.0 / (muh - eps * eps).sqrt()
                };
                let v = elevation_seed(&model, eps)?;
                let seed = ansatz_at(&model, &c.bg, eps, &v, &g, f)?;
                let (sol, rep) = newton_solve(&seed, &c.bg, &opts)?;
                let res = rep.residuals.last().copied().unwrap_or(f64::NAN);
                let extras = c.field_extras(&[
                    ("kind", "solution".into()),
                    ("newton_iterations", rep.iterations.to_string()),
                    ("newton_residual", format!("{res:.6e}")),
                ]);
                save_field(&sol, &extras, &c.path(&format!("solution_{k:02}.field")))?;
                let d = diagnose(&sol, &c.bg)?;
                let mut w = c.create(&format!("solution_{k:02}.diag.txt"))?;
                let mut body = String::new();
                for (key, val) in d.key_values() {
                    writeln!(body, "{key} = {val}").ok();
                }
                w.write_all(body.as_bytes())
                    .map_err(stratwave::Error::from)?;
                w.flush().map_err(stratwave::Error::from)?;
                Ok((eps, sol.f, g.l, rep.iterations, res, sol.crest_interface()))
            })
            .collect()
    });
    let mut fs = Vec::new();
    let mut ls = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok((eps, f, l, it, res, v0)) => {
                println!(
                    "eps = {eps:.6e}  F = {f:.15e}  v(0) = {v0:.15e}  iterations = {it}  residual = {res:.3e}"
                );
                fs.push(toml::Value::from(f));
                ls.push(toml::Value::from(l));
            }
            Err(e) => {
                eprintln!("{e}");
                first_err.get_or_insert(e);
            }
        }
    }
    ctx.resolve("froude", fs);
    ctx.resolve("l", ls);
    match first_err {
        Some(e) => Err(e),
        None => Ok(Status::Done),
    }
}

/// Point files of a branch directory in name order.
fn branch_files(dir: &Path) -> Result<Vec<PathBuf>, Fail> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_fail(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "field"))
        .collect();
    v.sort();
    Ok(v)
}

/// Reads `# key = value` from a field file header.
fn header_value(path: &Path, key: &str) -> Option<String> {
    let f = File::open(path).ok()?;
    let prefix = format!("# {key} = ");
    for line in BufReader::new(f).lines() {
        let line = line.ok()?;
        if line == "data" {
            break;
        }
        if let Some(v) = line.strip_prefix(&prefix) {
            return Some(v.to_string());
        }
    }
    None
}

fn continuation(ctx: &mut Ctx, resume: bool) -> Result<Status, Fail> {
    let crit = critical_data(&ctx.bg, 1)?;
    let model = ctx.model(&crit)?;
    let c = ctx.cfg.continuation.clone();
    let dir = ctx.path("branch");
    std::fs::create_dir_all(&dir).map_err(|e| io_fail(&dir, e))?;
    let existing = branch_files(&dir)?;
    if !resume && !existing.is_empty() {
        return Err(Fail::Config(format!(
            "{} already holds a branch; pass --resume to extend it",
            dir.display()
        )));
    }
    let newton = ctx.cfg.newton_options();

    let (start, second, offset, first_index) = if resume && existing.len() >= 2 {
        // re-validate the last two points before extending
        let n = existing.len();
        let mut pts = Vec::new();
        for p in &existing[n - 2..] {
            let f = ctx.load_field(p)?;
            let (sol, rep) = newton_solve(&f, &ctx.bg, &newton)?;
            info!(
                "{}: re-converged in {} iterations",
                p.display(),
                rep.iterations
            );
            pts.push(sol);
        }
        let s = header_value(&existing[n - 2], "s")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| {
                Fail::Config(format!(
                    "{}: no arclength in header",
                    existing[n - 2].display()
                ))
            })?;
        let second = pts.pop().expect("two points");
        (pts.pop().expect("two points"), second, s, n)
    } else {
        if resume {
            warn!(
                "nothing to resume in {}; starting a new branch",
                dir.display()
            );
        }
        let g = ctx.grid(c.eps_start, model.b1)?;
        let muh = discrete_mu_cr(ctx, &g, crit.mu_cr)?;
        let mut pts = Vec::new();
        for eps in [c.eps_start, c.eps_second] {
            if muh <= eps * eps {
                return Err(Fail::Config(format!(
                    "eps = {eps} exceeds the discrete critical value {muh}"
                )));
            }
            let v = elevation_seed(&model, eps)?;
            let seed = ansatz_at(&model, &ctx.bg, eps, &v, &g, 1.0 / (muh - eps * eps).sqrt())?;
            pts.push(newton_solve(&seed, &ctx.bg, &newton)?.0);
        }
        let second = pts.pop().expect("two points");
        (pts.pop().expect("two points"), second, 0.0, 0)
    };

    let g = start.grid.clone();
    let muh = discrete_mu_cr(ctx, &g, crit.mu_cr)?;
    let f_cr = 1.0 / muh.sqrt();
    ctx.resolve("l", g.l);
    ctx.resolve("mu_cr_discrete", muh);
    let opts = ctx.cfg.continuation_options();
    let skip = if first_index > 0 { 2 } else { 0 };
    let mut seen = 0usize;
    let mut write_err: Option<Fail> = None;
    let c: &Ctx = ctx;
    let branch = continue_branch(&start, &second, &c.bg, f_cr, &opts, |pt| {
        seen += 1;
        if seen <= skip || write_err.is_some() {
            return;
        }
        let idx = first_index + seen - 1 - skip;
        let extras = c.field_extras(&[
            ("kind", "branch point".into()),
            ("s", format!("{:.17e}", pt.arc_s + offset)),
            ("n_s", format!("{:.17e}", pt.n_s)),
            ("newton_iterations", pt.newton_iterations.to_string()),
        ]);
        let path = dir.join(format!("point_{idx:05}.field"));
        info!(
            "point {idx}: F = {:.10} v(0) = {:.6e}",
            pt.field.f,
            pt.field.crest_interface()
        );
        if let Err(e) = save_field(&pt.field, &extras, &path) {
            write_err = Some(io_fail(&path, e));
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    let stop = format!("{:?}", branch.stop);
    ctx.resolve("stop", stop.clone());
    let n = summarize_branch(ctx, &dir)?;
    println!("points = {n}");
    println!("stop = {stop}");
    if let Some(last) = branch.points.last() {
        println!("F_last = {:.15e}", last.field.f);
        println!("v0_last = {:.15e}", last.field.crest_interface());
    }
    println!("summary = {}", ctx.path("branch_summary.csv").display());
    match branch.stop {
        StopReason::Stagnation | StopReason::Ellipticity => Ok(Status::StagnationStop),
        StopReason::MaxPoints => Ok(Status::Done),
        StopReason::FroudeBound | StopReason::StepUnderflow => Err(Fail::BranchEnded(stop)),
    }
}

/// Writes `branch_summary.csv` for the field files in `dir`; diagnostics run
/// in parallel and rows are emitted in file-name order.
fn summarize_branch(ctx: &mut Ctx, dir: &Path) -> Result<usize, Fail> {
    let files = branch_files(dir)?;
    if files.is_empty() {
        return Err(Fail::Config(format!("{}: no field files", dir.display())));
    }
    let crit = critical_data(&ctx.bg, 1)?;
    let first = ctx.load_field(&files[0])?;
    let d = Discretization::new(&ctx.bg, &first.grid)?;
    let f_cr = 1.0 / d.discrete_mu_cr(crit.mu_cr)?.sqrt();
    let pool = ctx.pool()?;
    let c: &Ctx = ctx;
    let loaded: Vec<Result<(HeightField, Option<f64>), Fail>> = pool.install(|| {
        files
            .par_iter()
            .map(|p| {
                let f = c.load_field(p)?;
                if f.grid != first.grid {
                    return Err(Fail::Config(format!(
                        "{}: grid differs from {}",
                        p.display(),
                        files[0].display()
                    )));
                }
                let s = header_value(p, "s").and_then(|v| v.parse().ok());
                Ok((f, s))
            })
            .collect()
    });
    let loaded = loaded.into_iter().collect::<Result<Vec<_>, Fail>>()?;
    // arclength from the headers, else the chord length in (v(0), F)
    let mut arcs = Vec::with_capacity(loaded.len());
    for (k, (f, s)) in loaded.iter().enumerate() {
        let a = match s {
            Some(s) => *s,
            None if k == 0 => 0.0,
            None => {
                let (g, _) = &loaded[k - 1];
                arcs[k - 1]
                    + ((f.crest_interface() - g.crest_interface()).powi(2) + (f.f - g.f).powi(2))
                        .sqrt()
            }
        };
        arcs.push(a);
    }
    let rows: Vec<Result<BranchRow, Fail>> = pool.install(|| {
        loaded
            .par_iter()
            .zip(arcs.par_iter())
            .map(|((f, _), &s)| {
                let diag = diagnose(f, &c.bg)?;
                let bp = branch_point(&d, f.clone(), f_cr, s, 0);
                Ok(BranchRow {
                    s,
                    f: f.f,
                    v0: f.crest_interface(),
                    min_hp: bp.min_hp,
                    n_s: bp.n_s,
                    flow_force_drift: diag.flow_force_drift,
                    sup_sqrt_rho_hp: bp.sup_sqrt_rho_hp,
                    stagnation_metric: diag.stagnation_metric,
                    froude_slack: diag.froude_bound_slack,
                    nodal_ok: diag.nodal_ok(),
                })
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, Fail>>()?;
    let mut w = ctx.create("branch_summary.csv")?;
    let mut body = format!("{BRANCH_CSV_HEADER}\n");
    for r in &rows {
        body.push_str(&r.csv());
        body.push('\n');
    }
    w.write_all(body.as_bytes())
        .map_err(stratwave::Error::from)?;
    w.flush().map_err(stratwave::Error::from)?;
    ctx.resolve("branch_points", rows.len() as i64);
    Ok(rows.len())
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn diagnose_one(ctx: &mut Ctx, path: &Path) -> Result<Status, Fail> {
    let f = ctx.load_field(path)?;
    let d = diagnose(&f, &ctx.bg)?;
    let mut text = String::new();
    writeln!(text, "field: {}", path.display()).ok();
    writeln!(text, "grid: {}", f.grid.describe()).ok();
    writeln!(text, "F = {:.15e}", f.f).ok();
    writeln!(text, "v(0) = {:.15e}", f.crest_interface()).ok();
    writeln!(text, "elevation wave: {}", yes(d.elevation_ok())).ok();
    writeln!(text, "symmetric and monotone: {}", yes(d.symmetry_ok())).ok();
    writeln!(text, "nodal sign pattern: {}", yes(d.nodal_ok())).ok();
    writeln!(
        text,
        "Froude upper bound slack: {:.6e}",
        d.froude_bound_slack
    )
    .ok();
    writeln!(text, "flow-force drift: {:.6e}", d.flow_force_drift).ok();
    writeln!(text, "stagnation metric: {:.6e}", d.stagnation_metric).ok();
    writeln!(text).ok();
    writeln!(text, "[diagnostics]").ok();
    for (k, v) in d.key_values() {
        writeln!(text, "{k} = {v}").ok();
    }
    print!("{text}");
    let mut w = ctx.create("diagnose.txt")?;
    w.write_all(text.as_bytes())
        .map_err(stratwave::Error::from)?;
    w.flush().map_err(stratwave::Error::from)?;
    Ok(Status::Done)
}

fn reconstruct(ctx: &mut Ctx, path: &Path) -> Result<Status, Fail> {
    let f = ctx.load_field(path)?;
    let wave = dj_inverse(&f, &ctx.bg)?;
    let mut w = ctx.create("interfaces.csv")?;
    wave.write_interfaces_csv(&mut w)?;
    w.flush().map_err(stratwave::Error::from)?;
    let mut w = ctx.create("streamlines.csv")?;
    wave.write_streamlines_csv(&mut w)?;
    w.flush().map_err(stratwave::Error::from)?;
    println!(
        "surface pressure defect = {:.3e}",
        wave.surface_pressure_defect()
    );
    println!(
        "interface pressure jump = {:.3e}",
        wave.interface_pressure_jump()
    );
    println!(
        "Bernoulli jump residual = {:.3e}",
        wave.bernoulli_jump_residual()
    );
    if ctx.cfg.reconstruct.dimensional {
        let dw = redimensionalize(&wave, &ctx.bg.scale, ctx.cfg.reconstruct.p_atm);
        ctx.resolve("speed_scale", dw.speed_scale);
        let mut body = String::from("x,eta,zeta\n");
        for i in 0..dw.x.len() {
            writeln!(
                body,
                "{:.17e},{:.17e},{:.17e}",
                dw.x[i], dw.eta[i], dw.zeta[i]
            )
            .ok();
        }
        let mut w = ctx.create("interfaces_dimensional.csv")?;
        w.write_all(body.as_bytes())
            .map_err(stratwave::Error::from)?;
        w.flush().map_err(stratwave::Error::from)?;
        let mut body = String::from("x,y,u_minus_c,v,pressure,density\n");
        for i in 0..dw.x.len() {
            for j in 0..dw.m {
                let k = i * dw.m + j;
                writeln!(
                    body,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    dw.x[i], dw.y[k], dw.u_minus_c[k], dw.v[k], dw.pressure[k], dw.density[j]
                )
                .ok();
            }
        }
        let mut w = ctx.create("streamlines_dimensional.csv")?;
        w.write_all(body.as_bytes())
            .map_err(stratwave::Error::from)?;
        w.flush().map_err(stratwave::Error::from)?;
    }
    Ok(Status::Done)
}
