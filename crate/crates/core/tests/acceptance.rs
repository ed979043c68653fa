//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stratwave::background::{background_from_branches, StratifiedBackground};
use stratwave::diagnostics::{
    check_critical_triviality, check_flow_force_identity, check_froude_upper_bound, check_nodal,
    flow_force_drift, stagnation_and_velocity,
};
use stratwave::grid::{HeightField, SlitGrid};
use stratwave::height_solver::{
    assemble_jacobian, assemble_residual, continue_branch, kernel_residual, laminar_sigma_min,
    manufactured_forcing, newton_solve, newton_solve_forced, Branch, ContinuationOptions, Derivs,
    Discretization, NewtonOptions, StopReason,
};
use stratwave::profile::{Branch as ProfileBranch, Side};
use stratwave::reduced_model::{
    ansatz_at, elevation_ansatz, elevation_seed, sech_seed, Normalization, ReducedModel,
};
use stratwave::sturm_liouville::{critical_data, find_mu_cr};

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn two_layer() -> StratifiedBackground {
    StratifiedBackground::two_layer(1.02, 0.5).unwrap()
}

fn model_for(bg: &StratifiedBackground) -> ReducedModel {
    let crit = critical_data(bg, 3).unwrap();
    ReducedModel::new(bg, &crit, Normalization::BedSlope).unwrap()
}

fn last_residual(r: &[f64]) -> f64 {
    r.last().copied().unwrap_or(f64::NAN)
}

fn a1_constant_density() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for ph in [-0.5, -0.3] {
        let bg = StratifiedBackground::uniform(ph).map_err(fail)?;
        let crit = find_mu_cr(&bg).map_err(fail)?;
        let m = ReducedModel::new(&bg, &crit, Normalization::BedSlope).map_err(fail)?;
        worst = worst
            .max((crit.mu_cr - 1.0).abs())
            .max((crit.f_cr - 1.0).abs())
            .max((m.b1 - 3.0).abs())
            .max((m.b2 + 4.5).abs());
    }
    let el = t.elapsed();
    ensure(
        worst < 1e-8 && el < Duration::from_secs(1),
        format!("max |error| {worst:.2e}, {el:.2?}"),
    )
}

fn a2_two_layer_oracle() -> Outcome {
    let t = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, bg) in [
        ("constant layers", two_layer()),
        ("stratified layers", common::stratified_two_layer()),
    ] {
        if (bg.rho_jump() + 0.02).abs() > 1e-12 {
            return Err(format!("{name}: density jump is {}", bg.rho_jump()));
        }
        let shoot = find_mu_cr(&bg).map_err(fail)?.mu_cr;
        let (fem, _) = common::fem_mu_cr_richardson(&bg, 1024);
        let small = common::fem_pencil(&bg, 40);
        let self_check = (small.lowest() - small.lowest_dense()).abs() / small.lowest_dense();
        let rel = (shoot - fem).abs() / fem;
        ok &= rel < 1e-6 && self_check < 1e-10;
        details.push(format!(
            "{name}: rel {rel:.2e} (oracle self-check {self_check:.1e})"
        ));
    }
    let el = t.elapsed();
    ensure(
        ok && el < Duration::from_secs(30),
        format!("{}, {el:.2?}", details.join("; ")),
    )
}

fn a3_spectrum() -> Outcome {
    let t = Instant::now();
    let mut worst_nu0 = 0.0f64;
    let mut descending = true;
    for bg in [
        StratifiedBackground::uniform(-0.5).unwrap(),
        two_layer(),
        common::stratified_two_layer(),
    ] {
        let c = critical_data(&bg, 5).map_err(fail)?;
        if c.spectrum.len() < 5 {
            return Err(format!("only {} eigenvalues", c.spectrum.len()));
        }
        worst_nu0 = worst_nu0.max(c.spectrum[0].abs());
        descending &= c.spectrum.windows(2).take(4).all(|w| w[1] < w[0]);
    }
    let el = t.elapsed();
    ensure(
        worst_nu0 < 1e-8 && descending && el < Duration::from_secs(10),
        format!("max |ν₀| {worst_nu0:.2e}, strictly descending {descending}, {el:.2?}"),
    )
}

fn a4_sech_identity() -> Outcome {
    let mut worst = 0.0f64;
    for bg in [StratifiedBackground::uniform(-0.5).unwrap(), two_layer()] {
        let crit = find_mu_cr(&bg).map_err(fail)?;
        for norm in [Normalization::BedSlope, Normalization::InterfaceUnit] {
            let m = ReducedModel::new(&bg, &crit, norm).map_err(fail)?;
            for eps in [0.05, 0.1, 0.3] {
                let e2 = eps * eps;
                let s = sech_seed(&m, eps).map_err(fail)?;
                let r = elevation_seed(&m, eps).map_err(fail)?;
                for k in 0..=10_000 {
                    let q = -50.0 + 0.01 * k as f64;
                    // literal orbit of the printed-sign ODE, reflected orbit of the corrected one
                    let a = s.second(q) - (m.b1 * e2 * s.value(q) - m.b2 * s.value(q).powi(2));
                    let b = r.second(q) - (m.b1 * e2 * r.value(q) + m.b2 * r.value(q).powi(2));
                    worst = worst.max(a.abs()).max(b.abs());
                }
            }
        }
    }
    ensure(
        worst < 1e-10,
        format!("max residual {worst:.2e} on [−50, 50]"),
    )
}

/// Relative amplitude discrepancy at the crest interface node.
fn seeded_solve(
    bg: &StratifiedBackground,
    model: &ReducedModel,
    eps: f64,
    grid: &SlitGrid,
) -> std::result::Result<(f64, usize, f64), String> {
    let d = Discretization::new(bg, grid).map_err(fail)?;
    let muh = d.discrete_mu_cr(model.mu_cr).map_err(fail)?;
    let v = elevation_seed(model, eps).map_err(fail)?;
    let seed = ansatz_at(model, bg, eps, &v, grid, 1.0 / (muh - eps * eps).sqrt()).map_err(fail)?;
    let (sol, rep) = newton_solve(&seed, bg, &NewtonOptions::default()).map_err(fail)?;
    let pred = v.amplitude * model.phi.at(bg.p_hat);
    Ok((
        (sol.crest_interface() - pred) / pred,
        rep.iterations,
        last_residual(&rep.residuals),
    ))
}

fn a5_seed_to_solution() -> Outcome {
    let t = Instant::now();
    let bg = two_layer();
    let model = model_for(&bg);
    let eps = 0.05;
    let g = SlitGrid::new(40.0 / (eps * model.b1.sqrt()), 161, 65, 65, bg.p_hat).map_err(fail)?;
    let (rel, iters, res) = seeded_solve(&bg, &model, eps, &g)?;
    let mut errs = Vec::new();
    let epss = [0.2, 0.1, 0.05];
    for e in epss {
        let g = SlitGrid::new(30.0 / (e * model.b1.sqrt()), 321, 65, 65, bg.p_hat).map_err(fail)?;
        errs.push(seeded_solve(&bg, &model, e, &g)?.0.abs());
    }
    // least-squares slope of log error against log ε
    let xs: Vec<f64> = epss.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let shrinking = errs.windows(2).all(|w| w[1] < w[0]);
    let el = t.elapsed();
    ensure(
        res < 1e-10
            && iters <= 8
            && rel.abs() < 0.1
            && shrinking
            && (slope - 2.0).abs() <= 0.25
            && el < Duration::from_secs(120),
        format!(
            "161×130: {iters} iterations, residual {res:.1e}, rel amplitude {:.2e}; \
             discrepancy {:.2e} → {:.2e} → {:.2e}, slope {slope:.2}, {el:.2?}",
            rel.abs(),
            errs[0],
            errs[1],
            errs[2]
        ),
    )
}

fn a6_manufactured() -> Outcome {
    let t = Instant::now();
    let bg = common::mms_background();
    let ph = bg.p_hat;
    let amp = 0.1;
    let exact = move |q: f64, p: f64, s: Side| {
        let g = (-q * q / 4.0).exp();
        let gq = -q / 2.0 * g;
        let gqq = (q * q / 4.0 - 0.5) * g;
        let (m, mp, mpp) = match s {
            Side::Lower => {
                let x = p + 1.0;
                (x + 0.5 * x * x, 1.0 + x, 1.0)
            }
            Side::Upper => {
                let x0 = ph + 1.0;
                let t = p - ph;
                (x0 + 0.5 * x0 * x0 + 2.0 * t - t * t, 2.0 - 2.0 * t, -2.0)
            }
        };
        Derivs {
            w: amp * g * m,
            wq: amp * gq * m,
            wp: amp * g * mp,
            wqq: amp * gqq * m,
            wqp: amp * gq * mp,
            wpp: amp * g * mpp,
        }
    };
    let f = 1.3;
    let mut errs = Vec::new();
    for (nq, np) in [(41, 17), (81, 33), (161, 65)] {
        let g = SlitGrid::new(10.0, nq, np, np, ph).map_err(fail)?;
        let d = Discretization::new(&bg, &g).map_err(fail)?;
        let forcing = manufactured_forcing(&d, 1.0 / (f * f), exact);
        let seed = HeightField::zeros(g.clone(), f, bg.hash());
        let (sol, _) =
            newton_solve_forced(&seed, &bg, &forcing, &NewtonOptions::default()).map_err(fail)?;
        let mut e = 0.0f64;
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                e = e.max((sol.at(i, j) - exact(g.q(i), g.p(j), g.side(j)).w).abs());
            }
        }
        errs.push(e);
    }
    let o1 = common::order(errs[0], errs[1]);
    let o2 = common::order(errs[1], errs[2]);
    let el = t.elapsed();
    ensure(
        (o1 - 2.0).abs() <= 0.1 && (o2 - 2.0).abs() <= 0.1 && el < Duration::from_secs(300),
        format!(
            "L∞ errors {:.2e}, {:.2e}, {:.2e}; orders {o1:.3}, {o2:.3}, {el:.2?}",
            errs[0], errs[1], errs[2]
        ),
    )
}

struct Refinement {
    fields: Vec<HeightField>,
    drift: Vec<f64>,
    identity: Vec<f64>,
    elapsed: Duration,
}

/// Converged ε = 0.3 elevation waves on four nested grids.
fn refinement() -> &'static std::result::Result<Refinement, String> {
    static CELL: OnceLock<std::result::Result<Refinement, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let bg = two_layer();
        let model = model_for(&bg);
        let eps = 0.3;
        let l = 30.0 / (eps * model.b1.sqrt());
        let v = elevation_seed(&model, eps).map_err(fail)?;
        let mut out = Refinement {
            fields: Vec::new(),
            drift: Vec::new(),
            identity: Vec::new(),
            elapsed: Duration::ZERO,
        };
        for (nq, np) in [(41, 9), (81, 17), (161, 33), (321, 65)] {
            let g = SlitGrid::new(l, nq, np, np, bg.p_hat).map_err(fail)?;
            let seed = elevation_ansatz(&model, &bg, eps, &v, &g).map_err(fail)?;
            let (sol, _) = newton_solve(&seed, &bg, &NewtonOptions::default()).map_err(fail)?;
            out.drift.push(flow_force_drift(&sol, &bg).map_err(fail)?);
            out.identity.push(
                check_flow_force_identity(&sol, &bg)
                    .map_err(fail)?
                    .residual
                    .abs(),
            );
            out.fields.push(sol);
        }
        out.elapsed = t.elapsed();
        Ok(out)
    })
}

/// Adds 10⁻³ uniform noise away from the bed.
fn perturbed(field: &HeightField) -> HeightField {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = field.clone();
    let g = &field.grid;
    for i in 0..g.nq {
        for j in 1..g.col_len() {
            *out.at_mut(i, j) += 1e-3 * rng.gen_range(-1.0..1.0);
        }
    }
    out
}

fn triple_order(e: &[f64]) -> f64 {
    let n = e.len();
    common::order(e[n - 3], e[n - 1]) / 2.0
}

fn a7_flow_force_constancy() -> Outcome {
    let r = refinement().as_ref().map_err(Clone::clone)?;
    let ord = triple_order(&r.drift);
    ensure(
        ord >= 2.0 && r.elapsed < Duration::from_secs(300),
        format!(
            "drift {}; order {ord:.2} over the last triple, {:.2?}",
            r.drift
                .iter()
                .map(|x| format!("{x:.2e}"))
                .collect::<Vec<_>>()
                .join(", "),
            r.elapsed
        ),
    )
}

fn a8_froude_bound() -> Outcome {
    let b = shared_branch().as_ref().map_err(Clone::clone)?;
    let bg = bed_slow_background();
    let mut worst = f64::INFINITY;
    for p in &b.branch.points {
        worst = worst.min(check_froude_upper_bound(&p.field, &bg).map_err(fail)?);
    }
    let ubg = StratifiedBackground::uniform(-0.5).unwrap();
    let g = SlitGrid::new(10.0, 11, 9, 9, -0.5).map_err(fail)?;
    let mut laminar_ok = true;
    for f in [0.5, 1.0, 1.3, 1.41, 1.415, 1.5, 2.0] {
        let s = check_froude_upper_bound(&HeightField::zeros(g.clone(), f, ubg.hash()), &ubg)
            .map_err(fail)?;
        laminar_ok &= (s - (2.0 - f * f)).abs() < 1e-12 && ((s > 0.0) == (f < 2f64.sqrt()));
    }
    ensure(
        worst >= -1e-8 && laminar_ok,
        format!(
            "min slack {worst:.3e} over {} branch points; laminar bound is F < √2: {laminar_ok}",
            b.branch.points.len()
        ),
    )
}

fn a9_identity() -> Outcome {
    let r = refinement().as_ref().map_err(Clone::clone)?;
    let ord = triple_order(&r.identity);
    let bg = two_layer();
    let k = r.fields.len() - 1;
    let base = r.identity[k];
    let noisy = check_flow_force_identity(&perturbed(&r.fields[k]), &bg)
        .map_err(fail)?
        .residual
        .abs();
    let jump = noisy / base;
    ensure(
        ord >= 2.0 && jump >= 1e3,
        format!(
            "residual {}; order {ord:.2}; perturbed/unperturbed {jump:.1e}",
            r.identity
                .iter()
                .map(|x| format!("{x:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn a10_nodal() -> Outcome {
    let b = shared_branch().as_ref().map_err(Clone::clone)?;
    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, p) in b.branch.points.iter().enumerate() {
        let eps = (b.mu_cr_h - p.field.mu()).max(0.0).sqrt();
        if eps < 0.02 {
            continue;
        }
        checked += 1;
        let n = check_nodal(&p.field);
        if !(n.nodal_ok() && n.elevation_ok() && n.symmetry_ok()) {
            bad.push(k);
        }
    }
    ensure(
        checked > 0 && bad.is_empty(),
        format!("{checked} points checked, failures at {bad:?}"),
    )
}

fn a11_triviality() -> Outcome {
    let bg = two_layer();
    let model = model_for(&bg);
    let g = SlitGrid::new(40.0, 161, 33, 33, bg.p_hat).map_err(fail)?;
    let d = Discretization::new(&bg, &g).map_err(fail)?;
    let muh = d.discrete_mu_cr(model.mu_cr).map_err(fail)?;
    let fcr = 1.0 / muh.sqrt();
    let at_cr = check_critical_triviality(&bg, &g, fcr, 1e-3, 0.5).map_err(fail)?;
    let f = 1.05 * fcr;
    let eps = (muh - 1.0 / (f * f)).sqrt();
    let v = elevation_seed(&model, eps).map_err(fail)?;
    let seed = ansatz_at(&model, &bg, eps, &v, &g, f).map_err(fail)?;
    let (wave, _) = newton_solve(&seed, &bg, &NewtonOptions::default()).map_err(fail)?;
    let amp = wave.sup_norm();
    ensure(
        at_cr.converged && at_cr.sup_w < 1e-8 && amp > 1e-3 && wave.crest_interface() > 0.0,
        format!(
            "F_cr: ‖w‖∞ {:.2e} after {} iterations; 1.05 F_cr: ‖w‖∞ {amp:.3e}",
            at_cr.sup_w, at_cr.iterations
        ),
    )
}

fn bed_slow_background() -> StratifiedBackground {
    let us = "0.1 + 0.9*(y+1)";
    background_from_branches(
        0.5,
        (
            ProfileBranch::expr("1.02", "y").unwrap(),
            ProfileBranch::expr("1.0", "y").unwrap(),
        ),
        (
            ProfileBranch::expr(us, "y").unwrap(),
            ProfileBranch::expr(us, "y").unwrap(),
        ),
    )
    .unwrap()
}

struct SharedBranch {
    branch: Branch,
    mu_cr_h: f64,
    stagnation: Vec<f64>,
    elapsed: Duration,
}

/// Continuation from ε = 0.05 on a current that is slow near the bed.
fn shared_branch() -> &'static std::result::Result<SharedBranch, String> {
    static CELL: OnceLock<std::result::Result<SharedBranch, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let bg = bed_slow_background();
        let model = model_for(&bg);
        let eps = 0.05;
        let l = (20.0 / (eps * model.b1.sqrt())).min(300.0);
        let g = SlitGrid::new(l, 321, 33, 33, bg.p_hat).map_err(fail)?;
        let d = Discretization::new(&bg, &g).map_err(fail)?;
        let muh = d.discrete_mu_cr(model.mu_cr).map_err(fail)?;
        let mut start = Vec::new();
        for e in [eps, 1.1 * eps] {
            let v = elevation_seed(&model, e).map_err(fail)?;
            let f = 1.0 / (muh - e * e).sqrt();
            let seed = ansatz_at(&model, &bg, e, &v, &g, f).map_err(fail)?;
            start.push(
                newton_solve(&seed, &bg, &NewtonOptions::default())
                    .map_err(fail)?
                    .0,
            );
        }
        let opts = ContinuationOptions {
            max_points: 400,
            ..Default::default()
        };
        let branch = continue_branch(&start[0], &start[1], &bg, 1.0 / muh.sqrt(), &opts, |_| {})
            .map_err(fail)?;
        let stagnation = branch
            .points
            .iter()
            .map(|p| stagnation_and_velocity(&p.field, &bg).map(|s| s.0))
            .collect::<stratwave::Result<Vec<_>>>()
            .map_err(fail)?;
        Ok(SharedBranch {
            branch,
            mu_cr_h: muh,
            stagnation,
            elapsed: t.elapsed(),
        })
    })
}

fn a12_stagnation_branch() -> Outcome {
    let b = shared_branch().as_ref().map_err(Clone::clone)?;
    let pts = &b.branch.points;
    let rises = b.stagnation.windows(2).filter(|w| w[1] >= w[0]).count();
    let (n0, n1) = (pts[0].n_s, pts[pts.len() - 1].n_s);
    ensure(
        b.branch.stop == StopReason::Stagnation
            && rises <= 2
            && n1 > 5.0 * n0
            && b.elapsed < Duration::from_secs(1800),
        format!(
            "stop {:?} after {} points; stagnation metric {:.3} → {:.3} with {rises} rises; \
             N {n0:.1} → {n1:.1} ({:.1}×), {:.2?}",
            b.branch.stop,
            pts.len(),
            b.stagnation[0],
            b.stagnation[b.stagnation.len() - 1],
            n1 / n0,
            b.elapsed
        ),
    )
}

fn a13_jacobian() -> Outcome {
    // analytic against central differences at a nonlinear state
    let r = refinement().as_ref().map_err(Clone::clone)?;
    let bg = two_layer();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst_fd = 0.0f64;
    for base in [&r.fields[0], &perturbed(&r.fields[1])] {
        let jac = assemble_jacobian(base, &bg).map_err(fail)?;
        for _ in 0..5 {
            let dir: Vec<f64> = (0..base.w.len())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let h = 1e-6;
            let shifted = |s: f64| {
                let mut f = base.clone();
                f.w.iter_mut().zip(&dir).for_each(|(x, d)| *x += s * d);
                assemble_residual(&f, &bg).map(|r| r.0)
            };
            let (rp, rm) = (shifted(h).map_err(fail)?, shifted(-h).map_err(fail)?);
            let jv = jac.mul_vec(&dir);
            let diff: Vec<f64> = rp
                .iter()
                .zip(&rm)
                .zip(&jv)
                .map(|((a, b), j)| (a - b) / (2.0 * h) - j)
                .collect();
            worst_fd = worst_fd.max(norm2(&diff) / norm2(&jv));
        }
    }
    // laminar invertibility at 1.2 F_cr, singular direction Φ₀ at F_cr
    let sbg = common::stratified_two_layer();
    let crit = find_mu_cr(&sbg).map_err(fail)?;
    let mut sigma = Vec::new();
    let mut kernel = Vec::new();
    for (nq, np) in [(41, 17), (81, 33), (161, 65)] {
        let g = SlitGrid::new(20.0, nq, np, np, sbg.p_hat).map_err(fail)?;
        let d = Discretization::new(&sbg, &g).map_err(fail)?;
        sigma.push(laminar_sigma_min(&d, crit.mu_cr / 1.44, 40).map_err(fail)?);
        let phi_sup = crit
            .phi0
            .samples()
            .iter()
            .fold(0.0f64, |m, s| m.max(s.1.abs()));
        kernel.push(kernel_residual(&d, crit.mu_cr, &crit.phi0) / phi_sup);
    }
    let sigma_ok = sigma.iter().all(|s| *s > 0.5) && sigma[2] >= 0.9 * sigma[0];
    let kernel_order = common::order(kernel[1], kernel[2]);
    let kernel_ok = kernel_order >= 1.8 && kernel[2] < 1e-3 * sigma[2];
    ensure(
        worst_fd < 1e-6 && sigma_ok && kernel_ok,
        format!(
            "FD rel {worst_fd:.1e}; σ_min(1.2 F_cr) {:.3}, {:.3}, {:.3}; \
             |J(F_cr)Φ₀|/|Φ₀| {:.2e}, {:.2e}, {:.2e} (order {kernel_order:.2})",
            sigma[0], sigma[1], sigma[2], kernel[0], kernel[1], kernel[2]
        ),
    )
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 13] = [
        ("A1  constant-density constants", a1_constant_density),
        ("A2  two-layer eigenvalue oracle", a2_two_layer_oracle),
        ("A3  spectrum structure", a3_spectrum),
        ("A4  sech² identity", a4_sech_identity),
        ("A5  seed to solution", a5_seed_to_solution),
        ("A6  manufactured solution", a6_manufactured),
        ("A7  flow-force constancy", a7_flow_force_constancy),
        ("A8  Froude bound", a8_froude_bound),
        ("A9  flow-force identity", a9_identity),
        ("A10 nodal/symmetry/elevation", a10_nodal),
        ("A11 criticality triviality", a11_triviality),
        ("A12 branch toward stagnation", a12_stagnation_branch),
        ("A13 Jacobian correctness", a13_jacobian),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".to_string()));
        let el = t.elapsed();
        match out {
            Ok(msg) => println!("PASS {name}: {msg} [{el:.1?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg} [{el:.1?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
