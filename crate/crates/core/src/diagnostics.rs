//! A-posteriori checks on a height field: flow force, the crest integral
//! identity, the Froude upper bound, nodal signs, and velocity/stagnation
//! measures. Nothing here throws on a violated inequality; findings are
//! reported.

use crate::background::StratifiedBackground;
use crate::error::Result;
use crate::fd;
use crate::grid::{HeightField, SlitGrid};
use crate::height_solver::{newton_solve, Discretization, NewtonOptions};
use crate::profile::Side;
use crate::reduced_model::SechProfile;

/// Nodal values of the background and of the field derivatives on one grid.
struct Sampled<'a> {
    field: &'a HeightField,
    d: Discretization,
    energy: Vec<f64>,
    h: Vec<f64>,
}

impl<'a> Sampled<'a> {
    fn new(field: &'a HeightField, bg: &StratifiedBackground) -> Result<Self> {
        let g = &field.grid;
        let d = Discretization::new(bg, g)?;
        let mu = field.mu();
        let energy = (0..g.col_len())
            .map(|j| bg.bernoulli_energy(g.p(j), g.side(j), mu))
            .collect();
        let h = (0..g.col_len()).map(|j| bg.h(g.p(j), g.side(j))).collect();
        Ok(Sampled {
            field,
            d,
            energy,
            h,
        })
    }

    fn hp(&self, i: usize, j: usize) -> f64 {
        self.d.hp_at(j) + fd::wp(self.field, i, j)
    }
}

/// Trapezoid rule over each layer of a column of nodal values.
fn layer_trapezoid(g: &SlitGrid, vals: &[f64]) -> f64 {
    let mut s = 0.0;
    for side in [Side::Lower, Side::Upper] {
        let r = g.layer_rows(side);
        let h = g.dp(side);
        for j in r.start..r.end - 1 {
            s += 0.5 * h * (vals[j] + vals[j + 1]);
        }
    }
    s
}

fn flow_force_column(s: &Sampled, i: usize) -> f64 {
    let g = &s.field.grid;
    let mu = s.field.mu();
    let vals: Vec<f64> = (0..g.col_len())
        .map(|j| {
            let hp = s.hp(i, j);
            let hq = fd::wq(s.field, i, j);
            let h = s.h[j] + s.field.at(i, j);
            (s.energy[j] + (1.0 - hq * hq) / (2.0 * hp * hp) - mu * s.d.rho_at(j) * (h - 1.0)) * hp
        })
        .collect();
    layer_trapezoid(g, &vals)
}

/// Flow force at column `i`:
/// ∫ [E + (1 − h_q²)/(2h_p²) − μρ(h − 1)] h_p dp.
pub fn flow_force(field: &HeightField, bg: &StratifiedBackground, i: usize) -> Result<f64> {
    let s = Sampled::new(field, bg)?;
    Ok(flow_force_column(&s, i))
}

/// Flow force at every column.
pub fn flow_force_profile(field: &HeightField, bg: &StratifiedBackground) -> Result<Vec<f64>> {
    let s = Sampled::new(field, bg)?;
    Ok((0..field.grid.nq)
        .map(|i| flow_force_column(&s, i))
        .collect())
}

/// max over q of |𝒮(q) − mean 𝒮|.
pub fn flow_force_drift(field: &HeightField, bg: &StratifiedBackground) -> Result<f64> {
    let s = flow_force_profile(field, bg)?;
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    Ok(s.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max))
}

/// Both sides of the crest identity
///   μ [∫|ρ_p| w² dp + ρ(0) w(0,0)² − ⟦ρ⟧ w(0,p̂)²] = ∫ w_p² / (H_p² h_p) dp.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn check_flow_force_identity(
    field: &HeightField,
    bg: &StratifiedBackground,
) -> Result<IdentityReport> {
    let s = Sampled::new(field, bg)?;
    let g = &field.grid;
    let i = field.crest_column();
    let mu = field.mu();
    let w = |j: usize| field.at(i, j);
    let weighted: Vec<f64> = (0..g.col_len())
        .map(|j| s.d.rho_p_at(j).abs() * w(j) * w(j))
        .collect();
    let top = g.top();
    let lhs = mu
        * (layer_trapezoid(g, &weighted) + s.d.rho_at(top) * w(top) * w(top)
            - s.d.rho_jump() * w(g.upper_interface()).powi(2));
    let integrand: Vec<f64> = (0..g.col_len())
        .map(|j| {
            let wp = fd::wp(field, i, j);
            let hp = s.d.hp_at(j);
            wp * wp / (hp * hp * s.hp(i, j))
        })
        .collect();
    let rhs = layer_trapezoid(g, &integrand);
    Ok(IdentityReport {
        lhs,
        rhs,
        residual: lhs - rhs,
    })
}

/// 2 sup ρ · sup H_p² · max h_p(0, ·) − F².
pub fn check_froude_upper_bound(field: &HeightField, bg: &StratifiedBackground) -> Result<f64> {
    let s = Sampled::new(field, bg)?;
    let g = &field.grid;
    let i = field.crest_column();
    let hp0 = (0..g.col_len()).map(|j| s.hp(i, j)).fold(0.0f64, f64::max);
    let (rmax, hmax) = bg.sup_rho_and_hp();
    Ok(2.0 * rmax * hmax * hmax * hp0 - field.f * field.f)
}

/// Worst violation of one sign condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignCheck {
    pub ok: bool,
    /// Largest value of the quantity that should be negative (or −w for elevation).
    pub worst: f64,
    pub at: (usize, usize),
}

impl SignCheck {
    fn new() -> Self {
        SignCheck {
            ok: true,
            worst: f64::NEG_INFINITY,
            at: (0, 0),
        }
    }

    fn see(&mut self, v: f64, i: usize, j: usize) {
        if v > self.worst {
            self.worst = v;
            self.at = (i, j);
        }
    }

    fn close(&mut self, band: f64) {
        self.ok = self.worst <= band;
    }
}

#[derive(Debug, Clone)]
pub struct NodalReport {
    /// ‖w‖_∞ below 1e−12: derivative checks are vacuous.
    pub trivial: bool,
    /// Tolerance band, 10 h² relative to the size of each checked quantity,
    /// with h the largest normalized spacing.
    pub band_rel: f64,
    /// w_q < 0 for q > 0 off the bed.
    pub wq: SignCheck,
    /// w_qq < 0 on the crest line off the bed.
    pub wqq: SignCheck,
    /// w_qp < 0 on the bed for q > 0.
    pub wqp: SignCheck,
    /// w_qqp < 0 at the bed corner of the crest line.
    pub wqqp: SignCheck,
    /// w > 0 off the bed.
    pub elevation: SignCheck,
    /// max |w(q) − w(−q)| (zero by construction on the half grid).
    pub symmetry_defect: f64,
}

impl NodalReport {
    pub fn nodal_ok(&self) -> bool {
        !self.trivial && self.wq.ok && self.wqq.ok && self.wqp.ok && self.wqqp.ok
    }

    pub fn elevation_ok(&self) -> bool {
        !self.trivial && self.elevation.ok
    }

    pub fn symmetry_ok(&self) -> bool {
        self.symmetry_defect <= 1e-10
    }
}

fn sup_of<F: Fn(usize, usize) -> f64>(cells: &[(usize, usize)], f: F) -> f64 {
    cells
        .iter()
        .map(|&(i, j)| f(i, j).abs())
        .fold(0.0, f64::max)
}

/// Nodal signs and elevation on the right half of the wave (q ≥ 0).
pub fn check_nodal(field: &HeightField) -> NodalReport {
    let g = &field.grid;
    let c = field.crest_column();
    let h = (g.dp(Side::Lower) / (1.0 + g.p_hat))
        .max(g.dp(Side::Upper) / -g.p_hat)
        .max(g.dq() / (g.l - g.q0()));
    let band_rel = 10.0 * h * h;
    let trivial = field.sup_norm() < 1e-12;

    let right: Vec<(usize, usize)> = (c + 1..g.nq - 1)
        .flat_map(|i| (1..g.col_len()).map(move |j| (i, j)))
        .collect();
    let crest: Vec<(usize, usize)> = (1..g.col_len()).map(|j| (c, j)).collect();
    let bed: Vec<(usize, usize)> = (c + 1..g.nq - 1).map(|i| (i, 0)).collect();

    let wq = |i: usize, j: usize| fd::wq(field, i, j);
    let wqq = |i: usize, j: usize| fd::wqq(field, i, j);
    let wqp = |i: usize, j: usize| fd::wqp(field, i, j);

    let mut r_wq = SignCheck::new();
    for &(i, j) in &right {
        r_wq.see(wq(i, j), i, j);
    }
    r_wq.close(band_rel * sup_of(&right, wq));

    let mut r_wqq = SignCheck::new();
    for &(i, j) in &crest {
        r_wqq.see(wqq(i, j), i, j);
    }
    r_wqq.close(band_rel * sup_of(&crest, wqq));

    let mut r_wqp = SignCheck::new();
    for &(i, j) in &bed {
        r_wqp.see(wqp(i, j), i, j);
    }
    r_wqp.close(band_rel * sup_of(&bed, wqp));

    // w_qqp at (crest, bed) by a one-sided p-difference of w_qq
    let hp = g.dp(Side::Lower);
    let wqqp = (-3.0 * wqq(c, 0) + 4.0 * wqq(c, 1) - wqq(c, 2)) / (2.0 * hp);
    let mut r_wqqp = SignCheck::new();
    r_wqqp.see(wqqp, c, 0);
    let scale = (0..3).map(|j| wqq(c, j).abs()).fold(0.0, f64::max) / hp;
    r_wqqp.close(band_rel * scale);

    let off_bed: Vec<(usize, usize)> = (0..g.nq - 1)
        .flat_map(|i| (1..g.col_len()).map(move |j| (i, j)))
        .collect();
    let mut r_el = SignCheck::new();
    for &(i, j) in &off_bed {
        r_el.see(-field.at(i, j), i, j);
    }
    r_el.close(band_rel * field.sup_norm());

    let symmetry_defect = if g.full {
        (0..g.nq)
            .flat_map(|i| (0..g.col_len()).map(move |j| (i, j)))
            .map(|(i, j)| (field.at(i, j) - field.at(g.nq - 1 - i, j)).abs())
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    if trivial {
        for r in [&mut r_wq, &mut r_wqq, &mut r_wqp, &mut r_wqqp] {
            r.ok = true;
        }
        r_el.ok = false;
    }

    NodalReport {
        trivial,
        band_rel,
        wq: r_wq,
        wqq: r_wqq,
        wqp: r_wqp,
        wqqp: r_wqqp,
        elevation: r_el,
        symmetry_defect,
    }
}

/// min 1/(√ρ h_p) (= inf (c − u)) and max (1 + h_q²)/(ρ h_p²).
pub fn stagnation_and_velocity(
    field: &HeightField,
    bg: &StratifiedBackground,
) -> Result<(f64, f64)> {
    let s = Sampled::new(field, bg)?;
    let g = &field.grid;
    let mut sup_root = 0.0f64;
    let mut vel = 0.0f64;
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            let hp = s.hp(i, j);
            let hq = fd::wq(field, i, j);
            let rho = s.d.rho_at(j);
            sup_root = sup_root.max(rho.sqrt() * hp);
            vel = vel.max((1.0 + hq * hq) / (rho * hp * hp));
        }
    }
    Ok((1.0 / sup_root, vel))
}

#[derive(Debug, Clone)]
pub struct WaveDiagnostics {
    pub flow_force_drift: f64,
    pub froude_bound_slack: f64,
    pub identity_residual: f64,
    pub nodal: NodalReport,
    pub stagnation_metric: f64,
    pub velocity_sup: f64,
    pub min_hp: f64,
}

impl WaveDiagnostics {
    pub fn elevation_ok(&self) -> bool {
        self.nodal.elevation_ok()
    }

    pub fn symmetry_ok(&self) -> bool {
        self.nodal.symmetry_ok()
    }

    pub fn nodal_ok(&self) -> bool {
        self.nodal.nodal_ok()
    }

    /// `key = value` lines.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let n = &self.nodal;
        vec![
            (
                "flow_force_drift".into(),
                format!("{:.17e}", self.flow_force_drift),
            ),
            (
                "froude_bound_slack".into(),
                format!("{:.17e}", self.froude_bound_slack),
            ),
            (
                "identity_residual".into(),
                format!("{:.17e}", self.identity_residual),
            ),
            ("elevation_ok".into(), self.elevation_ok().to_string()),
            ("symmetry_ok".into(), self.symmetry_ok().to_string()),
            ("nodal_ok".into(), self.nodal_ok().to_string()),
            ("nodal_trivial".into(), n.trivial.to_string()),
            ("nodal_band_rel".into(), format!("{:e}", n.band_rel)),
            (
                "wq_worst".into(),
                format!("{:e} at {:?}", n.wq.worst, n.wq.at),
            ),
            (
                "wqq_worst".into(),
                format!("{:e} at {:?}", n.wqq.worst, n.wqq.at),
            ),
            (
                "wqp_worst".into(),
                format!("{:e} at {:?}", n.wqp.worst, n.wqp.at),
            ),
            ("wqqp".into(), format!("{:e}", n.wqqp.worst)),
            (
                "elevation_worst".into(),
                format!("{:e} at {:?}", -n.elevation.worst, n.elevation.at),
            ),
            (
                "stagnation_metric".into(),
                format!("{:.17e}", self.stagnation_metric),
            ),
            ("velocity_sup".into(), format!("{:.17e}", self.velocity_sup)),
            ("min_hp".into(), format!("{:.17e}", self.min_hp)),
        ]
    }
}

pub fn diagnose(field: &HeightField, bg: &StratifiedBackground) -> Result<WaveDiagnostics> {
    let (stagnation_metric, velocity_sup) = stagnation_and_velocity(field, bg)?;
    let d = Discretization::new(bg, &field.grid)?;
    Ok(WaveDiagnostics {
        flow_force_drift: flow_force_drift(field, bg)?,
        froude_bound_slack: check_froude_upper_bound(field, bg)?,
        identity_residual: check_flow_force_identity(field, bg)?.residual,
        nodal: check_nodal(field),
        stagnation_metric,
        velocity_sup,
        min_hp: d.min_hp(field),
    })
}

#[derive(Debug, Clone)]
pub struct TrivialityReport {
    pub f: f64,
    pub converged: bool,
    pub sup_w: f64,
    pub iterations: usize,
    pub message: String,
}

/// Newton at Froude number `f` from the seed `amplitude · sech²(k q) Φ(p)`
/// with Φ = H − H(−1) (a positive profile vanishing on the bed).
pub fn check_critical_triviality(
    bg: &StratifiedBackground,
    grid: &SlitGrid,
    f: f64,
    amplitude: f64,
    k: f64,
) -> Result<TrivialityReport> {
    let mut seed = HeightField::zeros(grid.clone(), f, bg.hash());
    let v = SechProfile { amplitude, k };
    for i in 0..grid.nq {
        for j in 1..grid.col_len() {
            let p = grid.p(j);
            *seed.at_mut(i, j) = v.value(grid.q(i)) * bg.h(p, grid.side(j));
        }
    }
    Ok(match newton_solve(&seed, bg, &NewtonOptions::default()) {
        Ok((sol, rep)) => TrivialityReport {
            f,
            converged: true,
            sup_w: sol.sup_norm(),
            iterations: rep.iterations,
            message: String::new(),
        },
        Err(e) => TrivialityReport {
            f,
            converged: false,
            sup_w: f64::NAN,
            iterations: 0,
            message: e.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laminar_uniform_values() {
        let bg = StratifiedBackground::uniform(-0.5).unwrap();
        let g = SlitGrid::new(10.0, 9, 9, 9, -0.5).unwrap();
        let f = HeightField::zeros(g, 1.1, bg.hash());
        assert!(flow_force_drift(&f, &bg).unwrap() < 1e-14);
        let id = check_flow_force_identity(&f, &bg).unwrap();
        assert_eq!(id.lhs, 0.0);
        assert_eq!(id.rhs, 0.0);
        let slack = check_froude_upper_bound(&f, &bg).unwrap();
        assert!((slack - (2.0 - 1.21)).abs() < 1e-10);
        let (s, v) = stagnation_and_velocity(&f, &bg).unwrap();
        assert!((s - 1.0).abs() < 1e-10 && (v - 1.0).abs() < 1e-10);
        let n = check_nodal(&f);
        assert!(n.trivial && !n.elevation_ok());
    }

    #[test]
    fn reflected_field_reverses_monotonicity() {
        let bg = StratifiedBackground::uniform(-0.5).unwrap();
        let g = SlitGrid::new(10.0, 41, 9, 9, -0.5).unwrap();
        let mut f = HeightField::zeros(g.clone(), 1.1, bg.hash());
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                let q = g.q(i);
                *f.at_mut(i, j) = 0.01 * (1.0 + g.p(j)) / (0.3 * q).cosh().powi(2);
            }
        }
        let n = check_nodal(&f);
        assert!(n.nodal_ok() && n.elevation_ok(), "{n:?}");
        f.w.iter_mut().for_each(|v| *v = -*v);
        let m = check_nodal(&f);
        assert!(!m.wq.ok && !m.wqq.ok && !m.elevation.ok);
    }
}
