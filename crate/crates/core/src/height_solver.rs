//! Finite-difference height equation on the slitted strip, Newton solves,
//! and pseudo-arclength continuation.
//!
//! Interior rows use the flux form
//!   ∂_p[−(1 + w_q²)/(2a²) + 1/(2H_p²)] + ∂_q[w_q/a] − μ ρ_p w,  a = H_p + w_p,
//! with both fluxes evaluated at cell faces. The surface row is the Bernoulli
//! condition with a one-sided w_p, the upper interface copy carries the
//! transmission condition with one-sided w_p on each side, and the lower copy
//! enforces continuity. The bed and the right edge are Dirichlet rows; q = 0
//! is an even mirror on the half grid.

use crate::background::StratifiedBackground;
use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::fd;
use crate::grid::{HeightField, SlitGrid};
use crate::layered::LayeredProfile;
use crate::profile::Side;
use crate::roots;

/// Up to eight (node, coefficient) pairs.
#[derive(Debug, Clone, Copy)]
struct Lin {
    n: usize,
    idx: [usize; 8],
    c: [f64; 8],
}

impl Lin {
    fn new() -> Self {
        Lin {
            n: 0,
            idx: [0; 8],
            c: [0.0; 8],
        }
    }

    fn push(&mut self, k: usize, c: f64) {
        self.idx[self.n] = k;
        self.c[self.n] = c;
        self.n += 1;
    }

    fn eval(&self, w: &[f64]) -> f64 {
        (0..self.n).map(|t| self.c[t] * w[self.idx[t]]).sum()
    }

    fn scaled_into(&self, s: f64, out: &mut Vec<(usize, f64)>) {
        if s != 0.0 {
            for t in 0..self.n {
                out.push((self.idx[t], s * self.c[t]));
            }
        }
    }

    fn average(a: &Lin, b: &Lin) -> Lin {
        let mut r = Lin::new();
        for t in 0..a.n {
            r.push(a.idx[t], 0.5 * a.c[t]);
        }
        for t in 0..b.n {
            r.push(b.idx[t], 0.5 * b.c[t]);
        }
        r
    }
}

/// Classification of a residual row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Dirichlet,
    Interior,
    Surface,
    Continuity,
    Transmission,
}

/// Background data sampled on one grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: SlitGrid,
    hp: Vec<f64>,
    hpp: Vec<f64>,
    rho: Vec<f64>,
    rho_p: Vec<f64>,
    /// H_p at p_{j+1/2} (same layer); unused at layer tops.
    hp_half: Vec<f64>,
    rho_jump: f64,
}

/// Flux Fp = −(1 + b²)/(2a²) + 1/(2H²) and its partials in (w_p, w_q).
#[inline]
fn flux_p(wp: f64, wq: f64, hp: f64) -> (f64, f64, f64) {
    let a = hp + wp;
    let a2 = a * a;
    let v = -(1.0 + wq * wq) / (2.0 * a2) + 1.0 / (2.0 * hp * hp);
    (v, (1.0 + wq * wq) / (a2 * a), -wq / a2)
}

/// Flux Fq = w_q/a and its partials in (w_p, w_q).
#[inline]
fn flux_q(wp: f64, wq: f64, hp: f64) -> (f64, f64, f64) {
    let a = hp + wp;
    (wq / a, -wq / (a * a), 1.0 / a)
}

/// Bernoulli quantity (1 + w_q²)/(2a²) − 1/(2H²) and its partials.
#[inline]
fn bernoulli(wp: f64, wq: f64, hp: f64) -> (f64, f64, f64) {
    let (v, dp, dq) = flux_p(wp, wq, hp);
    (-v, -dp, -dq)
}

impl Discretization {
    pub fn new(bg: &StratifiedBackground, grid: &SlitGrid) -> Result<Self> {
        if (grid.p_hat - bg.p_hat).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "grid p̂ = {} does not match background p̂ = {}",
                grid.p_hat, bg.p_hat
            )));
        }
        let m = grid.col_len();
        let mut d = Discretization {
            grid: grid.clone(),
            hp: vec![0.0; m],
            hpp: vec![0.0; m],
            rho: vec![0.0; m],
            rho_p: vec![0.0; m],
            hp_half: vec![0.0; m],
            rho_jump: bg.rho_jump(),
        };
        for j in 0..m {
            let (p, s) = (grid.p(j), grid.side(j));
            d.hp[j] = bg.hp(p, s);
            d.hpp[j] = bg.hpp(p, s);
            d.rho[j] = bg.rho(p, s);
            d.rho_p[j] = bg.rho_p(p, s);
            if j + 1 < m && grid.side(j + 1) == s {
                d.hp_half[j] = bg.hp(0.5 * (p + grid.p(j + 1)), s);
            }
        }
        Ok(d)
    }

    pub fn hp_at(&self, j: usize) -> f64 {
        self.hp[j]
    }

    pub fn rho_at(&self, j: usize) -> f64 {
        self.rho[j]
    }

    pub fn hpp_at(&self, j: usize) -> f64 {
        self.hpp[j]
    }

    pub fn rho_p_at(&self, j: usize) -> f64 {
        self.rho_p[j]
    }

    pub fn rho_jump(&self) -> f64 {
        self.rho_jump
    }

    pub fn kind(&self, i: usize, j: usize) -> RowKind {
        let g = &self.grid;
        if j == 0 || i == g.nq - 1 || (g.full && i == 0) {
            RowKind::Dirichlet
        } else if j == g.top() {
            RowKind::Surface
        } else if j == g.lower_interface() {
            RowKind::Continuity
        } else if j == g.upper_interface() {
            RowKind::Transmission
        } else {
            RowKind::Interior
        }
    }

    #[inline]
    fn node(&self, i: isize, j: usize) -> usize {
        let i = if i < 0 { (-i) as usize } else { i as usize };
        self.grid.idx(i, j)
    }

    /// Centered q-difference at node (i, j).
    fn wq_c(&self, i: usize, j: usize) -> Lin {
        let h = self.grid.dq();
        let mut l = Lin::new();
        let ii = i as isize;
        l.push(self.node(ii + 1, j), 0.5 / h);
        l.push(self.node(ii - 1, j), -0.5 / h);
        l
    }

    /// Centered p-difference at an interior node of a layer.
    fn wp_c(&self, i: usize, j: usize) -> Lin {
        let h = self.grid.dp(self.grid.side(j));
        let mut l = Lin::new();
        l.push(self.grid.idx(i, j + 1), 0.5 / h);
        l.push(self.grid.idx(i, j - 1), -0.5 / h);
        l
    }

    /// One-sided second-order p-derivative at the bottom (`up`) or top of a layer.
    fn wp_one_sided(&self, i: usize, j: usize, up: bool) -> Lin {
        let h = self.grid.dp(self.grid.side(j));
        let mut l = Lin::new();
        if up {
            l.push(self.grid.idx(i, j), -1.5 / h);
            l.push(self.grid.idx(i, j + 1), 2.0 / h);
            l.push(self.grid.idx(i, j + 2), -0.5 / h);
        } else {
            l.push(self.grid.idx(i, j), 1.5 / h);
            l.push(self.grid.idx(i, j - 1), -2.0 / h);
            l.push(self.grid.idx(i, j - 2), 0.5 / h);
        }
        l
    }

    /// Row weights that give every row the O(h⁻²) size of a finite-volume
    /// balance: half cells at the surface and the interface, 1/h² for the
    /// Dirichlet and continuity rows.
    fn row_scale(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (dm, dp) = (g.dp(Side::Lower), g.dp(Side::Upper));
        match self.kind(i, j) {
            RowKind::Interior => 1.0,
            RowKind::Dirichlet if j == 0 => 1.0 / (dm * dm),
            RowKind::Dirichlet => 1.0 / (g.dq() * g.dq()),
            RowKind::Surface => 2.0 / dp,
            RowKind::Transmission => 2.0 / (dm + dp),
            RowKind::Continuity => 1.0 / (dm * dp),
        }
    }

    /// Residual of row (i, j); with `jac` the nonzero partials are appended.
    fn row(
        &self,
        w: &[f64],
        mu: f64,
        i: usize,
        j: usize,
        jac: Option<&mut Vec<(usize, f64)>>,
    ) -> f64 {
        let s = self.row_scale(i, j);
        match jac {
            Some(out) => {
                let start = out.len();
                let v = self.row_raw(w, mu, i, j, Some(&mut *out));
                if s != 1.0 {
                    out[start..].iter_mut().for_each(|e| e.1 *= s);
                }
                s * v
            }
            None => s * self.row_raw(w, mu, i, j, None),
        }
    }

    fn row_raw(
        &self,
        w: &[f64],
        mu: f64,
        i: usize,
        j: usize,
        mut jac: Option<&mut Vec<(usize, f64)>>,
    ) -> f64 {
        let g = &self.grid;
        let k = g.idx(i, j);
        match self.kind(i, j) {
            RowKind::Dirichlet => {
                if let Some(out) = jac {
                    out.push((k, 1.0));
                }
                w[k]
            }
            RowKind::Continuity => {
                let k2 = g.idx(i, j + 1);
                if let Some(out) = jac {
                    out.push((k, 1.0));
                    out.push((k2, -1.0));
                }
                w[k] - w[k2]
            }
            RowKind::Surface => {
                let wp = self.wp_one_sided(i, j, false);
                let wq = self.wq_c(i, j);
                let (v, dp, dq) = bernoulli(wp.eval(w), wq.eval(w), self.hp[j]);
                let r0 = self.rho[j];
                if let Some(out) = jac.as_deref_mut() {
                    wp.scaled_into(dp, out);
                    wq.scaled_into(dq, out);
                    out.push((k, mu * r0));
                }
                v + mu * r0 * w[k]
            }
            RowKind::Transmission => {
                let jl = g.lower_interface();
                let wpu = self.wp_one_sided(i, j, true);
                let wpl = self.wp_one_sided(i, jl, false);
                let wqu = self.wq_c(i, j);
                let wql = self.wq_c(i, jl);
                let (vu, dpu, dqu) = bernoulli(wpu.eval(w), wqu.eval(w), self.hp[j]);
                let (vl, dpl, dql) = bernoulli(wpl.eval(w), wql.eval(w), self.hp[jl]);
                if let Some(out) = jac.as_deref_mut() {
                    wpu.scaled_into(dpu, out);
                    wqu.scaled_into(dqu, out);
                    wpl.scaled_into(-dpl, out);
                    wql.scaled_into(-dql, out);
                    out.push((k, mu * self.rho_jump));
                }
                vu - vl + mu * self.rho_jump * w[k]
            }
            RowKind::Interior => {
                let hpj = g.dp(g.side(j));
                let hq = g.dq();
                let mut r = -mu * self.rho_p[j] * w[k];
                if let Some(out) = jac.as_deref_mut() {
                    out.push((k, -mu * self.rho_p[j]));
                }
                // p-faces j ± 1/2
                for (jj, sign) in [(j, 1.0), (j - 1, -1.0)] {
                    let mut wp = Lin::new();
                    wp.push(g.idx(i, jj + 1), 1.0 / hpj);
                    wp.push(g.idx(i, jj), -1.0 / hpj);
                    let wq = Lin::average(&self.wq_c(i, jj), &self.wq_c(i, jj + 1));
                    let (v, dp, dq) = flux_p(wp.eval(w), wq.eval(w), self.hp_half[jj]);
                    r += sign * v / hpj;
                    if let Some(out) = jac.as_deref_mut() {
                        wp.scaled_into(sign * dp / hpj, out);
                        wq.scaled_into(sign * dq / hpj, out);
                    }
                }
                // q-faces i ± 1/2
                let ii = i as isize;
                for (a, b, sign) in [(ii, ii + 1, 1.0), (ii - 1, ii, -1.0)] {
                    let mut wq = Lin::new();
                    wq.push(self.node(b, j), 1.0 / hq);
                    wq.push(self.node(a, j), -1.0 / hq);
                    let ca = self.wp_c(a.unsigned_abs(), j);
                    let cb = self.wp_c(b.unsigned_abs(), j);
                    let wp = Lin::average(&ca, &cb);
                    let (v, dp, dq) = flux_q(wp.eval(w), wq.eval(w), self.hp[j]);
                    r += sign * v / hq;
                    if let Some(out) = jac.as_deref_mut() {
                        wp.scaled_into(sign * dp / hq, out);
                        wq.scaled_into(sign * dq / hq, out);
                    }
                }
                r
            }
        }
    }

    /// ∂(row)/∂μ.
    fn row_dmu(&self, w: &[f64], i: usize, j: usize) -> f64 {
        let k = self.grid.idx(i, j);
        let kind = self.kind(i, j);
        self.row_scale(i, j)
            * match kind {
                RowKind::Dirichlet | RowKind::Continuity => 0.0,
                RowKind::Surface => self.rho[j] * w[k],
                RowKind::Transmission => self.rho_jump * w[k],
                RowKind::Interior => -self.rho_p[j] * w[k],
            }
    }

    pub fn residual_vec(&self, w: &[f64], mu: f64) -> Vec<f64> {
        let g = &self.grid;
        let mut r = vec![0.0; g.len()];
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                r[g.idx(i, j)] = self.row(w, mu, i, j, None);
            }
        }
        r
    }

    pub fn bandwidth(&self) -> usize {
        self.grid.col_len() + 1
    }

    pub fn jacobian_matrix(&self, w: &[f64], mu: f64) -> BandMatrix {
        let g = &self.grid;
        let bw = self.bandwidth();
        let mut a = BandMatrix::zeros(g.len(), bw, bw);
        let mut buf = Vec::with_capacity(64);
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                buf.clear();
                self.row(w, mu, i, j, Some(&mut buf));
                let r = g.idx(i, j);
                for &(c, v) in &buf {
                    a.add(r, c, v);
                }
            }
        }
        a
    }

    pub fn dmu_vec(&self, w: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut r = vec![0.0; g.len()];
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                r[g.idx(i, j)] = self.row_dmu(w, i, j);
            }
        }
        r
    }

    /// min over nodes of H_p + w_p (second-order, within each layer).
    pub fn min_hp(&self, field: &HeightField) -> f64 {
        let g = &self.grid;
        let mut m = f64::INFINITY;
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                m = m.min(self.hp[j] + fd::wp(field, i, j));
            }
        }
        m
    }

    /// Transversal (q-independent) restriction of the laminar Jacobian at μ:
    /// a col_len × col_len band matrix acting on one column.
    pub fn transversal_matrix(&self, mu: f64) -> Result<BandMatrix> {
        let g = &self.grid;
        if g.nq < 5 {
            return Err(Error::InvalidInput(
                "grid too short for the transversal operator".into(),
            ));
        }
        let m = g.col_len();
        let i = if g.full { g.nq / 2 } else { 2 };
        let zero = vec![0.0; g.len()];
        let mut a = BandMatrix::zeros(m, 3, 3);
        let mut buf = Vec::new();
        for j in 0..m {
            buf.clear();
            if j == 0 {
                a.add(0, 0, 1.0);
                continue;
            }
            self.row(&zero, mu, i, j, Some(&mut buf));
            for &(c, v) in &buf {
                a.add(j, c % m, v);
            }
        }
        Ok(a)
    }

    /// Root of det of the transversal matrix nearest to `mu_guess`: the
    /// grid-consistent counterpart of μ_cr.
    pub fn discrete_mu_cr(&self, mu_guess: f64) -> Result<f64> {
        let (ref_ld, _) = self.transversal_matrix(mu_guess * 0.5)?.factor()?.log_det();
        let g = |mu: f64| -> Result<f64> {
            match self.transversal_matrix(mu)?.factor() {
                Ok(lu) => {
                    let (ld, s) = lu.log_det();
                    Ok(s * (ld - ref_ld).exp())
                }
                // the root finder can land exactly on the singular value
                Err(Error::SingularSystem(_)) => Ok(0.0),
                Err(e) => Err(e),
            }
        };
        let mut lo = mu_guess * 0.98;
        let mut hi = mu_guess * 1.02;
        let mut glo = g(lo)?;
        let mut ghi = g(hi)?;
        let mut tries = 0;
        while glo * ghi > 0.0 {
            lo *= 0.9;
            hi *= 1.1;
            glo = g(lo)?;
            ghi = g(hi)?;
            tries += 1;
            if tries > 30 {
                return Err(Error::UnsupportedRegime(
                    "no discrete critical value near the guess".into(),
                ));
            }
        }
        roots::illinois(g, lo, hi, glo, ghi, 1e-15 * hi, 0.0)
    }

    /// Factor the Jacobian at `w`.
    pub fn factor_jacobian(&self, w: &[f64], mu: f64) -> Result<BandLu> {
        self.jacobian_matrix(w, mu).factor()
    }
}

/// max over non-Dirichlet rows of a row-scaled vector, with the row weights
/// removed (interior rows are divided differences, boundary rows are the
/// boundary conditions themselves).
fn unscaled_max(d: &Discretization, v: &[f64]) -> f64 {
    let g = &d.grid;
    let mut m = 0.0f64;
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            if d.kind(i, j) != RowKind::Dirichlet {
                m = m.max((v[g.idx(i, j)] / d.row_scale(i, j)).abs());
            }
        }
    }
    m
}

/// max over non-Dirichlet rows of |J(0, μ) φ| for the q-independent vector
/// φ(p) sampled on every column.
pub fn kernel_residual(d: &Discretization, mu: f64, phi: &LayeredProfile) -> f64 {
    let g = &d.grid;
    let mut v = vec![0.0; g.len()];
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            v[g.idx(i, j)] = phi.value(g.p(j), g.side(j));
        }
    }
    let jv = d.jacobian_matrix(&vec![0.0; g.len()], mu).mul_vec(&v);
    unscaled_max(d, &jv)
}

/// max over non-Dirichlet rows of |J(w) w_q| on a full-domain grid: the
/// discrete echo of translation invariance.
pub fn translation_kernel_residual(field: &HeightField, bg: &StratifiedBackground) -> Result<f64> {
    let g = &field.grid;
    if !g.full {
        return Err(Error::InvalidInput(
            "translation check needs a full-domain grid".into(),
        ));
    }
    let d = Discretization::new(bg, g)?;
    let mut wq = vec![0.0; g.len()];
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            wq[g.idx(i, j)] = fd::wq(field, i, j);
        }
    }
    let jv = d.jacobian_matrix(&field.w, field.mu()).mul_vec(&wq);
    Ok(unscaled_max(&d, &jv))
}

/// Smallest singular value of the laminar Jacobian at μ (inverse iteration).
pub fn laminar_sigma_min(d: &Discretization, mu: f64, iterations: usize) -> Result<f64> {
    let lu = d.factor_jacobian(&vec![0.0; d.grid.len()], mu)?;
    Ok(lu.min_singular_value(iterations))
}

/// Residual of the height equation for `field`; also reports ellipticity.
pub fn assemble_residual(
    field: &HeightField,
    bg: &StratifiedBackground,
) -> Result<(Vec<f64>, bool)> {
    let d = Discretization::new(bg, &field.grid)?;
    let r = d.residual_vec(&field.w, field.mu());
    Ok((r, d.min_hp(field) > 0.0))
}

/// Exact Jacobian of [`assemble_residual`] in band storage.
pub fn assemble_jacobian(field: &HeightField, bg: &StratifiedBackground) -> Result<BandMatrix> {
    let d = Discretization::new(bg, &field.grid)?;
    Ok(d.jacobian_matrix(&field.w, field.mu()))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 12,
        }
    }
}

/// Convergence history of one Newton solve.
#[derive(Debug, Clone, Default)]
pub struct NewtonReport {
    pub iterations: usize,
    /// ‖residual‖_∞ before each iteration and after the last.
    pub residuals: Vec<f64>,
    /// Step lengths accepted by the line search.
    pub damping: Vec<f64>,
}

impl NewtonReport {
    /// ‖r_{k+1}‖/‖r_k‖² for consecutive full steps.
    pub fn quadratic_ratios(&self) -> Vec<f64> {
        self.residuals
            .windows(2)
            .zip(&self.damping)
            .filter(|(_, d)| **d == 1.0)
            .map(|(w, _)| w[1] / (w[0] * w[0]))
            .collect()
    }
}

/// Damped Newton on R(w) = 0 at fixed F.
pub fn newton_solve(
    seed: &HeightField,
    bg: &StratifiedBackground,
    opts: &NewtonOptions,
) -> Result<(HeightField, NewtonReport)> {
    let d = Discretization::new(bg, &seed.grid)?;
    newton_core(&d, seed, None, opts)
}

/// Damped Newton on R(w) = `forcing` (manufactured solutions).
pub fn newton_solve_forced(
    seed: &HeightField,
    bg: &StratifiedBackground,
    forcing: &[f64],
    opts: &NewtonOptions,
) -> Result<(HeightField, NewtonReport)> {
    let d = Discretization::new(bg, &seed.grid)?;
    newton_core(&d, seed, Some(forcing), opts)
}

fn newton_core(
    d: &Discretization,
    seed: &HeightField,
    forcing: Option<&[f64]>,
    opts: &NewtonOptions,
) -> Result<(HeightField, NewtonReport)> {
    if d.min_hp(seed) <= 0.0 {
        return Err(Error::Stagnation(
            "seed is not elliptic (H_p + w_p ≤ 0)".into(),
        ));
    }
    let mu = seed.mu();
    let resid = |w: &[f64]| {
        let mut r = d.residual_vec(w, mu);
        if let Some(f) = forcing {
            r.iter_mut().zip(f).for_each(|(a, b)| *a -= b);
        }
        r
    };
    let mut field = seed.clone();
    let mut r = resid(&field.w);
    let mut report = NewtonReport::default();
    let mut best = (inf_norm(&r), field.clone());
    report.residuals.push(inf_norm(&r));
    for it in 0..opts.max_iter {
        let rn = inf_norm(&r);
        if rn < opts.tol {
            report.iterations = it;
            return Ok((field, report));
        }
        let lu = d.factor_jacobian(&field.w, mu)?;
        let mut step: Vec<f64> = r.iter().map(|v| -v).collect();
        lu.solve(&mut step);
        let r2 = two_norm(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = field.clone();
            trial
                .w
                .iter_mut()
                .zip(&step)
                .for_each(|(a, s)| *a += alpha * s);
            if d.min_hp(&trial) > 0.0 {
                let rt = resid(&trial.w);
                let rt2 = two_norm(&rt);
                if rt2 <= (1.0 - 1e-4 * alpha) * r2 || inf_norm(&rt) < opts.tol {
                    field = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // a tiny residual may sit at the rounding floor: accept a full step if it does not grow much
            let mut trial = field.clone();
            trial.w.iter_mut().zip(&step).for_each(|(a, s)| *a += s);
            let rt = resid(&trial.w);
            if d.min_hp(&trial) > 0.0
                && inf_norm(&rt) < 10.0 * opts.tol.max(rn)
                && rn < 1e3 * opts.tol
            {
                field = trial;
                r = rt;
                alpha = 1.0;
            } else if d.min_hp(&trial) <= 0.0 {
                return Err(Error::Stagnation(format!(
                    "line search could not keep H_p + w_p > 0 (iteration {it})"
                )));
            } else {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: best.0,
                    best: Some(Box::new(best.1)),
                });
            }
        }
        report.damping.push(alpha);
        let rn = inf_norm(&r);
        report.residuals.push(rn);
        log::debug!("newton {it}: |r| = {rn:.3e}, alpha = {alpha}");
        if rn < best.0 {
            best = (rn, field.clone());
        }
    }
    if inf_norm(&r) < opts.tol {
        report.iterations = opts.max_iter;
        return Ok((field, report));
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: best.0,
        best: Some(Box::new(best.1)),
    })
}

/// One converged point on a continued branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub field: HeightField,
    pub arc_s: f64,
    /// ‖w‖ + 1/inf(H_p + w_p) + F + 1/(F − F_cr), with a discrete C² norm.
    pub n_s: f64,
    pub min_hp: f64,
    /// sup √ρ h_p over the grid.
    pub sup_sqrt_rho_hp: f64,
    pub newton_iterations: usize,
}

/// Evaluates the branch monitor quantities for a converged field.
pub fn branch_point(
    d: &Discretization,
    field: HeightField,
    f_cr: f64,
    arc_s: f64,
    newton_iterations: usize,
) -> BranchPoint {
    let min_hp = d.min_hp(&field);
    let g = &field.grid;
    let mut sup = 0.0f64;
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            let hp = d.hp[j] + fd::wp(&field, i, j);
            sup = sup.max(d.rho[j].sqrt() * hp);
        }
    }
    let n_s = fd::c2_norm(&field) + 1.0 / min_hp + field.f + 1.0 / (field.f - f_cr);
    BranchPoint {
        field,
        arc_s,
        n_s,
        min_hp,
        sup_sqrt_rho_hp: sup,
        newton_iterations,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    pub ds_init: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Stop when min(H_p + w_p) drops below this.
    pub min_hp_stop: f64,
    /// Stop when sup √ρ h_p exceeds this.
    pub sup_hp_stop: f64,
    pub max_points: usize,
    pub newton: NewtonOptions,
    /// Corrector iterations beyond which a step counts as hard.
    pub easy_iterations: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            ds_init: 0.01,
            ds_min: 1e-6,
            ds_max: 0.2,
            min_hp_stop: 0.05,
            sup_hp_stop: 20.0,
            max_points: 200,
            newton: NewtonOptions {
                max_iter: 12,
                ..NewtonOptions::default()
            },
            easy_iterations: 4,
        }
    }
}

/// Why continuation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// min(H_p + w_p) fell below the threshold.
    Ellipticity,
    /// sup √ρ h_p exceeded the threshold.
    Stagnation,
    /// The Froude upper bound was violated.
    FroudeBound,
    StepUnderflow,
    MaxPoints,
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub stop: StopReason,
}

fn crest_index(g: &SlitGrid) -> usize {
    let i = if g.full { (g.nq - 1) / 2 } else { 0 };
    g.idx(i, g.upper_interface())
}

/// Pseudo-arclength continuation in (v(0), F) from two converged points.
///
/// `on_point` is called with every accepted point (including the two starting ones).
pub fn continue_branch<C: FnMut(&BranchPoint)>(
    start: &HeightField,
    second: &HeightField,
    bg: &StratifiedBackground,
    f_cr: f64,
    opts: &ContinuationOptions,
    mut on_point: C,
) -> Result<Branch> {
    let d = Discretization::new(bg, &start.grid)?;
    let ci = crest_index(&start.grid);
    let (sup_rho, sup_hp) = bg.sup_rho_and_hp();
    let mut pts: Vec<BranchPoint> = Vec::new();
    let a = branch_point(&d, start.clone(), f_cr, 0.0, 0);
    let s1 = ((second.w[ci] - start.w[ci]).powi(2) + (second.f - start.f).powi(2)).sqrt();
    let b = branch_point(&d, second.clone(), f_cr, s1, 0);
    on_point(&a);
    on_point(&b);
    pts.push(a);
    pts.push(b);
    let mut ds = opts.ds_init;
    let mut easy = 0usize;
    let stop = loop {
        let last = &pts[pts.len() - 1];
        let prev = &pts[pts.len() - 2];
        if let Some(reason) = stop_check(&d, last, opts, sup_rho, sup_hp) {
            break reason;
        }
        if pts.len() >= opts.max_points {
            break StopReason::MaxPoints;
        }
        let dv = last.field.w[ci] - prev.field.w[ci];
        let df = last.field.f - prev.field.f;
        let sl = (dv * dv + df * df).sqrt();
        let (tv, tf) = (dv / sl, df / sl);
        match corrector(&d, last, prev, ci, tv, tf, ds, sl, &opts.newton) {
            Ok((field, iters)) => {
                let s = last.arc_s + ds;
                let bp = branch_point(&d, field, f_cr, s, iters);
                if bp.field.f <= f_cr {
                    log::warn!("continuation produced F = {} ≤ F_cr; stopping", bp.field.f);
                    break StopReason::StepUnderflow;
                }
                on_point(&bp);
                pts.push(bp);
                if iters <= opts.easy_iterations {
                    easy += 1;
                    if easy >= 2 {
                        ds = (ds * 1.3).min(opts.ds_max);
                        easy = 0;
                    }
                } else {
                    easy = 0;
                }
            }
            Err(e) => {
                log::debug!("corrector failed at ds = {ds:e}: {e}");
                ds *= 0.5;
                easy = 0;
                if ds < opts.ds_min {
                    if pts.len() == 2 {
                        return Err(Error::BranchStart(format!(
                            "first corrector failed at minimal step: {e}"
                        )));
                    }
                    break StopReason::StepUnderflow;
                }
            }
        }
    };
    Ok(Branch { points: pts, stop })
}

fn stop_check(
    d: &Discretization,
    p: &BranchPoint,
    opts: &ContinuationOptions,
    sup_rho: f64,
    sup_hp: f64,
) -> Option<StopReason> {
    if p.min_hp < opts.min_hp_stop {
        return Some(StopReason::Ellipticity);
    }
    if p.sup_sqrt_rho_hp > opts.sup_hp_stop {
        return Some(StopReason::Stagnation);
    }
    let g = &p.field.grid;
    let crest = if g.full { (g.nq - 1) / 2 } else { 0 };
    let hp0 = (0..g.col_len())
        .map(|j| d.hp[j] + fd::wp(&p.field, crest, j))
        .fold(0.0f64, f64::max);
    if p.field.f * p.field.f > 2.0 * sup_rho * sup_hp * sup_hp * hp0 * (1.0 + 1e-8) {
        return Some(StopReason::FroudeBound);
    }
    None
}

/// Secant predictor plus Newton on the bordered system
///   R(w, F) = 0,  t_v (v(0) − v_k) + t_F (F − F_k) = ds.
#[allow(clippy::too_many_arguments)]
fn corrector(
    d: &Discretization,
    last: &BranchPoint,
    prev: &BranchPoint,
    ci: usize,
    tv: f64,
    tf: f64,
    ds: f64,
    sl: f64,
    opts: &NewtonOptions,
) -> Result<(HeightField, usize)> {
    let scale = ds / sl;
    let mut field = last.field.clone();
    field
        .w
        .iter_mut()
        .zip(&prev.field.w)
        .zip(&last.field.w)
        .for_each(|((x, p), l)| *x += scale * (l - p));
    field.f += scale * (last.field.f - prev.field.f);
    let (v0, f0) = (last.field.w[ci], last.field.f);
    for it in 0..opts.max_iter {
        if d.min_hp(&field) <= 0.0 || !(field.f > 0.0) {
            return Err(Error::Stagnation(
                "predictor left the elliptic region".into(),
            ));
        }
        let mu = field.mu();
        let r = d.residual_vec(&field.w, mu);
        let nres = tv * (field.w[ci] - v0) + tf * (field.f - f0) - ds;
        let rn = inf_norm(&r).max(nres.abs());
        if rn < opts.tol {
            return Ok((field, it));
        }
        if !rn.is_finite() || rn > 1e6 {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: rn,
                best: None,
            });
        }
        let lu = d.factor_jacobian(&field.w, mu)?;
        // R_F = R_μ · dμ/dF
        let dmu_df = -2.0 / (field.f * field.f * field.f);
        let mut rf: Vec<f64> = d.dmu_vec(&field.w).iter().map(|v| v * dmu_df).collect();
        let mut ra = r.clone();
        lu.solve(&mut ra);
        lu.solve(&mut rf);
        // J δw + R_F δF = −R ; t_v δv + t_F δF = −N
        let den = tf - tv * rf[ci];
        if den.abs() < 1e-14 {
            return Err(Error::SingularSystem("bordered continuation system".into()));
        }
        let df = (-nres + tv * ra[ci]) / den;
        field
            .w
            .iter_mut()
            .zip(ra.iter().zip(&rf))
            .for_each(|(x, (a, b))| *x += -a - b * df);
        field.f += df;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: f64::NAN,
        best: None,
    })
}

/// Four-point Lagrange weights for abscissae `xs` at `x`.
fn lagrange4(xs: [f64; 4], x: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
    }
    w
}

/// Index of the first of four consecutive nodes around `x` in `0..n`, where
/// node k sits at `x0 + k h`; with `mirror` indices may start at −1 (even
/// reflection at x0).
fn window(x: f64, x0: f64, h: f64, n: usize, mirror: bool) -> isize {
    let k = ((x - x0) / h).floor() as isize;
    let lo = if mirror { -1 } else { 0 };
    (k - 1).clamp(lo, n as isize - 4)
}

/// Bicubic (4×4 Lagrange) interpolation of `field` onto `grid`, layer by layer.
pub fn refine_and_transfer(field: &HeightField, grid: &SlitGrid) -> Result<HeightField> {
    let src = &field.grid;
    if (src.p_hat - grid.p_hat).abs() > 1e-14 || src.full != grid.full {
        return Err(Error::InvalidInput(
            "transfer requires the same interface and domain type (no interpolation across p̂)"
                .into(),
        ));
    }
    if (src.l - grid.l).abs() > 1e-12 * src.l {
        return Err(Error::InvalidInput(
            "transfer requires the same rectangle".into(),
        ));
    }
    let mut out = HeightField::zeros(grid.clone(), field.f, &field.bg_hash);
    out.eps = field.eps;
    let (q0, hq) = (src.q0(), src.dq());
    for i in 0..grid.nq {
        let q = grid.q(i);
        let wi = window(q, q0, hq, src.nq, !src.full);
        let qs: [f64; 4] = std::array::from_fn(|t| q0 + (wi + t as isize) as f64 * hq);
        let cq = lagrange4(qs, q);
        for j in 0..grid.col_len() {
            let side = grid.side(j);
            let rows = src.layer_rows(side);
            let (p, base, hp) = (grid.p(j), src.p(rows.start), src.dp(side));
            let wj = window(p, base, hp, rows.len(), false);
            let ps: [f64; 4] = std::array::from_fn(|t| base + (wj + t as isize) as f64 * hp);
            let cp = lagrange4(ps, p);
            let mut v = 0.0;
            for (a, ca) in cq.iter().enumerate() {
                let ii = (wi + a as isize).unsigned_abs();
                for (b, cb) in cp.iter().enumerate() {
                    let jj = rows.start + (wj as usize) + b;
                    v += ca * cb * field.at(ii, jj);
                }
            }
            *out.at_mut(i, j) = v;
        }
    }
    // keep the Dirichlet rows exact
    for i in 0..grid.nq {
        *out.at_mut(i, 0) = 0.0;
    }
    Ok(out)
}

/// Pointwise derivatives of a smooth test function, used to build
/// manufactured right-hand sides from the continuum operator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Derivs {
    pub w: f64,
    pub wq: f64,
    pub wp: f64,
    pub wqq: f64,
    pub wqp: f64,
    pub wpp: f64,
}

/// Continuum operator applied to an exact function, row by row, so that the
/// discrete solve with this forcing reproduces it up to truncation error.
/// Dirichlet rows receive the function values.
pub fn manufactured_forcing<F>(d: &Discretization, mu: f64, exact: F) -> Vec<f64>
where
    F: Fn(f64, f64, Side) -> Derivs,
{
    let g = &d.grid;
    let mut out = vec![0.0; g.len()];
    for i in 0..g.nq {
        let q = g.q(i);
        for j in 0..g.col_len() {
            let (p, s) = (g.p(j), g.side(j));
            let e = exact(q, p, s);
            let hp = d.hp[j];
            let a = hp + e.wp;
            let b = |x: &Derivs, hp: f64| {
                let a = hp + x.wp;
                (1.0 + x.wq * x.wq) / (2.0 * a * a) - 1.0 / (2.0 * hp * hp)
            };
            let v = match d.kind(i, j) {
                RowKind::Dirichlet => e.w,
                RowKind::Continuity => 0.0,
                RowKind::Surface => b(&e, hp) + mu * d.rho[j] * e.w,
                RowKind::Transmission => {
                    let jl = g.lower_interface();
                    let el = exact(q, p, Side::Lower);
                    b(&e, hp) - b(&el, d.hp[jl]) + mu * d.rho_jump * e.w
                }
                RowKind::Interior => {
                    let hpp = d.hpp[j];
                    let a2 = a * a;
                    let dfp = (1.0 + e.wq * e.wq) / (a2 * a) * (hpp + e.wpp)
                        - e.wq * e.wqp / a2
                        - hpp / (hp * hp * hp);
                    let dfq = e.wqq / a - e.wq * e.wqp / a2;
                    dfp + dfq - mu * d.rho_p[j] * e.w
                }
            };
            out[g.idx(i, j)] = d.row_scale(i, j) * v;
        }
    }
    out
}
