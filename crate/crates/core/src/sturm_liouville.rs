//! Transversal eigenproblem at the laminar flow: the critical value μ_cr = 1/F_cr²,
//! its eigenfunction, and the eigenvalues ν_j at criticality.
//!
//! All shooting propagates (φ, φ_p/H_p³). With that flux variable the
//! equation reads flux' = μ ρ_p φ + ν φ / H_p, so ν₀ = 0 is the largest
//! eigenvalue and the remaining ones decrease to −∞.

use crate::background::StratifiedBackground;
use crate::error::{Error, Result};
use crate::layered::{LayeredProfile, NodeTable};
use crate::ode::{integrate, integrate_through, OdeOptions};
use crate::profile::Side;
use crate::roots;

/// Shooting solution at a single p: φ and the co-normal flux φ_p/H_p³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingState {
    pub phi: f64,
    pub flux: f64,
}

/// Output of [`find_mu_cr`] and [`spectrum_at_criticality`].
#[derive(Debug, Clone)]
pub struct CriticalData {
    pub mu_cr: f64,
    pub f_cr: f64,
    /// dA/dμ at μ_cr.
    pub a_slope: f64,
    /// Eigenfunction normalized by Φ₀(p̂) = 1.
    pub phi0: LayeredProfile,
    /// The same eigenfunction normalized by Ψ_p(−1) = 1.
    pub psi: LayeredProfile,
    /// Φ₀ = rescale · Ψ.
    pub rescale: f64,
    /// Eigenvalues in descending order (empty until computed).
    pub spectrum: Vec<f64>,
}

/// Samples per layer used for the stored eigenfunction.
pub const PROFILE_INTERVALS: usize = 1024;

/// Integrator settings for all shooting in this module.
pub fn shooting_options() -> OdeOptions {
    OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        h_init: 1e-3,
        h_max: 0.02,
        max_steps: 2_000_000,
    }
}

fn layers(bg: &StratifiedBackground) -> [(Side, f64, f64); 2] {
    [(Side::Lower, -1.0, bg.p_hat), (Side::Upper, bg.p_hat, 0.0)]
}

fn check_state(p: f64, phi: f64, flux: f64) -> Result<()> {
    if phi == 0.0 && flux == 0.0 {
        return Err(Error::Integrator {
            p,
            reason: "shooting state collapsed to zero".into(),
        });
    }
    Ok(())
}

/// Integrates (φ_p/H_p³)_p = μ ρ_p φ + ν φ/H_p from (φ, φ_p) = (0, 1) at p = −1
/// and applies the flux jump μ⟦ρ⟧φ at p̂. Returns the state at p = 0.
pub fn shoot(bg: &StratifiedBackground, mu: f64, nu: f64) -> Result<ShootingState> {
    shoot_with(bg, mu, nu, &shooting_options())
}

pub fn shoot_with(
    bg: &StratifiedBackground,
    mu: f64,
    nu: f64,
    opts: &OdeOptions,
) -> Result<ShootingState> {
    let (s, _) = shoot_counting(bg, mu, nu, opts)?;
    Ok(s)
}

/// Same as [`shoot`], also returning the number of sign changes of φ on (−1, 0].
fn shoot_counting(
    bg: &StratifiedBackground,
    mu: f64,
    nu: f64,
    opts: &OdeOptions,
) -> Result<(ShootingState, usize)> {
    let hp_lo = bg.hp(-1.0, Side::Lower);
    let mut y = [0.0, 1.0 / (hp_lo * hp_lo * hp_lo)];
    let mut opts = *opts;
    if nu < 0.0 {
        opts.h_max = opts.h_max.min(0.3 / (-nu).sqrt());
    }
    let mut zeros = 0usize;
    let mut prev_sign = 1.0f64;
    let mut collapsed: Option<f64> = None;
    for (side, a, b) in layers(bg) {
        if side == Side::Upper {
            y[1] += mu * bg.rho_jump() * y[0];
        }
        let rhs = |p: f64, y: &[f64; 2]| {
            let hp = bg.hp(p, side);
            [
                hp * hp * hp * y[1],
                mu * bg.rho_p(p, side) * y[0] + nu * y[0] / hp,
            ]
        };
        let (y1, _) = integrate(rhs, a, y, b, &opts, |p, s| {
            if s[0] != 0.0 && s[0].signum() != prev_sign {
                zeros += 1;
                prev_sign = s[0].signum();
            }
            if s[0] == 0.0 && s[1] == 0.0 {
                collapsed = Some(p);
            }
        })?;
        if let Some(p) = collapsed {
            check_state(p, 0.0, 0.0)?;
        }
        y = y1;
    }
    if y[0] == 0.0 {
        zeros += 1;
    }
    check_state(0.0, y[0], y[1])?;
    Ok((
        ShootingState {
            phi: y[0],
            flux: y[1],
        },
        zeros,
    ))
}

/// A(μ) = −flux(0) + μ ρ(0) φ(0) at ν = 0.
pub fn eval_a(bg: &StratifiedBackground, mu: f64) -> Result<f64> {
    Ok(eval_a_with_slope(bg, mu)?.0)
}

/// A(μ) together with dA/dμ from the variational equations.
pub fn eval_a_with_slope(bg: &StratifiedBackground, mu: f64) -> Result<(f64, f64)> {
    let opts = shooting_options();
    let hp_lo = bg.hp(-1.0, Side::Lower);
    let mut y = [0.0, 1.0 / (hp_lo * hp_lo * hp_lo), 0.0, 0.0];
    for (side, a, b) in layers(bg) {
        if side == Side::Upper {
            let j = bg.rho_jump();
            y[1] += mu * j * y[0];
            y[3] += j * y[0] + mu * j * y[2];
        }
        let rhs = |p: f64, y: &[f64; 4]| {
            let hp = bg.hp(p, side);
            let h3 = hp * hp * hp;
            let rp = bg.rho_p(p, side);
            [
                h3 * y[1],
                mu * rp * y[0],
                h3 * y[3],
                rp * y[0] + mu * rp * y[2],
            ]
        };
        y = integrate(rhs, a, y, b, &opts, |_, _| {})?.0;
    }
    check_state(0.0, y[0], y[1])?;
    let r0 = bg.rho(0.0, Side::Upper);
    let a = -y[1] + mu * r0 * y[0];
    let da = -y[3] + r0 * y[0] + mu * r0 * y[2];
    Ok((a, da))
}

/// Smallest positive root of A, bracketed by geometric expansion from μ = 1.
pub fn find_mu_cr(bg: &StratifiedBackground) -> Result<CriticalData> {
    let a0 = eval_a(bg, 0.0)?;
    if !(a0 < 0.0) {
        return Err(Error::UnsupportedRegime(format!(
            "A(0) = {a0} is not negative"
        )));
    }
    let (mut lo, mut hi) = bracket(bg)?;
    let mut mu = 0.0;
    for _attempt in 0..8 {
        let (flo, fhi) = (eval_a(bg, lo)?, eval_a(bg, hi)?);
        mu = roots::illinois(|m| eval_a(bg, m), lo, hi, flo, fhi, 1e-15 * hi, 0.0)?;
        mu = newton_polish(bg, mu)?;
        // A must stay negative on [0, μ_cr); otherwise an earlier root exists.
        let mut earlier = None;
        for k in 0..16 {
            let m = mu * k as f64 / 16.0;
            if eval_a(bg, m)? >= 0.0 {
                earlier = Some(m);
                break;
            }
        }
        match earlier {
            None => break,
            Some(m) => {
                log::warn!("A changes sign before the bracketed root; re-bracketing below μ = {m}");
                hi = m;
                lo = mu * (((m / mu) * 16.0).round() - 1.0).max(0.0) / 16.0;
            }
        }
    }
    let (a, slope) = eval_a_with_slope(bg, mu)?;
    if a.abs() > 1e-10 * (1.0 + slope.abs() * mu) {
        return Err(Error::UnsupportedRegime(format!(
            "A(μ_cr) = {a:e} not converged"
        )));
    }
    let psi = eigenfunction(bg, mu, 0.0, PROFILE_INTERVALS)?;
    let at_hat = psi.value(bg.p_hat, Side::Lower);
    let rescale = 1.0 / at_hat;
    let phi0 = psi.scaled(rescale);
    check_positivity(&phi0)?;
    Ok(CriticalData {
        mu_cr: mu,
        f_cr: 1.0 / mu.sqrt(),
        a_slope: slope,
        phi0,
        psi,
        rescale,
        spectrum: Vec::new(),
    })
}

fn bracket(bg: &StratifiedBackground) -> Result<(f64, f64)> {
    let mut mu = 1.0;
    if eval_a(bg, mu)? < 0.0 {
        loop {
            let next = 2.0 * mu;
            if next > 1e6 {
                return Err(Error::UnsupportedRegime(
                    "A(μ) has no sign change in (0, 1e6]".into(),
                ));
            }
            if eval_a(bg, next)? >= 0.0 {
                return Ok((mu, next));
            }
            mu = next;
        }
    } else {
        loop {
            let next = 0.5 * mu;
            if next < 1e-12 {
                return Err(Error::UnsupportedRegime(
                    "A(μ) non-negative for all tiny μ".into(),
                ));
            }
            if eval_a(bg, next)? < 0.0 {
                return Ok((next, mu));
            }
            mu = next;
        }
    }
}

fn newton_polish(bg: &StratifiedBackground, mut mu: f64) -> Result<f64> {
    for _ in 0..6 {
        let (a, da) = eval_a_with_slope(bg, mu)?;
        if a.abs() < 1e-12 * (1.0 + da.abs() * mu) || da == 0.0 {
            break;
        }
        let step = a / da;
        if step.abs() > 1e-6 * mu.max(1e-12) {
            break;
        }
        mu -= step;
    }
    Ok(mu)
}

fn check_positivity(phi0: &LayeredProfile) -> Result<()> {
    for (side, t) in [(Side::Lower, &phi0.lower), (Side::Upper, &phi0.upper)] {
        for (k, (&p, (&v, &dv))) in t.p.iter().zip(t.v.iter().zip(&t.dv)).enumerate() {
            if p > -1.0 && !(v > 0.0) {
                return Err(Error::Inconsistent(format!(
                    "Φ₀({p}) = {v} is not positive"
                )));
            }
            let interior =
                !(side == Side::Lower && k == t.p.len() - 1) && !(side == Side::Upper && k == 0);
            if interior && !(dv > 0.0) {
                return Err(Error::Inconsistent(format!(
                    "Φ₀'({p}) = {dv} is not positive"
                )));
            }
        }
    }
    Ok(())
}

/// The shooting solution (with Ψ_p(−1) = 1) sampled on `n` intervals per layer.
pub fn eigenfunction(
    bg: &StratifiedBackground,
    mu: f64,
    nu: f64,
    n: usize,
) -> Result<LayeredProfile> {
    let opts = shooting_options();
    let hp_lo = bg.hp(-1.0, Side::Lower);
    let mut y = [0.0, 1.0 / (hp_lo * hp_lo * hp_lo)];
    let mut tables = Vec::new();
    for (side, a, b) in layers(bg) {
        if side == Side::Upper {
            y[1] += mu * bg.rho_jump() * y[0];
        }
        let ps: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let rhs = |p: f64, y: &[f64; 2]| {
            let hp = bg.hp(p, side);
            [
                hp * hp * hp * y[1],
                mu * bg.rho_p(p, side) * y[0] + nu * y[0] / hp,
            ]
        };
        let states = integrate_through(rhs, &ps, y, &opts)?;
        let mut t = NodeTable {
            p: ps.clone(),
            v: Vec::with_capacity(n + 1),
            dv: Vec::with_capacity(n + 1),
            ddv: Vec::with_capacity(n + 1),
        };
        for (p, s) in ps.iter().zip(&states) {
            let hp = bg.hp(*p, side);
            let hpp = bg.hpp(*p, side);
            let h3 = hp * hp * hp;
            let flux_p = mu * bg.rho_p(*p, side) * s[0] + nu * s[0] / hp;
            t.v.push(s[0]);
            t.dv.push(h3 * s[1]);
            t.ddv.push(3.0 * hp * hp * hpp * s[1] + h3 * flux_p);
        }
        y = states[states.len() - 1];
        tables.push(t);
    }
    let upper = tables.pop().expect("two layers");
    let lower = tables.pop().expect("two layers");
    Ok(LayeredProfile {
        p_hat: bg.p_hat,
        lower,
        upper,
    })
}

/// Top boundary residual flux(0) − μρ(0)φ(0) of the shooting solution at (μ, ν).
fn top_residual(bg: &StratifiedBackground, mu: f64, nu: f64) -> Result<f64> {
    let s = shoot(bg, mu, nu)?;
    Ok(s.flux - mu * bg.rho(0.0, Side::Upper) * s.phi)
}

/// Number of zeros of the shooting solution on (−1, 0] at (μ, ν).
pub fn zero_count(bg: &StratifiedBackground, mu: f64, nu: f64) -> Result<usize> {
    Ok(shoot_counting(bg, mu, nu, &shooting_options())?.1)
}

/// The `count` largest Dirichlet (φ(0) = 0) eigenvalues at μ, descending.
pub fn dirichlet_eigenvalues(bg: &StratifiedBackground, mu: f64, count: usize) -> Result<Vec<f64>> {
    let floor = -1e6;
    let mut out: Vec<f64> = Vec::with_capacity(count);
    let mut upper = 0.0;
    if zero_count(bg, mu, upper)? != 0 {
        return Err(Error::Inconsistent(format!(
            "shooting solution at ν = 0 already has zeros (μ = {mu}); Dirichlet eigenvalues must be negative"
        )));
    }
    for k in 1..=count {
        // ν_D^(k) = sup{ν : Z(ν) ≥ k}; expand downward until Z(ν) ≥ k.
        let mut lo = upper.min(-1.0) * 2.0;
        while zero_count(bg, mu, lo)? < k {
            lo *= 2.0;
            if lo < floor {
                log::warn!(
                    "Dirichlet search reached the floor {floor} after {} eigenvalues",
                    out.len()
                );
                return Ok(out);
            }
        }
        let tol = 1e-12 * lo.abs().max(1.0);
        let nu = roots::bisect_predicate(|v| Ok(zero_count(bg, mu, v)? >= k), lo, upper, tol)?;
        out.push(nu);
        upper = nu;
    }
    Ok(out)
}

/// Eigenvalues ν₀ > ν₁ > … at μ_cr, each located between consecutive
/// Dirichlet eigenvalues by a sign change of the top boundary residual.
pub fn spectrum_at_criticality(
    bg: &StratifiedBackground,
    critical: &CriticalData,
    count: usize,
) -> Result<Vec<f64>> {
    spectrum_at(bg, critical.mu_cr, count)
}

pub fn spectrum_at(bg: &StratifiedBackground, mu: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let dir = dirichlet_eigenvalues(bg, mu, count)?;
    let g = |nu: f64| top_residual(bg, mu, nu);
    let mut out = Vec::with_capacity(count);
    // (ν_D^(1), ∞): expand upward until the residual changes sign.
    let d1 = dir.first().copied();
    let (mut lo, mut glo) = match d1 {
        Some(d) => (d, g(d)?),
        None => (-1e6, g(-1e6)?),
    };
    let mut hi = lo.abs().max(1.0);
    let mut ghi = g(hi)?;
    while ghi * glo > 0.0 {
        lo = hi;
        glo = ghi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Inconsistent("no principal eigenvalue found".into()));
        }
        ghi = g(hi)?;
    }
    let tol = |x: f64| 1e-13 * x.abs().max(1.0);
    let nu0 = roots::illinois(g, lo, hi, glo, ghi, tol(hi.min(lo.abs())), 0.0)?;
    out.push(nu0);
    for w in dir.windows(2) {
        if out.len() == count {
            break;
        }
        let (a, b) = (w[1], w[0]);
        let (ga, gb) = (g(a)?, g(b)?);
        if ga * gb > 0.0 {
            return Err(Error::Inconsistent(format!(
                "no sign change of the top residual between Dirichlet eigenvalues {a} and {b}"
            )));
        }
        out.push(roots::illinois(g, a, b, ga, gb, tol(a), 0.0)?);
    }
    if out.len() < count {
        if dir.len() == count {
            // One more interval below the deepest Dirichlet eigenvalue is needed.
            let more = dirichlet_eigenvalues(bg, mu, count + 1)?;
            if more.len() == count + 1 {
                let (a, b) = (more[count], more[count - 1]);
                let (ga, gb) = (g(a)?, g(b)?);
                out.push(roots::illinois(g, a, b, ga, gb, tol(a), 0.0)?);
            }
        }
        if out.len() < count {
            log::warn!(
                "only {} of {count} eigenvalues found above the search floor",
                out.len()
            );
        }
    }
    Ok(out)
}

/// Runs [`find_mu_cr`] and fills the spectrum with `count` eigenvalues.
pub fn critical_data(bg: &StratifiedBackground, count: usize) -> Result<CriticalData> {
    let mut c = find_mu_cr(bg)?;
    c.spectrum = spectrum_at_criticality(bg, &c, count)?;
    Ok(c)
}
