//! Quadratic truncation of the reduced dynamics near criticality: the
//! coefficients B₁ and B₂, the transversal corrections K₁ and K₂, and the
//! sech² interface seed with its full-field ansatz.
//!
//! The ansatz writes w(q, p) = v(q) Φ(p) + v(q)² K₂(p) + ε² v(q) K₁(p) with
//! μ = μ_cr − ε². Expanding the height equation to second order gives the
//! interface equation v'' = B₁ ε² v + B₂ v², whose homoclinic orbit is an
//! elevation (B₂ < 0). The sech² profile exposed by [`sech_seed`] solves
//! v'' = B₁ ε² v − B₂ v² instead and is therefore a depression; its
//! reflection [`elevation_seed`] solves the former.

use crate::background::StratifiedBackground;
use crate::error::{Error, Result};
use crate::grid::{HeightField, SlitGrid};
use crate::layered::{LayeredProfile, NodeTable};
use crate::ode::integrate_through;
use crate::profile::Side;
use crate::quadrature::gl_doubling;
use crate::sturm_liouville::{shooting_options, CriticalData};

/// Which multiple of the critical eigenfunction the model is expanded about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Φ₀(p̂) = 1, so that v is the interface displacement.
    InterfaceUnit,
    /// Ψ_p(−1) = 1, the shooting normalization.
    BedSlope,
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub normalization: Normalization,
    pub mu_cr: f64,
    pub p_hat: f64,
    pub b1: f64,
    pub b2: f64,
    /// B₁ and B₂ recovered as the multipliers of the bordered correction solves.
    pub b1_bordered: f64,
    pub b2_bordered: f64,
    /// ∫ Φ²/H_p dp.
    pub denom: f64,
    pub phi: LayeredProfile,
    pub k1: LayeredProfile,
    pub k2: LayeredProfile,
}

/// Which correction problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    K1,
    K2,
}

const QUAD_RTOL: f64 = 1e-13;

fn integrate_layers<F: Fn(f64, Side) -> f64>(bg: &StratifiedBackground, f: F) -> f64 {
    let lower = gl_doubling(|p| f(p, Side::Lower), -1.0, bg.p_hat, QUAD_RTOL, 1e-300).0;
    let upper = gl_doubling(|p| f(p, Side::Upper), bg.p_hat, 0.0, QUAD_RTOL, 1e-300).0;
    lower + upper
}

fn profile_for(critical: &CriticalData, norm: Normalization) -> &LayeredProfile {
    match norm {
        Normalization::InterfaceUnit => &critical.phi0,
        Normalization::BedSlope => &critical.psi,
    }
}

/// ∫ Φ²/H_p over both layers.
pub fn denominator(bg: &StratifiedBackground, phi: &LayeredProfile) -> f64 {
    integrate_layers(bg, |p, s| {
        let v = phi.value(p, s);
        v * v / bg.hp(p, s)
    })
}

/// B₁ = (∫R₁Φ − R₃Φ(p̂) + R₂Φ(0)) / ∫Φ²/H_p with R₁ = −ρ_pΦ, R₂ = ρ(0)Φ(0), R₃ = ⟦ρ⟧Φ(p̂).
pub fn compute_b1(bg: &StratifiedBackground, critical: &CriticalData, norm: Normalization) -> f64 {
    let phi = profile_for(critical, norm);
    b1_of(bg, phi)
}

fn b1_of(bg: &StratifiedBackground, phi: &LayeredProfile) -> f64 {
    let r1 = integrate_layers(bg, |p, s| {
        let v = phi.value(p, s);
        -bg.rho_p(p, s) * v * v
    });
    let ph = phi.value(bg.p_hat, Side::Lower);
    let p0 = phi.value(0.0, Side::Upper);
    let r3 = bg.rho_jump() * ph * ph;
    let r2 = bg.rho(0.0, Side::Upper) * p0 * p0;
    (r1 - r3 + r2) / denominator(bg, phi)
}

/// B₂ = −(3/2) ∫ Φ_p³/H_p⁴ / ∫ Φ²/H_p.
pub fn compute_b2(bg: &StratifiedBackground, critical: &CriticalData, norm: Normalization) -> f64 {
    b2_of(bg, profile_for(critical, norm))
}

fn b2_of(bg: &StratifiedBackground, phi: &LayeredProfile) -> f64 {
    let num = integrate_layers(bg, |p, s| {
        let d = phi.deriv(p, s);
        let hp = bg.hp(p, s);
        d * d * d / (hp * hp * hp * hp)
    });
    -1.5 * num / denominator(bg, phi)
}

/// Data for one transversal correction problem
///   K' = H_p³ (G + extra(p)),  G' = μ ρ_p K + f(p) + b g(p),
///   G⁺ = G⁻ + μ⟦ρ⟧K − jump_rhs at p̂,  −G(0) + μρ(0)K(0) = top_rhs,
/// with K(−1) = 0 and the gauge K(p̂) = 0; b is solved for.
struct CorrectionProblem<'a> {
    bg: &'a StratifiedBackground,
    phi: &'a LayeredProfile,
    mu: f64,
    which: Correction,
}

impl CorrectionProblem<'_> {
    fn x_of(&self, p: f64, s: Side) -> f64 {
        let d = self.phi.deriv(p, s);
        let hp = self.bg.hp(p, s);
        d * d / (hp * hp * hp * hp)
    }

    fn extra(&self, p: f64, s: Side) -> f64 {
        match self.which {
            Correction::K1 => 0.0,
            Correction::K2 => 1.5 * self.x_of(p, s),
        }
    }

    fn forcing(&self, p: f64, s: Side) -> f64 {
        match self.which {
            Correction::K1 => -self.bg.rho_p(p, s) * self.phi.value(p, s),
            Correction::K2 => 0.0,
        }
    }

    fn multiplier_forcing(&self, p: f64, s: Side) -> f64 {
        -self.phi.value(p, s) / self.bg.hp(p, s)
    }

    fn top_rhs(&self) -> f64 {
        match self.which {
            Correction::K1 => self.bg.rho(0.0, Side::Upper) * self.phi.value(0.0, Side::Upper),
            Correction::K2 => 0.0,
        }
    }

    fn jump_rhs(&self) -> f64 {
        match self.which {
            Correction::K1 => self.bg.rho_jump() * self.phi.value(self.bg.p_hat, Side::Lower),
            Correction::K2 => 0.0,
        }
    }

    /// Shoots one basis solution on the nodes of Φ. `homog` selects the
    /// kernel direction (unit bed slope, no forcing); `mult` scales the
    /// multiplier forcing; `inhom` switches the remaining data on.
    fn shoot(&self, homog: bool, mult: f64, inhom: bool) -> Result<[Vec<[f64; 2]>; 2]> {
        let bg = self.bg;
        let opts = shooting_options();
        let hp_lo = bg.hp(-1.0, Side::Lower);
        let mut y = if homog {
            [0.0, 1.0 / (hp_lo * hp_lo * hp_lo)]
        } else {
            [0.0, 0.0]
        };
        if inhom {
            // K'(−1) = H_p³(G + extra) must be 0 for a particular solution
            y[1] -= self.extra(-1.0, Side::Lower);
        }
        let mut out: Vec<Vec<[f64; 2]>> = Vec::new();
        for (side, tab) in [
            (Side::Lower, &self.phi.lower),
            (Side::Upper, &self.phi.upper),
        ] {
            if side == Side::Upper {
                y[1] += self.mu * bg.rho_jump() * y[0];
                if inhom {
                    y[1] -= self.jump_rhs();
                }
            }
            let rhs = |p: f64, y: &[f64; 2]| {
                let hp = bg.hp(p, side);
                let ex = if inhom { self.extra(p, side) } else { 0.0 };
                let mut g = self.mu * bg.rho_p(p, side) * y[0];
                if inhom {
                    g += self.forcing(p, side);
                }
                if mult != 0.0 {
                    g += mult * self.multiplier_forcing(p, side);
                }
                [hp * hp * hp * (y[1] + ex), g]
            };
            let states = integrate_through(rhs, &tab.p, y, &opts)?;
            y = states[states.len() - 1];
            out.push(states);
        }
        let upper = out.pop().expect("two layers");
        let lower = out.pop().expect("two layers");
        Ok([lower, upper])
    }

    fn top_residual(&self, last: &[f64; 2], inhom: bool) -> f64 {
        let r0 = self.bg.rho(0.0, Side::Upper);
        let g = last[1];
        let mut r = -g + self.mu * r0 * last[0];
        if inhom {
            r -= self.top_rhs();
        }
        r
    }

    /// Returns (K profile, multiplier b).
    fn solve(&self) -> Result<(LayeredProfile, f64)> {
        let ya = self.shoot(true, 0.0, false)?;
        let yb = self.shoot(false, 1.0, false)?;
        let y0 = self.shoot(false, 0.0, true)?;
        let last = |y: &[Vec<[f64; 2]>; 2]| *y[1].last().expect("nonempty");
        let hat = |y: &[Vec<[f64; 2]>; 2]| y[0].last().expect("nonempty")[0];
        // [Ta Tb; Ka Kb] (a, b) = −(T0, K0)
        let (ta, tb, t0) = (
            self.top_residual(&last(&ya), false),
            self.top_residual(&last(&yb), false),
            self.top_residual(&last(&y0), true),
        );
        let (ka, kb, k0) = (hat(&ya), hat(&yb), hat(&y0));
        let det = ta * kb - tb * ka;
        let scale = (ta.abs() + tb.abs()) * (ka.abs() + kb.abs());
        if !(det.abs() > 1e-12 * scale) {
            return Err(Error::SingularSystem(format!(
                "correction system determinant {det:e} (scale {scale:e})"
            )));
        }
        let a = (-t0 * kb + tb * k0) / det;
        let b = (-ta * k0 + t0 * ka) / det;
        let mut tables = Vec::with_capacity(2);
        for (li, (side, tab)) in [
            (Side::Lower, &self.phi.lower),
            (Side::Upper, &self.phi.upper),
        ]
        .into_iter()
        .enumerate()
        {
            let n = tab.p.len();
            let mut t = NodeTable {
                p: tab.p.clone(),
                v: Vec::with_capacity(n),
                dv: Vec::with_capacity(n),
                ddv: Vec::with_capacity(n),
            };
            for k in 0..n {
                let p = tab.p[k];
                let kk = a * ya[li][k][0] + b * yb[li][k][0] + y0[li][k][0];
                let g = a * ya[li][k][1] + b * yb[li][k][1] + y0[li][k][1];
                let hp = self.bg.hp(p, side);
                let hpp = self.bg.hpp(p, side);
                let h3 = hp * hp * hp;
                let phi = tab.v[k];
                let dphi = tab.dv[k];
                let ddphi = tab.ddv[k];
                let (ex, dex) = match self.which {
                    Correction::K1 => (0.0, 0.0),
                    Correction::K2 => {
                        let x = dphi * dphi / (h3 * hp);
                        let dx = 2.0 * dphi * ddphi / (h3 * hp)
                            - 4.0 * dphi * dphi * hpp / (h3 * hp * hp);
                        (1.5 * x, 1.5 * dx)
                    }
                };
                let gp = self.mu * self.bg.rho_p(p, side) * kk
                    + b * (-phi / hp)
                    + match self.which {
                        Correction::K1 => -self.bg.rho_p(p, side) * phi,
                        Correction::K2 => 0.0,
                    };
                t.v.push(kk);
                t.dv.push(h3 * (g + ex));
                t.ddv.push(3.0 * hp * hp * hpp * (g + ex) + h3 * (gp + dex));
            }
            tables.push(t);
        }
        let upper = tables.pop().expect("two layers");
        let mut lower = tables.pop().expect("two layers");
        // the gauge holds to rounding; pin it exactly
        let nl = lower.v.len();
        let off = lower.v[nl - 1];
        let mut upper = upper;
        if off.abs() < 1e-9 {
            lower.v[nl - 1] = 0.0;
            upper.v[0] = 0.0;
        }
        Ok((
            LayeredProfile {
                p_hat: self.phi.p_hat,
                lower,
                upper,
            },
            b,
        ))
    }
}

/// Solves the transversal correction problem for K₁ or K₂ with the gauge
/// K(p̂) = 0. Returns the profile and the multiplier that makes the problem
/// solvable, which reproduces B₁ or B₂.
pub fn solve_correction(
    bg: &StratifiedBackground,
    critical: &CriticalData,
    norm: Normalization,
    which: Correction,
) -> Result<(LayeredProfile, f64)> {
    CorrectionProblem {
        bg,
        phi: profile_for(critical, norm),
        mu: critical.mu_cr,
        which,
    }
    .solve()
}

impl ReducedModel {
    pub fn new(
        bg: &StratifiedBackground,
        critical: &CriticalData,
        norm: Normalization,
    ) -> Result<Self> {
        let phi = profile_for(critical, norm).clone();
        if let Normalization::InterfaceUnit = norm {
            let at = phi.value(bg.p_hat, Side::Lower);
            if (at - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("Φ₀(p̂) = {at}, expected 1")));
            }
        }
        let b1 = b1_of(bg, &phi);
        let b2 = b2_of(bg, &phi);
        if !(b1 > 0.0) {
            return Err(Error::Inconsistent(format!("B1 = {b1} is not positive")));
        }
        let (k1, b1_bordered) = solve_correction(bg, critical, norm, Correction::K1)?;
        let (k2, b2_bordered) = solve_correction(bg, critical, norm, Correction::K2)?;
        Ok(ReducedModel {
            normalization: norm,
            mu_cr: critical.mu_cr,
            p_hat: bg.p_hat,
            b1,
            b2,
            b1_bordered,
            b2_bordered,
            denom: denominator(bg, &phi),
            phi,
            k1,
            k2,
        })
    }

    /// μ = μ_cr − ε² and the matching Froude number.
    pub fn froude(&self, eps: f64) -> Result<f64> {
        let mu = self.mu_cr - eps * eps;
        if !(mu > 0.0) {
            return Err(Error::InvalidInput(format!("ε = {eps} exceeds √μ_cr")));
        }
        Ok(1.0 / mu.sqrt())
    }
}

/// v(q) = amplitude · sech²(k q), even in q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SechProfile {
    pub amplitude: f64,
    pub k: f64,
}

impl SechProfile {
    pub fn value(&self, q: f64) -> f64 {
        let s = 1.0 / (self.k * q.abs()).cosh();
        self.amplitude * s * s
    }

    pub fn deriv(&self, q: f64) -> f64 {
        let x = self.k * q;
        let s = 1.0 / x.cosh();
        -2.0 * self.k * self.amplitude * s * s * x.tanh()
    }

    pub fn second(&self, q: f64) -> f64 {
        let x = self.k * q.abs();
        let s = 1.0 / x.cosh();
        let s2 = s * s;
        self.amplitude * self.k * self.k * (4.0 * s2 - 6.0 * s2 * s2)
    }

    /// Flip the sign of the amplitude.
    pub fn reflected(&self) -> SechProfile {
        SechProfile {
            amplitude: -self.amplitude,
            k: self.k,
        }
    }
}

fn check_eps(model: &ReducedModel, eps: f64) -> Result<()> {
    if !(model.b1 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "B1 = {} must be positive",
            model.b1
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("ε = {eps} must be positive")));
    }
    if eps > 0.5 {
        log::warn!("ε = {eps} is large; the truncated model is only a continuation seed here");
    }
    Ok(())
}

/// v(q) = (3B₁ε²/(2B₂)) sech²(ε√B₁ q/2), the closed-form homoclinic orbit of
/// v'' = B₁ε²v − B₂v².
pub fn sech_seed(model: &ReducedModel, eps: f64) -> Result<SechProfile> {
    check_eps(model, eps)?;
    Ok(SechProfile {
        amplitude: 3.0 * model.b1 * eps * eps / (2.0 * model.b2),
        k: 0.5 * eps * model.b1.sqrt(),
    })
}

/// The reflected orbit −v, which solves v'' = B₁ε²v + B₂v² and is positive when B₂ < 0.
pub fn elevation_seed(model: &ReducedModel, eps: f64) -> Result<SechProfile> {
    Ok(sech_seed(model, eps)?.reflected())
}

/// Samples w = vΦ + v²K₂ + ε²vK₁ on `grid` at F = (μ_cr − ε²)^(−1/2).
pub fn elevation_ansatz(
    model: &ReducedModel,
    bg: &StratifiedBackground,
    eps: f64,
    v: &SechProfile,
    grid: &SlitGrid,
) -> Result<HeightField> {
    let f = model.froude(eps)?;
    ansatz_at(model, bg, eps, v, grid, f)
}

/// As [`elevation_ansatz`] but at a caller-chosen Froude number.
pub fn ansatz_at(
    model: &ReducedModel,
    bg: &StratifiedBackground,
    eps: f64,
    v: &SechProfile,
    grid: &SlitGrid,
    f: f64,
) -> Result<HeightField> {
    if (grid.p_hat - model.p_hat).abs() > 1e-12 {
        return Err(Error::InvalidInput(
            "grid interface differs from the model's p̂".into(),
        ));
    }
    let mut field = HeightField::zeros(grid.clone(), f, bg.hash());
    field.eps = Some(eps);
    for i in 0..grid.nq {
        let vq = v.value(grid.q(i));
        for j in 0..grid.col_len() {
            let (p, s) = (grid.p(j), grid.side(j));
            let w = vq * model.phi.value(p, s)
                + vq * vq * model.k2.value(p, s)
                + eps * eps * vq * model.k1.value(p, s);
            *field.at_mut(i, j) = if j == 0 { 0.0 } else { w };
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturm_liouville::find_mu_cr;
    use approx::assert_relative_eq;

    #[test]
    fn constant_case_coefficients() {
        let bg = StratifiedBackground::uniform(-0.5).unwrap();
        let c = find_mu_cr(&bg).unwrap();
        let m = ReducedModel::new(&bg, &c, Normalization::BedSlope).unwrap();
        assert_relative_eq!(m.b1, 3.0, epsilon = 1e-10);
        assert_relative_eq!(m.b2, -4.5, epsilon = 1e-10);
        assert_relative_eq!(m.b1_bordered, 3.0, epsilon = 1e-8);
        assert_relative_eq!(m.b2_bordered, -4.5, epsilon = 1e-8);
        let mi = ReducedModel::new(&bg, &c, Normalization::InterfaceUnit).unwrap();
        assert_relative_eq!(mi.b1, 3.0, epsilon = 1e-10);
        assert_relative_eq!(mi.b2, -9.0, epsilon = 1e-10);
    }

    #[test]
    fn seed_values() {
        let bg = StratifiedBackground::uniform(-0.5).unwrap();
        let c = find_mu_cr(&bg).unwrap();
        let m = ReducedModel::new(&bg, &c, Normalization::BedSlope).unwrap();
        let v = sech_seed(&m, 0.1).unwrap();
        assert_relative_eq!(v.value(0.0), -0.01, epsilon = 1e-12);
        assert_relative_eq!(
            elevation_seed(&m, 0.1).unwrap().value(0.0),
            0.01,
            epsilon = 1e-12
        );
        assert_eq!(v.value(3.7), v.value(-3.7));
    }
}
