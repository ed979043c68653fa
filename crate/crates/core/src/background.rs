//! Far-field state: scaling to dimensionless variables, asymptotic height H,
//! streamline density, and the Bernoulli function.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ode::{integrate_through, OdeOptions};
use crate::profile::{Branch, PiecewiseProfile, Side};
use crate::quadrature;

/// Dimensional far-field parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParameters {
    pub c: f64,
    pub g: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

impl FluidParameters {
    pub fn new(c: f64, g: f64, d_plus: f64, d_minus: f64) -> Result<Self> {
        let p = FluidParameters {
            c,
            g,
            d_plus,
            d_minus,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn d(&self) -> f64 {
        self.d_plus + self.d_minus
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c", self.c),
            ("g", self.g),
            ("d_plus", self.d_plus),
            ("d_minus", self.d_minus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything needed to undo the scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleReport {
    pub d: f64,
    pub g: f64,
    pub c: f64,
    pub rho0: f64,
    /// Factor applied to the supplied shear profile to meet the normalization.
    pub ustar_rescale: f64,
    /// ∫√ρ̊ u* dy of the supplied (unrescaled) profiles, in SI units.
    pub mass_flux_raw: f64,
    /// m / F after normalization, equal to √(g ρ₀ d³).
    pub mass_flux_per_froude: f64,
    /// g ρ₀ d³ / (m/F)²; equals 1 after normalization.
    pub f_relation_constant: f64,
}

impl ScaleReport {
    /// Velocity scale m/(√ρ₀ d) at Froude number `f`.
    pub fn velocity_scale(&self, f: f64) -> f64 {
        f * (self.g * self.d).sqrt()
    }

    /// Pressure scale m²/d² at Froude number `f`.
    pub fn pressure_scale(&self, f: f64) -> f64 {
        f * f * self.g * self.rho0 * self.d
    }

    pub fn identity() -> Self {
        ScaleReport {
            d: 1.0,
            g: 1.0,
            c: 1.0,
            rho0: 1.0,
            ustar_rescale: 1.0,
            mass_flux_raw: 1.0,
            mass_flux_per_froude: 1.0,
            f_relation_constant: 1.0,
        }
    }
}

/// Dimensionless density and shear profiles on ỹ ∈ [−1, 0].
#[derive(Debug, Clone)]
pub struct ScaledProfiles {
    pub density: PiecewiseProfile,
    pub ustar: PiecewiseProfile,
}

fn integrate_branch<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let scale = quadrature::composite_gl(&f, a, b, 4, 10).abs().max(1e-300);
    quadrature::adaptive(&f, a, b, 1e-15 * scale.max(1.0))
}

fn check_density(rho: &PiecewiseProfile) -> Result<()> {
    let n = 400;
    for (side, a, b) in [
        (Side::Lower, rho.lo, rho.breakpoint),
        (Side::Upper, rho.breakpoint, rho.hi),
    ] {
        let mut prev = f64::INFINITY;
        for k in 0..=n {
            let y = a + (b - a) * k as f64 / n as f64;
            let v = rho.value(y, side);
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "density not positive at y = {y}"
                )));
            }
            if v > prev * (1.0 + 1e-12) + 1e-14 {
                return Err(Error::InvalidInput(format!(
                    "density increases with height near y = {y} (unstable stratification)"
                )));
            }
            prev = v;
        }
    }
    if rho.jump() > 1e-14 * rho.value(rho.breakpoint, Side::Lower) {
        return Err(Error::InvalidInput(
            "density jump at the interface must be non-positive (upper ≤ lower)".into(),
        ));
    }
    Ok(())
}

fn check_positive(p: &PiecewiseProfile, name: &str) -> Result<()> {
    let n = 400;
    for (side, a, b) in [
        (Side::Lower, p.lo, p.breakpoint),
        (Side::Upper, p.breakpoint, p.hi),
    ] {
        for k in 0..=n {
            let y = a + (b - a) * k as f64 / n as f64;
            let v = p.value(y, side);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} not positive at y = {y}"
                )));
            }
        }
    }
    Ok(())
}

/// ∫√ρ u* over the profile domain, branch by branch.
pub fn flux_integral(density: &PiecewiseProfile, ustar: &PiecewiseProfile, from: f64) -> f64 {
    let bp = density.breakpoint;
    let lower = if from < bp {
        integrate_branch(
            |y| density.value(y, Side::Lower).sqrt() * ustar.value(y, Side::Lower),
            from,
            bp,
        )
    } else {
        0.0
    };
    let a = from.max(bp);
    let upper = integrate_branch(
        |y| density.value(y, Side::Upper).sqrt() * ustar.value(y, Side::Upper),
        a,
        density.hi,
    );
    lower + upper
}

/// Scales dimensional profiles on y ∈ [−d, 0] to dimensionless ones on [−1, 0].
///
/// The shear profile is rescaled so that ∫√ρ̃ ũ* dỹ = 1; the factor is logged
/// and recorded in the report.
pub fn nondimensionalize(
    params: &FluidParameters,
    density_of_y: &PiecewiseProfile,
    ustar_of_y: &PiecewiseProfile,
) -> Result<(ScaledProfiles, ScaleReport)> {
    params.validate()?;
    let d = params.d();
    let tol = 1e-9 * d;
    for (name, p) in [("density", density_of_y), ("shear", ustar_of_y)] {
        if (p.lo + d).abs() > tol || p.hi.abs() > tol || (p.breakpoint + params.d_plus).abs() > tol
        {
            return Err(Error::InvalidInput(format!(
                "{name} profile must live on [-d, 0] with breakpoint at -d_plus"
            )));
        }
        p.check_finite(name, 200)?;
    }
    check_positive(density_of_y, "density")?;
    check_positive(ustar_of_y, "shear")?;
    check_density(density_of_y)?;

    let rho0 = density_of_y.value(0.0, Side::Upper);
    let mass_flux_raw = flux_integral(density_of_y, ustar_of_y, -d);
    if !(mass_flux_raw > 0.0) {
        return Err(Error::InvalidInput("normalization integral is zero".into()));
    }
    let target = (params.g * rho0 * d.powi(3)).sqrt();
    let ustar_rescale = target / mass_flux_raw;
    if (ustar_rescale - 1.0).abs() > 1e-12 {
        log::info!("shear profile rescaled by {ustar_rescale:.15e} to meet the flux normalization");
    }
    let bp = -params.d_plus / d;
    let density = PiecewiseProfile::new(
        -1.0,
        bp,
        0.0,
        density_of_y.lower.rescaled(1.0 / rho0, d),
        density_of_y.upper.rescaled(1.0 / rho0, d),
    )?;
    let us = ustar_rescale / (params.g * d).sqrt();
    let ustar = PiecewiseProfile::new(
        -1.0,
        bp,
        0.0,
        ustar_of_y.lower.rescaled(us, d),
        ustar_of_y.upper.rescaled(us, d),
    )?;
    let mass_flux_per_froude = ustar_rescale * mass_flux_raw;
    let report = ScaleReport {
        d,
        g: params.g,
        c: params.c,
        rho0,
        ustar_rescale,
        mass_flux_raw,
        mass_flux_per_froude,
        f_relation_constant: params.g * rho0 * d.powi(3)
            / (mass_flux_per_froude * mass_flux_per_froude),
    };
    Ok((ScaledProfiles { density, ustar }, report))
}

const TABLE_INTERVALS: usize = 2048;

#[derive(Debug, Clone)]
struct HTable {
    p: Vec<f64>,
    h: Vec<f64>,
    hp: Vec<f64>,
    // ∫_p^0 ρ H_p dp' at the nodes, and its p-derivative (−ρ H_p)
    cum: Vec<f64>,
    cum_p: Vec<f64>,
}

fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let d = dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1;
    (v, d)
}

impl HTable {
    fn locate(&self, p: f64) -> usize {
        let n = self.p.len();
        let (a, b) = (self.p[0], self.p[n - 1]);
        let k = (((p - a) / (b - a)) * (n - 1) as f64).floor();
        (k.max(0.0) as usize).min(n - 2)
    }

    fn h(&self, p: f64) -> f64 {
        let k = self.locate(p);
        hermite(
            self.p[k],
            self.p[k + 1],
            self.h[k],
            self.h[k + 1],
            self.hp[k],
            self.hp[k + 1],
            p,
        )
        .0
    }

    fn cum(&self, p: f64) -> f64 {
        let k = self.locate(p);
        hermite(
            self.p[k],
            self.p[k + 1],
            self.cum[k],
            self.cum[k + 1],
            self.cum_p[k],
            self.cum_p[k + 1],
            p,
        )
        .0
    }
}

/// Immutable dimensionless far-field state.
#[derive(Debug, Clone)]
pub struct StratifiedBackground {
    pub p_hat: f64,
    /// d₊/d, so that H(p̂) = 1 − d₊/d.
    pub upper_fraction: f64,
    pub profiles: ScaledProfiles,
    pub scale: ScaleReport,
    lower: HTable,
    upper: HTable,
    hash: String,
}

impl StratifiedBackground {
    /// Full construction from dimensional input.
    pub fn from_dimensional(
        params: &FluidParameters,
        density_of_y: &PiecewiseProfile,
        ustar_of_y: &PiecewiseProfile,
    ) -> Result<Self> {
        let (profiles, scale) = nondimensionalize(params, density_of_y, ustar_of_y)?;
        Self::from_scaled(profiles, scale)
    }

    /// Construction from dimensionless profiles on [−1, 0] (normalization is
    /// enforced by rescaling ũ* if needed).
    pub fn from_scaled(profiles: ScaledProfiles, scale: ScaleReport) -> Result<Self> {
        let bp = profiles.density.breakpoint;
        let upper_fraction = -bp;
        let norm = flux_integral(&profiles.density, &profiles.ustar, -1.0);
        let profiles = if (norm - 1.0).abs() > 1e-13 {
            log::info!("dimensionless shear rescaled by {:.15e}", 1.0 / norm);
            ScaledProfiles {
                density: profiles.density,
                ustar: PiecewiseProfile::new(
                    -1.0,
                    bp,
                    0.0,
                    profiles.ustar.lower.rescaled(1.0 / norm, 1.0),
                    profiles.ustar.upper.rescaled(1.0 / norm, 1.0),
                )?,
            }
        } else {
            profiles
        };
        check_positive(&profiles.density, "density")?;
        check_positive(&profiles.ustar, "shear")?;
        check_density(&profiles.density)?;
        let p_hat = -flux_integral(&profiles.density, &profiles.ustar, bp);
        if !(p_hat > -1.0 && p_hat < 0.0) {
            return Err(Error::InvalidInput(format!(
                "interface streamline p̂ = {p_hat} outside (-1, 0)"
            )));
        }
        let (lower, upper) = solve_asymptotic_height(&profiles, p_hat)?;
        let h_hat = lower.h[lower.h.len() - 1];
        if (h_hat - (1.0 - upper_fraction)).abs() > 1e-6 {
            return Err(Error::Inconsistent(format!(
                "H(p̂) = {h_hat} differs from 1 - d+/d = {}",
                1.0 - upper_fraction
            )));
        }
        let h_top = upper.h[upper.h.len() - 1];
        if (h_top - 1.0).abs() > 1e-6 {
            return Err(Error::Inconsistent(format!(
                "H(0) = {h_top} differs from 1"
            )));
        }
        let mut bg = StratifiedBackground {
            p_hat,
            upper_fraction,
            profiles,
            scale,
            lower,
            upper,
            hash: String::new(),
        };
        bg.fill_cumulative();
        bg.hash = bg.compute_hash();
        Ok(bg)
    }

    /// Constant density ρ ≡ 1 and uniform shear ũ* ≡ 1 with p̂ = `p_hat`.
    pub fn uniform(p_hat: f64) -> Result<Self> {
        let density = PiecewiseProfile::constant(-1.0, p_hat, 0.0, 1.0, 1.0)?;
        let ustar = PiecewiseProfile::constant(-1.0, p_hat, 0.0, 1.0, 1.0)?;
        Self::from_scaled(ScaledProfiles { density, ustar }, ScaleReport::identity())
    }

    /// Two homogeneous layers with densities `rho_lower` / 1 and ũ* ∝ 1.
    pub fn two_layer(rho_lower: f64, d_plus_fraction: f64) -> Result<Self> {
        let bp = -d_plus_fraction;
        let density = PiecewiseProfile::constant(-1.0, bp, 0.0, rho_lower, 1.0)?;
        let ustar = PiecewiseProfile::constant(-1.0, bp, 0.0, 1.0, 1.0)?;
        Self::from_scaled(ScaledProfiles { density, ustar }, ScaleReport::identity())
    }

    fn fill_cumulative(&mut self) {
        // ∫_p^0 ρ H_p dp' = ∫_{y(p)}^0 ρ̃ dy', evaluated per table interval in y.
        let dens = self.profiles.density.clone();
        let mut run = 0.0;
        for (side, tab) in [
            (Side::Upper, &mut self.upper),
            (Side::Lower, &mut self.lower),
        ] {
            let n = tab.p.len();
            tab.cum = vec![0.0; n];
            tab.cum_p = vec![0.0; n];
            tab.cum[n - 1] = run;
            for k in (0..n - 1).rev() {
                let (y0, y1) = (tab.h[k] - 1.0, tab.h[k + 1] - 1.0);
                run += quadrature::composite_gl(|y| dens.value(y, side), y0, y1, 1, 8);
                tab.cum[k] = run;
            }
            for k in 0..n {
                let y = tab.h[k] - 1.0;
                tab.cum_p[k] = -dens.value(y, side) * tab.hp[k];
            }
        }
    }

    fn compute_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!(
            "p_hat={:?};frac={:?};",
            self.p_hat, self.upper_fraction
        ));
        for (side, a, b) in [
            (Side::Lower, -1.0, -self.upper_fraction),
            (Side::Upper, -self.upper_fraction, 0.0),
        ] {
            for k in 0..=256 {
                let y = a + (b - a) * k as f64 / 256.0;
                hasher.update(format!(
                    "{:?},{:?};",
                    self.profiles.density.value(y, side),
                    self.profiles.ustar.value(y, side)
                ));
            }
        }
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// SHA-256 of a canonical sampling of the dimensionless profiles.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn side_of(&self, p: f64) -> Side {
        if p < self.p_hat {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    fn table(&self, side: Side) -> &HTable {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    /// Asymptotic height H(p).
    pub fn h(&self, p: f64, side: Side) -> f64 {
        self.table(side).h(p)
    }

    fn sqrt_rho_u(&self, y: f64, side: Side) -> (f64, f64) {
        let r = self.profiles.density.value(y, side);
        let dr = self.profiles.density.deriv(y, side);
        let u = self.profiles.ustar.value(y, side);
        let du = self.profiles.ustar.deriv(y, side);
        let s = r.sqrt();
        (s * u, dr * u / (2.0 * s) + s * du)
    }

    /// H_p(p) = 1/(√ρ̃ ũ*) at y = H(p) − 1.
    pub fn hp(&self, p: f64, side: Side) -> f64 {
        let y = self.h(p, side) - 1.0;
        1.0 / self.sqrt_rho_u(y, side).0
    }

    /// H_pp(p) = −(√ρ̃ ũ*)'(y) H_p³.
    pub fn hpp(&self, p: f64, side: Side) -> f64 {
        let y = self.h(p, side) - 1.0;
        let (g, dg) = self.sqrt_rho_u(y, side);
        let hp = 1.0 / g;
        -dg * hp * hp * hp
    }

    /// Streamline density ρ(p).
    pub fn rho(&self, p: f64, side: Side) -> f64 {
        self.profiles.density.value(self.h(p, side) - 1.0, side)
    }

    /// ρ_p(p) = ρ̃'(y) H_p.
    pub fn rho_p(&self, p: f64, side: Side) -> f64 {
        let y = self.h(p, side) - 1.0;
        self.profiles.density.deriv(y, side) * self.hp(p, side)
    }

    /// Relative far-field speed ũ*(p) = c̃ − Ů(p).
    pub fn ustar(&self, p: f64, side: Side) -> f64 {
        self.profiles.ustar.value(self.h(p, side) - 1.0, side)
    }

    /// ⟦ρ⟧ = ρ(p̂⁺) − ρ(p̂⁻) (≤ 0 for stable stratification).
    pub fn rho_jump(&self) -> f64 {
        self.rho(self.p_hat, Side::Upper) - self.rho(self.p_hat, Side::Lower)
    }

    /// F-independent part of β(−p).
    pub fn beta_a(&self, p: f64, side: Side) -> f64 {
        let y = self.h(p, side) - 1.0;
        let u = self.profiles.ustar.value(y, side);
        let du = self.profiles.ustar.deriv(y, side);
        let hp = self.hp(p, side);
        0.5 * u * u * self.rho_p(p, side) + self.rho(p, side) * u * du * hp
    }

    /// Coefficient of 1/F² in β(−p).
    pub fn beta_b(&self, p: f64, side: Side) -> f64 {
        (self.h(p, side) - 1.0) * self.rho_p(p, side)
    }

    /// β(−p) at μ = 1/F².
    pub fn beta(&self, p: f64, side: Side, mu: f64) -> f64 {
        self.beta_a(p, side) + mu * self.beta_b(p, side)
    }

    /// ∫_p^0 ρ H_p dp'.
    pub fn rho_hp_integral(&self, p: f64, side: Side) -> f64 {
        self.table(side).cum(p)
    }

    /// Far-field Bernoulli constant E(p) at μ = 1/F².
    pub fn bernoulli_energy(&self, p: f64, side: Side, mu: f64) -> f64 {
        let u = self.ustar(p, side);
        let rho = self.rho(p, side);
        0.5 * rho * u * u + mu * self.rho_hp_integral(p, side) + mu * rho * (self.h(p, side) - 1.0)
    }

    /// max ρ and max H_p over both layers (table sampling plus endpoints).
    pub fn sup_rho_and_hp(&self) -> (f64, f64) {
        let mut rmax = 0.0f64;
        let mut hmax = 0.0f64;
        for side in [Side::Lower, Side::Upper] {
            let t = self.table(side);
            for (k, &p) in t.p.iter().enumerate() {
                rmax = rmax.max(self.rho(p, side));
                hmax = hmax.max(t.hp[k]);
            }
        }
        (rmax, hmax)
    }

    /// Report rows (p, H, H_p, ρ, β_a, β_b); the interface appears once per side.
    pub fn report_rows(&self, n_per_layer: usize) -> Vec<[f64; 6]> {
        let mut rows = Vec::new();
        for (side, a, b) in [
            (Side::Lower, -1.0, self.p_hat),
            (Side::Upper, self.p_hat, 0.0),
        ] {
            for k in 0..=n_per_layer {
                let p = a + (b - a) * k as f64 / n_per_layer as f64;
                rows.push([
                    p,
                    self.h(p, side),
                    self.hp(p, side),
                    self.rho(p, side),
                    self.beta_a(p, side),
                    self.beta_b(p, side),
                ]);
            }
        }
        rows
    }
}

/// Integrates H_p = 1/(√ρ̃ ũ*)|_{y=H−1} from H(−1) = 0 across both layers.
fn solve_asymptotic_height(profiles: &ScaledProfiles, p_hat: f64) -> Result<(HTable, HTable)> {
    let opts = OdeOptions {
        h_max: 0.01,
        ..OdeOptions::default()
    };
    let rhs = |side: Side| {
        move |_p: f64, h: &[f64; 1]| {
            let y = h[0] - 1.0;
            let g = profiles.density.value(y, side).sqrt() * profiles.ustar.value(y, side);
            [1.0 / g]
        }
    };
    let mut tables = Vec::new();
    let mut h0 = 0.0;
    for (side, a, b) in [(Side::Lower, -1.0, p_hat), (Side::Upper, p_hat, 0.0)] {
        let ps: Vec<f64> = (0..=TABLE_INTERVALS)
            .map(|k| a + (b - a) * k as f64 / TABLE_INTERVALS as f64)
            .collect();
        let f = rhs(side);
        let hs = integrate_through(f, &ps, [h0], &opts)?;
        let h: Vec<f64> = hs.iter().map(|v| v[0]).collect();
        let hp: Vec<f64> = h.iter().map(|&hv| rhs(side)(0.0, &[hv])[0]).collect();
        if hp.iter().any(|v| !(v.is_finite() && *v > 0.0)) || h.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "asymptotic height is not monotone (stagnation in the background)".into(),
            ));
        }
        h0 = h[h.len() - 1];
        tables.push(HTable {
            p: ps,
            h,
            hp,
            cum: Vec::new(),
            cum_p: Vec::new(),
        });
    }
    let upper = tables.pop().expect("two tables");
    let lower = tables.pop().expect("two tables");
    Ok((lower, upper))
}

/// Builds a dimensionless background from branch closures of ỹ.
pub fn background_from_branches(
    upper_fraction: f64,
    density: (Branch, Branch),
    ustar: (Branch, Branch),
) -> Result<StratifiedBackground> {
    let bp = -upper_fraction;
    let density = PiecewiseProfile::new(-1.0, bp, 0.0, density.0, density.1)?;
    let ustar = PiecewiseProfile::new(-1.0, bp, 0.0, ustar.0, ustar.1)?;
    StratifiedBackground::from_scaled(ScaledProfiles { density, ustar }, ScaleReport::identity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_background_is_linear() {
        let bg = StratifiedBackground::uniform(-0.5).unwrap();
        assert_relative_eq!(bg.p_hat, -0.5, epsilon = 1e-14);
        for &p in &[-1.0, -0.7, -0.5, -0.2, 0.0] {
            let side = bg.side_of(p);
            assert_relative_eq!(bg.h(p, side), p + 1.0, epsilon = 1e-12);
            assert_relative_eq!(bg.hp(p, side), 1.0, epsilon = 1e-12);
            assert_eq!(bg.hpp(p, side), 0.0);
            assert_eq!(bg.beta_a(p, side), 0.0);
            assert_eq!(bg.beta_b(p, side), 0.0);
        }
        assert_relative_eq!(
            bg.bernoulli_energy(0.0, Side::Upper, 0.7),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn constant_dimensional_input_scales_to_unity() {
        let params = FluidParameters::new(2.0, 1.0, 0.5, 0.5).unwrap();
        let rho = PiecewiseProfile::constant(-1.0, -0.5, 0.0, 1.0, 1.0).unwrap();
        let us = PiecewiseProfile::constant(-1.0, -0.5, 0.0, 1.0, 1.0).unwrap();
        let (sp, rep) = nondimensionalize(&params, &rho, &us).unwrap();
        assert_relative_eq!(sp.ustar.value(-0.3, Side::Upper), 1.0, epsilon = 1e-14);
        assert_relative_eq!(sp.density.value(-0.8, Side::Lower), 1.0, epsilon = 1e-14);
        assert_relative_eq!(rep.f_relation_constant, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_profiles() {
        let params = FluidParameters::new(1.0, 9.81, 1.0, 1.0).unwrap();
        let us = PiecewiseProfile::constant(-2.0, -1.0, 0.0, 1.0, 1.0).unwrap();
        let unstable = PiecewiseProfile::constant(-2.0, -1.0, 0.0, 1.0, 1.1).unwrap();
        assert!(nondimensionalize(&params, &unstable, &us).is_err());
        let neg = PiecewiseProfile::constant(-2.0, -1.0, 0.0, 1.0, 1.0).unwrap();
        let bad_u = PiecewiseProfile::constant(-2.0, -1.0, 0.0, 1.0, -1.0).unwrap();
        assert!(nondimensionalize(&params, &neg, &bad_u).is_err());
        assert!(FluidParameters::new(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn interface_anchor_and_monotonicity() {
        let bg = background_from_branches(
            0.3,
            (
                Branch::expr("1.03 - 0.01*y", "y").unwrap(),
                Branch::expr("1.0 - 0.005*y", "y").unwrap(),
            ),
            (
                Branch::expr("1 + 0.3*y", "y").unwrap(),
                Branch::expr("1 + 0.2*y + 0.1*y^2", "y").unwrap(),
            ),
        )
        .unwrap();
        assert_relative_eq!(bg.h(bg.p_hat, Side::Lower), 0.7, epsilon = 1e-8);
        assert_relative_eq!(bg.h(bg.p_hat, Side::Upper), 0.7, epsilon = 1e-8);
        assert_relative_eq!(bg.h(0.0, Side::Upper), 1.0, epsilon = 1e-8);
        assert!(bg.rho_jump() < 0.0);
        for k in 0..100 {
            let p = -1.0 + k as f64 / 99.0;
            let s = bg.side_of(p);
            let y = bg.h(p, s) - 1.0;
            let prod = bg.hp(p, s)
                * bg.profiles.density.value(y, s).sqrt()
                * bg.profiles.ustar.value(y, s);
            assert_relative_eq!(prod, 1.0, epsilon = 1e-13);
        }
    }
}
