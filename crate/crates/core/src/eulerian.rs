//! Back to physical variables: streamlines, interfaces, velocities and
//! pressure from a height field, plus dimensional output.

use std::io::Write;

use crate::background::{ScaleReport, StratifiedBackground};
use crate::error::{Error, Result};
use crate::fd;
use crate::grid::HeightField;
use crate::profile::{PiecewiseProfile, Side};

/// Fields on the streamline-indexed grid (x = q, one row per p node).
#[derive(Debug, Clone)]
pub struct EulerianWave {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Column length (rows per x station); node (i, j) is at `i * m + j`.
    pub m: usize,
    pub np_minus: usize,
    /// y(x, p) = h − 1.
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub u_minus_c: Vec<f64>,
    pub v: Vec<f64>,
    pub rho: Vec<f64>,
    pub f: f64,
    /// E(p) per row.
    pub energy: Vec<f64>,
    /// |∇ψ|² + 2μρη on the surface (= 2E(0)).
    pub q_eta: f64,
    /// ⟦|∇ψ|² + 2μρζ⟧ across the interface (= 2⟦E⟧).
    pub q_zeta: f64,
}

impl EulerianWave {
    fn at(&self, v: &[f64], i: usize, j: usize) -> f64 {
        v[i * self.m + j]
    }

    /// Dimensionless pressure P = E − ρ((u − c)² + v²)/2 − μρy.
    pub fn pressure(&self) -> Vec<f64> {
        let mu = 1.0 / (self.f * self.f);
        let mut out = vec![0.0; self.y.len()];
        for i in 0..self.x.len() {
            for j in 0..self.m {
                let k = i * self.m + j;
                let rho = self.rho[j];
                let u = self.u_minus_c[k];
                let v = self.v[k];
                out[k] = self.energy[j] - 0.5 * rho * (u * u + v * v) - mu * rho * self.y[k];
            }
        }
        out
    }

    /// max |P| on the free surface.
    pub fn surface_pressure_defect(&self) -> f64 {
        let p = self.pressure();
        (0..self.x.len())
            .map(|i| self.at(&p, i, self.m - 1).abs())
            .fold(0.0, f64::max)
    }

    /// max |⟦P⟧| across the interface.
    pub fn interface_pressure_jump(&self) -> f64 {
        let p = self.pressure();
        let (a, b) = (self.np_minus - 1, self.np_minus);
        (0..self.x.len())
            .map(|i| (self.at(&p, i, b) - self.at(&p, i, a)).abs())
            .fold(0.0, f64::max)
    }

    /// max over x of |½⟦|∇ψ|²⟧ − (⟦E⟧ − μ⟦ρ⟧ζ)|, with |∇ψ|² = ρ((u − c)² + v²).
    pub fn bernoulli_jump_residual(&self) -> f64 {
        let mu = 1.0 / (self.f * self.f);
        let (a, b) = (self.np_minus - 1, self.np_minus);
        let dr = self.rho[b] - self.rho[a];
        let de = self.energy[b] - self.energy[a];
        (0..self.x.len())
            .map(|i| {
                let g = |j: usize| {
                    let u = self.at(&self.u_minus_c, i, j);
                    let v = self.at(&self.v, i, j);
                    self.rho[j] * (u * u + v * v)
                };
                (0.5 * (g(b) - g(a)) - (de - mu * dr * self.zeta[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns x, eta, zeta.
    pub fn write_interfaces_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,eta,zeta")?;
        for i in 0..self.x.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e}",
                self.x[i], self.eta[i], self.zeta[i]
            )?;
        }
        Ok(())
    }

    /// CSV with one row per node: x, p, y, u_minus_c, v, P.
    pub fn write_streamlines_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let pr = self.pressure();
        writeln!(out, "x,p,y,u_minus_c,v,pressure")?;
        for i in 0..self.x.len() {
            for j in 0..self.m {
                let k = i * self.m + j;
                writeln!(
                    out,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    self.x[i], self.p[j], self.y[k], self.u_minus_c[k], self.v[k], pr[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Inverts the Dubreil-Jacotin transform for a nodal height field.
pub fn dj_inverse(field: &HeightField, bg: &StratifiedBackground) -> Result<EulerianWave> {
    let g = &field.grid;
    let m = g.col_len();
    let mu = field.mu();
    let p: Vec<f64> = (0..m).map(|j| g.p(j)).collect();
    let rho: Vec<f64> = (0..m).map(|j| bg.rho(p[j], g.side(j))).collect();
    let energy: Vec<f64> = (0..m)
        .map(|j| bg.bernoulli_energy(p[j], g.side(j), mu))
        .collect();
    let hbar: Vec<f64> = (0..m).map(|j| bg.h(p[j], g.side(j))).collect();
    let hpbar: Vec<f64> = (0..m).map(|j| bg.hp(p[j], g.side(j))).collect();
    let mut y = vec![0.0; g.len()];
    let mut u = vec![0.0; g.len()];
    let mut v = vec![0.0; g.len()];
    for i in 0..g.nq {
        for j in 0..m {
            let k = g.idx(i, j);
            let hp = hpbar[j] + fd::wp(field, i, j);
            if !(hp > 0.0) {
                return Err(Error::Stagnation(format!("h_p = {hp} at node ({i}, {j})")));
            }
            let hq = fd::wq(field, i, j);
            let s = rho[j].sqrt() * hp;
            y[k] = hbar[j] + field.w[k] - 1.0;
            u[k] = -1.0 / s;
            v[k] = -hq / s;
        }
    }
    let eta = (0..g.nq).map(|i| y[g.idx(i, m - 1)]).collect();
    let zeta = (0..g.nq)
        .map(|i| y[g.idx(i, g.upper_interface())])
        .collect();
    let (a, b) = (g.lower_interface(), g.upper_interface());
    Ok(EulerianWave {
        x: (0..g.nq).map(|i| g.q(i)).collect(),
        p,
        m,
        np_minus: g.np_minus,
        y,
        eta,
        zeta,
        u_minus_c: u,
        v,
        q_eta: 2.0 * energy[m - 1],
        q_zeta: 2.0 * (energy[b] - energy[a]),
        rho,
        f: field.f,
        energy,
    })
}

/// Dimensional counterpart of [`EulerianWave`] (SI units).
#[derive(Debug, Clone)]
pub struct DimensionalWave {
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub y: Vec<f64>,
    pub u_minus_c: Vec<f64>,
    pub v: Vec<f64>,
    pub pressure: Vec<f64>,
    pub density: Vec<f64>,
    pub m: usize,
    pub speed_scale: f64,
}

/// Lengths ×d, velocities ×F√(gd), pressure ×F²gρ₀d plus `p_atm`, density ×ρ₀.
pub fn redimensionalize(wave: &EulerianWave, scale: &ScaleReport, p_atm: f64) -> DimensionalWave {
    let vs = scale.velocity_scale(wave.f);
    let ps = scale.pressure_scale(wave.f);
    let d = scale.d;
    DimensionalWave {
        x: wave.x.iter().map(|x| x * d).collect(),
        eta: wave.eta.iter().map(|x| x * d).collect(),
        zeta: wave.zeta.iter().map(|x| x * d).collect(),
        y: wave.y.iter().map(|x| x * d).collect(),
        u_minus_c: wave.u_minus_c.iter().map(|x| x * vs).collect(),
        v: wave.v.iter().map(|x| x * vs).collect(),
        pressure: wave.pressure().iter().map(|x| x * ps + p_atm).collect(),
        density: wave.rho.iter().map(|r| r * scale.rho0).collect(),
        m: wave.m,
        speed_scale: vs,
    }
}

/// Dimensional density and relative-speed profiles on [−d, 0] at Froude
/// number `f`; at f = 1/ustar_rescale this inverts the scaling of the input.
pub fn redimensionalize_profiles(
    bg: &StratifiedBackground,
    f: f64,
) -> Result<(PiecewiseProfile, PiecewiseProfile)> {
    let s = &bg.scale;
    let d = s.d;
    let dens = &bg.profiles.density;
    let us = &bg.profiles.ustar;
    let vs = s.velocity_scale(f);
    let density = PiecewiseProfile::new(
        -d,
        dens.breakpoint * d,
        0.0,
        dens.branch(Side::Lower).rescaled(s.rho0, 1.0 / d),
        dens.branch(Side::Upper).rescaled(s.rho0, 1.0 / d),
    )?;
    let ustar = PiecewiseProfile::new(
        -d,
        us.breakpoint * d,
        0.0,
        us.branch(Side::Lower).rescaled(vs, 1.0 / d),
        us.branch(Side::Upper).rescaled(vs, 1.0 / d),
    )?;
    Ok((density, ustar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::FluidParameters;
    use crate::grid::SlitGrid;

    #[test]
    fn laminar_uniform_flow() {
        let bg = StratifiedBackground::uniform(-0.4).unwrap();
        let g = SlitGrid::new(5.0, 9, 9, 9, -0.4).unwrap();
        let f = HeightField::zeros(g.clone(), 1.2, bg.hash());
        let w = dj_inverse(&f, &bg).unwrap();
        for i in 0..g.nq {
            assert!(w.eta[i].abs() < 1e-12);
            assert!((w.zeta[i] + 0.4).abs() < 1e-12);
        }
        assert!(w.u_minus_c.iter().all(|u| (u + 1.0).abs() < 1e-12));
        assert!(w.v.iter().all(|v| *v == 0.0));
        // hydrostatic: P = −y/F²
        let p = w.pressure();
        for (k, pk) in p.iter().enumerate() {
            assert!((pk + w.y[k] / 1.44).abs() < 1e-12);
        }
        assert!(w.surface_pressure_defect() < 1e-12);
        assert!(w.interface_pressure_jump() < 1e-12);
        assert!(w.bernoulli_jump_residual() < 1e-12);
    }

    #[test]
    fn profile_roundtrip() {
        let params = FluidParameters::new(1.0, 9.81, 40.0, 60.0).unwrap();
        let rho = PiecewiseProfile::new(
            -100.0,
            -40.0,
            0.0,
            crate::profile::Branch::expr("1030 - 0.01*y", "y").unwrap(),
            crate::profile::Branch::expr("1020", "y").unwrap(),
        )
        .unwrap();
        let us = PiecewiseProfile::new(
            -100.0,
            -40.0,
            0.0,
            crate::profile::Branch::expr("3 + 0.01*y", "y").unwrap(),
            crate::profile::Branch::expr("3.4 + 0.005*y", "y").unwrap(),
        )
        .unwrap();
        let bg = StratifiedBackground::from_dimensional(&params, &rho, &us).unwrap();
        let (r2, u2) = redimensionalize_profiles(&bg, 1.0 / bg.scale.ustar_rescale).unwrap();
        for k in 0..=50 {
            let y = -100.0 + 2.0 * k as f64;
            let y = if (y + 40.0).abs() < 1e-9 { -40.1 } else { y };
            assert!((r2.at(y) - rho.at(y)).abs() < 1e-10 * 1030.0);
            assert!((u2.at(y) - us.at(y)).abs() < 1e-10 * 3.0);
        }
    }
}
