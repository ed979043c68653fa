//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use stratwave::background::{background_from_branches, StratifiedBackground};
use stratwave::profile::{Branch, Side};

/// Two layers with linear stratification inside each, a density drop of 0.02
/// at the interface and a sheared current.
pub fn stratified_two_layer() -> StratifiedBackground {
    background_from_branches(
        0.4,
        (
            Branch::expr("1.024 - 0.02*(y+0.4)", "y").unwrap(),
            Branch::expr("1.0 - 0.01*y", "y").unwrap(),
        ),
        (
            Branch::expr("1 + 0.2*y", "y").unwrap(),
            Branch::expr("1 + 0.2*y", "y").unwrap(),
        ),
    )
    .unwrap()
}

/// Background used for the manufactured-solution runs.
pub fn mms_background() -> StratifiedBackground {
    background_from_branches(
        0.4,
        (
            Branch::expr("1.05 - 0.02*y", "y").unwrap(),
            Branch::expr("1.0 - 0.01*y", "y").unwrap(),
        ),
        (
            Branch::expr("1 + 0.2*y", "y").unwrap(),
            Branch::expr("1 + 0.1*y", "y").unwrap(),
        ),
    )
    .unwrap()
}

/// Symmetric tridiagonal pencil K − μM from piecewise-linear elements for the
/// weak form
///   ∫ φ'ψ'/H_p³ = μ [ρ(0)φψ(0) − ⟦ρ⟧φψ(p̂) − ∫ ρ_p φψ],   φ(−1) = 0,
/// with `n` equal elements per layer. Unknowns are the nodes above the bed.
pub struct Pencil {
    pub k_diag: Vec<f64>,
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

pub fn fem_pencil(bg: &StratifiedBackground, n: usize) -> Pencil {
    let ph = bg.p_hat;
    // node coordinates (with the bed node at index 0)
    let mut nodes = Vec::with_capacity(2 * n + 1);
    for k in 0..=n {
        nodes.push(-1.0 + (ph + 1.0) * k as f64 / n as f64);
    }
    for k in 1..=n {
        nodes.push(ph - ph * k as f64 / n as f64);
    }
    let total = nodes.len();
    let mut kd = vec![0.0; total];
    let mut ko = vec![0.0; total - 1];
    let mut md = vec![0.0; total];
    let mut mo = vec![0.0; total - 1];
    for e in 0..total - 1 {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let side = if e < n { Side::Lower } else { Side::Upper };
        let h = b - a;
        let (mut stiff, mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0, 0.0);
        for (x, wt) in GAUSS3 {
            let p = 0.5 * (a + b) + 0.5 * h * x;
            let wt = 0.5 * h * wt;
            let hp = bg.hp(p, side);
            stiff += wt / (hp * hp * hp);
            let r = -bg.rho_p(p, side);
            let (n0, n1) = ((b - p) / h, (p - a) / h);
            m00 += wt * r * n0 * n0;
            m01 += wt * r * n0 * n1;
            m11 += wt * r * n1 * n1;
        }
        stiff /= h * h;
        kd[e] += stiff;
        kd[e + 1] += stiff;
        ko[e] -= stiff;
        md[e] += m00;
        md[e + 1] += m11;
        mo[e] += m01;
    }
    md[n] -= bg.rho_jump();
    md[total - 1] += bg.rho(0.0, Side::Upper);
    // drop the bed node
    Pencil {
        k_diag: kd[1..].to_vec(),
        k_off: ko[1..].to_vec(),
        m_diag: md[1..].to_vec(),
        m_off: mo[1..].to_vec(),
    }
}

impl Pencil {
    /// Negative pivots of the LDLᵀ factorization of K − μM, which by
    /// Sylvester's law equals the number of pencil eigenvalues below μ.
    pub fn count_below(&self, mu: f64) -> usize {
        let n = self.k_diag.len();
        let mut count = 0;
        let mut d = 0.0f64;
        for i in 0..n {
            let a = self.k_diag[i] - mu * self.m_diag[i];
            d = if i == 0 {
                a
            } else {
                let b = self.k_off[i - 1] - mu * self.m_off[i - 1];
                let prev = if d == 0.0 {
                    f64::EPSILON * b.abs().max(1.0)
                } else {
                    d
                };
                a - b * b / prev
            };
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue by bisection on the inertia count.
    pub fn lowest(&self) -> f64 {
        let mut hi = 1.0;
        while self.count_below(hi) == 0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Smallest eigenvalue via a dense symmetric eigensolve of L⁻¹ M L⁻ᵀ
    /// (K = LLᵀ); its largest eigenvalue is 1/μ_min.
    pub fn lowest_dense(&self) -> f64 {
        use nalgebra::DMatrix;
        let n = self.k_diag.len();
        let mut k = DMatrix::<f64>::zeros(n, n);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.k_diag[i];
            m[(i, i)] = self.m_diag[i];
            if i + 1 < n {
                k[(i, i + 1)] = self.k_off[i];
                k[(i + 1, i)] = self.k_off[i];
                m[(i, i + 1)] = self.m_off[i];
                m[(i + 1, i)] = self.m_off[i];
            }
        }
        let l = k.cholesky().expect("stiffness is SPD").l();
        let li = l.try_inverse().unwrap();
        let c = &li * m * li.transpose();
        let c = 0.5 * (&c + c.transpose());
        let top = c
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        1.0 / top
    }
}

/// Two-level Richardson extrapolation of the FE critical value from
/// n, 2n, 4n elements per layer (error expansion in h², h⁴).
pub fn fem_mu_cr_richardson(bg: &StratifiedBackground, n: usize) -> (f64, [f64; 3]) {
    let m = [
        fem_pencil(bg, n).lowest(),
        fem_pencil(bg, 2 * n).lowest(),
        fem_pencil(bg, 4 * n).lowest(),
    ];
    let r1 = (4.0 * m[1] - m[0]) / 3.0;
    let r2 = (4.0 * m[2] - m[1]) / 3.0;
    ((16.0 * r2 - r1) / 15.0, m)
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn order(a: f64, b: f64) -> f64 {
    (a / b).log2()
}
