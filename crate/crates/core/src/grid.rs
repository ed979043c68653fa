//! Truncated slitted strip and the nodal height field living on it.

use crate::error::{Error, Result};
use crate::profile::Side;

/// Tensor grid on [q₀, L] × ([−1, p̂] ∪ [p̂, 0]) with the interface row stored
/// twice. Node (i, j) has flat index `i * col_len() + j`; j runs from the bed
/// (j = 0) through the lower interface copy (j = np_minus − 1), the upper
/// interface copy (j = np_minus) and up to the surface (j = col_len() − 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SlitGrid {
    pub l: f64,
    pub nq: usize,
    pub np_minus: usize,
    pub np_plus: usize,
    pub p_hat: f64,
    /// Symmetric half-domain q ∈ [0, L] (evenness at q = 0) when false;
    /// q ∈ [−L, L] with Dirichlet conditions at both ends when true.
    pub full: bool,
}

impl SlitGrid {
    pub fn new(l: f64, nq: usize, np_minus: usize, np_plus: usize, p_hat: f64) -> Result<Self> {
        Self::build(l, nq, np_minus, np_plus, p_hat, false)
    }

    pub fn full_domain(
        l: f64,
        nq: usize,
        np_minus: usize,
        np_plus: usize,
        p_hat: f64,
    ) -> Result<Self> {
        Self::build(l, nq, np_minus, np_plus, p_hat, true)
    }

    fn build(
        l: f64,
        nq: usize,
        np_minus: usize,
        np_plus: usize,
        p_hat: f64,
        full: bool,
    ) -> Result<Self> {
        if nq < 8 || np_minus < 8 || np_plus < 8 {
            return Err(Error::InvalidInput(format!(
                "grid sizes must be at least 8 (got nq = {nq}, np- = {np_minus}, np+ = {np_plus})"
            )));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half-length L = {l} must be positive"
            )));
        }
        if !(p_hat > -1.0 && p_hat < 0.0) {
            return Err(Error::InvalidInput(format!("p̂ = {p_hat} outside (-1, 0)")));
        }
        Ok(SlitGrid {
            l,
            nq,
            np_minus,
            np_plus,
            p_hat,
            full,
        })
    }

    pub fn col_len(&self) -> usize {
        self.np_minus + self.np_plus
    }

    pub fn len(&self) -> usize {
        self.nq * self.col_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.col_len() + j
    }

    pub fn q0(&self) -> f64 {
        if self.full {
            -self.l
        } else {
            0.0
        }
    }

    pub fn dq(&self) -> f64 {
        (self.l - self.q0()) / (self.nq - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        if i == self.nq - 1 {
            self.l
        } else {
            self.q0() + i as f64 * self.dq()
        }
    }

    pub fn dp(&self, side: Side) -> f64 {
        match side {
            Side::Lower => (self.p_hat + 1.0) / (self.np_minus - 1) as f64,
            Side::Upper => -self.p_hat / (self.np_plus - 1) as f64,
        }
    }

    pub fn side(&self, j: usize) -> Side {
        if j < self.np_minus {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    /// p coordinate of row j (the interface value for both copies).
    pub fn p(&self, j: usize) -> f64 {
        if j < self.np_minus {
            if j == self.np_minus - 1 {
                self.p_hat
            } else {
                -1.0 + j as f64 * self.dp(Side::Lower)
            }
        } else {
            let k = j - self.np_minus;
            if k == self.np_plus - 1 {
                0.0
            } else {
                self.p_hat + k as f64 * self.dp(Side::Upper)
            }
        }
    }

    pub fn top(&self) -> usize {
        self.col_len() - 1
    }

    pub fn lower_interface(&self) -> usize {
        self.np_minus - 1
    }

    pub fn upper_interface(&self) -> usize {
        self.np_minus
    }

    /// Rows of one layer, bed/interface/surface included.
    pub fn layer_rows(&self, side: Side) -> std::ops::Range<usize> {
        match side {
            Side::Lower => 0..self.np_minus,
            Side::Upper => self.np_minus..self.col_len(),
        }
    }

    /// Same rectangle, every spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> SlitGrid {
        SlitGrid {
            nq: (self.nq - 1) * factor + 1,
            np_minus: (self.np_minus - 1) * factor + 1,
            np_plus: (self.np_plus - 1) * factor + 1,
            ..self.clone()
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "L={:?} nq={} np_minus={} np_plus={} p_hat={:?} full={}",
            self.l, self.nq, self.np_minus, self.np_plus, self.p_hat, self.full
        )
    }
}

/// Nodal deviation w = h − H together with the Froude number.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub grid: SlitGrid,
    pub w: Vec<f64>,
    pub f: f64,
    /// Bifurcation parameter the field was seeded from, if any.
    pub eps: Option<f64>,
    pub bg_hash: String,
}

impl HeightField {
    pub fn zeros(grid: SlitGrid, f: f64, bg_hash: &str) -> Self {
        HeightField {
            w: vec![0.0; grid.len()],
            grid,
            f,
            eps: None,
            bg_hash: bg_hash.to_string(),
        }
    }

    pub fn mu(&self) -> f64 {
        1.0 / (self.f * self.f)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.w[self.grid.idx(i, j)]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.grid.idx(i, j);
        &mut self.w[k]
    }

    /// Interface amplitude v(0) = w(q₀ or crest, p̂).
    pub fn crest_interface(&self) -> f64 {
        self.at(self.crest_column(), self.grid.upper_interface())
    }

    /// Column of q = 0 (first column on the half grid, the middle one on a full grid).
    pub fn crest_column(&self) -> usize {
        if self.grid.full {
            (self.grid.nq - 1) / 2
        } else {
            0
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.w.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest mismatch between the two stored interface rows.
    pub fn interface_mismatch(&self) -> f64 {
        let (a, b) = (self.grid.lower_interface(), self.grid.upper_interface());
        (0..self.grid.nq)
            .map(|i| (self.at(i, a) - self.at(i, b)).abs())
            .fold(0.0, f64::max)
    }

    /// Mirror a half-grid field to the full domain [−L, L].
    pub fn mirrored(&self) -> Result<HeightField> {
        if self.grid.full {
            return Err(Error::InvalidInput(
                "field is already on the full domain".into(),
            ));
        }
        let g = &self.grid;
        let full = SlitGrid::full_domain(g.l, 2 * g.nq - 1, g.np_minus, g.np_plus, g.p_hat)?;
        let m = g.col_len();
        let mut w = vec![0.0; full.len()];
        for i in 0..full.nq {
            let src = (i as isize - (g.nq as isize - 1)).unsigned_abs();
            w[i * m..(i + 1) * m].copy_from_slice(&self.w[src * m..(src + 1) * m]);
        }
        Ok(HeightField {
            grid: full,
            w,
            f: self.f,
            eps: self.eps,
            bg_hash: self.bg_hash.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_and_refinement() {
        let g = SlitGrid::new(10.0, 11, 9, 17, -0.4).unwrap();
        assert_eq!(g.col_len(), 26);
        assert_eq!(g.p(0), -1.0);
        assert_eq!(g.p(8), -0.4);
        assert_eq!(g.p(9), -0.4);
        assert_eq!(g.p(25), 0.0);
        assert!((g.p(4) - (-0.7)).abs() < 1e-15);
        let r = g.refined(2);
        assert_eq!((r.nq, r.np_minus, r.np_plus), (21, 17, 33));
        assert_eq!(r.q(20), 10.0);
        assert!(SlitGrid::new(1.0, 7, 9, 9, -0.5).is_err());
    }

    #[test]
    fn mirror_is_even() {
        let g = SlitGrid::new(5.0, 8, 8, 8, -0.5).unwrap();
        let mut f = HeightField::zeros(g, 1.1, "");
        for i in 0..8 {
            for j in 0..16 {
                *f.at_mut(i, j) = (i * 100 + j) as f64;
            }
        }
        let m = f.mirrored().unwrap();
        assert_eq!(m.grid.nq, 15);
        for i in 0..15 {
            assert_eq!(m.at(i, 3), m.at(14 - i, 3));
        }
        assert_eq!(m.crest_interface(), f.crest_interface());
    }
}
