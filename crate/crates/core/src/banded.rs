//! Banded matrices with an LU factorization using partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout in row-major form: each row keeps
//! the `kl + ku` entries around the diagonal plus `kl` extra slots on the
//! right for pivot fill-in.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        // column j of row i sits at offset j + kl − i in the row
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry (i, j); panics if outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j));
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for j in j0..=j1 {
                s += self.data[self.slot(i, j)] * x[j];
            }
            *yi = s;
        }
        y
    }

    pub fn mul_vec_transposed(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            for j in j0..=j1 {
                y[j] += self.data[self.slot(i, j)] * xi;
            }
        }
        y
    }

    /// LU factorization with row partial pivoting. Consumes the matrix.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku, w) = (self.kl, self.ku, self.width);
        let kv = kl + ku;
        let mut piv = vec![0usize; n];
        let mut min_piv = f64::INFINITY;
        let mut max_piv = 0.0f64;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            // pivot search in column k
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[i * w + (k + kl - i)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem(format!(
                    "zero pivot in column {k} of {n}"
                )));
            }
            min_piv = min_piv.min(best);
            max_piv = max_piv.max(best);
            let jmax = (k + kv).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.slot(k, j);
                    let b = p * w + (j + kl - p);
                    self.data.swap(a, b);
                }
            }
            let dkk = self.data[self.slot(k, k)];
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let krow = &head[k * w..];
            for i in k + 1..=last {
                let row = &mut tail[(i - k - 1) * w..(i - k) * w];
                let lik = row[k + kl - i] / dkk;
                row[k + kl - i] = lik;
                if lik != 0.0 {
                    let ks = kl + 1; // column k+1 in row k
                    let is = k + 1 + kl - i; // column k+1 in row i
                    let len = jmax - k;
                    let src = &krow[ks..ks + len];
                    let dst = &mut row[is..is + len];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d -= lik * s;
                    }
                }
            }
        }
        Ok(BandLu {
            m: self,
            piv,
            pivot_ratio: min_piv / max_piv,
        })
    }
}

/// Factorization produced by [`BandMatrix::factor`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
    /// Smallest over largest pivot magnitude; a crude conditioning hint.
    pub pivot_ratio: f64,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let m = &self.m;
        let (n, kl, kv) = (m.n, m.kl, m.kl + m.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= m.data[m.slot(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + kv).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= m.data[m.slot(k, j)] * b[j];
            }
            b[k] = s / m.data[m.slot(k, k)];
        }
    }

    /// Solves Aᵀ x = b in place.
    pub fn solve_transposed(&self, b: &mut [f64]) {
        let m = &self.m;
        let (n, kl, kv) = (m.n, m.kl, m.kl + m.ku);
        // Uᵀ y = b
        for k in 0..n {
            let mut s = b[k];
            for i in k.saturating_sub(kv)..k {
                s -= m.data[m.slot(i, k)] * b[i];
            }
            b[k] = s / m.data[m.slot(k, k)];
        }
        // Lᵀ then the permutation, in reverse order
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                s -= m.data[m.slot(i, k)] * b[i];
            }
            b[k] = s;
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }

    /// log|det A| and the sign of det A.
    pub fn log_det(&self) -> (f64, f64) {
        let mut sign = 1.0;
        let mut acc = 0.0;
        for k in 0..self.m.n {
            let d = self.m.data[self.m.slot(k, k)];
            if d < 0.0 {
                sign = -sign;
            }
            if self.piv[k] != k {
                sign = -sign;
            }
            acc += d.abs().ln();
        }
        (acc, sign)
    }

    /// Estimate of the smallest singular value by inverse iteration on AᵀA.
    pub fn min_singular_value(&self, iterations: usize) -> f64 {
        let n = self.n();
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        let mut sigma = 0.0;
        for _ in 0..iterations {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            let mut y = x.clone();
            self.solve_transposed(&mut y);
            self.solve(&mut y);
            // y = (AᵀA)⁻¹ x, Rayleigh quotient of the inverse
            let ray: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            sigma = 1.0 / ray.abs().sqrt();
            x = y;
        }
        sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> (BandMatrix, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal to force pivoting
                let v: f64 = rng.gen_range(-1.0..1.0) * if i == j { 0.01 } else { 1.0 };
                a.set(i, j, v);
                dense[i][j] = v;
            }
        }
        (a, dense)
    }

    #[test]
    fn solve_matches_dense_product() {
        for (n, kl, ku, seed) in [(30, 3, 2, 1), (50, 5, 5, 2), (17, 1, 4, 3), (40, 7, 1, 4)] {
            let (a, dense) = random_band(n, kl, ku, seed);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| dense[i][j] * x[j]).sum())
                .collect();
            assert_eq!(a.mul_vec(&x).len(), n);
            let lu = a.clone().factor().unwrap();
            let mut s = b.clone();
            lu.solve(&mut s);
            for i in 0..n {
                assert!(
                    (s[i] - x[i]).abs() < 1e-8,
                    "n={n} i={i} {} vs {}",
                    s[i],
                    x[i]
                );
            }
            let bt: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|i| dense[i][j] * x[i]).sum())
                .collect();
            assert_eq!(a.mul_vec_transposed(&x).len(), n);
            let mut st = bt.clone();
            lu.solve_transposed(&mut st);
            for i in 0..n {
                assert!((st[i] - x[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn determinant_and_singular_value_of_diagonal() {
        let mut a = BandMatrix::zeros(4, 1, 1);
        for (i, d) in [2.0, -3.0, 0.5, 4.0].iter().enumerate() {
            a.set(i, i, *d);
        }
        let lu = a.factor().unwrap();
        let (ld, s) = lu.log_det();
        assert!((ld - 12f64.ln()).abs() < 1e-14);
        assert_eq!(s, -1.0);
        assert!((lu.min_singular_value(30) - 0.5).abs() < 1e-10);
    }
}
