//! Second-order nodal derivatives of a height field, taken within one layer
//! (never across p̂). Centered where possible, one-sided at layer ends and at
//! the right edge; the half grid is mirrored evenly at q = 0.

use crate::grid::{HeightField, SlitGrid};

fn layer_bounds(g: &SlitGrid, j: usize) -> (usize, usize) {
    let r = g.layer_rows(g.side(j));
    (r.start, r.end - 1)
}

/// Value at column `i` (may be −1 on the half grid via mirroring).
fn val(f: &HeightField, i: isize, j: usize) -> f64 {
    let i = if i < 0 { (-i) as usize } else { i as usize };
    f.at(i, j)
}

pub fn wp(f: &HeightField, i: usize, j: usize) -> f64 {
    let g = &f.grid;
    let (lo, hi) = layer_bounds(g, j);
    let h = g.dp(g.side(j));
    if j == lo {
        (-3.0 * f.at(i, j) + 4.0 * f.at(i, j + 1) - f.at(i, j + 2)) / (2.0 * h)
    } else if j == hi {
        (3.0 * f.at(i, j) - 4.0 * f.at(i, j - 1) + f.at(i, j - 2)) / (2.0 * h)
    } else {
        (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h)
    }
}

pub fn wpp(f: &HeightField, i: usize, j: usize) -> f64 {
    let g = &f.grid;
    let (lo, hi) = layer_bounds(g, j);
    let h = g.dp(g.side(j));
    let c = |a: usize, b: usize, d: usize, e: usize| {
        (2.0 * f.at(i, a) - 5.0 * f.at(i, b) + 4.0 * f.at(i, d) - f.at(i, e)) / (h * h)
    };
    if j == lo {
        c(j, j + 1, j + 2, j + 3)
    } else if j == hi {
        c(j, j - 1, j - 2, j - 3)
    } else {
        (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) / (h * h)
    }
}

pub fn wq(f: &HeightField, i: usize, j: usize) -> f64 {
    let g = &f.grid;
    let h = g.dq();
    let ii = i as isize;
    if i == g.nq - 1 {
        (3.0 * f.at(i, j) - 4.0 * f.at(i - 1, j) + f.at(i - 2, j)) / (2.0 * h)
    } else if i == 0 && g.full {
        (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j)) / (2.0 * h)
    } else {
        (val(f, ii + 1, j) - val(f, ii - 1, j)) / (2.0 * h)
    }
}

pub fn wqq(f: &HeightField, i: usize, j: usize) -> f64 {
    let g = &f.grid;
    let h = g.dq();
    let ii = i as isize;
    if i == g.nq - 1 {
        (2.0 * f.at(i, j) - 5.0 * f.at(i - 1, j) + 4.0 * f.at(i - 2, j) - f.at(i - 3, j)) / (h * h)
    } else if i == 0 && g.full {
        (2.0 * f.at(0, j) - 5.0 * f.at(1, j) + 4.0 * f.at(2, j) - f.at(3, j)) / (h * h)
    } else {
        (val(f, ii + 1, j) - 2.0 * f.at(i, j) + val(f, ii - 1, j)) / (h * h)
    }
}

/// Mixed derivative as the q-difference of `wp`.
pub fn wqp(f: &HeightField, i: usize, j: usize) -> f64 {
    let g = &f.grid;
    let h = g.dq();
    let col = |k: isize| wp(f, k.unsigned_abs(), j);
    let ii = i as isize;
    if i == g.nq - 1 {
        (3.0 * col(ii) - 4.0 * col(ii - 1) + col(ii - 2)) / (2.0 * h)
    } else if i == 0 && g.full {
        (-3.0 * col(0) + 4.0 * col(1) - col(2)) / (2.0 * h)
    } else if i == 0 {
        0.0
    } else {
        (col(ii + 1) - col(ii - 1)) / (2.0 * h)
    }
}

/// Discrete C² norm: the sum over derivative orders ≤ 2 of nodal sup norms,
/// each taken layer by layer.
pub fn c2_norm(f: &HeightField) -> f64 {
    let g = &f.grid;
    let mut m = [0.0f64; 6];
    for i in 0..g.nq {
        for j in 0..g.col_len() {
            let d = [
                f.at(i, j),
                wq(f, i, j),
                wp(f, i, j),
                wqq(f, i, j),
                wqp(f, i, j),
                wpp(f, i, j),
            ];
            for (a, b) in m.iter_mut().zip(d) {
                *a = a.max(b.abs());
            }
        }
    }
    m.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_derivatives_are_exact() {
        let g = SlitGrid::new(4.0, 9, 9, 9, -0.5).unwrap();
        let mut f = HeightField::zeros(g.clone(), 1.0, "");
        for i in 0..g.nq {
            for j in 0..g.col_len() {
                let (q, p) = (g.q(i), g.p(j));
                *f.at_mut(i, j) = q * q + 3.0 * p * p + q * q * p;
            }
        }
        for i in 1..g.nq {
            for j in 0..g.col_len() {
                let (q, p) = (g.q(i), g.p(j));
                assert!((wp(&f, i, j) - (6.0 * p + q * q)).abs() < 1e-10);
                assert!((wpp(&f, i, j) - 6.0).abs() < 1e-8);
                assert!((wq(&f, i, j) - (2.0 * q + 2.0 * q * p)).abs() < 1e-10);
                assert!((wqq(&f, i, j) - (2.0 + 2.0 * p)).abs() < 1e-9);
                assert!((wqp(&f, i, j) - 2.0 * q).abs() < 1e-9);
            }
        }
    }
}
