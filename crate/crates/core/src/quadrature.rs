//! Gauss–Legendre rules and composite/adaptive quadrature on intervals.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre with `panels` equal panels of `order` points.
pub fn composite_gl<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        sum += 0.5 * h * s;
    }
    sum
}

/// Composite Gauss–Legendre, doubling the panel count until two successive
/// values agree to `rtol` (relative) or `atol` (absolute).
pub fn gl_doubling<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
) -> (f64, usize) {
    let mut panels = 4;
    let mut prev = composite_gl(&mut f, a, b, panels, 10);
    loop {
        panels *= 2;
        let cur = composite_gl(&mut f, a, b, panels, 10);
        if (cur - prev).abs() <= rtol * cur.abs() + atol || panels >= 1 << 14 {
            return (cur, panels);
        }
        prev = cur;
    }
}

/// Adaptive Gauss–Legendre (7 vs 15 point comparison) to absolute tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    thread_local! {
        static RULES: ((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)) = (gauss_legendre(7), gauss_legendre(15));
    }
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, r: &(Vec<f64>, Vec<f64>)) -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        r.0.iter()
            .zip(&r.1)
            .map(|(x, w)| w * f(m + h * x))
            .sum::<f64>()
            * h
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
        rules: &((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)),
    ) -> f64 {
        let lo = rule(f, a, b, &rules.0);
        let hi = rule(f, a, b, &rules.1);
        if (hi - lo).abs() <= tol || depth > 40 {
            return hi;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1, rules) + rec(f, m, b, 0.5 * tol, depth + 1, rules)
    }
    RULES.with(|r| rec(f, a, b, tol, 0, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let s: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.powi(deg as i32 - 1))
                .sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert_relative_eq!(s, exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn adaptive_and_doubling() {
        let exact = 2.0f64.exp() - 1.0;
        assert_relative_eq!(
            adaptive(&|x: f64| x.exp(), 0.0, 2.0, 1e-13),
            exact,
            max_relative = 1e-13
        );
        let (v, _) = gl_doubling(|x| x.exp(), 0.0, 2.0, 1e-14, 0.0);
        assert_relative_eq!(v, exact, max_relative = 1e-13);
        let sq = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-12);
        assert_relative_eq!(sq, 2.0 / 3.0, epsilon = 1e-11);
    }
}
