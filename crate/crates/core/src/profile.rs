//! Piecewise-smooth scalar profiles with a single interior breakpoint.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Which one-sided branch to use at (or near) the breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// Not-a-knot cubic spline through `(x_k, y_k)`, fourth-order accurate.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::InvalidInput("spline: x and y lengths differ".into()));
        }
        if n < 4 {
            return Err(Error::InvalidInput(
                "spline: need at least 4 samples".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "spline: abscissae must increase strictly".into(),
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("spline: non-finite sample".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        // Unknowns m_1..m_{n-2}; the not-a-knot conditions express m_0 and
        // m_{n-1} through their neighbours and are substituted into the first
        // and last interior rows.
        let k = n - 2;
        let mut a = vec![0.0; k];
        let mut b = vec![0.0; k];
        let mut c = vec![0.0; k];
        let mut r = vec![0.0; k];
        for i in 1..n - 1 {
            let j = i - 1;
            a[j] = h[i - 1];
            b[j] = 2.0 * (h[i - 1] + h[i]);
            c[j] = h[i];
            r[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        b[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
        c[0] = (h1 * h1 - h0 * h0) / h1;
        a[0] = 0.0;
        let (hm2, hm1) = (h[n - 3], h[n - 2]);
        if k == 1 {
            return Err(Error::InvalidInput(
                "spline: need at least 4 samples".into(),
            ));
        }
        a[k - 1] = (hm2 * hm2 - hm1 * hm1) / hm2;
        b[k - 1] = (hm2 + hm1) * (2.0 * hm2 + hm1) / hm2;
        c[k - 1] = 0.0;
        let mut cp = vec![0.0; k];
        let mut rp = vec![0.0; k];
        cp[0] = c[0] / b[0];
        rp[0] = r[0] / b[0];
        for j in 1..k {
            let den = b[j] - a[j] * cp[j - 1];
            cp[j] = c[j] / den;
            rp[j] = (r[j] - a[j] * rp[j - 1]) / den;
        }
        let mut m = vec![0.0; n];
        m[k] = rp[k - 1];
        for j in (0..k - 1).rev() {
            m[j + 1] = rp[j] - cp[j] * m[j + 2];
        }
        m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
        m[n - 1] = ((hm2 + hm1) * m[n - 2] - hm1 * m[n - 3]) / hm2;
        Ok(CubicSpline { x, y, m })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Value and first derivative.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h
            + (-(3.0 * a * a - 1.0) * mi + (3.0 * b * b - 1.0) * mj) * h / 6.0;
        (v, d)
    }
}

/// A smooth scalar function on a closed sub-interval.
#[derive(Clone)]
pub enum Branch {
    Constant(f64),
    Expr {
        f: Expr,
        df: Expr,
        source: String,
    },
    Table(CubicSpline),
    /// Callable returning (value, derivative).
    Closure(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Constant(c) => write!(f, "Constant({c})"),
            Branch::Expr { source, .. } => write!(f, "Expr({source})"),
            Branch::Table(s) => write!(f, "Table({} samples)", s.x.len()),
            Branch::Closure(_) => write!(f, "Closure"),
        }
    }
}

impl Branch {
    pub fn expr(src: &str, var: &str) -> Result<Branch> {
        let f = Expr::parse(src, var)?;
        let df = f.derivative();
        Ok(Branch::Expr {
            f,
            df,
            source: src.to_string(),
        })
    }

    pub fn closure<F>(f: F) -> Branch
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Branch::Closure(Arc::new(f))
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Branch::Constant(c) => *c,
            Branch::Expr { f, .. } => f.eval(x),
            Branch::Table(s) => s.eval(x).0,
            Branch::Closure(g) => g(x).0,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            Branch::Constant(_) => 0.0,
            Branch::Expr { df, .. } => df.eval(x),
            Branch::Table(s) => s.eval(x).1,
            Branch::Closure(g) => g(x).1,
        }
    }

    /// Textual description used for content hashing.
    pub fn describe(&self) -> String {
        match self {
            Branch::Constant(c) => format!("const:{c:?}"),
            Branch::Expr { source, .. } => format!("expr:{source}"),
            Branch::Table(s) => {
                let mut out = String::from("table:");
                for (x, y) in s.x.iter().zip(&s.y) {
                    out.push_str(&format!("{x:?},{y:?};"));
                }
                out
            }
            Branch::Closure(_) => "closure".to_string(),
        }
    }

    /// Branch scaled by `a` in value and `b` in argument: x -> a f(b x).
    pub fn rescaled(&self, a: f64, b: f64) -> Branch {
        match self {
            Branch::Constant(c) => Branch::Constant(a * c),
            _ => {
                let inner = self.clone();
                Branch::closure(move |x| (a * inner.value(b * x), a * b * inner.deriv(b * x)))
            }
        }
    }
}

/// Profile on `[lo, hi]` made of two smooth branches meeting at `breakpoint`.
#[derive(Debug, Clone)]
pub struct PiecewiseProfile {
    pub lo: f64,
    pub hi: f64,
    pub breakpoint: f64,
    pub lower: Branch,
    pub upper: Branch,
}

impl PiecewiseProfile {
    pub fn new(lo: f64, breakpoint: f64, hi: f64, lower: Branch, upper: Branch) -> Result<Self> {
        if !(lo < breakpoint && breakpoint < hi) {
            return Err(Error::InvalidInput(format!(
                "breakpoint {breakpoint} not inside ({lo}, {hi})"
            )));
        }
        Ok(PiecewiseProfile {
            lo,
            hi,
            breakpoint,
            lower,
            upper,
        })
    }

    pub fn constant(lo: f64, breakpoint: f64, hi: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::new(
            lo,
            breakpoint,
            hi,
            Branch::Constant(lower),
            Branch::Constant(upper),
        )
    }

    pub fn side_of(&self, x: f64) -> Side {
        if x < self.breakpoint {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    pub fn branch(&self, side: Side) -> &Branch {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    pub fn value(&self, x: f64, side: Side) -> f64 {
        self.branch(side).value(x)
    }

    pub fn deriv(&self, x: f64, side: Side) -> f64 {
        self.branch(side).deriv(x)
    }

    /// Value with the branch picked from the position (upper at the breakpoint).
    pub fn at(&self, x: f64) -> f64 {
        self.value(x, self.side_of(x))
    }

    /// Jump upper minus lower at the breakpoint.
    pub fn jump(&self) -> f64 {
        self.upper.value(self.breakpoint) - self.lower.value(self.breakpoint)
    }

    pub fn describe(&self) -> String {
        format!(
            "[{:?},{:?},{:?}] lower={} upper={}",
            self.lo,
            self.breakpoint,
            self.hi,
            self.lower.describe(),
            self.upper.describe()
        )
    }

    /// Checks finiteness on a sampling of each closed branch interval.
    pub fn check_finite(&self, name: &str, samples: usize) -> Result<()> {
        for (side, a, b) in [
            (Side::Lower, self.lo, self.breakpoint),
            (Side::Upper, self.breakpoint, self.hi),
        ] {
            for k in 0..=samples {
                let x = a + (b - a) * k as f64 / samples as f64;
                let (v, d) = (self.value(x, side), self.deriv(x, side));
                if !v.is_finite() || !d.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "{name}: non-finite value or derivative at {x}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spline_reproduces_cubics_exactly() {
        let x: Vec<f64> = (0..9)
            .map(|k| -1.0 + 0.13 * k as f64 + 0.01 * (k * k) as f64)
            .collect();
        let f = |t: f64| 2.0 - t + 0.5 * t * t - 0.3 * t * t * t;
        let df = |t: f64| -1.0 + t - 0.9 * t * t;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::new(x.clone(), y).unwrap();
        for k in 0..50 {
            let t = x[0] + (x[8] - x[0]) * k as f64 / 49.0;
            let (v, d) = s.eval(t);
            assert_relative_eq!(v, f(t), epsilon = 1e-12);
            assert_relative_eq!(d, df(t), epsilon = 1e-11);
        }
    }

    #[test]
    fn spline_error_is_fourth_order() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let y: Vec<f64> = x.iter().map(|&t| (3.0 * t).sin()).collect();
            let s = CubicSpline::new(x, y).unwrap();
            (0..1000)
                .map(|k| {
                    let t = k as f64 / 999.0;
                    (s.eval(t).0 - (3.0 * t).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let rate = (err(16) / err(32)).log2();
        assert!(rate > 3.7, "observed rate {rate}");
    }

    #[test]
    fn piecewise_sides() {
        let p = PiecewiseProfile::constant(-1.0, -0.5, 0.0, 1.02, 1.0).unwrap();
        assert_eq!(p.value(-0.5, Side::Lower), 1.02);
        assert_eq!(p.value(-0.5, Side::Upper), 1.0);
        assert_eq!(p.at(-0.7), 1.02);
        assert_relative_eq!(p.jump(), -0.02, epsilon = 1e-15);
        assert!(PiecewiseProfile::constant(-1.0, 0.5, 0.0, 1.0, 1.0).is_err());
    }
}
