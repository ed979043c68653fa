//! Functions of p sampled on both layers with Hermite interpolation.

use crate::profile::Side;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub ddv: Vec<f64>,
}

impl NodeTable {
    fn locate(&self, p: f64) -> usize {
        let n = self.p.len();
        let (a, b) = (self.p[0], self.p[n - 1]);
        let k = (((p - a) / (b - a)) * (n - 1) as f64).floor();
        (k.max(0.0) as usize).min(n - 2)
    }

    fn hermite(&self, vals: &[f64], ders: &[f64], p: f64) -> f64 {
        let k = self.locate(p);
        let (x0, x1) = (self.p[k], self.p[k + 1]);
        let h = x1 - x0;
        let t = (p - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * vals[k]
            + (t3 - 2.0 * t2 + t) * h * ders[k]
            + (-2.0 * t3 + 3.0 * t2) * vals[k + 1]
            + (t3 - t2) * h * ders[k + 1]
    }
}

/// A profile on [−1, p̂] ∪ [p̂, 0], continuous or not at p̂, with value and
/// first derivative available anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredProfile {
    pub p_hat: f64,
    pub lower: NodeTable,
    pub upper: NodeTable,
}

impl LayeredProfile {
    pub fn table(&self, side: Side) -> &NodeTable {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    pub fn side_of(&self, p: f64) -> Side {
        if p < self.p_hat {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    pub fn value(&self, p: f64, side: Side) -> f64 {
        let t = self.table(side);
        t.hermite(&t.v, &t.dv, p)
    }

    pub fn deriv(&self, p: f64, side: Side) -> f64 {
        let t = self.table(side);
        t.hermite(&t.dv, &t.ddv, p)
    }

    /// Value at p using the lower branch below p̂ and the upper one otherwise.
    pub fn at(&self, p: f64) -> f64 {
        self.value(p, self.side_of(p))
    }

    pub fn scaled(&self, s: f64) -> LayeredProfile {
        let sc = |t: &NodeTable| NodeTable {
            p: t.p.clone(),
            v: t.v.iter().map(|x| x * s).collect(),
            dv: t.dv.iter().map(|x| x * s).collect(),
            ddv: t.ddv.iter().map(|x| x * s).collect(),
        };
        LayeredProfile {
            p_hat: self.p_hat,
            lower: sc(&self.lower),
            upper: sc(&self.upper),
        }
    }

    /// Node abscissae and values of both layers (interface listed twice).
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.lower
            .p
            .iter()
            .zip(&self.lower.v)
            .chain(self.upper.p.iter().zip(&self.upper.v))
            .map(|(a, b)| (*a, *b))
            .collect()
    }
}
