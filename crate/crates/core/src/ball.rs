//! Approximate minimal enclosing ball.
//!
//! Frank-Wolfe iteration with away steps on the dual of the minimum enclosing
//! ball problem (Yildirim's core-set algorithm). The dual objective is a
//! certified lower bound on the squared optimal radius, so iteration stops
//! once the farthest point is within `(1 + rel_tol)` of that bound. The
//! returned radius is the exact distance to the farthest point from the
//! returned center, so containment holds without slack.

use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &[f64], rel_tol: f64) -> bool {
        sq_dist(&self.center, x).sqrt() <= self.radius * (1.0 + rel_tol)
    }
}

pub const DEFAULT_REL_TOL: f64 = 1e-3;
const MAX_ITER: usize = 1_000_000;

pub fn minimal_enclosing_ball(data: &Dataset, rel_tol: f64) -> Result<Ball> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {rel_tol}")));
    }
    let n = data.len();
    let dim = data.dim();
    let x = |i: usize| data.row(i);

    // initial support: the farthest point from row 0 and the farthest from that
    let farthest_from = |p: &[f64]| {
        (0..n)
            .map(|i| (sq_dist(p, x(i)), i))
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let (_, a) = farthest_from(x(0));
    let (d_ab, b) = farthest_from(x(a));
    if d_ab == 0.0 {
        return Ok(Ball {
            center: x(0).to_vec(),
            radius: 0.0,
        });
    }

    let mut weights = vec![0.0; n];
    weights[a] = 0.5;
    weights[b] = 0.5;
    let mut center = vec![0.0; dim];
    let mut gaps = vec![0.0; n];
    let target = (1.0 + rel_tol).powi(2) - 1.0;

    for _ in 0..MAX_ITER {
        center.iter_mut().for_each(|c| *c = 0.0);
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                for (c, v) in center.iter_mut().zip(x(i)) {
                    *c += w * v;
                }
            }
        }
        for (i, g) in gaps.iter_mut().enumerate() {
            *g = sq_dist(x(i), &center);
        }
        // dual value: weighted mean squared distance to the current center
        let dual: f64 = weights.iter().zip(&gaps).map(|(w, g)| w * g).sum();
        let (far_gap, far) = gaps
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |acc, (i, &g)| if g > acc.0 { (g, i) } else { acc });
        if dual <= 0.0 {
            break;
        }
        let plus = far_gap / dual - 1.0;
        if plus <= target {
            return Ok(Ball {
                center,
                radius: far_gap.sqrt(),
            });
        }
        let (near_gap, near) = weights
            .iter()
            .zip(&gaps)
            .enumerate()
            .filter(|(_, (w, _))| **w > 0.0)
            .fold((f64::INFINITY, 0), |acc, (i, (_, &g))| if g < acc.0 { (g, i) } else { acc });
        let minus = 1.0 - near_gap / dual;
        if plus >= minus || weights[near] >= 1.0 {
            let step = plus / (2.0 * (1.0 + plus));
            weights.iter_mut().for_each(|w| *w *= 1.0 - step);
            weights[far] += step;
        } else {
            let wk = weights[near];
            let step = (minus / (2.0 * (1.0 - minus))).min(wk / (1.0 - wk));
            weights.iter_mut().for_each(|w| *w *= 1.0 + step);
            weights[near] -= step;
            if weights[near] < 1e-15 {
                weights[near] = 0.0;
            }
        }
    }
    Err(Error::Numerical("minimal enclosing ball did not converge".into()))
}
