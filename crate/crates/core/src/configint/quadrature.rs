//! Tensorized Gauss-Legendre integration over symmetric m-point configurations.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

use super::SpatialBox;
use crate::error::{KsError, Result};
use crate::potential::PairPotential;

/// Nodes and weights on [-1, 1].
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_rule(n: usize) -> Arc<Rule> {
    static RULES: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let gl = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let (nodes, weights): (Vec<f64>, Vec<f64>) = gl.as_node_weight_pairs().iter().copied().unzip();
    let rule = Arc::new(Rule { nodes, weights });
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

/// Minimum Gauss nodes on any panel.
pub const MIN_PANEL_NODES: usize = 8;

/// A symmetric integrand over `m` points, factored as a product of per-point
/// factors (each may see the points already placed) times a final factor.
pub struct Integrand<'a> {
    pub m: usize,
    /// Factor contributed by the last point of the prefix; zero prunes the branch.
    pub step: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub tail: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// Fixed positions whose neighbourhoods carry breakpoints (one dimension only).
    pub fixed: &'a [f64],
    /// Largest multiple of each discontinuity radius used for breakpoints.
    pub reach: usize,
}

/// Integral over Lambda^m with a refinement error estimate.
pub fn integrate(
    pot: &PairPotential,
    bx: &SpatialBox,
    f: &Integrand<'_>,
    order: usize,
    dim_cap: usize,
) -> Result<(f64, f64)> {
    let dim = bx.dimension() * f.m;
    if dim > dim_cap {
        return Err(KsError::UseSampling { dim, cap: dim_cap });
    }
    if f.m == 0 {
        return Ok(((f.tail)(&[]), 0.0));
    }
    let fine = integrate_at(pot, bx, f, order);
    let coarse = integrate_at(pot, bx, f, (order / 2).max(MIN_PANEL_NODES));
    Ok((fine, (fine - coarse).abs()))
}

fn integrate_at(pot: &PairPotential, bx: &SpatialBox, f: &Integrand<'_>, order: usize) -> f64 {
    if bx.dimension() == 1 {
        let radii = pot.discontinuities();
        let mut pts = Vec::with_capacity(f.m);
        let factorial: f64 = (1..=f.m).map(|k| k as f64).product();
        factorial * ordered_1d(bx.extents[0], &radii, f, order, &mut pts)
    } else {
        let per_axis = per_axis_nodes(order, bx.dimension() * f.m);
        let mut pts = Vec::with_capacity(f.m * bx.dimension());
        tensor(bx, f, per_axis, &mut pts)
    }
}

fn per_axis_nodes(order: usize, dim: usize) -> usize {
    let budget = (1u64 << 22) as f64;
    let cap = budget.powf(1.0 / dim as f64).floor() as usize;
    order.min(cap).max(2)
}

fn breakpoints(lo: f64, hi: f64, l: f64, radii: &[f64], f: &Integrand<'_>, placed: &[f64]) -> Vec<f64> {
    let mut bp = vec![lo, hi];
    let sources = [0.0, l].into_iter().chain(f.fixed.iter().copied()).chain(placed.iter().copied());
    for q in sources {
        for r in radii {
            for j in 1..=f.reach {
                for c in [q - j as f64 * r, q + j as f64 * r] {
                    if c > lo && c < hi {
                        bp.push(c);
                    }
                }
            }
        }
    }
    bp.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bp.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * l.max(1.0));
    bp
}

/// m! times the integral over ordered configurations lo <= y_1 <= ... <= y_m <= L.
fn ordered_1d(l: f64, radii: &[f64], f: &Integrand<'_>, order: usize, pts: &mut Vec<f64>) -> f64 {
    let k = pts.len();
    if k == f.m {
        return (f.tail)(pts);
    }
    let lo = pts.last().copied().unwrap_or(0.0);
    if lo >= l {
        return 0.0;
    }
    let bp = breakpoints(lo, l, l, radii, f, pts);
    let mut total = 0.0;
    for w in bp.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let n = ((order as f64 * len / l).ceil() as usize).max(MIN_PANEL_NODES);
        let rule = gauss_rule(n);
        let half = 0.5 * len;
        let mid = 0.5 * (a + b);
        let mut panel = 0.0;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            pts.push(mid + half * x);
            let s = (f.step)(pts);
            if s != 0.0 {
                panel += wt * s * ordered_1d(l, radii, f, order, pts);
            }
            pts.pop();
        }
        total += half * panel;
    }
    total
}

fn tensor(bx: &SpatialBox, f: &Integrand<'_>, nodes: usize, pts: &mut Vec<f64>) -> f64 {
    let nu = bx.dimension();
    let k = pts.len() / nu;
    if k == f.m {
        return (f.tail)(pts);
    }
    let rule = gauss_rule(nodes);
    let mut idx = vec![0usize; nu];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (axis, &i) in idx.iter().enumerate() {
            let e = bx.extents[axis];
            pts.push(0.5 * e * (1.0 + rule.nodes[i]));
            w *= 0.5 * e * rule.weights[i];
        }
        let s = (f.step)(pts);
        if s != 0.0 {
            total += w * s * tensor(bx, f, nodes, pts);
        }
        pts.truncate(k * nu);
        let mut axis = 0;
        loop {
            if axis == nu {
                return total;
            }
            idx[axis] += 1;
            if idx[axis] < nodes {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}
