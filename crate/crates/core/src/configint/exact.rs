//! Closed forms for one-dimensional hard rods and the ideal gas.

use crate::numeric::{xf, Real, Xf};
use num_traits::{One, Zero};

/// (L - (m-1)a)^m, or zero when the rods do not fit.
pub fn exact_hardrod_z(l: f64, a: f64, m: usize) -> f64 {
    hardrod_z_xf(l, a, m).to_f()
}

pub fn hardrod_z_xf(l: f64, a: f64, m: usize) -> Xf {
    if m == 0 {
        return Xf::one();
    }
    let free = xf(l) - xf(a) * xf((m - 1) as f64);
    if free < Xf::zero() {
        return Xf::zero();
    }
    powi(free, m)
}

pub(crate) fn powi<T: Real>(x: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x)
}

/// Lengths of the free intervals of [0, L] left by anchors with exclusion radius a,
/// or `None` if two anchors overlap.
pub fn free_intervals<T: Real>(l: f64, a: f64, anchors: &[f64]) -> Option<Vec<T>> {
    let mut xs = anchors.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    if xs.windows(2).any(|w| w[1] - w[0] < a) {
        return None;
    }
    let mut out = Vec::with_capacity(xs.len() + 1);
    let lt = T::of(l);
    let mut start = T::zero();
    for x in &xs {
        let end = T::of(*x) - T::of(a);
        let end = if end > lt { lt } else { end };
        if end > start {
            out.push(end - start);
        }
        let next = T::of(*x) + T::of(a);
        if next > start {
            start = next;
        }
    }
    if lt > start {
        out.push(lt - start);
    }
    Some(out)
}

/// Integral over [0,L]^m of the hard-rod Boltzmann weight of anchors plus m free rods,
/// for every m in 0..=m_max.
pub fn hardrod_anchored_all<T: Real>(l: f64, a: f64, anchors: &[f64], m_max: usize) -> Vec<T> {
    let Some(lens) = free_intervals::<T>(l, a, anchors) else {
        return vec![T::zero(); m_max + 1];
    };
    // exponential generating function: prod_j sum_k (len_j - (k-1)a)_+^k t^k / k!
    let fact: Vec<T> = (0..=m_max)
        .scan(T::one(), |f, k| {
            if k > 0 {
                *f = *f * T::of_usize(k);
            }
            Some(*f)
        })
        .collect();
    let mut egf = vec![T::zero(); m_max + 1];
    egf[0] = T::one();
    for len in lens {
        let g: Vec<T> = (0..=m_max)
            .map(|k| {
                if k == 0 {
                    return T::one();
                }
                let free = len - T::of(a) * T::of_usize(k - 1);
                if free <= T::zero() {
                    T::zero()
                } else {
                    powi(free, k) / fact[k]
                }
            })
            .collect();
        let mut next = vec![T::zero(); m_max + 1];
        for (i, ei) in egf.iter().enumerate() {
            if ei.is_zero() {
                continue;
            }
            for (k, gk) in g.iter().enumerate().take(m_max + 1 - i) {
                next[i + k] = next[i + k] + *ei * *gk;
            }
        }
        egf = next;
    }
    egf.iter().zip(&fact).map(|(e, f)| *e * *f).collect()
}

pub fn hardrod_anchored<T: Real>(l: f64, a: f64, anchors: &[f64], m: usize) -> T {
    hardrod_anchored_all::<T>(l, a, anchors, m)[m]
}
