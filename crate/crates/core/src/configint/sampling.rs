//! Owen-scrambled Sobol estimates of configuration integrals.

use rayon::prelude::*;

use super::quadrature::Integrand;
use super::SpatialBox;
use crate::error::{KsError, Result};

pub const MAX_POINTS_PER_REPLICATE: usize = 1 << 16;
pub const SOBOL_DIMENSIONS: usize = 256;

/// Mean over replicates and the standard error of that mean.
pub fn sample(
    bx: &SpatialBox,
    f: &Integrand<'_>,
    samples: usize,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let nu = bx.dimension();
    let dim = nu * f.m;
    if dim > SOBOL_DIMENSIONS {
        return Err(KsError::InvalidParameter(format!(
            "sampling supports at most {SOBOL_DIMENSIONS} coordinates, got {dim}"
        )));
    }
    if f.m == 0 {
        return Ok(((f.tail)(&[]), 0.0));
    }
    let replicates = replicates.max(2);
    let per = (samples / replicates).clamp(1, MAX_POINTS_PER_REPLICATE);
    let volume = bx.volume().powi(f.m as i32);
    let means: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let s = replicate_seed(seed, r);
            let mut acc = 0.0;
            let mut pts = Vec::with_capacity(dim);
            for i in 0..per {
                pts.clear();
                let mut w = 1.0;
                for k in 0..f.m {
                    for axis in 0..nu {
                        let u = sobol_burley::sample(i as u32, (k * nu + axis) as u32, s) as f64;
                        pts.push(u * bx.extents[axis]);
                    }
                    w *= (f.step)(&pts);
                    if w == 0.0 {
                        break;
                    }
                }
                if w != 0.0 {
                    acc += w * (f.tail)(&pts);
                }
            }
            volume * acc / per as f64
        })
        .collect();
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

fn replicate_seed(seed: u64, r: usize) -> u32 {
    let mut x = seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x as u32
}
