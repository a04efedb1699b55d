//! Exactly solvable reference models: hard rods on the line and the ideal gas.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::cluster::{PowerSeries, Variable};
use crate::configint::{IntegralTable, SpatialBox};
use crate::error::{KsError, Result};
use crate::numeric::{xf, Xf};
use crate::partition::{zeros, PartitionPolynomial, ZeroSet};

/// Branch point z = -1/e of w e^w = z for unit rod length.
pub const BRANCH_POINT: f64 = -1.0 / E;
/// Relative back-substitution residual of the pressure solve.
pub const PRESSURE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TonksModel {
    pub a: f64,
}

impl TonksModel {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(KsError::InvalidParameter(format!("rod length {a} must be positive")));
        }
        Ok(TonksModel { a })
    }

    /// Regularity constant C = 2a.
    pub fn c(&self) -> f64 {
        2.0 * self.a
    }

    /// -1/(e a).
    pub fn branch_point(&self) -> f64 {
        BRANCH_POINT / self.a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealModel {
    pub volume: f64,
}

impl IdealModel {
    pub fn new(volume: f64) -> Result<Self> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(KsError::InvalidParameter(format!("volume {volume} must be positive")));
        }
        Ok(IdealModel { volume })
    }
}

/// Safeguarded Newton for an increasing f on [lo, hi] with f(lo) <= 0 <= f(hi).
fn bracketed_newton(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64, mut u: f64) -> f64 {
    for _ in 0..200 {
        let (fu, du) = f(u);
        if fu == 0.0 {
            return u;
        }
        if fu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - fu / du;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 2.0 * f64::EPSILON * u.abs() || hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return next;
        }
        u = next;
    }
    u
}

/// Solves u e^u = x on the principal branch u >= -1.
fn principal_w(x: f64) -> Result<f64> {
    if !(x >= BRANCH_POINT) || !x.is_finite() {
        return Err(KsError::BranchError(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > E {
        // u + ln u = ln x is well scaled for large arguments
        let lx = x.ln();
        return Ok(bracketed_newton(|u| (u + u.ln() - lx, 1.0 + 1.0 / u), 1.0, lx, lx - lx.ln()));
    }
    let start = if x > 0.0 { x.ln_1p() } else { -0.5 };
    Ok(bracketed_newton(|u| (u * u.exp() - x, (1.0 + u) * u.exp()), -1.0, 1.0, start))
}

/// beta p from beta p exp(a beta p) = z.
pub fn tonks_pressure(model: &TonksModel, z: f64) -> Result<f64> {
    let a = model.a;
    if z < model.branch_point() {
        return Err(KsError::BranchError(z));
    }
    let bp = principal_w(a * z)? / a;
    let back = bp * (a * bp).exp();
    if z != 0.0 && (back - z).abs() > PRESSURE_TOL * z.abs() {
        log::warn!("pressure back-substitution residual {:e} at z = {z}", (back - z).abs() / z.abs());
    }
    Ok(bp)
}

/// rho_1 = beta p / (1 + a beta p).
pub fn tonks_density(model: &TonksModel, z: f64) -> Result<f64> {
    let bp = tonks_pressure(model, z)?;
    Ok(bp / (1.0 + model.a * bp))
}

/// Pressure and density series in z, coefficients 0..n:
/// (-1)^{k-1} k^{k-1} a^{k-1} / k! and (-1)^{k-1} k^k a^{k-1} / k!.
pub fn tonks_mayer_coefficients(model: &TonksModel, n: usize) -> (PowerSeries, PowerSeries) {
    let a = xf(model.a);
    let mut p = vec![xf(0.0)];
    let mut d = vec![xf(0.0)];
    let mut fact = xf(1.0);
    for k in 1..=n {
        let kx = xf(k as f64);
        fact *= kx;
        let mut pk = xf(1.0);
        for _ in 1..k {
            pk *= kx * a;
        }
        if k % 2 == 0 {
            pk = -pk;
        }
        let pk: Xf = pk / fact;
        p.push(pk);
        d.push(pk * kx);
    }
    (PowerSeries::from_xf(&p, Variable::Z), PowerSeries::from_xf(&d, Variable::Z))
}

/// Zeros of sum_{k<=M} (z |V|)^k / k!.
pub fn ideal_truncated_zeros(model: &IdealModel, m: usize) -> Result<ZeroSet> {
    if m == 0 {
        return Err(KsError::InvalidParameter("truncation must be at least 1".into()));
    }
    let bx = SpatialBox::interval(model.volume);
    zeros(&PartitionPolynomial::assemble(&IntegralTable::ideal(&bx, m), None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_closed_points() {
        let t = TonksModel::new(1.0).unwrap();
        assert_eq!(tonks_pressure(&t, 0.0).unwrap(), 0.0);
        assert!((tonks_pressure(&t, E).unwrap() - 1.0).abs() < 1e-15);
        assert!((tonks_density(&t, E).unwrap() - 0.5).abs() < 1e-15);
        for z in [0.1, -0.2, -0.36, 1e-9, 3.0, 1e6, 1e200] {
            let bp = tonks_pressure(&t, z).unwrap();
            assert!((bp * bp.exp() - z).abs() <= 1e-13 * z.abs(), "{z}");
            assert!(tonks_density(&t, z).unwrap() < 1.0);
        }
        let t2 = TonksModel::new(0.5).unwrap();
        let bp = tonks_pressure(&t2, 0.7).unwrap();
        assert!((bp * (0.5 * bp).exp() - 0.7).abs() < 1e-14);
        assert!(matches!(tonks_pressure(&t, -0.4), Err(KsError::BranchError(_))));
        assert!((tonks_pressure(&t, BRANCH_POINT).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn mayer_coefficients() {
        let (p, d) = tonks_mayer_coefficients(&TonksModel::new(1.0).unwrap(), 5);
        assert_eq!(p.value(1), 1.0);
        assert_eq!(p.value(2), -1.0);
        assert_eq!(d.value(2), -2.0);
        assert!((d.value(3) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn ideal_zeros() {
        let m = IdealModel::new(1.0).unwrap();
        let z1 = ideal_truncated_zeros(&m, 1).unwrap();
        assert!((z1.z_c().unwrap() + 1.0).norm() < 1e-15);
        let z2 = ideal_truncated_zeros(&m, 2).unwrap();
        assert!((z2.min_modulus().unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }
}
