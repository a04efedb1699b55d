//! Cluster and virial series: log of the partition function, density series,
//! radius estimators, virial reversion and the density lower bound.

pub mod claims;
pub mod series;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configint::{build_table, SpatialBox, Strategy};
use crate::error::{KsError, Result};
use num_traits::Zero;

use crate::numeric::{xf, Real, Xf};
use crate::oracle::{tonks_density, IdealModel, TonksModel};
use crate::partition::PartitionPolynomial;
use crate::potential::PairPotential;

pub use claims::{claim_rows, ClaimInputs, ClaimReport, ClaimRow, Relation, Verdict, VERDICT_TOL};
pub use series::{PowerSeries, Variable};

/// Allowed shortfall in the density lower bound.
pub const BOUND_TOL: f64 = 1e-9;

const NOISE_FACTOR: f64 = 4.0;

/// log Xi(z) to n terms (index 0..n).
pub fn log_series(poly: &PartitionPolynomial, n: usize) -> Result<PowerSeries> {
    let c = poly.coeffs_t::<Xf>();
    let (mut l, err) = series::log_with_error(&c, n)?;
    // coefficients indistinguishable from rounding noise are exact zeros
    for (lk, e) in l.iter_mut().zip(&err) {
        if e.is_finite() && lk.abs().to_f() <= NOISE_FACTOR * e {
            *lk = Xf::zero();
        }
    }
    Ok(PowerSeries::from_xf(&l, Variable::Z))
}

/// rho_1 series: coefficient k is k l_k / |V|.
pub fn density_series(log: &PowerSeries, volume: f64) -> PowerSeries {
    let v = xf(volume);
    let c: Vec<Xf> = log.xf_values().iter().enumerate().map(|(k, l)| xf(k as f64) * *l / v).collect();
    PowerSeries::from_xf(&c, Variable::Z)
}

/// beta p series log Xi / |V|.
pub fn pressure_series(log: &PowerSeries, volume: f64) -> PowerSeries {
    let v = xf(volume);
    PowerSeries::from_xf(&log.xf_values().iter().map(|l| *l / v).collect::<Vec<_>>(), Variable::Z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    Ratio,
    Root,
    DombSykes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    Alternating,
    Positive,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub method: RadiusMethod,
    /// Infinite for a terminating series.
    pub radius: f64,
    /// Per-index estimates the final value is drawn from.
    pub trend: Vec<f64>,
    pub sign_pattern: SignPattern,
    /// Signed location of the dominant singularity, when the pattern fixes it.
    pub singularity: Option<f64>,
}

pub fn sign_pattern(s: &PowerSeries) -> SignPattern {
    let signs: Vec<i8> = (1..s.len()).map(|k| s.sign(k)).filter(|x| *x != 0).collect();
    if signs.windows(2).all(|w| w[0] == w[1]) {
        SignPattern::Positive
    } else if (1..s.len().saturating_sub(1)).all(|k| s.sign(k) != 0 && s.sign(k) == -s.sign(k + 1)) {
        SignPattern::Alternating
    } else {
        SignPattern::Mixed
    }
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len();
    let a = nalgebra::DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).map(|x| x.iter().copied().collect()).unwrap_or_else(|_| vec![f64::NAN; p])
}

/// Ratio, root (with a power-law prefactor fit) or Domb-Sykes estimate of the radius of convergence.
pub fn radius_estimate(s: &PowerSeries, method: RadiusMethod) -> Result<RadiusEstimate> {
    let n = s.len();
    if n < 8 {
        return Err(KsError::Insufficient(format!("{n} coefficients, need at least 8")));
    }
    let pattern = sign_pattern(s);
    let tail_start = n / 2;
    if (tail_start..n).all(|k| s.sign(k) == 0) {
        return Ok(RadiusEstimate { method, radius: f64::INFINITY, trend: vec![], sign_pattern: pattern, singularity: None });
    }
    if (1..n).filter(|&k| s.sign(k) != 0).count() < 8 {
        return Err(KsError::Insufficient("fewer than 8 nonzero coefficients".into()));
    }
    let lm: Vec<f64> = (0..n).map(|k| s.log_magnitude(k)).collect();
    let (radius, trend) = match method {
        RadiusMethod::Ratio => {
            let trend: Vec<f64> = (1..n - 1)
                .filter(|&k| lm[k].is_finite() && lm[k + 1].is_finite())
                .map(|k| (lm[k] - lm[k + 1]).exp())
                .collect();
            (*trend.last().unwrap_or(&f64::NAN), trend)
        }
        RadiusMethod::Root => {
            let trend: Vec<f64> = (1..n).filter(|&k| lm[k].is_finite()).map(|k| (-lm[k] / k as f64).exp()).collect();
            let ks: Vec<usize> = (tail_start.max(1)..n).filter(|&k| lm[k].is_finite()).collect();
            let r = if ks.len() >= 4 {
                let rows: Vec<Vec<f64>> = ks.iter().map(|&k| vec![k as f64, (k as f64).ln(), 1.0]).collect();
                let y: Vec<f64> = ks.iter().map(|&k| lm[k]).collect();
                (-least_squares(&rows, &y)[0]).exp()
            } else {
                *trend.last().unwrap_or(&f64::NAN)
            };
            (r, trend)
        }
        RadiusMethod::DombSykes => {
            let vals = s.xf_values();
            let pts: Vec<(usize, f64)> = (2..n)
                .filter(|&k| !vals[k - 1].is_zero())
                .map(|k| (k, (vals[k] / vals[k - 1]).to_f()))
                .collect();
            let keep = n.div_ceil(2).min(pts.len());
            let tail = &pts[pts.len() - keep..];
            if tail.len() < 2 {
                return Err(KsError::Insufficient("too few ratio points for the Domb-Sykes fit".into()));
            }
            let rows: Vec<Vec<f64>> = tail.iter().map(|(k, _)| vec![1.0, 1.0 / *k as f64]).collect();
            let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
            let mu = least_squares(&rows, &y)[0];
            (1.0 / mu.abs(), pts.iter().map(|p| 1.0 / p.1.abs()).collect())
        }
    };
    let singularity = match pattern {
        SignPattern::Alternating => Some(-radius),
        SignPattern::Positive => Some(radius),
        SignPattern::Mixed => None,
    };
    Ok(RadiusEstimate { method, radius, trend, sign_pattern: pattern, singularity })
}

/// Density series at several box lengths with the polynomial extrapolation in 1/L.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteVolumeSeries {
    pub lengths: Vec<f64>,
    pub density: Vec<PowerSeries>,
    pub pressure: Vec<PowerSeries>,
    pub density_extrapolated: PowerSeries,
    pub pressure_extrapolated: PowerSeries,
    /// log(|f_1 - f_2| / |f_2 - f_3|) / log(L_2 / L_1) per coefficient, from the first three lengths.
    pub observed_order: Vec<f64>,
}

fn neville_at_zero(h: &[f64], f: &[Xf]) -> Xf {
    let n = h.len();
    let mut p = f.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * xf(h[i]) - p[i] * xf(h[i + k])) / xf(h[i] - h[i + k]);
        }
    }
    p[0]
}

fn extrapolate(h: &[f64], series: &[PowerSeries]) -> PowerSeries {
    let n = series.iter().map(|s| s.len()).min().unwrap_or(0);
    let c: Vec<Xf> = (0..n)
        .map(|k| {
            let f: Vec<Xf> = series.iter().map(|s| s.xf(k)).collect();
            neville_at_zero(h, &f)
        })
        .collect();
    PowerSeries::from_xf(&c, Variable::Z)
}

/// Finite-volume cluster series of `p` in cubes of the given side lengths, extrapolated to 1/L = 0.
pub fn finite_volume_series(
    p: &PairPotential,
    lengths: &[f64],
    n_terms: usize,
    s: &Strategy,
    cache: Option<&Path>,
) -> Result<FiniteVolumeSeries> {
    if lengths.len() < 2 {
        return Err(KsError::Insufficient("need at least two box lengths".into()));
    }
    let per_length: Vec<(PowerSeries, PowerSeries)> = lengths
        .par_iter()
        .map(|&l| {
            let bx = SpatialBox::cube(l, p.dimension);
            let table = build_table(p, &bx, n_terms, s, cache)?;
            let poly = PartitionPolynomial::assemble(&table, None);
            let log = log_series(&poly, n_terms + 1)?;
            Ok((density_series(&log, bx.volume()), pressure_series(&log, bx.volume())))
        })
        .collect::<Result<_>>()?;
    let (density, pressure): (Vec<_>, Vec<_>) = per_length.into_iter().unzip();
    let h: Vec<f64> = lengths.iter().map(|l| 1.0 / l).collect();
    let observed_order = if lengths.len() >= 3 {
        (0..density[0].len())
            .map(|k| {
                let d1 = (density[0].xf(k) - density[1].xf(k)).abs().to_f();
                let d2 = (density[1].xf(k) - density[2].xf(k)).abs().to_f();
                (d1 / d2).ln() / (lengths[1] / lengths[0]).ln()
            })
            .collect()
    } else {
        vec![]
    };
    Ok(FiniteVolumeSeries {
        lengths: lengths.to_vec(),
        density_extrapolated: extrapolate(&h, &density),
        pressure_extrapolated: extrapolate(&h, &pressure),
        density,
        pressure,
        observed_order,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirialResult {
    /// beta p as a series in rho.
    pub series: PowerSeries,
    /// z as a series in rho.
    pub activity: PowerSeries,
    pub radius: RadiusEstimate,
    /// (2C)^{-1}.
    pub bound: f64,
    pub satisfies_bound: bool,
}

/// Reverts rho(z) by Lagrange inversion and composes beta p(z(rho)).
pub fn virial_reversion(
    density: &PowerSeries,
    pressure: &PowerSeries,
    c: f64,
    method: RadiusMethod,
) -> Result<VirialResult> {
    let n = density.len().min(pressure.len());
    let z_of_rho = series::revert(&density.xf_values(), n)?;
    let bp = series::compose(&pressure.xf_values(), &z_of_rho, n);
    let series = PowerSeries::from_xf(&bp, Variable::Rho);
    let radius = radius_estimate(&series, method)?;
    let bound = 1.0 / (2.0 * c);
    Ok(VirialResult {
        activity: PowerSeries::from_xf(&z_of_rho, Variable::Rho),
        satisfies_bound: radius.radius >= bound,
        series,
        radius,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum OracleModel {
    Tonks(TonksModel),
    Ideal(IdealModel),
}

impl OracleModel {
    pub fn density(&self, s: f64) -> Result<f64> {
        match self {
            OracleModel::Tonks(t) => tonks_density(t, s),
            OracleModel::Ideal(_) => Ok(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub s: f64,
    pub rho: f64,
    /// s / (1 + C s).
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBoundReport {
    pub c: f64,
    pub rows: Vec<BoundRow>,
    /// Grid indices where rho < bound - 1e-9.
    pub violations: Vec<usize>,
    /// Grid indices where rho fails to increase.
    pub monotonicity_violations: Vec<usize>,
    pub min_margin: f64,
    pub holds: bool,
}

/// Checks rho_1(s) >= s / (1 + C s) and that rho_1 increases along the grid.
pub fn density_bound_check(model: &OracleModel, c: f64, grid: &[f64]) -> Result<DensityBoundReport> {
    let rows: Vec<BoundRow> = grid
        .iter()
        .map(|&s| Ok(BoundRow { s, rho: model.density(s)?, bound: s / (1.0 + c * s) }))
        .collect::<Result<_>>()?;
    let violations: Vec<usize> =
        rows.iter().enumerate().filter(|(_, r)| r.rho < r.bound - BOUND_TOL).map(|(i, _)| i).collect();
    let monotonicity_violations: Vec<usize> =
        (1..rows.len()).filter(|&i| rows[i].s > rows[i - 1].s && rows[i].rho <= rows[i - 1].rho).collect();
    let min_margin = rows.iter().map(|r| r.rho - r.bound).fold(f64::INFINITY, f64::min);
    Ok(DensityBoundReport {
        c,
        holds: violations.is_empty() && monotonicity_violations.is_empty(),
        rows,
        violations,
        monotonicity_violations,
        min_margin,
    })
}

/// n equally spaced points in (0, s_max].
pub fn open_grid(s_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| s_max * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configint::IntegralTable;
    use crate::oracle::tonks_mayer_coefficients;

    #[test]
    fn log_series_examples() {
        let l = log_series(&PartitionPolynomial::from_coeffs(&[1.0, 1.0]), 8).unwrap();
        assert_eq!(l.value(1), 1.0);
        assert!((l.value(4) + 0.25).abs() < 1e-16);
        let bx = SpatialBox::interval(1.5);
        let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&bx, 20), None);
        let l = log_series(&ideal, 11).unwrap();
        assert!((l.value(1) - 1.5).abs() < 1e-12);
        assert!(l.values()[2..].iter().all(|c| c.abs() < 1e-12));
        let d = density_series(&l, 1.5);
        assert!((d.value(1) - 1.0).abs() < 1e-12);
        let tonks = PartitionPolynomial::from_coeffs(&[1.0, 5.0, 8.0, 4.5, 2.0 / 3.0, 1.0 / 120.0]);
        let l = log_series(&tonks, 3).unwrap();
        assert_eq!(l.value(1), 5.0);
        assert!((l.value(2) + (12.5 - 8.0)).abs() < 1e-15);
    }

    #[test]
    fn radius_examples() {
        let r = 0.7;
        let geo: Vec<f64> = (0..20).map(|n| (-1.0 / r as f64).powi(n)).collect();
        let s = PowerSeries::from_f64(&geo, Variable::Z);
        for m in [RadiusMethod::Ratio, RadiusMethod::Root, RadiusMethod::DombSykes] {
            let e = radius_estimate(&s, m).unwrap();
            assert!((e.radius - r).abs() < 1e-12, "{m:?} {}", e.radius);
            assert_eq!(e.sign_pattern, SignPattern::Alternating);
            assert!((e.singularity.unwrap() + r).abs() < 1e-12);
        }
        let (_, d) = tonks_mayer_coefficients(&TonksModel::new(1.0).unwrap(), 30);
        let e = radius_estimate(&d, RadiusMethod::Root).unwrap();
        assert!((e.radius * std::f64::consts::E - 1.0).abs() < 0.02);
        let mut ideal = vec![0.0; 12];
        ideal[1] = 1.0;
        let e = radius_estimate(&PowerSeries::from_f64(&ideal, Variable::Z), RadiusMethod::Ratio).unwrap();
        assert!(e.radius.is_infinite());
        assert!(radius_estimate(&PowerSeries::from_f64(&geo[..5], Variable::Z), RadiusMethod::Ratio).is_err());
    }

    #[test]
    fn virial_examples() {
        let t = TonksModel::new(1.0).unwrap();
        let (p, d) = tonks_mayer_coefficients(&t, 25);
        let v = virial_reversion(&d, &p, t.c(), RadiusMethod::Ratio).unwrap();
        for k in 1..25 {
            assert!((v.series.value(k) - 1.0).abs() < 1e-20, "{k}");
        }
        assert!((v.radius.radius - 1.0).abs() < 1e-12);
        assert!(v.satisfies_bound);
        let mut ideal = vec![0.0; 12];
        ideal[1] = 1.0;
        let s = PowerSeries::from_f64(&ideal, Variable::Z);
        let v = virial_reversion(&s, &s, 1.0, RadiusMethod::Ratio).unwrap();
        assert_eq!(v.series.value(1), 1.0);
        assert!(v.series.values()[2..].iter().all(|c| *c == 0.0));
        assert!(virial_reversion(&PowerSeries::from_f64(&[0.0; 10], Variable::Z), &s, 1.0, RadiusMethod::Ratio).is_err());
    }

    #[test]
    fn density_bound_examples() {
        let ideal = OracleModel::Ideal(IdealModel::new(1.0).unwrap());
        let r = density_bound_check(&ideal, 0.0, &open_grid(2.0, 10)).unwrap();
        assert!(r.holds && r.min_margin == 0.0);
        let tonks = OracleModel::Tonks(TonksModel::new(1.0).unwrap());
        let r = density_bound_check(&tonks, 2.0, &[0.1]).unwrap();
        assert!(r.rows[0].rho >= 0.1 / 1.2);
        let r = density_bound_check(&tonks, 2.0, &open_grid(2.0, 100)).unwrap();
        assert!(r.holds);
    }
}
