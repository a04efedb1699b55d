use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laurent::companion_eigenvectors;
use super::Operator;
use crate::configint::{SpatialBox, Strategy};
use crate::error::{KsError, Result};
use crate::ksop::build_ks_matrix;
use crate::numeric::{cabs, cplx_f, xf, Xf, C64};
use crate::partition::{correlation_numerator, NumeratorTruncation, PartitionPolynomial, ZeroSet};
use crate::potential::{Configuration, PairPotential};

/// Relative spread of the ray limits above which the probe is flagged as not converged.
pub const RAY_AGREEMENT_TOL: f64 = 1e-6;
/// Number of smallest-t samples fed to the polynomial extrapolation.
const EXTRAPOLATION_POINTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacmanParams {
    /// Ray length; None uses half the distance from z_c to the nearest other zero.
    pub eta: Option<f64>,
    /// Half-opening of the excluded sector around the outward direction.
    pub theta: f64,
    /// Ray angles relative to arg z_c.
    pub rays: Vec<f64>,
    pub points: usize,
    /// Geometric ratio between successive approach points.
    pub ratio: f64,
}

impl Default for PacmanParams {
    fn default() -> Self {
        PacmanParams {
            eta: None,
            theta: PI / 4.0,
            rays: vec![3.0 * PI / 4.0, -3.0 * PI / 4.0, 7.0 * PI / 8.0, -7.0 * PI / 8.0, PI],
            points: 20,
            ratio: 0.5,
        }
    }
}

impl PacmanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < PI / 2.0) {
            return Err(KsError::InvalidParameter(format!("Pacman angle {} outside (0, pi/2)", self.theta)));
        }
        if self.eta.is_some_and(|e| !(e > 0.0)) {
            return Err(KsError::InvalidParameter("Pacman radius must be positive".into()));
        }
        if self.rays.is_empty() || self.points < 2 || !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(KsError::InvalidParameter("need at least one ray, two points and ratio in (0, 1)".into()));
        }
        if let Some(a) = self.rays.iter().find(|a| a.rem_euclid(2.0 * PI).min((-**a).rem_euclid(2.0 * PI)) <= self.theta) {
            return Err(KsError::InvalidParameter(format!("ray angle {a} lies in the excluded sector")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    /// Absolute direction of the ray.
    pub angle: f64,
    pub t: Vec<f64>,
    /// g(z_c + t e^{i angle}).
    pub g: Vec<C64>,
    pub limit: C64,
    /// Difference between the two highest extrapolation orders.
    pub error: f64,
}

/// Values of neville extrapolation to t = 0, last two orders.
fn extrapolate(t: &[f64], g: &[C64]) -> (C64, f64) {
    let n = t.len();
    let mut p: Vec<C64> = g.to_vec();
    let mut prev = p[n - 1];
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * t[i] - p[i] * t[i + k]) / (t[i] - t[i + k]);
        }
        if k < n - 1 {
            prev = p[0];
        }
    }
    (p[0], (p[0] - prev).norm())
}

/// Samples g(z) = f(z)(1 - z/z_c)/z on z = z_c + t e^{i angle}, t = eta ratio^k,
/// and extrapolates to t = 0.
pub fn ray_limit<F>(f: F, z_c: Complex<Xf>, angle: f64, eta: f64, params: &PacmanParams) -> RaySample
where
    F: Fn(Complex<Xf>) -> Complex<Xf>,
{
    let dir = Complex::new(xf(angle.cos()), xf(angle.sin()));
    let one = Complex::<Xf>::one();
    let mut t = Vec::with_capacity(params.points);
    let mut g = Vec::with_capacity(params.points);
    for k in 0..params.points {
        let tk = eta * params.ratio.powi(k as i32);
        let z = z_c + dir * xf(tk);
        let val = f(z) * (one - z / z_c) / z;
        t.push(tk);
        g.push(cplx_f(val));
    }
    let tail = params.points.min(EXTRAPOLATION_POINTS);
    let (limit, error) = extrapolate(&t[params.points - tail..], &g[params.points - tail..]);
    RaySample { angle, t, g, limit, error }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticsProbe {
    pub z_c: C64,
    pub n: usize,
    pub anchor: Configuration,
    pub eta: f64,
    pub theta: f64,
    pub rays: Vec<RaySample>,
    /// Mean of the ray limits.
    pub m_n: C64,
    /// Largest distance of a ray limit from the mean.
    pub ray_spread: f64,
    /// -z_c^n N(z_c) / (z_c^2 Xi'(z_c)).
    pub residue: C64,
    /// |m_n - residue| / |residue|.
    pub residue_agreement: f64,
    pub converged: bool,
    pub simple: bool,
    /// Coefficient M of nu_c in P e_1 = M nu_c.
    pub m: Option<C64>,
    pub nu_c: Vec<C64>,
    /// Left eigenvector with nu_c_star . nu_c = 1.
    pub nu_c_star: Vec<C64>,
}

impl AsymptoticsProbe {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ray,angle,t,g_re,g_im\n");
        for (i, r) in self.rays.iter().enumerate() {
            for (t, g) in r.t.iter().zip(&r.g) {
                s.push_str(&format!("{i},{:.10},{t:.12e},{:.15e},{:.15e}\n", r.angle, g.re, g.im));
            }
        }
        s
    }
}

fn horner_xf(coeffs: &[f64], z: Complex<Xf>) -> Complex<Xf> {
    coeffs.iter().rev().fold(Complex::<Xf>::zero(), |acc, c| acc * z + Complex::new(xf(*c), xf(0.0)))
}

/// Ray limits of rho_n(z; anchor)(1 - z/z_c)/z at the smallest zero, compared with the residue.
#[allow(clippy::too_many_arguments)]
pub fn leading_asymptotics(
    p: &PairPotential,
    bx: &SpatialBox,
    poly: &PartitionPolynomial,
    zs: &ZeroSet,
    anchor: &Configuration,
    truncation: NumeratorTruncation,
    params: &PacmanParams,
    s: &Strategy,
) -> Result<AsymptoticsProbe> {
    params.validate()?;
    let z_c = zs.z_c_extended().ok_or_else(|| KsError::Degenerate("partition polynomial has no zeros".into()))?;
    let zc64 = cplx_f(z_c);
    let n = anchor.len();
    let num = correlation_numerator(p, bx, anchor, truncation.k_max(poly.m_max, n), s)?;
    if num.coeffs.is_empty() {
        return Err(KsError::InvalidParameter("correlation vanishes identically at this anchor".into()));
    }
    let nearest = zs.zeros.iter().map(|w| (w.z - zc64).norm()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    let eta = params.eta.unwrap_or(if nearest.is_finite() { 0.5 * nearest } else { 0.5 * zc64.norm() });
    let coeffs = poly.coeffs_t::<Xf>();
    let xi = |z: Complex<Xf>| {
        coeffs.iter().rev().fold(Complex::<Xf>::zero(), |acc, c| acc * z + Complex::new(*c, xf(0.0)))
    };
    let rho = |z: Complex<Xf>| z.powu(n as u32) * horner_xf(&num.coeffs, z) / xi(z);
    let arg = zc64.arg();
    let rays: Vec<RaySample> =
        params.rays.par_iter().map(|off| ray_limit(rho, z_c, arg + off, eta, params)).collect();
    let k = rays.len() as f64;
    let m_n = rays.iter().map(|r| r.limit).sum::<C64>() / k;
    let ray_spread = rays.iter().map(|r| (r.limit - m_n).norm()).fold(0.0, f64::max);

    let (_, dxi, _) = poly.evaluate_t::<Xf>(z_c);
    let residue = -cplx_f(z_c.powu(n as u32) * horner_xf(&num.coeffs, z_c) / (z_c * z_c * dxi));
    let residue_agreement = (m_n - residue).norm() / residue.norm();
    let converged = ray_spread <= RAY_AGREEMENT_TOL * m_n.norm().max(f64::MIN_POSITIVE);
    if !converged {
        log::warn!("ray limits disagree: spread {ray_spread:e} around {m_n}");
    }
    let simple = zs.certificate.as_ref().is_some_and(|c| c.passes);

    let op = Operator::Companion(build_ks_matrix(poly)?);
    let lambda_c = Complex::<Xf>::one() / z_c;
    let (nu_c, nu_c_star, m) = match companion_eigenvectors::<Xf>(&op, lambda_c) {
        Some((v, u, dot)) if cabs(dot) > 0.0 => {
            let star: Vec<C64> = u.iter().map(|x| cplx_f(*x / dot)).collect();
            let m = star[0];
            (v.iter().map(|x| cplx_f(*x)).collect(), star, Some(m))
        }
        _ => (vec![], vec![], None),
    };
    Ok(AsymptoticsProbe {
        z_c: zc64,
        n,
        anchor: anchor.clone(),
        eta,
        theta: params.theta,
        rays,
        m_n,
        ray_spread,
        residue,
        residue_agreement,
        converged,
        simple,
        m,
        nu_c,
        nu_c_star,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub lambda_c: C64,
    /// r_k = a_{k+1} / a_k.
    pub ratios: Vec<C64>,
    /// |r_k - lambda_c| / |lambda_c|.
    pub deviations: Vec<f64>,
    /// First k from which every later deviation is below 1%.
    pub within_one_percent_from: Option<usize>,
    /// Slope of log|a_k / lambda_c^k| against log k over the second half: d - 1.
    pub fitted_exponent: f64,
    /// round(fitted_exponent) + 1.
    pub detected_order: i64,
    pub fit_window: (usize, usize),
}

/// Ratio test and subexponential-factor fit for Taylor coefficients dominated by a pole at 1/lambda_c.
pub fn coefficient_asymptotics(coeffs: &[f64], lambda_c: C64) -> Result<CoefficientReport> {
    if coeffs.len() < 10 {
        return Err(KsError::Insufficient(format!("{} coefficients, need at least 10", coeffs.len())));
    }
    let lc = lambda_c.norm();
    let ratios: Vec<C64> = coeffs.windows(2).map(|w| C64::new(w[1] / w[0], 0.0)).collect();
    let deviations: Vec<f64> = ratios.iter().map(|r| (r - lambda_c).norm() / lc).collect();
    let within_one_percent_from = match deviations.iter().rposition(|d| !(*d < 0.01)) {
        None => Some(0),
        Some(i) if i + 1 < deviations.len() => Some(i + 1),
        _ => None,
    };
    let last = coeffs.len() - 1;
    let lo = (last / 2).max(1);
    let pts: Vec<(f64, f64)> = (lo..=last)
        .filter(|&k| coeffs[k] != 0.0)
        .map(|k| ((k as f64).ln(), coeffs[k].abs().ln() - k as f64 * lc.ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(CoefficientReport {
        lambda_c,
        ratios,
        deviations,
        within_one_percent_from,
        fitted_exponent,
        detected_order: fitted_exponent.round() as i64 + 1,
        fit_window: (lo, last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configint::IntegralTable;
    use crate::partition::zeros;

    #[test]
    fn synthetic_simple_pole_is_exact() {
        let zc = Complex::new(xf(-0.3), xf(0.0));
        let one = Complex::<Xf>::one();
        let f = |z: Complex<Xf>| z / (one - z / zc);
        let params = PacmanParams::default();
        for off in &params.rays {
            let r = ray_limit(f, zc, PI + off, 0.1, &params);
            for g in &r.g {
                assert!((g - 1.0).norm() < 1e-15);
            }
            assert!((r.limit - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn ideal_single_particle_residue() {
        let bx = SpatialBox::interval(2.0);
        let poly = PartitionPolynomial::assemble(&IntegralTable::ideal(&bx, 1), None);
        let zs = zeros(&poly).unwrap();
        let probe = leading_asymptotics(
            &PairPotential::ideal(),
            &bx,
            &poly,
            &zs,
            &Configuration::line(&[1.0]),
            NumeratorTruncation::TotalParticles,
            &PacmanParams::default(),
            &Strategy::default(),
        )
        .unwrap();
        assert!((probe.z_c + 0.5).norm() < 1e-15);
        assert!((probe.residue - 1.0).norm() < 1e-14);
        assert!((probe.m_n - 1.0).norm() < 1e-12);
        assert!(probe.converged);
    }

    #[test]
    fn geometric_and_double_pole_coefficients() {
        let lc: f64 = 2.5;
        let geo: Vec<f64> = (0..40).map(|k| lc.powi(k)).collect();
        let r = coefficient_asymptotics(&geo, C64::new(lc, 0.0)).unwrap();
        assert!(r.deviations.iter().all(|d| *d < 1e-14));
        assert_eq!(r.within_one_percent_from, Some(0));
        assert!(r.fitted_exponent.abs() < 1e-10);
        assert_eq!(r.detected_order, 1);
        let double: Vec<f64> = (0..40).map(|k| (k + 1) as f64 * lc.powi(k)).collect();
        let r2 = coefficient_asymptotics(&double, C64::new(lc, 0.0)).unwrap();
        assert!((r2.fitted_exponent - 1.0).abs() < 0.1);
        assert_eq!(r2.detected_order, 2);
        assert!(coefficient_asymptotics(&geo[..5], C64::new(lc, 0.0)).is_err());
    }
}
