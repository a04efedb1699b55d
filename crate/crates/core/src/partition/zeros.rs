use std::cmp::Ordering;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::PartitionPolynomial;
use crate::error::{KsError, Result};
use crate::numeric::poly::{aberth, conjugate_symmetrize, horner, monic_companion, real_eigenvalues, relative_residual};
use crate::numeric::{cabs, cplx_f, xf, Real, Xf, C64};

pub const RESIDUAL_TOL: f64 = 1e-12;
pub const TIE_TOL: f64 = 1e-9;
pub const CERTIFICATE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroInfo {
    pub z: C64,
    /// |Xi(z)| / sum |c_m| |z|^m.
    pub residual: f64,
    /// Distance to the nearest other zero relative to |z|.
    pub gap: f64,
}

/// Evidence that the minimal-modulus zero is simple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplicityCertificate {
    pub z_c: C64,
    /// |Xi'(z_c)| delta / max_{|z - z_c| = delta} |Xi(z)|; equals 1 for a linear factor.
    pub scaled_derivative: f64,
    pub delta: f64,
    pub derivative: f64,
    /// |z_c Xi'(z_c)| with Xi(0) = 1.
    pub activity_derivative: f64,
    pub min_gap: f64,
    pub passes: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<ZeroInfo>,
    /// Indices of the minimal-modulus zeros, negative real first.
    pub smallest: Vec<usize>,
    pub certificate: Option<SimplicityCertificate>,
    pub degree: usize,
    #[serde(skip)]
    pub extended: Vec<Complex<Xf>>,
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn z_c(&self) -> Option<C64> {
        self.smallest.first().map(|&i| self.zeros[i].z)
    }

    pub fn z_c_extended(&self) -> Option<Complex<Xf>> {
        self.smallest.first().map(|&i| self.extended[i])
    }

    pub fn min_modulus(&self) -> Option<f64> {
        self.z_c().map(|z| z.norm())
    }

    /// CSV with columns re, im, residual, is_smallest, gap.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,residual,is_smallest,gap\n");
        for (i, z) in self.zeros.iter().enumerate() {
            let small = u8::from(self.smallest.contains(&i));
            s.push_str(&format!("{:.17e},{:.17e},{:.3e},{},{:.6e}\n", z.z.re, z.z.im, z.residual, small, z.gap));
        }
        s
    }
}

/// All zeros of Xi: balanced companion eigenvalues of the rescaled polynomial,
/// polished by Aberth-Ehrlich iteration in f64 and then in 40-digit arithmetic.
pub fn zeros(poly: &PartitionPolynomial) -> Result<ZeroSet> {
    let deg = poly.degree();
    if deg == 0 {
        return Ok(ZeroSet { zeros: vec![], smallest: vec![], certificate: None, degree: 0, extended: vec![] });
    }
    let c: Vec<Xf> = poly.coeffs_t::<Xf>()[..=deg].to_vec();
    let s = xf(poly.scale);
    let mut sp = xf(1.0);
    let d: Vec<Xf> = c
        .iter()
        .map(|ck| {
            let v = *ck * sp;
            sp *= s;
            v
        })
        .collect();
    let lead = d[deg];
    let lower: Vec<f64> = d[..deg].iter().map(|x| (*x / lead).to_f()).collect();
    let init = real_eigenvalues(&monic_companion(&lower))
        .ok_or_else(|| KsError::Degenerate(format!("Schur iteration failed for degree {deg}")))?;
    let d64: Vec<f64> = d.iter().map(|x| x.to_f()).collect();
    let (w64, _) = aberth(&d64, &init, 500);
    let w64: Vec<C64> = w64.into_iter().map(|w| if w.re.is_finite() && w.im.is_finite() { w } else { C64::new(0.0, 0.0) }).collect();
    let (mut w, _) = aberth(&d, &split_real_pairs(w64), 100);
    conjugate_symmetrize(&mut w, 1e-30);
    let zs: Vec<Complex<Xf>> = w.iter().map(|wi| *wi * s).collect();
    build_zero_set(&c, zs, deg)
}

/// Real iterates of a real polynomial stay real, so close real pairs get
/// opposite imaginary offsets to let them reach a conjugate pair.
fn split_real_pairs(mut w: Vec<C64>) -> Vec<C64> {
    let mut sign = 1.0;
    for i in 0..w.len() {
        if w[i].im != 0.0 {
            continue;
        }
        let gap = (0..w.len())
            .filter(|&j| j != i)
            .map(|j| (w[i] - w[j]).norm())
            .fold(f64::INFINITY, f64::min);
        if gap < 1e-3 * w[i].norm() {
            w[i].im = sign * gap;
            sign = -sign;
        }
    }
    w
}

fn build_zero_set(c: &[Xf], zs: Vec<Complex<Xf>>, deg: usize) -> Result<ZeroSet> {
    let z64: Vec<C64> = zs.iter().map(|z| cplx_f(*z)).collect();
    let mut infos = Vec::with_capacity(zs.len());
    for (i, z) in zs.iter().enumerate() {
        let residual = relative_residual(c, *z);
        if !(residual <= RESIDUAL_TOL) {
            return Err(KsError::Degenerate(format!(
                "zero {} has relative residual {residual:e} above {RESIDUAL_TOL:e}",
                z64[i]
            )));
        }
        let gap = z64
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, w)| cabs(*z - Complex::new(xf(w.re), xf(w.im))))
            .fold(f64::INFINITY, f64::min)
            / cabs(*z).max(f64::MIN_POSITIVE);
        infos.push(ZeroInfo { z: z64[i], residual, gap });
    }
    let smallest = order_smallest(&z64);
    let mut set = ZeroSet { zeros: infos, smallest, certificate: None, degree: deg, extended: zs };
    set.certificate = Some(certify(c, &set));
    Ok(set)
}

fn order_smallest(z: &[C64]) -> Vec<usize> {
    let rmin = z.iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min);
    let mut idx: Vec<usize> = (0..z.len()).filter(|&i| z[i].norm() <= rmin * (1.0 + TIE_TOL)).collect();
    let key = |w: &C64| {
        let neg_real = w.im == 0.0 && w.re < 0.0;
        (u8::from(!neg_real), (w.arg().abs() - std::f64::consts::PI).abs(), w.im)
    };
    idx.sort_by(|&a, &b| key(&z[a]).partial_cmp(&key(&z[b])).unwrap_or(Ordering::Equal));
    idx
}

fn certify(c: &[Xf], set: &ZeroSet) -> SimplicityCertificate {
    let i = set.smallest[0];
    let zc = set.extended[i];
    let zc64 = set.zeros[i].z;
    let min_gap = set.zeros[i].gap;
    let abs_gap = min_gap * zc64.norm();
    let delta = if abs_gap.is_finite() { 0.5 * abs_gap } else { 0.5 * zc64.norm() };
    let (_, dp, _) = horner(c, zc);
    let derivative = cabs(dp);
    let mut circle_max = 0.0f64;
    let nodes = 64;
    for k in 0..nodes {
        let t = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        let z = zc + Complex::new(xf(delta * t.cos()), xf(delta * t.sin()));
        let (p, _, _) = horner(c, z);
        circle_max = circle_max.max(cabs(p));
    }
    let scaled = if circle_max > 0.0 { derivative * delta / circle_max } else { 0.0 };
    let passes = scaled > CERTIFICATE_TOL && min_gap > CERTIFICATE_TOL && set.smallest.len() == 1;
    SimplicityCertificate {
        z_c: zc64,
        scaled_derivative: scaled,
        delta,
        derivative,
        activity_derivative: derivative * zc64.norm(),
        min_gap,
        passes,
    }
}

/// Minimal-modulus zero and its certificate.
pub fn smallest_zero(zs: &ZeroSet) -> Result<(C64, SimplicityCertificate)> {
    match (&zs.z_c(), &zs.certificate) {
        (Some(z), Some(c)) => Ok((*z, c.clone())),
        _ => Err(KsError::Insufficient("zero set is empty".into())),
    }
}

/// Newton refinement of a zero in type `T`, starting from its extended value.
pub fn refine_zero<T: Real>(poly: &PartitionPolynomial, z0: Complex<Xf>) -> Complex<T> {
    let c = poly.coeffs_t::<T>();
    let z = Complex::new(T::of_xf(z0.re), T::of_xf(z0.im));
    crate::numeric::poly::newton(&c, z, 20)
}
