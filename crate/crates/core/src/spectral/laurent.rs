use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Operator, SpectralReport};
use crate::error::{KsError, Result};
use crate::numeric::{cabs, cplx_f, CMatrix, Precision, Real, Xf, C64};

pub const DEFAULT_NODES: usize = 64;
pub const MAX_NODES: usize = 1024;
pub const IDEMPOTENCY_TOL: f64 = 1e-10;
/// ||D|| below this fraction of ||K|| counts as zero.
pub const NILPOTENT_TOL: f64 = 1e-8;
/// Singular values of P below this fraction of the largest do not count towards its rank.
pub const RANK_TOL: f64 = 1e-8;

/// Relative defects of the identities tying P, S, D and K together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defects {
    /// ||P^2 - P|| / ||P||.
    pub idempotency: f64,
    /// ||P S|| / ||P||.
    pub ps: f64,
    /// ||S P|| / ||P||.
    pub sp: f64,
    /// ||(K - lambda_c) S - (I - P)|| / ||P||.
    pub resolvent: f64,
    /// ||K P - P K|| / (||K|| ||P||).
    pub commutator: f64,
    /// ||P D - D|| / (||K|| ||P||).
    pub pd: f64,
    /// ||D P - D|| / (||K|| ||P||).
    pub dp: f64,
    /// ||D - (K - lambda_c) P|| / (||K|| ||P||): contour D against the product.
    pub d_routes: f64,
}

impl Defects {
    pub fn max(&self) -> f64 {
        [self.idempotency, self.ps, self.sp, self.resolvent, self.commutator, self.pd, self.dp, self.d_routes]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ExtendedParts {
    pub p: CMatrix<Xf>,
    pub s: CMatrix<Xf>,
    pub d: CMatrix<Xf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentData {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
    pub precision: Precision,
    pub p: CMatrix<f64>,
    pub s: CMatrix<f64>,
    pub d: CMatrix<f64>,
    pub pole_order: usize,
    pub rank_p: usize,
    pub singular_values_p: Vec<f64>,
    pub norm_p: f64,
    pub norm_k: f64,
    pub norm_d: f64,
    pub defects: Defects,
    /// Closed-form condition estimate ||P||_1 from the eigenvectors (companion only).
    pub condition_estimate: Option<f64>,
    /// ||P alpha - nu*(alpha) nu|| / ||P alpha|| for alpha = e_1 (companion only).
    pub residue_defect: Option<f64>,
    pub nu_c: Option<Vec<C64>>,
    /// Left eigenvector normalized so that nu_c_star . nu_c = 1.
    pub nu_c_star: Option<Vec<C64>>,
    #[serde(skip)]
    pub extended: Option<Box<ExtendedParts>>,
}

struct Parts<T> {
    p: CMatrix<T>,
    s: CMatrix<T>,
    d: CMatrix<T>,
    nodes: usize,
    radius: f64,
}

fn contour_radius(report: &SpectralReport) -> Result<f64> {
    let lc = report.lambda_c;
    let r = match report.isolation() {
        Some(d) => 0.5 * d,
        None => 0.5 * lc.norm().max(1.0),
    };
    let cluster = report.cluster();
    for (i, l) in report.eigenvalues.iter().enumerate() {
        let d = (l - lc).norm();
        if cluster.contains(&i) {
            if d >= r {
                return Err(KsError::ContourError(format!("cluster around {lc} is wider than the contour radius {r:e}")));
            }
        } else if (d - r).abs() <= 1e-9 * r {
            return Err(KsError::ContourError(format!("eigenvalue {l} lies on the contour")));
        }
    }
    Ok(r)
}

fn unit_root<T: Real>(k: usize, n: usize) -> Complex<T> {
    let t = T::of(2.0) * T::PI() * T::of_usize(k) / T::of_usize(n);
    Complex::new(t.cos(), t.sin())
}

/// Trapezoid sums for P = -(1/2 pi i) oint R, S = (1/2 pi i) oint R / (lambda - lambda_c)
/// and D = -(1/2 pi i) oint (lambda - lambda_c) R, doubling the node count until P is idempotent to tolerance.
fn contour<T: Real>(op: &Operator, report: &SpectralReport, nodes0: usize) -> Result<Parts<T>> {
    let m = op.dim();
    let lc = report.lambda_c_t::<T>();
    let radius = contour_radius(report)?;
    let r = T::of(radius);
    let mut p_acc = CMatrix::<T>::zeros(m);
    let mut s_acc = CMatrix::<T>::zeros(m);
    let mut d_acc = CMatrix::<T>::zeros(m);
    let add_node = |k: usize, n: usize, acc: [&mut CMatrix<T>; 3]| -> Result<()> {
        let [p_acc, s_acc, d_acc] = acc;
        let w = unit_root::<T>(k, n) * r;
        let res = op
            .resolvent_matrix(lc + w)
            .ok_or_else(|| KsError::ContourError(format!("resolvent singular at node {k} of {n}")))?;
        p_acc.axpy(w, &res);
        s_acc.axpy(Complex::new(T::one(), T::zero()), &res);
        d_acc.axpy(w * w, &res);
        Ok(())
    };
    let norm_k = op.norm1();
    let mut n = nodes0.max(4);
    for k in 0..n {
        add_node(k, n, [&mut p_acc, &mut s_acc, &mut d_acc])?;
    }
    let mut prev_d = f64::INFINITY;
    loop {
        let inv = Complex::new(T::one() / T::of_usize(n), T::zero());
        let p = p_acc.scale(-inv);
        let s = s_acc.scale(inv);
        let d = d_acc.scale(-inv);
        let np = p.norm1();
        let idem = p.matmul(&p).sub(&p).norm1() / np.max(f64::MIN_POSITIVE);
        if n >= MAX_NODES {
            return Ok(Parts { p, s, d, nodes: n, radius });
        }
        if idem <= IDEMPOTENCY_TOL {
            // D converges at the same geometric rate; a D that stops shrinking is genuine
            let nd = d.norm1();
            if nd <= NILPOTENT_TOL * norm_k || nd > 0.5 * prev_d {
                return Ok(Parts { p, s, d, nodes: n, radius });
            }
            prev_d = nd;
        }
        for k in 0..n {
            add_node(2 * k + 1, 2 * n, [&mut p_acc, &mut s_acc, &mut d_acc])?;
        }
        n *= 2;
    }
}

/// Right eigenvector (z^m) and left eigenvector of the companion matrix at lambda, with u . v.
pub(crate) fn companion_eigenvectors<T: Real>(op: &Operator, lambda: Complex<T>) -> Option<(Vec<Complex<T>>, Vec<Complex<T>>, Complex<T>)> {
    let Operator::Companion(k) = op else { return None };
    let m = k.dim();
    let row = k.row_t::<T>();
    let z = Complex::new(T::one(), T::zero()) / lambda;
    let mut v = Vec::with_capacity(m);
    let mut zp = z;
    for _ in 0..m {
        v.push(zp);
        zp = zp * z;
    }
    let mut u = Vec::with_capacity(m);
    u.push(Complex::new(T::one(), T::zero()));
    for j in 0..m - 1 {
        let next = lambda * u[j] - u[0] * row[j];
        u.push(next);
    }
    let dot = u.iter().zip(&v).fold(Complex::<T>::zero(), |acc, (a, b)| acc + *a * *b);
    Some((v, u, dot))
}

/// ||P||_1 from the eigenvector formula P = v u^T / (u . v).
fn condition_estimate(op: &Operator, report: &SpectralReport) -> Option<f64> {
    let (v, u, dot) = companion_eigenvectors::<Xf>(op, report.lambda_c_t())?;
    let nv: f64 = v.iter().map(|x| cabs(*x)).sum();
    let nu = u.iter().map(|x| cabs(*x)).fold(0.0, f64::max);
    Some(nv * nu / cabs(dot))
}

fn dk<T: Real>(op: &Operator, p: &CMatrix<T>, lc: Complex<T>) -> CMatrix<T> {
    let kp = op.mul_left(p);
    let mut d = kp;
    d.axpy(-lc, p);
    d
}

fn pole_order<T: Real>(d: &CMatrix<T>, norm_k: f64, max_order: usize) -> usize {
    let nd = d.norm1();
    if nd <= NILPOTENT_TOL * norm_k {
        return 1;
    }
    let mut power = d.clone();
    for k in 2..=max_order.max(2) {
        power = power.matmul(d);
        if power.norm1() <= NILPOTENT_TOL * norm_k * nd.powi(k as i32 - 1) {
            return k;
        }
    }
    max_order.max(2) + 1
}

fn finish<T: Real>(op: &Operator, report: &SpectralReport, parts: &Parts<T>, precision: Precision) -> LaurentData {
    let m = op.dim();
    let lc = report.lambda_c_t::<T>();
    let p = &parts.p;
    let s = &parts.s;
    let norm_p = p.norm1().max(f64::MIN_POSITIVE);
    let norm_k = op.norm1();
    let d = &parts.d;
    let norm_d = d.norm1();
    let kp = op.mul_left(p);
    let pk = op.mul_right(p);
    let pp = p.matmul(p);
    let ks = {
        let mut a = op.mul_left(s);
        a.axpy(-lc, s);
        a
    };
    let i_minus_p = CMatrix::<T>::identity(m).sub(p);
    let scale_kp = norm_k * norm_p;
    let defects = Defects {
        idempotency: pp.sub(p).norm1() / norm_p,
        ps: p.matmul(s).norm1() / norm_p,
        sp: s.matmul(p).norm1() / norm_p,
        resolvent: ks.sub(&i_minus_p).norm1() / norm_p,
        commutator: kp.sub(&pk).norm1() / scale_kp,
        pd: p.matmul(d).sub(d).norm1() / scale_kp,
        dp: d.matmul(p).sub(d).norm1() / scale_kp,
        d_routes: dk(op, p, lc).sub(d).norm1() / scale_kp,
    };
    let p64 = p.to_c64();
    let sv = p64.singular_values();
    let rank_p = sv.iter().filter(|x| **x > RANK_TOL * sv[0]).count();
    let pole = pole_order(d, norm_k, rank_p.max(1));
    let (nu_c, nu_c_star, residue_defect) = match companion_eigenvectors::<T>(op, lc) {
        Some((v, u, dot)) => {
            let col0 = p.col(0);
            let scale = u[0] / dot;
            let diff: f64 = col0.iter().zip(&v).map(|(a, b)| cabs(*a - scale * *b)).sum();
            let rel = diff / col0.iter().map(|a| cabs(*a)).sum::<f64>().max(f64::MIN_POSITIVE);
            let star: Vec<C64> = u.iter().map(|x| cplx_f(*x / dot)).collect();
            (Some(v.iter().map(|x| cplx_f(*x)).collect()), Some(star), Some(rel))
        }
        None => (None, None, None),
    };
    LaurentData {
        center: report.lambda_c,
        radius: parts.radius,
        nodes: parts.nodes,
        precision,
        p: p64,
        s: s.to_c64(),
        d: d.to_c64(),
        pole_order: pole,
        rank_p,
        singular_values_p: sv,
        norm_p,
        norm_k,
        norm_d,
        defects,
        condition_estimate: condition_estimate(op, report),
        residue_defect,
        nu_c,
        nu_c_star,
        extended: None,
    }
}

/// Riesz projection at lambda_c by the trapezoid rule on a circle of half the spectral gap,
/// together with S, D and the pole order.
pub fn riesz_projection(
    op: &Operator,
    report: &SpectralReport,
    nodes: Option<usize>,
    precision: Precision,
) -> Result<LaurentData> {
    let n0 = nodes.unwrap_or(DEFAULT_NODES);
    let tier = match precision {
        Precision::Auto => match condition_estimate(op, report) {
            Some(kappa) => Precision::for_condition(kappa),
            None => Precision::Double,
        },
        t => t,
    };
    if tier == Precision::Double {
        let parts = contour::<f64>(op, report, n0)?;
        let data = finish(op, report, &parts, Precision::Double);
        if precision == Precision::Double || data.defects.idempotency <= IDEMPOTENCY_TOL {
            return Ok(data);
        }
        log::info!("escalating Riesz projection to extended precision");
    }
    let parts = contour::<Xf>(op, report, n0)?;
    let mut data = finish(op, report, &parts, Precision::Extended);
    data.extended = Some(Box::new(ExtendedParts { p: parts.p, s: parts.s, d: parts.d }));
    Ok(data)
}

/// D = (K - lambda_c) P and the pole order 1 + (nilpotency index of D on range P).
/// With `from_contour` D is the contour integral of (lambda - lambda_c) R; otherwise the product.
pub fn nilpotent_and_pole(
    op: &Operator,
    report: &SpectralReport,
    data: &LaurentData,
    from_contour: bool,
) -> (CMatrix<f64>, usize) {
    let norm_k = op.norm1();
    let max = data.rank_p.max(1);
    match (&data.extended, from_contour) {
        (Some(ext), true) => (ext.d.to_c64(), pole_order(&ext.d, norm_k, max)),
        (Some(ext), false) => {
            let d = dk(op, &ext.p, report.lambda_c_t::<Xf>());
            let order = pole_order(&d, norm_k, max);
            (d.to_c64(), order)
        }
        (None, true) => (data.d.clone(), pole_order(&data.d, norm_k, max)),
        (None, false) => {
            let d = dk(op, &data.p, report.lambda_c);
            let order = pole_order(&d, norm_k, max);
            (d, order)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConvergence {
    /// ||(K / lambda_c)^n - P||_1 for n = 0..=n_max.
    pub norms: Vec<f64>,
    pub fitted_ratio: f64,
    /// |lambda_2 / lambda_c|.
    pub expected_ratio: f64,
    /// |fitted / expected - 1|.
    pub ratio_error: f64,
    /// Smallest A with norms[n] <= A expected^n for n >= 1.
    pub envelope: f64,
    pub fit_window: (usize, usize),
}

impl PowerConvergence {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,norm,envelope\n");
        for (n, e) in self.norms.iter().enumerate() {
            s.push_str(&format!("{n},{e:.12e},{:.12e}\n", self.envelope * self.expected_ratio.powi(n as i32)));
        }
        s
    }
}

fn power_norms<T: Real>(op: &Operator, p: &CMatrix<T>, lc: Complex<T>, n_max: usize) -> Vec<f64> {
    let m = op.dim();
    let inv = Complex::new(T::one(), T::zero()) / lc;
    let mut a = CMatrix::<T>::identity(m);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(a.sub(p).norm1());
    for _ in 0..n_max {
        a = op.mul_left(&a).scale(inv);
        out.push(a.sub(p).norm1());
    }
    out
}

/// ||(lambda_c^{-1} K)^n - P|| with a log-linear fit over the second half of the range.
pub fn power_convergence(op: &Operator, report: &SpectralReport, data: &LaurentData, n_max: usize) -> PowerConvergence {
    let norms = match &data.extended {
        Some(ext) => power_norms(op, &ext.p, report.lambda_c_t::<Xf>(), n_max),
        None => power_norms(op, &data.p, report.lambda_c, n_max),
    };
    let lo = (n_max / 2).max(1);
    let pts: Vec<(f64, f64)> = (lo..=n_max)
        .filter(|&n| norms[n] > 0.0 && norms[n].is_finite())
        .map(|n| (n as f64, norms[n].ln()))
        .collect();
    let fitted_ratio = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    } else {
        0.0
    };
    let expected_ratio = report.margin;
    let envelope = (1..=n_max)
        .map(|n| if expected_ratio > 0.0 { norms[n] / expected_ratio.powi(n as i32) } else { f64::INFINITY })
        .fold(0.0, f64::max);
    PowerConvergence {
        norms,
        fitted_ratio,
        expected_ratio,
        ratio_error: if expected_ratio > 0.0 { (fitted_ratio / expected_ratio - 1.0).abs() } else { f64::INFINITY },
        envelope,
        fit_window: (lo, n_max),
    }
}
