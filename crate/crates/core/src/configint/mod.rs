//! Configuration integrals Z_m and anchored integrals, exact, by quadrature or sampled.

pub mod cache;
pub mod exact;
pub mod quadrature;
pub mod sampling;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{KsError, Result};
use crate::numeric::{xf, xf_join, xf_split, Real, Xf, XfParts};
use crate::potential::{distance, Configuration, Family, PairPotential};
pub use exact::{exact_hardrod_z, hardrod_anchored, hardrod_anchored_all, hardrod_z_xf};
use quadrature::Integrand;

pub const SCHEMA_VERSION: u32 = 2;

/// Axis-aligned box [0, e_1] x ... x [0, e_nu].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialBox {
    pub extents: Vec<f64>,
}

impl SpatialBox {
    pub fn new(extents: Vec<f64>) -> Result<Self> {
        if extents.is_empty() || extents.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(KsError::InvalidParameter("box extents must be positive".into()));
        }
        Ok(SpatialBox { extents })
    }

    pub fn interval(l: f64) -> Self {
        SpatialBox::new(vec![l]).expect("positive length")
    }

    pub fn cube(l: f64, nu: usize) -> Self {
        SpatialBox::new(vec![l; nu]).expect("positive length")
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.extents).all(|(c, e)| *c >= 0.0 && *c <= *e)
    }

    pub fn contains_all(&self, c: &Configuration) -> bool {
        (0..c.len()).all(|i| self.contains(c.point(i)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
    Sampling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    /// Preferred method; falls back when unavailable.
    pub prefer: Option<Method>,
    /// Total Gauss nodes across the box extent (per axis for nu >= 2).
    pub order: usize,
    pub dim_cap: usize,
    pub samples: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy { prefer: None, order: 64, dim_cap: 6, samples: 1 << 16, replicates: 8, seed: 42 }
    }
}

impl Strategy {
    pub fn with(method: Method) -> Self {
        Strategy { prefer: Some(method), ..Strategy::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEntry {
    pub m: usize,
    #[serde(with = "crate::numeric::logmag")]
    pub log_value: f64,
    pub sign: i8,
    pub error: f64,
    pub method: Method,
    /// Value as an unevaluated sum hi + lo.
    pub value: XfParts,
}

impl IntegralEntry {
    fn new(m: usize, value: Xf, error: f64, method: Method) -> Self {
        let v = value.to_f();
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        IntegralEntry {
            m,
            log_value: if v == 0.0 { f64::NEG_INFINITY } else { v.abs().ln() },
            sign,
            error,
            method,
            value: xf_split(value),
        }
    }

    pub fn value_xf(&self) -> Xf {
        xf_join(self.value)
    }

    pub fn value_f64(&self) -> f64 {
        self.value[0] + self.value[1] + self.value[2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralTable {
    pub schema_version: u32,
    pub fingerprint: String,
    pub potential: PairPotential,
    #[serde(rename = "box")]
    pub bx: SpatialBox,
    #[serde(rename = "M")]
    pub m_max: usize,
    pub strategy: Strategy,
    pub entries: Vec<IntegralEntry>,
}

impl IntegralTable {
    pub fn z(&self, m: usize) -> f64 {
        self.entries[m].value_f64()
    }

    pub fn z_xf(&self, m: usize) -> Xf {
        self.entries[m].value_xf()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value_f64()).collect()
    }

    pub fn truncated(&self, m_max: usize) -> IntegralTable {
        let mut t = self.clone();
        t.m_max = m_max.min(self.m_max);
        t.entries.truncate(t.m_max + 1);
        t
    }

    /// Constant table Z_m = |Lambda|^m for an ideal gas.
    pub fn ideal(bx: &SpatialBox, m_max: usize) -> IntegralTable {
        let pot = PairPotential::ideal().with_dimension(bx.dimension());
        build_table(&pot, bx, m_max, &Strategy::default(), None).expect("ideal table")
    }
}

/// Hash of the potential and the box.
pub fn fingerprint(p: &PairPotential, bx: &SpatialBox) -> String {
    let mut h = Sha256::new();
    h.update(p.canonical().as_bytes());
    h.update(serde_json::to_string(bx).expect("box serializes").as_bytes());
    hex::encode(&h.finalize()[..16])
}

fn is_ideal(p: &PairPotential) -> bool {
    match &p.family {
        Family::Ideal => true,
        Family::PositiveStep { epsilon, .. } => *epsilon == 0.0,
        _ => false,
    }
}

pub fn exact_available(p: &PairPotential, bx: &SpatialBox) -> bool {
    is_ideal(p) || matches!(p.family, Family::HardCore { .. }) && bx.dimension() == 1
}

fn check_dims(p: &PairPotential, bx: &SpatialBox) -> Result<()> {
    if p.dimension != bx.dimension() {
        return Err(KsError::InvalidParameter(format!(
            "potential dimension {} differs from box dimension {}",
            p.dimension,
            bx.dimension()
        )));
    }
    Ok(())
}

fn anchor_weight(p: &PairPotential, anchor: &Configuration) -> f64 {
    p.boltzmann_weight(anchor)
}

fn exact_anchored_all<T: Real>(p: &PairPotential, bx: &SpatialBox, anchor: &Configuration, m_max: usize) -> Vec<T> {
    if is_ideal(p) {
        let v = T::of(bx.volume());
        return (0..=m_max).map(|m| exact::powi(v, m)).collect();
    }
    let Family::HardCore { a } = p.family else { unreachable!("exact path requires hard rods") };
    hardrod_anchored_all(bx.extents[0], a, &anchor.coords, m_max)
}

/// Exact anchored integrals in f64 when a closed form exists.
pub fn exact_anchored_f64(p: &PairPotential, bx: &SpatialBox, anchor: &Configuration, m_max: usize) -> Option<Vec<f64>> {
    exact_available(p, bx).then(|| exact_anchored_all(p, bx, anchor, m_max))
}

/// Runs `f` over Lambda^m with per-point anchored Boltzmann factors.
fn with_anchored_integrand<R>(
    p: &PairPotential,
    anchor: &Configuration,
    m: usize,
    f: impl FnOnce(&Integrand<'_>) -> R,
) -> R {
    let nu = p.dimension;
    let w0 = anchor_weight(p, anchor);
    let step = |pts: &[f64]| {
        let k = pts.len() / nu - 1;
        let y = &pts[k * nu..];
        let mut w = 1.0;
        for i in 0..anchor.len() {
            w *= p.boltzmann(distance(y, anchor.point(i)));
            if w == 0.0 {
                return 0.0;
            }
        }
        for j in 0..k {
            w *= p.boltzmann(distance(y, &pts[j * nu..(j + 1) * nu]));
            if w == 0.0 {
                return 0.0;
            }
        }
        w
    };
    let tail = |_: &[f64]| w0;
    let fixed: Vec<f64> = if nu == 1 { anchor.coords.clone() } else { Vec::new() };
    let integrand = Integrand { m, step: &step, tail: &tail, fixed: &fixed, reach: m.max(1) };
    f(&integrand)
}

pub fn quadrature_z(p: &PairPotential, bx: &SpatialBox, m: usize, order: usize) -> Result<(f64, f64)> {
    quadrature_anchored(p, bx, &Configuration::empty(bx.dimension()), m, order, Strategy::default().dim_cap)
}

pub fn quadrature_anchored(
    p: &PairPotential,
    bx: &SpatialBox,
    anchor: &Configuration,
    m: usize,
    order: usize,
    dim_cap: usize,
) -> Result<(f64, f64)> {
    check_dims(p, bx)?;
    if anchor_weight(p, anchor) == 0.0 {
        return Ok((0.0, 0.0));
    }
    with_anchored_integrand(p, anchor, m, |f| quadrature::integrate(p, bx, f, order, dim_cap))
}

pub fn sampled_z(p: &PairPotential, bx: &SpatialBox, m: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    sampled_anchored(p, bx, &Configuration::empty(bx.dimension()), m, samples, seed)
}

pub fn sampled_anchored(
    p: &PairPotential,
    bx: &SpatialBox,
    anchor: &Configuration,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dims(p, bx)?;
    if samples < 1000 {
        return Err(KsError::InvalidParameter("sampling needs at least 1000 points".into()));
    }
    if anchor_weight(p, anchor) == 0.0 {
        return Ok((0.0, 0.0));
    }
    let replicates = Strategy::default().replicates;
    with_anchored_integrand(p, anchor, m, |f| sampling::sample(bx, f, samples, replicates, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchoredIntegral {
    pub anchor: Configuration,
    pub m: usize,
    pub value: XfParts,
    pub error: f64,
    pub method: Method,
}

impl AnchoredIntegral {
    pub fn value_f64(&self) -> f64 {
        self.value[0] + self.value[1] + self.value[2]
    }

    pub fn value_xf(&self) -> Xf {
        xf_join(self.value)
    }
}

fn resolve_method(p: &PairPotential, bx: &SpatialBox, m: usize, s: &Strategy) -> Method {
    let exact = exact_available(p, bx);
    let fits = bx.dimension() * m <= s.dim_cap;
    match s.prefer {
        Some(Method::Sampling) => Method::Sampling,
        Some(Method::Quadrature) if fits => Method::Quadrature,
        Some(Method::Quadrature) => Method::Sampling,
        _ if exact => Method::Exact,
        _ if fits => Method::Quadrature,
        _ => Method::Sampling,
    }
}

/// All anchored integrals for m = 0..=m_max.
pub fn anchored_all(
    p: &PairPotential,
    bx: &SpatialBox,
    anchor: &Configuration,
    m_max: usize,
    s: &Strategy,
) -> Result<Vec<AnchoredIntegral>> {
    check_dims(p, bx)?;
    let exact = if exact_available(p, bx) && s.prefer.is_none_or(|m| m == Method::Exact) {
        Some(exact_anchored_all::<Xf>(p, bx, anchor, m_max))
    } else {
        None
    };
    (0..=m_max)
        .map(|m| {
            let method = if exact.is_some() { Method::Exact } else { resolve_method(p, bx, m, s) };
            let (value, error) = match method {
                Method::Exact => (exact.as_ref().unwrap()[m], 0.0),
                Method::Quadrature => {
                    let (v, e) = quadrature_anchored(p, bx, anchor, m, s.order, s.dim_cap)?;
                    (xf(v), e)
                }
                Method::Sampling => {
                    let (v, e) = sampled_anchored(p, bx, anchor, m, s.samples, s.seed)?;
                    (xf(v), e)
                }
            };
            Ok(AnchoredIntegral {
                anchor: anchor.clone(),
                m,
                value: xf_split(value),
                error,
                method,
            })
        })
        .collect()
}

pub fn anchored_integral(
    p: &PairPotential,
    bx: &SpatialBox,
    anchor: &Configuration,
    m: usize,
    s: &Strategy,
) -> Result<AnchoredIntegral> {
    if exact_available(p, bx) && s.prefer.is_none_or(|x| x == Method::Exact) {
        return Ok(anchored_all(p, bx, anchor, m, s)?.pop().unwrap());
    }
    check_dims(p, bx)?;
    let method = resolve_method(p, bx, m, s);
    let (v, e) = match method {
        Method::Quadrature => quadrature_anchored(p, bx, anchor, m, s.order, s.dim_cap)?,
        _ => sampled_anchored(p, bx, anchor, m, s.samples, s.seed)?,
    };
    Ok(AnchoredIntegral { anchor: anchor.clone(), m, value: [v, 0.0, 0.0], error: e, method })
}

/// Table of Z_0..Z_M, served from `cache_dir` when a compatible entry exists.
pub fn build_table(
    p: &PairPotential,
    bx: &SpatialBox,
    m_max: usize,
    s: &Strategy,
    cache_dir: Option<&std::path::Path>,
) -> Result<IntegralTable> {
    p.validate()?;
    check_dims(p, bx)?;
    let fp = fingerprint(p, bx);
    if let Some(dir) = cache_dir {
        if let Some(t) = cache::load(dir, &fp, m_max, s) {
            return Ok(t);
        }
    }
    let empty = Configuration::empty(bx.dimension());
    let entries: Vec<IntegralEntry> = if exact_available(p, bx) && s.prefer.is_none_or(|m| m == Method::Exact) {
        exact_anchored_all::<Xf>(p, bx, &empty, m_max)
            .into_iter()
            .enumerate()
            .map(|(m, v)| IntegralEntry::new(m, v, 0.0, Method::Exact))
            .collect()
    } else {
        (0..=m_max)
            .into_par_iter()
            .map(|m| {
                if m == 0 {
                    return Ok(IntegralEntry::new(0, xf(1.0), 0.0, Method::Exact));
                }
                let a = anchored_integral(p, bx, &empty, m, s)?;
                Ok(IntegralEntry::new(m, a.value_xf(), a.error, a.method))
            })
            .collect::<Result<_>>()?
    };
    let table = IntegralTable {
        schema_version: SCHEMA_VERSION,
        fingerprint: fp,
        potential: p.clone(),
        bx: bx.clone(),
        m_max,
        strategy: s.clone(),
        entries,
    };
    if let Some(dir) = cache_dir {
        cache::store(dir, &table)?;
    }
    Ok(table)
}
