//! Pair potentials, Mayer function, stability and regularity constants.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    HardCore { a: f64 },
    Ideal,
    PositiveStep { epsilon: f64, a: f64 },
    /// Tabulated radial potential: hard core below `core`, linear interpolation
    /// through `(radii, values)`, zero beyond the last radius.
    Custom { core: f64, radii: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPotential {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one_usize")]
    pub dimension: usize,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

/// Points `(x)_n` stored as a flat coordinate list of length `n * dimension`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub dimension: usize,
    pub coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dimension: usize, coords: Vec<f64>) -> Self {
        assert!(dimension > 0 && coords.len().is_multiple_of(dimension));
        Configuration { dimension, coords }
    }

    pub fn line(points: &[f64]) -> Self {
        Configuration { dimension: 1, coords: points.to_vec() }
    }

    pub fn empty(dimension: usize) -> Self {
        Configuration { dimension, coords: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let coords = perm.iter().flat_map(|&i| self.point(i).to_vec()).collect();
        Configuration { dimension: self.dimension, coords }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityInfo {
    pub b: f64,
    pub is_positive: bool,
    pub has_hard_core: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub c: f64,
    pub error: f64,
}

/// Volume of the unit ball in `nu` dimensions.
pub fn unit_ball_volume(nu: usize) -> f64 {
    match nu {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / nu as f64 * unit_ball_volume(nu - 2),
    }
}

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl PairPotential {
    pub fn new(family: Family, beta: f64, dimension: usize) -> Result<Self> {
        let p = PairPotential { family, beta, dimension };
        p.validate()?;
        Ok(p)
    }

    pub fn hard_core(a: f64) -> Self {
        PairPotential { family: Family::HardCore { a }, beta: 1.0, dimension: 1 }
    }

    pub fn ideal() -> Self {
        PairPotential { family: Family::Ideal, beta: 1.0, dimension: 1 }
    }

    pub fn positive_step(epsilon: f64, a: f64, beta: f64) -> Self {
        PairPotential { family: Family::PositiveStep { epsilon, a }, beta, dimension: 1 }
    }

    pub fn with_dimension(mut self, dimension: usize) -> Self {
        self.dimension = dimension;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(KsError::InvalidParameter(m.to_string()));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if self.dimension == 0 {
            return bad("dimension must be positive");
        }
        match &self.family {
            Family::HardCore { a } if !(*a > 0.0 && a.is_finite()) => bad("a must be positive"),
            Family::PositiveStep { epsilon, a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    bad("a must be positive")
                } else if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    bad("epsilon must be nonnegative")
                } else {
                    Ok(())
                }
            }
            Family::Custom { core, radii, values } => {
                if radii.len() != values.len() || radii.is_empty() {
                    bad("custom table needs matching nonempty radii and values")
                } else if !(*core >= 0.0) || radii.windows(2).any(|w| w[1] <= w[0]) {
                    bad("custom radii must increase and core must be nonnegative")
                } else if radii[0] < *core || values.iter().any(|v| !v.is_finite()) {
                    bad("custom table must start at or beyond the core with finite values")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Phi(r); `f64::INFINITY` inside a hard core.
    pub fn phi(&self, r: f64) -> f64 {
        match &self.family {
            Family::Ideal => 0.0,
            Family::HardCore { a } => {
                if r < *a {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Family::PositiveStep { epsilon, a } => {
                if r < *a {
                    *epsilon
                } else {
                    0.0
                }
            }
            Family::Custom { core, radii, values } => {
                if r < *core {
                    return f64::INFINITY;
                }
                let last = radii.len() - 1;
                if r > radii[last] {
                    return 0.0;
                }
                if r <= radii[0] {
                    return values[0];
                }
                let k = radii.partition_point(|x| *x <= r).min(last);
                let (r0, r1) = (radii[k - 1], radii[k]);
                let t = (r - r0) / (r1 - r0);
                values[k - 1] * (1.0 - t) + values[k] * t
            }
        }
    }

    /// e^{-beta Phi(r)}, exactly zero inside a hard core.
    pub fn boltzmann(&self, r: f64) -> f64 {
        match &self.family {
            Family::Ideal => 1.0,
            Family::HardCore { a } => {
                if r < *a {
                    0.0
                } else {
                    1.0
                }
            }
            _ => {
                let v = self.phi(r);
                if v == f64::INFINITY {
                    0.0
                } else {
                    (-self.beta * v).exp()
                }
            }
        }
    }

    pub fn mayer_f(&self, r: f64) -> f64 {
        self.boltzmann(r) - 1.0
    }

    pub fn total_energy(&self, c: &Configuration) -> f64 {
        let n = c.len();
        let mut u = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let v = self.phi(distance(c.point(i), c.point(j)));
                if v == f64::INFINITY {
                    return f64::INFINITY;
                }
                u += v;
            }
        }
        u
    }

    /// Product of pair Boltzmann factors; zero as soon as a hard core overlaps.
    pub fn boltzmann_weight(&self, c: &Configuration) -> f64 {
        let n = c.len();
        let mut w = 1.0;
        for i in 0..n {
            for j in i + 1..n {
                w *= self.boltzmann(distance(c.point(i), c.point(j)));
                if w == 0.0 {
                    return 0.0;
                }
            }
        }
        w
    }

    /// Radius beyond which the Mayer function vanishes.
    pub fn range(&self) -> f64 {
        match &self.family {
            Family::Ideal => 0.0,
            Family::HardCore { a } => *a,
            Family::PositiveStep { epsilon, a } => {
                if *epsilon == 0.0 {
                    0.0
                } else {
                    *a
                }
            }
            Family::Custom { core, radii, .. } => core.max(*radii.last().unwrap()),
        }
    }

    /// Radii at which the Boltzmann factor may jump.
    pub fn discontinuities(&self) -> Vec<f64> {
        match &self.family {
            Family::Ideal => vec![],
            Family::HardCore { a } => vec![*a],
            Family::PositiveStep { epsilon, a } => {
                if *epsilon == 0.0 {
                    vec![]
                } else {
                    vec![*a]
                }
            }
            Family::Custom { core, radii, values } => {
                let mut d = Vec::new();
                if *core > 0.0 {
                    d.push(*core);
                }
                if *values.last().unwrap() != 0.0 {
                    d.push(*radii.last().unwrap());
                }
                d.extend(radii.iter().copied());
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                d.dedup();
                d
            }
        }
    }

    pub fn has_hard_core(&self) -> bool {
        match &self.family {
            Family::HardCore { .. } => true,
            Family::Custom { core, .. } => *core > 0.0,
            _ => false,
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.family {
            Family::Custom { values, .. } => values.iter().all(|v| *v >= 0.0),
            _ => true,
        }
    }

    pub fn stability(&self) -> Result<StabilityInfo> {
        let is_positive = self.is_positive();
        let has_hard_core = self.has_hard_core();
        if is_positive {
            return Ok(StabilityInfo { b: 0.0, is_positive, has_hard_core });
        }
        let b16 = self.probe_energy_per_particle(16);
        let b64 = self.probe_energy_per_particle(64);
        if b64 > 0.0 && b64 > 3.0 * b16.max(1e-300) {
            return Err(KsError::NotStable(format!(
                "-U/n grows from {b16:.4} at n=16 to {b64:.4} at n=64"
            )));
        }
        Ok(StabilityInfo { b: b64.max(b16).max(0.0), is_positive, has_hard_core })
    }

    /// max over probe configurations of -U/n for n points.
    fn probe_energy_per_particle(&self, n: usize) -> f64 {
        let nu = self.dimension;
        let range = self.range().max(1e-3);
        let core = match &self.family {
            Family::Custom { core, .. } => *core,
            _ => 0.0,
        };
        let mut best = f64::NEG_INFINITY;
        for k in 0..=64 {
            let spacing = core + (range * 1.05 - core) * k as f64 / 64.0;
            // chain along the first axis and a compact cubic cluster
            let side = (n as f64).powf(1.0 / nu as f64).ceil() as usize;
            for cluster in [false, true] {
                let mut coords = Vec::with_capacity(n * nu);
                for i in 0..n {
                    let mut idx = i;
                    for axis in 0..nu {
                        let step = if cluster {
                            let c = idx % side;
                            idx /= side;
                            c
                        } else if axis == 0 {
                            i
                        } else {
                            0
                        };
                        coords.push(step as f64 * spacing);
                    }
                }
                let u = self.total_energy(&Configuration::new(nu, coords));
                if u.is_finite() {
                    best = best.max(-u / n as f64);
                }
            }
        }
        best
    }

    /// Regularity constant C(beta) = integral of |e^{-beta Phi} - 1| over R^nu.
    pub fn regularity_c(&self) -> Result<Regularity> {
        let nu = self.dimension;
        let vol = unit_ball_volume(nu);
        let exact = |c: f64| Ok(Regularity { c, error: 0.0 });
        match &self.family {
            Family::Ideal => exact(0.0),
            Family::HardCore { a } => exact(vol * a.powi(nu as i32)),
            Family::PositiveStep { epsilon, a } => {
                exact((1.0 - (-self.beta * epsilon).exp()) * vol * a.powi(nu as i32))
            }
            Family::Custom { core, radii, .. } => {
                let surface = nu as f64 * vol;
                let mut knots = vec![*core];
                knots.extend(radii.iter().copied().filter(|r| *r > *core));
                let integrate = |deg: usize| -> f64 {
                    let rule = GaussLegendre::new(std::num::NonZeroUsize::new(deg).unwrap());
                    knots
                        .windows(2)
                        .map(|w| {
                            rule.integrate(w[0], w[1], |r| {
                                self.mayer_f(r).abs() * surface * r.powi(nu as i32 - 1)
                            })
                        })
                        .sum()
                };
                let (lo, hi) = (integrate(16), integrate(32));
                let c = vol * core.powi(nu as i32) + hi;
                if !c.is_finite() {
                    return Err(KsError::NotRegular("divergent Mayer integral".into()));
                }
                Ok(Regularity { c, error: (hi - lo).abs() })
            }
        }
    }

    /// Stable text identity used for cache fingerprints.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("potential serializes")
    }
}
