use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::configint::{Method, SpatialBox, Strategy};
use crate::error::{KsError, Result};
use crate::potential::{Family, PairPotential};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    HardCore,
    Ideal,
    PositiveStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Quadrature,
    Sampling,
}

/// Everything a command needs; loaded from TOML, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PairPotential,
    /// Box side length.
    #[serde(rename = "L")]
    pub length: f64,
    /// Truncation; None picks floor(L/a) + 1 for hard rods and 8 otherwise.
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub strategy: Strategy,
    /// Norm weight; None uses 1/C.
    pub xi: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    /// Box lengths for the finite-volume extrapolation.
    pub lengths: Vec<f64>,
    /// Cluster-series terms.
    pub terms: usize,
    /// Taylor coefficients for the ratio test.
    pub coefficients: usize,
    /// Anchor points (x)_n, flattened.
    pub anchor: Option<Vec<f64>>,
    pub z: f64,
    pub n_max: usize,
    /// Powers in the convergence check of (K/lambda_c)^n.
    pub powers: usize,
    /// Polynomial fixture 1 + c_1 z + ..., bypassing the integral table.
    pub coeffs: Option<Vec<f64>>,
    /// Dense real matrix fixture for the spectral command.
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PairPotential::hard_core(1.0),
            length: 5.0,
            m: None,
            strategy: Strategy::default(),
            xi: None,
            out: PathBuf::from("kslab-out"),
            format: Format::Json,
            cache_dir: None,
            lengths: vec![20.0, 40.0, 80.0],
            terms: 16,
            coefficients: 40,
            anchor: None,
            z: 0.1,
            n_max: 2,
            powers: 60,
            coeffs: None,
            matrix: None,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub potential: Option<PotentialKind>,
    /// Hard-core diameter or step range.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Step height of the positive-step potential.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long = "dim", global = true)]
    pub dimension: Option<usize>,
    #[arg(long = "L", global = true, allow_hyphen_values = true)]
    pub length: Option<f64>,
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    /// Gauss nodes across the box.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub lengths: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub terms: Option<usize>,
    #[arg(long, global = true)]
    pub coefficients: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub anchor: Option<Vec<f64>>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true)]
    pub powers: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
    /// JSON file holding a list of matrix rows.
    #[arg(long, global = true)]
    pub matrix: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| KsError::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| KsError::InvalidParameter(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| KsError::InvalidParameter(format!("config: {e}")))
    }

    pub fn from_flags(f: &Flags) -> Result<Self> {
        let mut c = match &f.config {
            Some(p) => RunConfig::from_toml(&read(p)?)?,
            None => RunConfig::default(),
        };
        c.apply(f)?;
        c.validate()?;
        Ok(c)
    }

    fn apply(&mut self, f: &Flags) -> Result<()> {
        let current_a = match &self.potential.family {
            Family::HardCore { a } | Family::PositiveStep { a, .. } => Some(*a),
            _ => None,
        };
        let a = f.a.or(current_a).unwrap_or(1.0);
        let family = match f.potential {
            Some(PotentialKind::HardCore) => Some(Family::HardCore { a }),
            Some(PotentialKind::Ideal) => Some(Family::Ideal),
            Some(PotentialKind::PositiveStep) => {
                let epsilon = match &self.potential.family {
                    Family::PositiveStep { epsilon, .. } => f.epsilon.unwrap_or(*epsilon),
                    _ => f.epsilon.unwrap_or(1.0),
                };
                Some(Family::PositiveStep { epsilon, a })
            }
            None => None,
        };
        if let Some(fam) = family {
            self.potential.family = fam;
        } else {
            match &mut self.potential.family {
                Family::HardCore { a: x } => *x = f.a.unwrap_or(*x),
                Family::PositiveStep { epsilon, a: x } => {
                    *x = f.a.unwrap_or(*x);
                    *epsilon = f.epsilon.unwrap_or(*epsilon);
                }
                _ if f.a.is_some() || f.epsilon.is_some() => {
                    return Err(KsError::InvalidParameter("--a/--epsilon do not apply to this potential".into()))
                }
                _ => {}
            }
        }
        if let Some(b) = f.beta {
            self.potential.beta = b;
        }
        if let Some(d) = f.dimension {
            self.potential.dimension = d;
        }
        if let Some(l) = f.length {
            self.length = l;
        }
        if f.m.is_some() {
            self.m = f.m;
        }
        if f.xi.is_some() {
            self.xi = f.xi;
        }
        if let Some(s) = f.seed {
            self.strategy.seed = s;
        }
        if let Some(o) = &f.out {
            self.out = o.clone();
        }
        if let Some(fm) = f.format {
            self.format = fm;
        }
        if f.cache_dir.is_some() {
            self.cache_dir = f.cache_dir.clone();
        }
        if let Some(m) = f.method {
            self.strategy.prefer = Some(match m {
                MethodArg::Exact => Method::Exact,
                MethodArg::Quadrature => Method::Quadrature,
                MethodArg::Sampling => Method::Sampling,
            });
        }
        if let Some(o) = f.order {
            self.strategy.order = o;
        }
        if let Some(l) = &f.lengths {
            self.lengths = l.clone();
        }
        if let Some(t) = f.terms {
            self.terms = t;
        }
        if let Some(k) = f.coefficients {
            self.coefficients = k;
        }
        if f.anchor.is_some() {
            self.anchor = f.anchor.clone();
        }
        if let Some(z) = f.z {
            self.z = z;
        }
        if let Some(n) = f.n_max {
            self.n_max = n;
        }
        if let Some(p) = f.powers {
            self.powers = p;
        }
        if f.coeffs.is_some() {
            self.coeffs = f.coeffs.clone();
        }
        if let Some(p) = &f.matrix {
            let rows: Vec<Vec<f64>> = serde_json::from_str(&read(p)?)
                .map_err(|e| KsError::InvalidParameter(format!("matrix file: {e}")))?;
            self.matrix = Some(rows);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KsError::InvalidParameter(m));
        self.potential.validate()?;
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("box length {} must be positive", self.length));
        }
        if self.xi.is_some_and(|x| !(x > 0.0)) {
            return bad("xi must be positive".into());
        }
        if self.lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("box lengths must be positive".into());
        }
        if self.terms == 0 || self.n_max == 0 {
            return bad("terms and n_max must be at least 1".into());
        }
        if let Some(c) = &self.coeffs {
            if c.first() != Some(&1.0) || c.len() < 2 {
                return bad("polynomial fixture must start with constant term 1 and have degree >= 1".into());
            }
        }
        if let Some(m) = &self.matrix {
            if m.is_empty() || m.iter().any(|r| r.len() != m.len()) {
                return bad("matrix fixture must be square and nonempty".into());
            }
        }
        if let Some(a) = &self.anchor {
            if a.is_empty() || a.len() % self.potential.dimension != 0 {
                return bad("anchor coordinates must be a nonempty multiple of the dimension".into());
            }
        }
        Ok(())
    }

    pub fn spatial_box(&self) -> SpatialBox {
        SpatialBox::cube(self.length, self.potential.dimension)
    }

    pub fn truncation(&self) -> usize {
        self.m.unwrap_or(match self.potential.family {
            Family::HardCore { a } if self.potential.dimension == 1 => (self.length / a).floor() as usize + 1,
            _ => 8,
        })
    }
}
