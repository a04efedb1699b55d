//! Serde helpers: log-magnitudes of zero are -inf, written as JSON null.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

fn enc(x: f64) -> Option<f64> {
    (x != f64::NEG_INFINITY).then_some(x)
}

fn dec(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NEG_INFINITY)
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    enc(*x).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Option::<f64>::deserialize(d).map(dec)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
        x.iter().map(|v| enc(*v)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Option<f64>>::deserialize(d).map(|v| v.into_iter().map(dec).collect())
    }
}
