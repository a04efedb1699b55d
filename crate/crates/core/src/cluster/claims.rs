use serde::{Deserialize, Serialize};

use super::{DensityBoundReport, RadiusEstimate, SignPattern};

/// Relative tolerance for equality and inequality verdicts.
pub const VERDICT_TOL: f64 = 0.02;

pub const TOLERANCE_POLICY: &str = "equality claims are consistent within 2% relative; inequality claims are \
consistent when they hold up to 2% relative slack; a row is inconclusive when the measurement is missing or \
its uncertainty covers the discrepancy";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

/// How the measured value is compared with the claimed one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimRow {
    pub id: String,
    pub statement: String,
    pub relation: Relation,
    /// Claimed value; None when the measured value is infinite or absent.
    #[serde(rename = "paper_claim")]
    pub claimed: f64,
    pub measured: Option<f64>,
    pub oracle: Option<f64>,
    pub uncertainty: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

impl ClaimRow {
    pub fn new(id: &str, statement: &str, relation: Relation, claimed: f64, measured: Option<f64>) -> Self {
        let mut row = ClaimRow {
            id: id.into(),
            statement: statement.into(),
            relation,
            claimed,
            measured: measured.filter(|m| m.is_finite()),
            oracle: None,
            uncertainty: None,
            verdict: Verdict::Inconclusive,
            note: String::new(),
        };
        if measured.is_some_and(|m| m.is_infinite()) {
            row.note = "measured value is infinite".into();
        }
        row.verdict = verdict(relation, claimed, measured, None);
        row
    }

    pub fn with_oracle(mut self, oracle: Option<f64>) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_uncertainty(mut self, u: Option<f64>) -> Self {
        self.uncertainty = u;
        let measured = self.measured.or(if self.note.contains("infinite") { Some(f64::INFINITY) } else { None });
        self.verdict = verdict(self.relation, self.claimed, measured, u);
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(note);
        self
    }
}

pub fn verdict(relation: Relation, claimed: f64, measured: Option<f64>, uncertainty: Option<f64>) -> Verdict {
    let Some(m) = measured.filter(|m| !m.is_nan()) else { return Verdict::Inconclusive };
    if m == claimed {
        return Verdict::Consistent;
    }
    let slack = VERDICT_TOL * claimed.abs();
    let ok = match relation {
        Relation::AtLeast => m >= claimed - slack,
        Relation::AtMost => m <= claimed + slack,
        Relation::Equal => (m - claimed).abs() <= slack,
    };
    if ok {
        Verdict::Consistent
    } else if uncertainty.is_some_and(|u| u >= (m - claimed).abs() - slack) {
        Verdict::Inconclusive
    } else {
        Verdict::Inconsistent
    }
}

/// Measurements feeding the claim rows; absent entries drop or neutralize their rows.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ClaimInputs {
    /// Regularity constant C.
    pub c: f64,
    pub xi: f64,
    /// Hard-core length when the exact oracle applies.
    pub rod_length: Option<f64>,
    pub spectral_radius: Option<f64>,
    pub spectral_radius_oracle: Option<f64>,
    pub cluster_radius: Option<RadiusEstimate>,
    /// Spread between radius estimators.
    pub cluster_radius_uncertainty: Option<f64>,
    pub cluster_radius_oracle: Option<f64>,
    pub virial_radius: Option<f64>,
    pub virial_radius_oracle: Option<f64>,
    pub density_bound: Option<DensityBoundReport>,
    /// False when the partition polynomial has no zeros (ideal gas).
    pub has_zeros: bool,
    /// Positive or hard-core potential, for which equality is claimed.
    pub positive_or_hard_core: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClaimReport {
    pub tolerance_policy: String,
    pub rows: Vec<ClaimRow>,
}

pub fn claim_rows(inp: &ClaimInputs) -> ClaimReport {
    let c = inp.c;
    let mut rows = Vec::new();
    if inp.has_zeros {
        rows.push(
            ClaimRow::new(
                "spectral_radius",
                "r(K) <= 1/xi",
                Relation::AtMost,
                1.0 / inp.xi,
                inp.spectral_radius,
            )
            .with_oracle(inp.spectral_radius_oracle),
        );
    } else {
        rows.push(
            ClaimRow::new("zeros", "exp(z |V|) has no zeros", Relation::Equal, 0.0, Some(0.0))
                .with_note("no spectrum in the limit: spectral rows omitted"),
        );
    }
    let radius = inp.cluster_radius.as_ref().map(|r| r.radius);
    let lower = ClaimRow::new("cluster_radius_lower", "R >= 1/C", Relation::AtLeast, 1.0 / c, radius)
        .with_oracle(inp.cluster_radius_oracle)
        .with_uncertainty(inp.cluster_radius_uncertainty);
    rows.push(lower);
    if inp.positive_or_hard_core {
        rows.push(
            ClaimRow::new("cluster_radius_equal", "R = 1/C", Relation::Equal, 1.0 / c, radius)
                .with_oracle(inp.cluster_radius_oracle)
                .with_uncertainty(inp.cluster_radius_uncertainty),
        );
        let sing = inp.cluster_radius.as_ref().and_then(|r| r.singularity);
        rows.push(
            ClaimRow::new("singularity", "singularity at -1/C", Relation::Equal, -1.0 / c, sing)
                .with_oracle(inp.cluster_radius_oracle.map(|r| -r))
                .with_uncertainty(inp.cluster_radius_uncertainty),
        );
        if let Some(r) = &inp.cluster_radius {
            let alt = r.sign_pattern == SignPattern::Alternating;
            let mut row = ClaimRow::new(
                "alternating_signs",
                "density series coefficients alternate in sign",
                Relation::Equal,
                1.0,
                Some(if alt { 1.0 } else { 0.0 }),
            );
            row.note = format!("sign pattern {:?}", r.sign_pattern).to_lowercase();
            rows.push(row);
        }
    }
    rows.push(
        ClaimRow::new("virial_radius", "virial radius >= 1/(2C)", Relation::AtLeast, 0.5 / c, inp.virial_radius)
            .with_oracle(inp.virial_radius_oracle),
    );
    if let Some(b) = &inp.density_bound {
        let mut row = ClaimRow::new(
            "density_bound",
            "rho_1(s) - s/(1 + C s) >= 0 and rho_1 increasing",
            Relation::AtLeast,
            0.0,
            Some(b.min_margin),
        );
        if !b.monotonicity_violations.is_empty() {
            row.verdict = Verdict::Inconsistent;
            row.note = format!("{} monotonicity violations", b.monotonicity_violations.len());
        }
        if b.min_margin < -super::BOUND_TOL {
            row.verdict = Verdict::Inconsistent;
        }
        rows.push(row);
    }
    ClaimReport { tolerance_policy: TOLERANCE_POLICY.into(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_policy() {
        assert_eq!(verdict(Relation::AtLeast, 0.5, Some(0.3679), None), Verdict::Inconsistent);
        assert_eq!(verdict(Relation::AtLeast, 0.25, Some(1.0), None), Verdict::Consistent);
        assert_eq!(verdict(Relation::Equal, 0.5, Some(0.495), None), Verdict::Consistent);
        assert_eq!(verdict(Relation::Equal, 0.5, Some(0.45), Some(0.1)), Verdict::Inconclusive);
        assert_eq!(verdict(Relation::AtMost, 2.0, None, None), Verdict::Inconclusive);
        assert_eq!(verdict(Relation::AtLeast, 0.5, Some(f64::INFINITY), None), Verdict::Consistent);
    }
}
