//! Machine-readable check reports.
//!
//! Every suite in the crate answers with a [`CheckReport`]. The outcome is
//! three-valued: a check can *pass*, *fail*, or *refuse* because its
//! hypotheses are not met — refusal is a first-class verdict, not a failure,
//! because a conclusion evaluated under broken hypotheses would claim
//! something the underlying statement never promised.
//!
//! Reports serialize to JSON deterministically: field order follows struct
//! order, detail maps are sorted, and no timestamps are embedded (run logs
//! carry those separately).

use serde::Serialize;
use std::collections::BTreeMap;

/// Three-valued verdict.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(tag = "kind", content = "reason")]
pub enum CheckOutcome {
    Passed,
    Failed,
    /// Hypotheses not met; carries a human-readable reason.
    Refused(String),
}

/// Everything needed to reproduce and interpret a report's numbers.
#[derive(Clone, Debug, Serialize, Default)]
pub struct Provenance {
    /// Complex dimension.
    pub n: usize,
    /// Hessian degree (0 when not applicable).
    pub m: usize,
    /// Grid points per real axis (None for pure algebra checks).
    pub grid: Option<usize>,
    /// Regularization parameter, when one is in play.
    pub eps: Option<f64>,
    /// Singular-lab exponent parameter.
    pub k: Option<f64>,
    /// RNG seed, for seeded suites.
    pub seed: Option<u64>,
    /// Measured d^c calibration constant (raw internal mass of a unit log
    /// pole over 2π), when the suite touched convention-dependent numbers.
    pub c_conv: Option<f64>,
    /// Normalization anchor statement, so raw numbers are interpretable
    /// without reading the source.
    pub convention: &'static str,
}

pub const CONVENTION_ANCHOR: &str =
    "internal dd^c is scaled so that dd^c|z|^2 = identity metric; densities are \
     normalized so the metric itself has density 1; raw log-pole masses relate \
     to 2pi-normalized references through the measured constant c_conv";

impl Provenance {
    pub fn algebra(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            convention: CONVENTION_ANCHOR,
            ..Self::default()
        }
    }

    pub fn grid(n: usize, m: usize, points_per_axis: usize) -> Self {
        Self {
            n,
            m,
            grid: Some(points_per_axis),
            convention: CONVENTION_ANCHOR,
            ..Self::default()
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_c_conv(mut self, c: f64) -> Self {
        self.c_conv = Some(c);
        self
    }
}

/// Result of one check suite.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub outcome: CheckOutcome,
    /// The binding margin of the check: >= -tolerance passes. For refusals
    /// this is the hypothesis margin that broke.
    pub worst_margin: f64,
    pub tolerance: f64,
    /// Grid multi-index or sample/parameter index pinpointing the worst
    /// point. Present whenever the check fails or refuses.
    pub location: Option<Vec<usize>>,
    /// Named scalar diagnostics (sorted for deterministic serialization).
    pub details: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl CheckReport {
    pub fn new(
        suite: &str,
        outcome: CheckOutcome,
        worst_margin: f64,
        tolerance: f64,
        location: Option<Vec<usize>>,
        provenance: Provenance,
    ) -> Self {
        Self {
            suite: suite.to_string(),
            outcome,
            worst_margin,
            tolerance,
            location,
            details: BTreeMap::new(),
            provenance,
        }
    }

    pub fn passed(
        suite: &str,
        worst_margin: f64,
        tolerance: f64,
        provenance: Provenance,
    ) -> Self {
        Self::new(suite, CheckOutcome::Passed, worst_margin, tolerance, None, provenance)
    }

    pub fn failed(
        suite: &str,
        worst_margin: f64,
        tolerance: f64,
        location: Option<Vec<usize>>,
        provenance: Provenance,
    ) -> Self {
        Self::new(suite, CheckOutcome::Failed, worst_margin, tolerance, location, provenance)
    }

    pub fn refused(
        suite: &str,
        reason: String,
        location: Option<Vec<usize>>,
        provenance: Provenance,
    ) -> Self {
        Self::new(
            suite,
            CheckOutcome::Refused(reason),
            f64::NAN,
            0.0,
            location,
            provenance,
        )
    }

    pub fn from_margin(
        suite: &str,
        worst_margin: f64,
        tolerance: f64,
        location: Option<Vec<usize>>,
        provenance: Provenance,
    ) -> Self {
        let outcome = if worst_margin >= -tolerance {
            CheckOutcome::Passed
        } else {
            CheckOutcome::Failed
        };
        let location = match outcome {
            CheckOutcome::Passed => None,
            _ => location,
        };
        Self::new(suite, outcome, worst_margin, tolerance, location, provenance)
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn pass(&self) -> bool {
        self.outcome == CheckOutcome::Passed
    }

    pub fn refused_outcome(&self) -> bool {
        matches!(self.outcome, CheckOutcome::Refused(_))
    }

    /// Deterministic pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_reports_carry_a_location() {
        let r = CheckReport::from_margin(
            "demo",
            -1.0,
            1e-9,
            Some(vec![3, 4]),
            Provenance::algebra(2, 2),
        );
        assert!(!r.pass());
        assert_eq!(r.location.as_deref(), Some(&[3, 4][..]));

        // Passing reports drop the location; nothing is "offending".
        let r = CheckReport::from_margin(
            "demo",
            1.0,
            1e-9,
            Some(vec![3, 4]),
            Provenance::algebra(2, 2),
        );
        assert!(r.pass());
        assert!(r.location.is_none());
    }

    #[test]
    fn json_is_deterministic_and_timestamp_free() {
        let mk = || {
            CheckReport::passed("demo", 0.5, 1e-6, Provenance::grid(2, 2, 64).with_seed(42))
                .with_detail("zeta", 1.0)
                .with_detail("alpha", 2.0)
        };
        let a = mk().to_json();
        let b = mk().to_json();
        assert_eq!(a, b);
        assert!(!a.contains("time"));
        // BTreeMap details serialize sorted.
        let za = a.find("zeta").unwrap();
        let al = a.find("alpha").unwrap();
        assert!(al < za);
    }
}
