//! Whitelist of relation classifications that are known not to hold as
//! printed. Reports still carry them; the whitelist only decides whether
//! they count as unexpected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::relations::RelationReport;
use super::AlgebraError;

const BUNDLED: &str = include_str!("../../data/known_discrepancies.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownDiscrepancy {
    /// A classification name, or `structural_conflict`.
    pub class: String,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsMapNote {
    pub printed: String,
    pub closing: String,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownDiscrepancies {
    pub relations: BTreeMap<String, KnownDiscrepancy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants_map: Option<ConstantsMapNote>,
}

/// How one whitelisted relation measured against its entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WhitelistCheck {
    pub tag: String,
    pub documented: String,
    pub measured: String,
    pub flagged: bool,
}

impl KnownDiscrepancies {
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED).expect("bundled whitelist parses")
    }

    pub fn from_json_str(s: &str) -> Result<Self, AlgebraError> {
        serde_json::from_str(s).map_err(|e| AlgebraError::Data(format!("whitelist: {e}")))
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.relations.contains_key(tag)
    }

    /// Compares each whitelisted tag present in the report with its
    /// documented class.
    pub fn check(&self, report: &RelationReport) -> Vec<WhitelistCheck> {
        report
            .outcomes
            .iter()
            .filter_map(|o| {
                let entry = self.relations.get(&o.tag)?;
                let flagged = match entry.class.as_str() {
                    "structural_conflict" => report.structural_conflicts.iter().any(|c| c.affected == o.tag),
                    other => o.classification.name() == other,
                };
                Some(WhitelistCheck {
                    tag: o.tag.clone(),
                    documented: entry.class.clone(),
                    measured: o.classification.name().to_string(),
                    flagged,
                })
            })
            .collect()
    }

    /// Tags classified `fails` that the whitelist does not cover.
    pub fn unexpected_failures(&self, report: &RelationReport) -> Vec<String> {
        report
            .outcomes
            .iter()
            .filter(|o| o.classification.name() == "fails" && !self.contains(&o.tag))
            .map(|o| o.tag.clone())
            .collect()
    }
}
