//! JSON model interchange.
//!
//! ```json
//! {
//!   "version": 1,
//!   "states": ["s", "t"],
//!   "actions": {"s": ["stay", "go"], "t": ["stay"]},
//!   "cost": {"s": {"stay": 1, "go": "inf"}, "t": {"stay": 0.5}},
//!   "transitions": {"s": {"stay": [["s", 1.0]], "go": [["t", 1.0]]},
//!                   "t": {"stay": [["t", 1.0]]}}
//! }
//! ```
//!
//! Costs are numbers or the literal `"inf"`. Action order inside `actions`
//! is the declared order used for tie-breaking.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtNonnegReal;
use crate::model::{check_row, Action, MdpModel, StateWindow, TransitionRow, ValidationReport, Violation};

pub const FORMAT_VERSION: u32 = 1;

fn default_version() -> u32 {
    FORMAT_VERSION
}

/// A cost as written in a file; negative values survive parsing so that
/// validation can report them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawCost {
    Number(f64),
    Literal(String),
}

impl RawCost {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Self::Number(x) => Ok(*x),
            Self::Literal(s) if s == "inf" => Ok(f64::INFINITY),
            Self::Literal(s) => Err(s.clone()),
        }
    }
}

impl From<ExtNonnegReal> for RawCost {
    fn from(c: ExtNonnegReal) -> Self {
        if c.is_infinite() {
            Self::Literal("inf".into())
        } else {
            Self::Number(c.get())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(default = "default_version")]
    pub version: u32,
    pub states: Vec<String>,
    pub actions: BTreeMap<String, Vec<String>>,
    pub cost: BTreeMap<String, BTreeMap<String, RawCost>>,
    pub transitions: BTreeMap<String, BTreeMap<String, Vec<(String, f64)>>>,
}

impl ModelDocument {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported model format version {}", doc.version)));
        }
        Ok(doc)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_model(model: &MdpModel) -> Self {
        let mut doc = Self {
            version: FORMAT_VERSION,
            states: model.labels().to_vec(),
            actions: BTreeMap::new(),
            cost: BTreeMap::new(),
            transitions: BTreeMap::new(),
        };
        for (x, label) in model.labels().iter().enumerate() {
            let acts = model.actions(x);
            doc.actions.insert(label.clone(), acts.iter().map(|a| a.label.clone()).collect());
            doc.cost.insert(
                label.clone(),
                acts.iter().map(|a| (a.label.clone(), a.cost.into())).collect(),
            );
            doc.transitions.insert(
                label.clone(),
                acts.iter()
                    .map(|a| {
                        let row = a.row.entries().iter().map(|&(z, p)| (model.label(z).to_owned(), p));
                        (a.label.clone(), row.collect())
                    })
                    .collect(),
            );
        }
        doc
    }

    /// Every defect in the document, including ones a built [`MdpModel`]
    /// cannot represent (negative costs, undeclared names, missing entries).
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut declared = HashSet::new();
        for s in &self.states {
            if !declared.insert(s.as_str()) {
                report.push(Violation::DuplicateState { state: s.clone() });
            }
        }
        for key in self.actions.keys().chain(self.cost.keys()).chain(self.transitions.keys()) {
            if !declared.contains(key.as_str()) {
                report.push(Violation::UnknownState { state: key.clone() });
            }
        }
        for s in &self.states {
            let acts = self.actions.get(s).map(Vec::as_slice).unwrap_or_default();
            if acts.is_empty() {
                report.push(Violation::EmptyActionSet { state: s.clone() });
            }
            for a in acts {
                let pair = || (s.clone(), a.clone());
                match self.cost.get(s).and_then(|m| m.get(a)) {
                    None => {
                        let (state, action) = pair();
                        report.push(Violation::MissingCost { state, action });
                    }
                    Some(raw) => match raw.value() {
                        Ok(c) if c >= 0.0 => {}
                        Ok(c) => {
                            let (state, action) = pair();
                            report.push(Violation::NegativeCost { state, action, cost: c });
                        }
                        Err(_) => {
                            let (state, action) = pair();
                            report.push(Violation::NegativeCost { state, action, cost: f64::NAN });
                        }
                    },
                }
                match self.transitions.get(s).and_then(|m| m.get(a)) {
                    None => {
                        let (state, action) = pair();
                        report.push(Violation::MissingTransition { state, action });
                    }
                    Some(row) => {
                        let entries: Vec<(&str, f64)> = row.iter().map(|(z, p)| (z.as_str(), *p)).collect();
                        check_row(&mut report, s, a, &entries, |z| {
                            if declared.contains(z) {
                                Ok(z.to_owned())
                            } else {
                                Err(z.to_owned())
                            }
                        });
                    }
                }
            }
        }
        report
    }

    pub fn into_model(self) -> Result<MdpModel> {
        let report = self.validate();
        if !report.is_empty() {
            return Err(Error::InvalidModel(report.to_string()));
        }
        let index: BTreeMap<&str, usize> =
            self.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut actions = Vec::with_capacity(self.states.len());
        for s in &self.states {
            let mut list = Vec::new();
            for a in &self.actions[s] {
                let cost = ExtNonnegReal::new(self.cost[s][a].value().map_err(Error::Parse)?)?;
                let row = self.transitions[s][a].iter().map(|(z, p)| (index[z.as_str()], *p)).collect();
                list.push(Action::new(a.clone(), cost, TransitionRow::new(row)));
            }
            actions.push(list);
        }
        Ok(MdpModel::from_parts(self.states, actions, StateWindow::Complete))
    }
}

pub fn model_from_json(s: &str) -> Result<MdpModel> {
    ModelDocument::from_json_str(s)?.into_model()
}

pub fn model_to_json(model: &MdpModel) -> Result<String> {
    ModelDocument::from_model(model).to_json_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "version": 1,
        "states": ["s", "t"],
        "actions": {"s": ["stay", "go"], "t": ["stay"]},
        "cost": {"s": {"stay": 1, "go": "inf"}, "t": {"stay": 0.5}},
        "transitions": {"s": {"stay": [["s", 1.0]], "go": [["t", 1.0]]},
                        "t": {"stay": [["t", 1.0]]}}
    }"#;

    #[test]
    fn parses_sample() {
        let model = model_from_json(SAMPLE).unwrap();
        assert_eq!(model.num_states(), 2);
        assert_eq!(model.actions(0)[1].label, "go");
        assert!(model.actions(0)[1].cost.is_infinite());
        assert_eq!(model.actions(0)[1].row.entries(), &[(1, 1.0)]);
    }

    #[test]
    fn round_trips_through_text() {
        let model = model_from_json(SAMPLE).unwrap();
        let again = model_from_json(&model_to_json(&model).unwrap()).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn reports_document_defects() {
        let bad = SAMPLE.replace(r#""stay": 0.5"#, r#""stay": -2"#).replace(r#"[["t", 1.0]]}}"#, r#"[["u", 1.0]]}}"#);
        let doc = ModelDocument::from_json_str(&bad).unwrap();
        let report = doc.validate();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NegativeCost { cost, .. } if *cost == -2.0)));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::DanglingDestination { destination, .. } if destination == "u")));
        assert!(doc.into_model().is_err());
    }

    #[test]
    fn rejects_unknown_version() {
        let v2 = SAMPLE.replace(r#""version": 1"#, r#""version": 2"#);
        assert!(ModelDocument::from_json_str(&v2).is_err());
    }
}
