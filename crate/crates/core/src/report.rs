use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    /// Recomputed exactly.
    Verified,
    /// Taken from a geometric argument that is not recomputed here.
    Asserted,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

/// An ordered list of named checks plus a bag of computed values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.into(),
            status: if ok { CheckStatus::Verified } else { CheckStatus::Failed },
            detail: detail.into(),
        });
        ok
    }

    /// Records `expected == actual` with both printed in the detail.
    pub fn check_eq<T: PartialEq + std::fmt::Display>(&mut self, name: impl Into<String>, expected: T, actual: T) -> bool {
        let ok = expected == actual;
        let detail = if ok {
            format!("{actual}")
        } else {
            format!("expected {expected}, got {actual}")
        };
        self.check(name, ok, detail)
    }

    pub fn assert(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            status: CheckStatus::Asserted,
            detail: detail.into(),
        });
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("plain data serializes");
        self.data.insert(key.into(), v);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Failed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Failed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `Err(Consistency)` naming every failed check, else the report itself.
    pub fn into_result(self) -> Result<Self> {
        if self.all_passed() {
            return Ok(self);
        }
        let names: Vec<String> = self
            .failures()
            .iter()
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        Err(Error::consistency(format!("{}: {}", self.title, names.join("; "))))
    }
}
