//! JSON run report and run metadata.

use serde::Serialize;

use crate::config::Config;
use crate::output::{Series, Table};

/// Acceptance criteria a command can decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionId {
    StructuralExactness,
    ResolventConsistency,
    ContractionCounts,
    EvaluatorEquivalence,
    DecaySlopes,
    GapPersistence,
    CosetIdentities,
    Universality,
}

impl CriterionId {
    pub fn number(self) -> u8 {
        match self {
            CriterionId::StructuralExactness => 1,
            CriterionId::ResolventConsistency => 2,
            CriterionId::ContractionCounts => 3,
            CriterionId::EvaluatorEquivalence => 4,
            CriterionId::DecaySlopes => 5,
            CriterionId::GapPersistence => 6,
            CriterionId::CosetIdentities => 7,
            CriterionId::Universality => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub number: u8,
    pub id: CriterionId,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    pub fn new(id: CriterionId, passed: bool, detail: impl Into<String>) -> Self {
        Self { number: id.number(), id, passed, detail: detail.into() }
    }
}

/// A size or task that raised a numerical error; the run continued.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskFailure {
    pub task: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: Config,
    pub criteria: Vec<Criterion>,
    pub failures: Vec<TaskFailure>,
    pub summary: serde_json::Value,
    pub all_passed: bool,
}

impl RunReport {
    pub fn new(command: &str, config: &Config, criteria: Vec<Criterion>, failures: Vec<TaskFailure>, summary: serde_json::Value) -> Self {
        let all_passed = criteria.iter().all(|c| c.passed);
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            criteria,
            failures,
            summary,
            all_passed,
        }
    }

    pub fn criterion(&self, id: CriterionId) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

/// Everything a command produces, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: RunReport,
    pub tables: Vec<Table>,
    pub series: Vec<Series>,
}

impl Outcome {
    pub fn table(&self, suffix: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.suffix == suffix)
    }
}

/// Wall-clock data kept out of the reproducible artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub command: String,
    pub unix_time: u64,
    pub runtime_seconds: f64,
    pub threads: usize,
}
