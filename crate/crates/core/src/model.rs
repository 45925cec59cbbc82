//! Metric vocabulary and the shared record types.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Design property a metric belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DesignProperty {
    Size,
    Complexity,
    Inheritance,
    Coupling,
    Cohesion,
    Encapsulation,
    TestEffort,
    TestQuality,
}

/// Value domain enforced by [`validate_record`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueKind {
    /// Non-negative integer.
    Count,
    /// Real in `[lo, hi]`.
    Ratio { lo: f64, hi: f64 },
    /// Non-negative real (averages).
    NonNegative,
}

macro_rules! metrics {
    ($( $variant:ident => $name:literal, $prop:ident, $kind:expr; )*) => {
        /// One of the 37 dataset metrics: 28 code, 6 test-effort, 3 test-quality.
        ///
        /// Declaration order is the canonical column order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum MetricId {
            $( $variant, )*
        }

        impl MetricId {
            pub const ALL: [MetricId; 37] = [ $( MetricId::$variant, )* ];

            /// Canonical column name, e.g. `"T-NOT"`.
            pub fn name(self) -> &'static str {
                match self { $( MetricId::$variant => $name, )* }
            }

            pub fn design_property(self) -> DesignProperty {
                match self { $( MetricId::$variant => DesignProperty::$prop, )* }
            }

            pub fn value_kind(self) -> ValueKind {
                match self { $( MetricId::$variant => $kind, )* }
            }
        }
    };
}

const COUNT: ValueKind = ValueKind::Count;
const UNIT: ValueKind = ValueKind::Ratio { lo: 0.0, hi: 1.0 };
const NONNEG: ValueKind = ValueKind::NonNegative;

metrics! {
    Loc => "LOC", Size, COUNT;
    Nbi => "NBI", Size, COUNT;
    Loccom => "LOCCOM", Size, COUNT;
    Npm => "NPM", Size, COUNT;
    Nstam => "NSTAM", Size, COUNT;
    Nof => "NOF", Size, COUNT;
    Nstaf => "NSTAF", Size, COUNT;
    Nmc => "NMC", Size, COUNT;
    Nmci => "NMCI", Size, COUNT;
    Nmce => "NMCE", Size, COUNT;
    Wmc => "WMC", Complexity, COUNT;
    Amc => "AMC", Complexity, NONNEG;
    Rfc => "RFC", Complexity, COUNT;
    Dit => "DIT", Inheritance, COUNT;
    Noc => "NOC", Inheritance, COUNT;
    Mfa => "MFA", Inheritance, UNIT;
    Cbo => "CBO", Coupling, COUNT;
    Ic => "IC", Coupling, COUNT;
    Cbm => "CBM", Coupling, COUNT;
    Ca => "Ca", Coupling, COUNT;
    Ce => "Ce", Coupling, COUNT;
    Lcom => "LCOM", Cohesion, COUNT;
    Lcom3 => "LCOM3", Cohesion, ValueKind::Ratio { lo: 0.0, hi: 2.0 };
    Cam => "CAM", Cohesion, UNIT;
    Dam => "DAM", Encapsulation, UNIT;
    Nprif => "NPRIF", Encapsulation, COUNT;
    Nprim => "NPRIM", Encapsulation, COUNT;
    Nprom => "NPROM", Encapsulation, COUNT;
    TLoc => "T-LOC", TestEffort, COUNT;
    TNot => "T-NOT", TestEffort, COUNT;
    TNoa => "T-NOA", TestEffort, COUNT;
    TNmc => "T-NMC", TestEffort, COUNT;
    TWmc => "T-WMC", TestEffort, COUNT;
    TAmc => "T-AMC", TestEffort, NONNEG;
    LineCoverage => "L", TestQuality, UNIT;
    BranchCoverage => "B", TestQuality, UNIT;
    MutationScore => "M", TestQuality, UNIT;
}

impl MetricId {
    /// The 34 independent variables (28 code + 6 test-effort), canonical order.
    pub fn independent() -> impl Iterator<Item = MetricId> {
        Self::ALL.into_iter().filter(|m| m.is_independent())
    }

    pub fn is_independent(self) -> bool {
        self.design_property() != DesignProperty::TestQuality
    }

    pub fn is_test_effort(self) -> bool {
        self.design_property() == DesignProperty::TestEffort
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

impl Serialize for MetricId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for MetricId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Binary effectiveness class derived from the mutation score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EffectivenessLabel {
    NonEffective,
    Effective,
}

impl EffectivenessLabel {
    /// Class index used by the learners: NonEffective = 0, Effective = 1.
    pub fn index(self) -> usize {
        match self {
            EffectivenessLabel::NonEffective => 0,
            EffectivenessLabel::Effective => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 1 {
            EffectivenessLabel::Effective
        } else {
            EffectivenessLabel::NonEffective
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectivenessLabel::NonEffective => "non-effective",
            EffectivenessLabel::Effective => "effective",
        }
    }
}

impl fmt::Display for EffectivenessLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EffectivenessLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "effective" => Ok(EffectivenessLabel::Effective),
            "non-effective" => Ok(EffectivenessLabel::NonEffective),
            other => Err(Error::InvalidValue(format!("unknown label `{other}`"))),
        }
    }
}

/// One production class paired with its test class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub class_id: String,
    pub test_id: String,
    pub metrics: BTreeMap<MetricId, f64>,
}

impl ClassRecord {
    pub fn new(class_id: impl Into<String>, test_id: impl Into<String>) -> Self {
        ClassRecord {
            class_id: class_id.into(),
            test_id: test_id.into(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn get(&self, metric: MetricId) -> Option<f64> {
        self.metrics.get(&metric).copied()
    }

    pub fn set(&mut self, metric: MetricId, value: f64) {
        self.metrics.insert(metric, value);
    }

    pub fn with(mut self, metric: MetricId, value: f64) -> Self {
        self.set(metric, value);
        self
    }

    /// Mutation score, if present.
    pub fn mutation_score(&self) -> Option<f64> {
        self.get(MetricId::MutationScore)
    }
}

/// One broken record invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotFinite(MetricId),
    Negative(MetricId),
    NotInteger(MetricId),
    OutOfRange { metric: MetricId, lo: f64, hi: f64 },
    NmcIdentity { nmc: f64, nmci: f64, nmce: f64 },
    Missing(MetricId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite(m) => write!(f, "{m} is not finite"),
            Violation::Negative(m) => write!(f, "{m} is negative"),
            Violation::NotInteger(m) => write!(f, "{m} is not an integer"),
            Violation::OutOfRange { metric, lo, hi } => write!(f, "{metric} out of [{lo},{hi}]"),
            Violation::NmcIdentity { nmc, nmci, nmce } => {
                write!(f, "NMC ≠ NMCI+NMCE ({nmc} ≠ {nmci}+{nmce})")
            }
            Violation::Missing(m) => write!(f, "{m} is missing"),
        }
    }
}

/// Checks range, integrality and the `NMC = NMCI + NMCE` identity.
///
/// Absent metrics are not violations here; see [`require_metrics`].
pub fn validate_record(record: &ClassRecord) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    for (&metric, &value) in &record.metrics {
        if !value.is_finite() {
            violations.push(Violation::NotFinite(metric));
            continue;
        }
        match metric.value_kind() {
            ValueKind::Count => {
                if value < 0.0 {
                    violations.push(Violation::Negative(metric));
                }
                if value.fract() != 0.0 {
                    violations.push(Violation::NotInteger(metric));
                }
            }
            ValueKind::NonNegative => {
                if value < 0.0 {
                    violations.push(Violation::Negative(metric));
                }
            }
            ValueKind::Ratio { lo, hi } => {
                if value < lo || value > hi {
                    violations.push(Violation::OutOfRange { metric, lo, hi });
                }
            }
        }
    }
    if let (Some(nmc), Some(nmci), Some(nmce)) = (
        record.get(MetricId::Nmc),
        record.get(MetricId::Nmci),
        record.get(MetricId::Nmce),
    ) {
        if nmc != nmci + nmce {
            violations.push(Violation::NmcIdentity { nmc, nmci, nmce });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Reports every metric in `required` that the record lacks.
pub fn require_metrics(record: &ClassRecord, required: &[MetricId]) -> Result<(), Vec<Violation>> {
    let missing: Vec<_> = required
        .iter()
        .filter(|m| !record.metrics.contains_key(m))
        .map(|&m| Violation::Missing(m))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(missing)
    }
}

/// Rectangular numeric design matrix with aligned binary targets.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_ids: Vec<MetricId>,
    rows: Vec<Vec<f64>>,
    targets: Vec<EffectivenessLabel>,
}

impl FeatureMatrix {
    /// Builds a matrix, rejecting ragged rows, non-finite cells, misaligned
    /// targets and test-quality columns.
    pub fn new(
        feature_ids: Vec<MetricId>,
        rows: Vec<Vec<f64>>,
        targets: Vec<EffectivenessLabel>,
    ) -> Result<Self, Error> {
        if let Some(&m) = feature_ids.iter().find(|m| !m.is_independent()) {
            return Err(Error::ForbiddenFeature(m));
        }
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: targets.len(),
            });
        }
        for row in &rows {
            if row.len() != feature_ids.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_ids.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidValue("non-finite feature value".into()));
            }
        }
        Ok(FeatureMatrix {
            feature_ids,
            rows,
            targets,
        })
    }

    pub fn feature_ids(&self) -> &[MetricId] {
        &self.feature_ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[EffectivenessLabel] {
        &self.targets
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_ids: self.feature_ids.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Applies `f` to every cell, keeping targets.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> FeatureMatrix {
        FeatureMatrix {
            feature_ids: self.feature_ids.clone(),
            rows: self.rows.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect(),
            targets: self.targets.clone(),
        }
    }

    /// Count of rows per class, indexed by [`EffectivenessLabel::index`].
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for t in &self.targets {
            counts[t.index()] += 1;
        }
        counts
    }
}
