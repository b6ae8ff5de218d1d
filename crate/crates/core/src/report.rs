//! Report serialization: the canonical JSON schema, a CSV view, and a
//! human-readable table with archetype rows sorted by score.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::archetype::Tier;
use crate::metric::DoxResult;
use crate::scalar::Scalar;

/// The wire form of a run result. Field names and nesting are stable; the
/// canonical JSON encoding sorts all object keys.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report<S> {
    pub params: ReportParams<S>,
    pub per_archetype: BTreeMap<String, S>,
    pub average: S,
    pub primary_average: Option<S>,
    pub secondary_average: Option<S>,
    pub coverage: S,
    pub per_aspect: Vec<AspectReport<S>>,
    pub counts: Counts,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportParams<S> {
    pub t: S,
    pub r: S,
    pub backend_id: String,
    pub aspects: Vec<String>,
    pub archetypes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AspectReport<S> {
    pub aspect: String,
    pub scores: BTreeMap<String, S>,
    pub contributing_details: BTreeMap<String, Vec<ContributingDetail<S>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ContributingDetail<S> {
    pub detail_id: String,
    pub p: S,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Counts {
    pub details: usize,
    pub aspects_known: usize,
}

impl<S: Scalar> Report<S> {
    pub fn from_result(result: &DoxResult<S>) -> Self {
        Report {
            params: ReportParams {
                t: result.params.t,
                r: result.params.r,
                backend_id: result.params.backend_id.clone(),
                aspects: result.params.aspects.clone(),
                archetypes: result.archetype_ids.clone(),
            },
            per_archetype: result.per_archetype.clone(),
            average: result.average,
            primary_average: result.primary_average,
            secondary_average: result.secondary_average,
            coverage: result.coverage,
            per_aspect: result
                .per_aspect
                .iter()
                .map(|ei| AspectReport {
                    aspect: ei.aspect.clone(),
                    scores: ei.scores.clone(),
                    contributing_details: ei
                        .contributing_details
                        .iter()
                        .map(|(id, list)| {
                            (
                                id.clone(),
                                list.iter()
                                    .map(|(detail_id, p)| ContributingDetail {
                                        detail_id: detail_id.clone(),
                                        p: *p,
                                    })
                                    .collect(),
                            )
                        })
                        .collect(),
                })
                .collect(),
            counts: Counts {
                details: result.detail_count,
                aspects_known: result.aspects_known,
            },
        }
    }

    /// Canonical JSON: pretty-printed with all object keys sorted.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    pub fn from_json(raw: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(raw)
    }

    /// Archetype rows sorted by score descending, id ascending on ties.
    pub fn rows_by_score(&self) -> Vec<(&str, S)> {
        let mut rows: Vec<(&str, S)> =
            self.per_archetype.iter().map(|(id, r)| (id.as_str(), *r)).collect();
        rows.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).expect("scores are finite").then_with(|| a.0.cmp(b.0))
        });
        rows
    }

    /// CSV view, one row per archetype.
    pub fn to_csv(&self, tiers: &BTreeMap<String, Tier>) -> String {
        let mut out = String::from("archetype,tier,score\n");
        for (id, score) in self.rows_by_score() {
            let tier = match tiers.get(id) {
                Some(Tier::Primary) => "primary",
                Some(Tier::Secondary) => "secondary",
                None => "custom",
            };
            out.push_str(&format!("{id},{tier},{score}\n"));
        }
        out
    }

    /// Plain-text table view.
    pub fn to_table(&self, tiers: &BTreeMap<String, Tier>) -> String {
        let width = self
            .per_archetype
            .keys()
            .map(String::len)
            .max()
            .unwrap_or(9)
            .max("archetype".len());
        let mut out = String::new();
        out.push_str(&format!("{:<width$}  {:<9}  score\n", "archetype", "tier"));
        for (id, score) in self.rows_by_score() {
            let tier = match tiers.get(id) {
                Some(Tier::Primary) => "primary",
                Some(Tier::Secondary) => "secondary",
                None => "custom",
            };
            out.push_str(&format!("{id:<width$}  {tier:<9}  {score:.6}\n"));
        }
        out.push('\n');
        out.push_str(&format!("average            {:.6}\n", self.average));
        if let Some(p) = self.primary_average {
            out.push_str(&format!("primary average    {p:.6}\n"));
        }
        if let Some(s) = self.secondary_average {
            out.push_str(&format!("secondary average  {s:.6}\n"));
        }
        out.push_str(&format!("coverage           {:.6}\n", self.coverage));
        out.push_str(&format!(
            "details {} / known aspects {}\n",
            self.counts.details, self.counts.aspects_known
        ));
        out
    }
}
