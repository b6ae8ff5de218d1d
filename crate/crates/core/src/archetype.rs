//! The archetype bank: generic interrogative formulas rendered into
//! archetypal questions for each explanandum aspect.
//!
//! The default bank holds 8 primary archetypes (bare interrogative
//! particles) and 17 secondary ones (discourse-connective formulas), in a
//! stable order. Banks can be overridden or extended from a JSON config;
//! an archetype may carry several question templates, in which case its
//! pertinence is max-pooled over them.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DoxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Primary,
    Secondary,
}

/// Which archetypes a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TierSelection {
    Primary,
    Secondary,
    #[default]
    All,
}

/// A generic interrogative formula with its question template(s). Every
/// template contains `{aspect}` exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Archetype {
    pub id: String,
    pub tier: Tier,
    pub label: String,
    pub templates: Vec<String>,
}

/// An archetype applied to one aspect, e.g. "What is angina?".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchetypalQuestion {
    pub archetype_id: String,
    pub aspect: String,
    pub text: String,
}

const PRIMARY: &[(&str, &str)] = &[
    ("what", "What is {aspect}?"),
    ("who", "Who {aspect}?"),
    ("how", "How {aspect}?"),
    ("where", "Where {aspect}?"),
    ("when", "When {aspect}?"),
    ("which", "Which {aspect}?"),
    ("whose", "Whose {aspect}?"),
    ("why", "Why {aspect}?"),
];

const SECONDARY: &[(&str, &str, &str)] = &[
    ("in-what-manner", "in what manner", "In what manner {aspect}?"),
    ("what-is-the-reason", "what is the reason", "What is the reason of {aspect}?"),
    ("what-is-the-result", "what is the result", "What is the result of {aspect}?"),
    ("after-what", "after what", "After what {aspect}?"),
    ("what-is-an-example", "what is an example", "What is an example of {aspect}?"),
    ("while-what", "while what", "While what {aspect}?"),
    ("in-what-case", "in what case", "In what case {aspect}?"),
    ("since-when", "since when", "Since when {aspect}?"),
    ("what-is-contrasted-with", "what is contrasted with", "What is contrasted with {aspect}?"),
    ("before-what", "before what", "Before what {aspect}?"),
    ("despite-what", "despite what", "Despite what {aspect}?"),
    ("what-is-an-alternative", "what is an alternative", "What is an alternative to {aspect}?"),
    ("unless-what", "unless what", "Unless what {aspect}?"),
    ("instead-of-what", "instead of what", "Instead of what {aspect}?"),
    ("what-is-similar", "what is similar", "What is similar to {aspect}?"),
    ("except-when", "except when", "Except when {aspect}?"),
    ("until-when", "until when", "Until when {aspect}?"),
];

/// The default bank for a tier selection: 8 primary, 17 secondary, or all
/// 25 with the primary archetypes first.
pub fn default_archetypes(tier: TierSelection) -> Vec<Archetype> {
    let mut bank = Vec::new();
    if matches!(tier, TierSelection::Primary | TierSelection::All) {
        bank.extend(PRIMARY.iter().map(|(id, template)| Archetype {
            id: (*id).to_string(),
            tier: Tier::Primary,
            label: (*id).to_string(),
            templates: vec![(*template).to_string()],
        }));
    }
    if matches!(tier, TierSelection::Secondary | TierSelection::All) {
        bank.extend(SECONDARY.iter().map(|(id, label, template)| Archetype {
            id: (*id).to_string(),
            tier: Tier::Secondary,
            label: (*label).to_string(),
            templates: vec![(*template).to_string()],
        }));
    }
    bank
}

/// Renders one archetypal question from the archetype's first template:
/// deterministic, first letter capitalized, ends with `?`.
pub fn render_question(archetype: &Archetype, aspect: &str) -> Result<ArchetypalQuestion, DoxError> {
    let aspect = aspect.trim();
    if aspect.is_empty() {
        return Err(DoxError::Config("cannot render a question for an empty aspect".into()));
    }
    let text = render_template(&archetype.templates[0], aspect);
    Ok(ArchetypalQuestion { archetype_id: archetype.id.clone(), aspect: aspect.to_string(), text })
}

/// Renders every template of the archetype, for max-pooled scoring.
pub fn render_all(archetype: &Archetype, aspect: &str) -> Vec<String> {
    archetype.templates.iter().map(|t| render_template(t, aspect)).collect()
}

fn render_template(template: &str, aspect: &str) -> String {
    let mut text = template.replace("{aspect}", aspect);
    let mut chars = text.chars();
    if let Some(first) = chars.next() {
        if first.is_lowercase() {
            text = first.to_uppercase().collect::<String>() + chars.as_str();
        }
    }
    if !text.ends_with('?') {
        text.push('?');
    }
    text
}

fn validate_archetype(a: &Archetype) -> Result<(), String> {
    if a.id.trim().is_empty() {
        return Err("archetype id is empty".into());
    }
    if a.templates.is_empty() {
        return Err(format!("archetype {} has no templates", a.id));
    }
    for t in &a.templates {
        if t.matches("{aspect}").count() != 1 {
            return Err(format!(
                "template {:?} of archetype {} must contain {{aspect}} exactly once",
                t, a.id
            ));
        }
    }
    Ok(())
}

/// Loads an archetype config: entries with a known id replace that bank
/// entry, new ids are appended. Duplicate ids inside the file are
/// rejected.
pub fn load_custom_archetypes(path: &Path) -> Result<Vec<Archetype>, DoxError> {
    let raw = fs::read_to_string(path).map_err(|e| DoxError::Ingest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let entries: Vec<Archetype> = serde_json::from_str(&raw)
        .map_err(|e| DoxError::Schema { line: e.line(), message: e.to_string() })?;

    let mut seen = BTreeSet::new();
    let mut bank = default_archetypes(TierSelection::All);
    for entry in entries {
        validate_archetype(&entry).map_err(|message| DoxError::Schema { line: 0, message })?;
        if !seen.insert(entry.id.clone()) {
            return Err(DoxError::Schema {
                line: 0,
                message: format!("duplicate archetype id {:?}", entry.id),
            });
        }
        match bank.iter_mut().find(|a| a.id == entry.id) {
            Some(existing) => *existing = entry,
            None => bank.push(entry),
        }
    }
    Ok(bank)
}
