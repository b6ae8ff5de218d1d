//! Template-triplet extraction and knowledge-graph construction.
//!
//! The baseline extractor is a deterministic, dependency-free stand-in for
//! a full dependency parser: it splits clause candidates, finds the first
//! verb group, and takes the surrounding token runs as subject and object.
//! Higher-quality triplets can be brought in through [`import_triplets`];
//! both paths produce identical details for identical records.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DoxError;
use crate::ingest::Sentence;
use crate::text::{self, Token};

/// A clause as subject + sentence template + object. The template contains
/// `{subj}` and `{obj}` exactly once each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateTriplet {
    pub subject: String,
    pub template: String,
    pub object: String,
    pub doc_id: String,
    pub sent_index: usize,
    /// The verbatim source sentence.
    pub context: String,
}

/// A realized information unit: the triplet template with its arguments
/// substituted back in, plus the source context.
#[derive(Debug, Clone, PartialEq)]
pub struct Detail {
    /// First 16 hex chars of SHA-256 over realized text + context.
    pub id: String,
    pub text: String,
    pub context: String,
    pub triplet: TemplateTriplet,
    /// Normalized aspect phrases this detail mentions.
    pub aspect_keys: BTreeSet<String>,
}

/// An aspect node: a normalized key plus the surface forms it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectNode {
    pub key: String,
    pub surface_forms: BTreeSet<String>,
}

/// Nodes are the known aspects, edges the details that mention them.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    pub nodes: BTreeMap<String, AspectNode>,
    /// Sorted by detail id.
    pub edges: Vec<Detail>,
}

/// Conjunctions that open a new clause candidate after a comma.
const CLAUSE_CONJUNCTIONS: &[&str] = &[
    "and", "but", "or", "because", "when", "while", "although", "that", "which", "who",
];

/// Words that mark an embedded clause right after a verb group.
const SUBORDINATORS: &[&str] = &[
    "when", "because", "while", "although", "that", "which", "who", "if", "since", "unless",
    "until", "after", "before", "where", "whereas", "whenever", "whether", "as",
];

/// Sentence-initial adverbials dropped from the subject run.
const LEAD_SKIP: &[&str] = &[
    "and", "but", "or", "because", "when", "while", "although", "that", "which", "who",
    "however", "moreover", "furthermore", "therefore", "thus", "hence", "then", "meanwhile",
    "instead", "also", "still", "yet", "so", "now", "finally", "additionally", "consequently",
    "accordingly", "similarly", "specifically", "notably", "importantly", "eventually",
    "generally", "typically", "usually", "often", "sometimes", "first", "second", "third",
    "next", "indeed",
];

/// Degree words stripped from the front of the object run.
const DEGREE_WORDS: &[&str] = &[
    "enough", "very", "too", "quite", "really", "almost", "just", "rather", "somewhat", "even",
    "still", "yet", "nearly", "fairly",
];

/// Tokens that extend a verb group once it has started.
const VERB_CONTINUATIONS: &[&str] = &["not", "never", "also", "already", "still", "just", "to"];

impl Detail {
    /// Deterministic detail id: 16 hex chars over realized text + context.
    pub fn compute_id(text: &str, context: &str) -> String {
        let digest = Sha256::digest(format!("{text}\x1f{context}").as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

/// Baseline extractor: at most one triplet per clause candidate.
pub fn extract_triplets(sentence: &Sentence) -> Vec<TemplateTriplet> {
    let sent = sentence.text.as_str();
    let tokens = text::tokenize(sent);
    let mut triplets = Vec::new();
    for clause in clause_ranges(sent, &tokens) {
        if let Some((subj_span, obj_span)) = clause_spans(sent, &tokens[clause]) {
            let subject = sent[subj_span.0..subj_span.1].to_string();
            let object = sent[obj_span.0..obj_span.1].to_string();
            let template = format!(
                "{}{{subj}}{}{{obj}}{}",
                &sent[..subj_span.0],
                &sent[subj_span.1..obj_span.0],
                &sent[obj_span.1..]
            );
            triplets.push(TemplateTriplet {
                subject,
                template,
                object,
                doc_id: sentence.doc_id.clone(),
                sent_index: sentence.index,
                context: sent.to_string(),
            });
        }
    }
    triplets
}

/// Splits the token list into clause candidates: at semicolons, and at
/// commas immediately followed by a clause conjunction.
fn clause_ranges(sent: &str, tokens: &[Token]) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0usize;
    for i in 1..tokens.len() {
        let gap = &sent[tokens[i - 1].end..tokens[i].start];
        let lower = tokens[i].text.to_lowercase();
        if gap.contains(';') || (gap.contains(',') && CLAUSE_CONJUNCTIONS.contains(&lower.as_str()))
        {
            if i > start {
                ranges.push(start..i);
            }
            start = i;
        }
    }
    if tokens.len() > start {
        ranges.push(start..tokens.len());
    }
    ranges
}

/// Finds (subject span, object span) in byte offsets, or None when the
/// clause has no usable subject-verb-object shape.
fn clause_spans(sent: &str, tokens: &[Token]) -> Option<((usize, usize), (usize, usize))> {
    let lowers: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let vi = find_verb(&lowers)?;
    let verb_end = verb_group_end(&lowers, vi);

    // Subject: tokens before the verb group, minus anything up to the last
    // comma and minus leading adverbials.
    let mut s_from = 0usize;
    for i in 1..vi {
        if sent[tokens[i - 1].end..tokens[i].start].contains(',') {
            s_from = i;
        }
    }
    while s_from < vi && LEAD_SKIP.contains(&lowers[s_from].as_str()) {
        s_from += 1;
    }
    if s_from >= vi {
        return None;
    }
    let subj_span = (tokens[s_from].start, tokens[vi - 1].end);

    // Object: tokens after the verb group; while the run opens with a
    // subordinator, descend past the embedded clause's own verb group.
    let mut o_from = verb_end;
    for _ in 0..3 {
        if o_from < tokens.len() && SUBORDINATORS.contains(&lowers[o_from].as_str()) {
            let inner = find_verb(&lowers[o_from + 1..]).map(|v| v + o_from + 1)?;
            o_from = verb_group_end(&lowers, inner);
        } else {
            break;
        }
    }
    while o_from < tokens.len() && DEGREE_WORDS.contains(&lowers[o_from].as_str()) {
        o_from += 1;
    }
    if o_from >= tokens.len() {
        return None;
    }
    let obj_span = (tokens[o_from].start, tokens[tokens.len() - 1].end);
    if subj_span.1 > obj_span.0 {
        return None;
    }
    Some((subj_span, obj_span))
}

/// First verb-ish token: a listed verb if any, otherwise the first token
/// passing the suffix heuristic (-s/-ed/-ing after a noun chunk).
fn find_verb(lowers: &[String]) -> Option<usize> {
    if let Some(i) = lowers.iter().position(|w| text::is_listed_verb(w)) {
        return Some(i);
    }
    for (i, w) in lowers.iter().enumerate() {
        if i == 0 || text::is_stopword(w) || w.len() < 4 {
            continue;
        }
        let suffixed = (w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is"))
            || w.ends_with("ed")
            || w.ends_with("ing");
        if !suffixed {
            continue;
        }
        let has_noun_before = lowers[..i].iter().any(|p| !text::is_stopword(p));
        if has_noun_before {
            return Some(i);
        }
    }
    None
}

fn verb_group_end(lowers: &[String], start: usize) -> usize {
    let mut end = start + 1;
    while end < lowers.len() {
        let w = lowers[end].as_str();
        let participle = w.len() >= 4
            && (w.ends_with("ed") || w.ends_with("ing"))
            && !text::is_stopword(w);
        if text::is_listed_verb(w) || VERB_CONTINUATIONS.contains(&w) || participle {
            end += 1;
        } else {
            break;
        }
    }
    end
}

/// Substitutes `{subj}` and `{obj}` at their template positions. Positions
/// are resolved on the template before splicing so arguments containing
/// placeholder-like text cannot be re-substituted.
pub fn realize(triplet: &TemplateTriplet) -> String {
    let template = triplet.template.as_str();
    let mut slots: Vec<(usize, &str, &str)> = Vec::new();
    if let Some(pos) = template.find("{subj}") {
        slots.push((pos, "{subj}", triplet.subject.as_str()));
    }
    if let Some(pos) = template.find("{obj}") {
        slots.push((pos, "{obj}", triplet.object.as_str()));
    }
    slots.sort_by_key(|(pos, _, _)| std::cmp::Reverse(*pos));
    let mut out = template.to_string();
    for (pos, placeholder, value) in slots {
        out.replace_range(pos..pos + placeholder.len(), value);
    }
    out
}

fn validate_triplet(t: &TemplateTriplet) -> Result<(), String> {
    if t.subject.trim().is_empty() {
        return Err("subject is empty".into());
    }
    if t.object.trim().is_empty() {
        return Err("object is empty".into());
    }
    for placeholder in ["{subj}", "{obj}"] {
        match t.template.matches(placeholder).count() {
            1 => {}
            n => {
                return Err(format!(
                    "template must contain {placeholder} exactly once, found {n}"
                ))
            }
        }
        if t.subject.contains(placeholder) || t.object.contains(placeholder) {
            return Err(format!("subject/object must not contain {placeholder}"));
        }
    }
    Ok(())
}

/// Reads triplet JSONL, validating each record. Records realizing an
/// identical (text, context) pair are collapsed to the first occurrence.
pub fn import_triplets(path: &Path) -> Result<Vec<TemplateTriplet>, DoxError> {
    let raw = fs::read_to_string(path).map_err(|e| DoxError::Ingest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut seen = BTreeSet::new();
    let mut triplets = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let triplet: TemplateTriplet = serde_json::from_str(line).map_err(|e| DoxError::Schema {
            line: lineno + 1,
            message: e.to_string(),
        })?;
        validate_triplet(&triplet).map_err(|message| DoxError::Schema {
            line: lineno + 1,
            message,
        })?;
        let key = (realize(&triplet), triplet.context.clone());
        if seen.insert(key) {
            triplets.push(triplet);
        }
    }
    Ok(triplets)
}

/// Serializes triplets as JSONL, one record per line.
pub fn export_triplets(triplets: &[TemplateTriplet]) -> String {
    let mut out = String::new();
    for t in triplets {
        out.push_str(&serde_json::to_string(t).expect("triplet serializes"));
        out.push('\n');
    }
    out
}

/// Harvests normalized aspect keys (with surface forms) from a triplet:
/// the full subject and object phrases, their noun chunks, and the noun
/// chunks of the realized text.
fn harvest_keys(triplet: &TemplateTriplet, realized: &str) -> Vec<(String, String)> {
    let mut keys = Vec::new();
    let mut add = |surface: &str| {
        let key = text::normalize_key(surface);
        if !key.is_empty() {
            keys.push((key, surface.to_string()));
        }
    };
    for phrase in [triplet.subject.as_str(), triplet.object.as_str()] {
        add(phrase);
        for chunk in text::noun_chunks(phrase) {
            add(chunk);
        }
    }
    for chunk in text::noun_chunks(realized) {
        add(chunk);
    }
    keys
}

/// Builds the knowledge graph: nodes are harvested aspect keys, edges are
/// realized details with exact duplicates (same text and context)
/// collapsed. Aspect keys of collapsed triplets are merged.
pub fn build_graph(triplets: &[TemplateTriplet]) -> KnowledgeGraph {
    let mut nodes: BTreeMap<String, AspectNode> = BTreeMap::new();
    let mut details: BTreeMap<String, Detail> = BTreeMap::new();

    for triplet in triplets {
        let realized = realize(triplet);
        let keys = harvest_keys(triplet, &realized);
        for (key, surface) in &keys {
            nodes
                .entry(key.clone())
                .or_insert_with(|| AspectNode { key: key.clone(), surface_forms: BTreeSet::new() })
                .surface_forms
                .insert(surface.clone());
        }
        let id = Detail::compute_id(&realized, &triplet.context);
        let key_set: BTreeSet<String> = keys.into_iter().map(|(k, _)| k).collect();
        match details.get_mut(&id) {
            Some(existing) => {
                existing.aspect_keys.extend(key_set);
                // Keep the representative triplet stable under input
                // reordering: smallest (doc_id, sent_index) wins.
                let new_rank = (triplet.doc_id.clone(), triplet.sent_index);
                let old_rank = (existing.triplet.doc_id.clone(), existing.triplet.sent_index);
                if new_rank < old_rank {
                    existing.triplet = triplet.clone();
                }
            }
            None => {
                details.insert(
                    id.clone(),
                    Detail {
                        id,
                        text: realized,
                        context: triplet.context.clone(),
                        triplet: triplet.clone(),
                        aspect_keys: key_set,
                    },
                );
            }
        }
    }

    KnowledgeGraph { nodes, edges: details.into_values().collect() }
}

/// The set I of aspects the graph knows about.
pub fn known_aspects(graph: &KnowledgeGraph) -> BTreeSet<String> {
    graph.nodes.keys().cloned().collect()
}

impl KnowledgeGraph {
    /// JSON export: `{"nodes": [...], "edges": [...]}` with sorted keys.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nodes": self.nodes.values().map(|n| serde_json::json!({
                "key": n.key,
                "surface_forms": n.surface_forms,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|d| serde_json::json!({
                "id": d.id,
                "text": d.text,
                "context": d.context,
                "aspect_keys": d.aspect_keys,
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{segment_sentences, Document};
    use proptest::prelude::*;

    fn sentence(text: &str) -> Sentence {
        Sentence { doc_id: "doc0".into(), index: 0, text: text.into(), span: (0, text.len()) }
    }

    #[test]
    fn angina_template_triplet() {
        let sent = sentence(
            "In particular, angina pectoris happens when some part of your heart does not get enough oxygen.",
        );
        let triplets = extract_triplets(&sent);
        assert!(triplets.iter().any(|t| {
            t.subject == "angina pectoris"
                && t.object == "oxygen"
                && t.template
                    == "In particular, {subj} happens when some part of your heart does not get enough {obj}."
        }));
    }

    #[test]
    fn no_clause_yields_nothing() {
        assert!(extract_triplets(&sentence("Hello.")).is_empty());
    }

    #[test]
    fn copula_clause_keeps_full_object_run() {
        // Golden value derived by applying the chunking rules by hand.
        let sent = sentence("The score P is the probability of having a disease.");
        let triplets = extract_triplets(&sent);
        assert_eq!(triplets.len(), 1);
        assert_eq!(triplets[0].subject, "The score P");
        assert_eq!(triplets[0].object, "the probability of having a disease");
        assert_eq!(triplets[0].template, "{subj} is {obj}.");
    }

    #[test]
    fn comma_conjunction_opens_second_clause() {
        let sent = sentence("The risk is low, and the model uses ten factors.");
        let triplets = extract_triplets(&sent);
        assert_eq!(triplets.len(), 2);
        assert_eq!(triplets[1].subject, "the model");
        assert_eq!(triplets[1].object, "ten factors");
    }

    #[test]
    fn realize_substitutes_in_template_order() {
        let angina = TemplateTriplet {
            subject: "angina pectoris".into(),
            template: "In particular, {subj} happens when some part of your heart does not get enough {obj}.".into(),
            object: "oxygen".into(),
            doc_id: "d".into(),
            sent_index: 0,
            context: "c".into(),
        };
        assert_eq!(
            realize(&angina),
            "In particular, angina pectoris happens when some part of your heart does not get enough oxygen."
        );

        let direct = TemplateTriplet {
            subject: "A".into(),
            template: "{subj} is {obj}".into(),
            object: "B".into(),
            doc_id: "d".into(),
            sent_index: 0,
            context: "c".into(),
        };
        assert_eq!(realize(&direct), "A is B");

        let swapped = TemplateTriplet {
            subject: "x".into(),
            template: "{obj} before {subj}".into(),
            object: "y".into(),
            doc_id: "d".into(),
            sent_index: 0,
            context: "c".into(),
        };
        assert_eq!(realize(&swapped), "y before x");
    }

    #[test]
    fn graph_harvests_subject_object_and_text_chunks() {
        let sent = sentence(
            "In particular, angina pectoris happens when some part of your heart does not get enough oxygen.",
        );
        let graph = build_graph(&extract_triplets(&sent));
        let keys = known_aspects(&graph);
        assert!(keys.contains("angina pectoris"));
        assert!(keys.contains("oxygen"));
        assert!(keys.contains("heart"));
        assert_eq!(graph.edges.len(), 1);
    }

    #[test]
    fn empty_and_duplicate_graphs() {
        let empty = build_graph(&[]);
        assert!(empty.nodes.is_empty());
        assert!(empty.edges.is_empty());

        let t1 = TemplateTriplet {
            subject: "angina".into(),
            template: "{subj} causes {obj}".into(),
            object: "pain".into(),
            doc_id: "d".into(),
            sent_index: 0,
            context: "angina causes pain".into(),
        };
        let t2 = TemplateTriplet {
            subject: "angina".into(),
            template: "{subj} needs {obj}".into(),
            object: "treatment".into(),
            doc_id: "d".into(),
            sent_index: 1,
            context: "angina needs treatment".into(),
        };
        let graph = build_graph(&[t1.clone(), t2]);
        let incident = graph
            .edges
            .iter()
            .filter(|d| d.aspect_keys.contains("angina"))
            .count();
        assert_eq!(incident, 2);
        assert_eq!(graph.nodes.values().filter(|n| n.key == "angina").count(), 1);

        // Exact duplicates collapse to one edge; known aspects unchanged.
        let dup = build_graph(&[t1.clone(), t1.clone()]);
        assert_eq!(dup.edges.len(), 1);
        assert_eq!(known_aspects(&dup), known_aspects(&build_graph(&[t1])));
    }

    #[test]
    fn import_validates_and_collapses() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.jsonl");
        let record = |s: &str, t: &str, o: &str, ctx: &str| {
            format!(
                "{{\"subject\":\"{s}\",\"template\":\"{t}\",\"object\":\"{o}\",\"doc_id\":\"d\",\"sent_index\":0,\"context\":\"{ctx}\"}}"
            )
        };
        std::fs::write(
            &good,
            [
                record("a", "{subj} is {obj}", "b", "a is b"),
                record("c", "{subj} was {obj}", "d", "c was d"),
                record("e", "{subj} has {obj}", "f", "e has f"),
            ]
            .join("\n"),
        )
        .unwrap();
        assert_eq!(import_triplets(&good).unwrap().len(), 3);

        let bad = dir.path().join("bad.jsonl");
        std::fs::write(&bad, record("a", "{subj} is", "b", "a is")).unwrap();
        match import_triplets(&bad).unwrap_err() {
            DoxError::Schema { line, .. } => assert_eq!(line, 1),
            other => panic!("expected schema error, got {other}"),
        }

        let dup = dir.path().join("dup.jsonl");
        std::fs::write(
            &dup,
            [
                record("a", "{subj} is {obj}", "b", "same"),
                record("a", "{subj} is {obj}", "b", "same"),
            ]
            .join("\n"),
        )
        .unwrap();
        assert_eq!(import_triplets(&dup).unwrap().len(), 1);
    }

    #[test]
    fn export_import_round_trip_preserves_detail_ids() {
        let sent = sentence("The score P is the probability of having a disease.");
        let triplets = extract_triplets(&sent);
        let graph = build_graph(&triplets);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        std::fs::write(&path, export_triplets(&triplets)).unwrap();
        let imported = import_triplets(&path).unwrap();
        let regraph = build_graph(&imported);

        let ids: Vec<&str> = graph.edges.iter().map(|d| d.id.as_str()).collect();
        let re_ids: Vec<&str> = regraph.edges.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, re_ids);
    }

    proptest! {
        // Subject and object always occur verbatim inside the realized text,
        // and extraction is deterministic.
        #[test]
        fn realization_round_trip(text in "[A-Za-z ,.]{1,80}") {
            let doc = Document::new("t", text);
            for sent in segment_sentences(&doc) {
                let first = extract_triplets(&sent);
                prop_assert_eq!(&first, &extract_triplets(&sent));
                for t in &first {
                    let realized = realize(t);
                    prop_assert!(realized.contains(&t.subject));
                    prop_assert!(realized.contains(&t.object));
                    prop_assert!(t.subject.trim().len() > 0 && t.object.trim().len() > 0);
                    prop_assert!(sent.text.contains(&t.subject));
                    prop_assert!(sent.text.contains(&t.object));
                }
            }
        }

        // Every edge's aspect keys are node keys; no two details share
        // (text, context).
        #[test]
        fn graph_well_formedness(text in "[a-z ,.]{1,120}") {
            let doc = Document::new("t", text);
            let mut triplets = Vec::new();
            for sent in segment_sentences(&doc) {
                triplets.extend(extract_triplets(&sent));
            }
            let graph = build_graph(&triplets);
            let keys = known_aspects(&graph);
            let mut seen = BTreeSet::new();
            for d in &graph.edges {
                for k in &d.aspect_keys {
                    prop_assert!(keys.contains(k));
                }
                prop_assert!(seen.insert((d.text.clone(), d.context.clone())));
            }
        }
    }
}
