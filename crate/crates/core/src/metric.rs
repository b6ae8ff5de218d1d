//! The explainability metric: aspect matching, semantic deduplication,
//! cumulative pertinence, per-archetype scores, and their averages.
//!
//! For an aspect a and archetypal question q_a, the cumulative pertinence
//! P sums the pertinences of the deduplicated details about a that reach
//! the threshold t. The per-archetype score R is the mean of P over all
//! aspects, and the average score is the mean of R over all archetypes.
//! Summation order is fixed (p descending, detail id ascending) so results
//! are bit-reproducible.

use std::collections::BTreeMap;

use crate::archetype::{render_all, render_question, Archetype, Tier};
use crate::embed::{
    contextualize, cosine, embed_all, EmbeddingBackend, EmbeddingVector, PertinenceScore, Role,
};
use crate::error::DoxError;
use crate::extract::{Detail, KnowledgeGraph};
use crate::scalar::Scalar;
use crate::text;

/// Run parameters: thresholds, the aspect set A (normalized and
/// deduplicated), and the backend the scores came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams<S> {
    /// Pertinence threshold t in [0, 1].
    pub t: S,
    /// Dedup similarity threshold r in (0, 1].
    pub r: S,
    /// Normalized aspect phrases, first occurrence kept.
    pub aspects: Vec<String>,
    pub backend_id: String,
    /// When set (the default), a detail is about an aspect if the aspect
    /// occurs anywhere in its realized text, not only in the subject or
    /// object phrase.
    pub extended_match: bool,
}

impl<S: Scalar> RunParams<S> {
    pub fn new(
        t: S,
        r: S,
        aspects: &[String],
        backend_id: impl Into<String>,
    ) -> Result<Self, DoxError> {
        if t < S::zero() || t > S::one() {
            return Err(DoxError::Config("t must lie in [0, 1]".into()));
        }
        if r <= S::zero() || r > S::one() {
            return Err(DoxError::Config("r must lie in (0, 1]".into()));
        }
        let mut normalized = Vec::new();
        for aspect in aspects {
            let key = text::normalize_key(aspect);
            if !key.is_empty() && !normalized.contains(&key) {
                normalized.push(key);
            }
        }
        if normalized.is_empty() {
            return Err(DoxError::Config("aspect set A is empty".into()));
        }
        Ok(RunParams {
            t,
            r,
            aspects: normalized,
            backend_id: backend_id.into(),
            extended_match: true,
        })
    }
}

/// Per-aspect map from archetype to cumulative pertinence, with the
/// details that contributed to each sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplanatoryIllocution<S> {
    pub aspect: String,
    pub scores: BTreeMap<String, S>,
    pub contributing_details: BTreeMap<String, Vec<(String, S)>>,
}

/// Full result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DoxResult<S> {
    pub params: RunParams<S>,
    /// Archetype ids of the bank used, in bank order.
    pub archetype_ids: Vec<String>,
    pub per_archetype: BTreeMap<String, S>,
    pub average: S,
    pub primary_average: Option<S>,
    pub secondary_average: Option<S>,
    pub coverage: S,
    pub per_aspect: Vec<ExplanatoryIllocution<S>>,
    pub detail_count: usize,
    pub aspects_known: usize,
}

/// D_a: the details about an aspect, sorted by detail id. A detail
/// matches when the normalized aspect token sequence occurs contiguously
/// in its subject or object phrase, or (in extended mode) anywhere in its
/// realized text.
pub fn details_about<'g>(
    graph: &'g KnowledgeGraph,
    aspect: &str,
    extended: bool,
) -> Vec<&'g Detail> {
    let needle = text::normalize_tokens(aspect);
    if needle.is_empty() {
        return Vec::new();
    }
    let mut matched: Vec<&Detail> = graph
        .edges
        .iter()
        .filter(|d| detail_matches(d, &needle, extended))
        .collect();
    matched.sort_by(|a, b| a.id.cmp(&b.id));
    matched
}

fn detail_matches(detail: &Detail, needle: &[String], extended: bool) -> bool {
    let subject = text::normalize_tokens(&detail.triplet.subject);
    if text::contains_token_seq(&subject, needle) {
        return true;
    }
    let object = text::normalize_tokens(&detail.triplet.object);
    if text::contains_token_seq(&object, needle) {
        return true;
    }
    extended && text::contains_token_seq(&text::normalize_tokens(&detail.text), needle)
}

/// A detail with its pertinence to one archetypal question.
#[derive(Debug, Clone)]
pub struct ScoredDetail<'g, S> {
    pub detail: &'g Detail,
    pub p: S,
}

/// Greedy semantic dedup: sort by (p desc, id asc); keep a candidate iff
/// its similarity to every already-kept detail is at most r.
pub fn dedup<'g, S: Scalar>(
    mut scored: Vec<ScoredDetail<'g, S>>,
    r: S,
    backend: &dyn EmbeddingBackend<S>,
) -> Result<Vec<ScoredDetail<'g, S>>, DoxError> {
    let texts: Vec<String> = scored.iter().map(|s| s.detail.text.clone()).collect();
    let vectors = embed_all(backend, &texts, Role::Passage, 1)?;
    let by_id: BTreeMap<&str, &EmbeddingVector<S>> = scored
        .iter()
        .zip(vectors.iter())
        .map(|(s, v)| (s.detail.id.as_str(), v))
        .collect();
    sort_for_dedup(&mut scored);
    Ok(dedup_sorted(scored, r, |a, b| cosine(by_id[a.id.as_str()], by_id[b.id.as_str()]).clamp_unit()))
}

fn sort_for_dedup<S: Scalar>(scored: &mut [ScoredDetail<'_, S>]) {
    scored.sort_by(|a, b| {
        b.p.partial_cmp(&a.p)
            .expect("pertinence scores are finite")
            .then_with(|| a.detail.id.cmp(&b.detail.id))
    });
}

fn dedup_sorted<'g, S: Scalar>(
    scored: Vec<ScoredDetail<'g, S>>,
    r: S,
    similarity: impl Fn(&Detail, &Detail) -> S,
) -> Vec<ScoredDetail<'g, S>> {
    let mut kept: Vec<ScoredDetail<'g, S>> = Vec::new();
    for candidate in scored {
        if kept.iter().all(|k| similarity(candidate.detail, k.detail) <= r) {
            kept.push(candidate);
        }
    }
    kept
}

/// Σ of the kept pertinences ≥ t, in (p desc, id asc) order. The
/// threshold is inclusive: a detail at exactly t counts.
fn sum_thresholded<S: Scalar>(kept: &[ScoredDetail<'_, S>], t: S) -> (S, Vec<(String, S)>) {
    let mut total = S::zero();
    let mut contributing = Vec::new();
    for s in kept {
        if s.p >= t {
            total += s.p;
            contributing.push((s.detail.id.clone(), s.p));
        }
    }
    (total, contributing)
}

/// Cumulative pertinence of D_a to one rendered question: score, dedup at
/// r, threshold at t, sum.
pub fn cumulative_pertinence<S: Scalar>(
    d_a: &[&Detail],
    question: &crate::archetype::ArchetypalQuestion,
    params: &RunParams<S>,
    backend: &dyn EmbeddingBackend<S>,
) -> Result<S, DoxError> {
    let passages: Vec<String> = d_a.iter().map(|d| contextualize(d)).collect();
    let passage_vecs = embed_all(backend, &passages, Role::Passage, 1)?;
    let query_vec = &embed_all(backend, &[question.text.clone()], Role::Query, 1)?[0];
    let scored: Vec<ScoredDetail<S>> = d_a
        .iter()
        .zip(passage_vecs.iter())
        .map(|(d, v)| ScoredDetail { detail: d, p: cosine(v, query_vec).clamp_unit() })
        .collect();
    let kept = dedup(scored, params.r, backend)?;
    Ok(sum_thresholded(&kept, params.t).0)
}

/// The per-aspect scores map over a whole archetype bank.
pub fn explanatory_illocution<S: Scalar>(
    graph: &KnowledgeGraph,
    aspect: &str,
    bank: &[Archetype],
    params: &RunParams<S>,
    backend: &dyn EmbeddingBackend<S>,
) -> Result<ExplanatoryIllocution<S>, DoxError> {
    let mut scores = BTreeMap::new();
    let mut contributing_details = BTreeMap::new();
    let d_a = details_about(graph, aspect, params.extended_match);
    for archetype in bank {
        let question = render_question(archetype, aspect)?;
        let mut best: Vec<ScoredDetail<S>> =
            d_a.iter().map(|d| ScoredDetail { detail: d, p: S::zero() }).collect();
        // Max-pool over the archetype's templates.
        for text in render_all(archetype, aspect) {
            let q = crate::archetype::ArchetypalQuestion {
                archetype_id: question.archetype_id.clone(),
                aspect: question.aspect.clone(),
                text,
            };
            let passages: Vec<String> = d_a.iter().map(|d| contextualize(d)).collect();
            let passage_vecs = embed_all(backend, &passages, Role::Passage, 1)?;
            let query_vec = &embed_all(backend, &[q.text.clone()], Role::Query, 1)?[0];
            for (slot, v) in best.iter_mut().zip(passage_vecs.iter()) {
                let p = cosine(v, query_vec).clamp_unit();
                if p > slot.p {
                    slot.p = p;
                }
            }
        }
        let kept = dedup(best, params.r, backend)?;
        let (total, contributing) = sum_thresholded(&kept, params.t);
        scores.insert(archetype.id.clone(), total);
        contributing_details.insert(archetype.id.clone(), contributing);
    }
    Ok(ExplanatoryIllocution {
        aspect: aspect.to_string(),
        scores,
        contributing_details,
    })
}

/// Aspect coverage |A ∩ I| / |A|: an aspect is known when its token
/// sequence occurs contiguously in some node key of the graph.
pub fn coverage<S: Scalar>(aspects: &[String], known: &std::collections::BTreeSet<String>) -> S {
    let keys: Vec<Vec<String>> =
        known.iter().map(|k| k.split(' ').map(str::to_string).collect()).collect();
    let matched = aspects
        .iter()
        .filter(|a| {
            let needle = text::normalize_tokens(a);
            !needle.is_empty() && keys.iter().any(|k| text::contains_token_seq(k, &needle))
        })
        .count();
    if aspects.is_empty() {
        return S::zero();
    }
    S::from_usize(matched).expect("count fits scalar")
        / S::from_usize(aspects.len()).expect("count fits scalar")
}

/// Full run over a knowledge graph. Embeddings are batched up front
/// (`jobs` caps concurrent batches); aggregation is a deterministic
/// reduce, independent of embedding completion order.
pub fn compute_dox<S: Scalar>(
    graph: &KnowledgeGraph,
    params: &RunParams<S>,
    bank: &[Archetype],
    backend: &dyn EmbeddingBackend<S>,
    jobs: usize,
) -> Result<DoxResult<S>, DoxError> {
    if bank.is_empty() {
        return Err(DoxError::Config("archetype set Q is empty".into()));
    }
    if params.aspects.is_empty() {
        return Err(DoxError::Config("aspect set A is empty".into()));
    }

    let d_a_per_aspect: Vec<Vec<&Detail>> = params
        .aspects
        .iter()
        .map(|a| details_about(graph, a, params.extended_match))
        .collect();

    // One embedding pass over every distinct text this run needs.
    let mut queries: Vec<String> = Vec::new();
    for aspect in &params.aspects {
        for archetype in bank {
            for q in render_all(archetype, aspect) {
                if !queries.contains(&q) {
                    queries.push(q);
                }
            }
        }
    }
    let mut passages: Vec<String> = Vec::new();
    for d_a in &d_a_per_aspect {
        for d in d_a {
            for t in [contextualize(d), d.text.clone()] {
                if !passages.contains(&t) {
                    passages.push(t);
                }
            }
        }
    }
    let query_vecs = embed_all(backend, &queries, Role::Query, jobs)?;
    let passage_vecs = embed_all(backend, &passages, Role::Passage, jobs)?;
    let query_by_text: BTreeMap<&str, &EmbeddingVector<S>> =
        queries.iter().map(String::as_str).zip(query_vecs.iter()).collect();
    let passage_by_text: BTreeMap<&str, &EmbeddingVector<S>> =
        passages.iter().map(String::as_str).zip(passage_vecs.iter()).collect();

    let mut per_aspect = Vec::with_capacity(params.aspects.len());
    for (aspect, d_a) in params.aspects.iter().zip(&d_a_per_aspect) {
        let mut scores = BTreeMap::new();
        let mut contributing_details = BTreeMap::new();
        for archetype in bank {
            let mut scored: Vec<ScoredDetail<S>> = d_a
                .iter()
                .map(|d| {
                    let ctx = contextualize(d);
                    let passage = passage_by_text[ctx.as_str()];
                    let mut best = S::zero();
                    for q in render_all(archetype, aspect) {
                        let p = cosine(passage, query_by_text[q.as_str()]).clamp_unit();
                        if p > best {
                            best = p;
                        }
                    }
                    ScoredDetail { detail: d, p: best }
                })
                .collect();
            sort_for_dedup(&mut scored);
            let kept = dedup_sorted(scored, params.r, |a, b| {
                cosine(passage_by_text[a.text.as_str()], passage_by_text[b.text.as_str()])
                    .clamp_unit()
            });
            let (total, contributing) = sum_thresholded(&kept, params.t);
            scores.insert(archetype.id.clone(), total);
            contributing_details.insert(archetype.id.clone(), contributing);
        }
        per_aspect.push(ExplanatoryIllocution {
            aspect: aspect.clone(),
            scores,
            contributing_details,
        });
    }

    let aspect_count = S::from_usize(params.aspects.len()).expect("count fits scalar");
    let mut per_archetype = BTreeMap::new();
    for archetype in bank {
        let mut sum = S::zero();
        for ei in &per_aspect {
            sum += ei.scores[&archetype.id];
        }
        per_archetype.insert(archetype.id.clone(), sum / aspect_count);
    }

    let average = mean_over(bank.iter(), &per_archetype).unwrap_or_else(S::zero);
    let primary_average = mean_over(bank.iter().filter(|a| a.tier == Tier::Primary), &per_archetype);
    let secondary_average =
        mean_over(bank.iter().filter(|a| a.tier == Tier::Secondary), &per_archetype);

    let known = crate::extract::known_aspects(graph);
    Ok(DoxResult {
        params: params.clone(),
        archetype_ids: bank.iter().map(|a| a.id.clone()).collect(),
        per_archetype,
        average,
        primary_average,
        secondary_average,
        coverage: coverage(&params.aspects, &known),
        per_aspect,
        detail_count: graph.edges.len(),
        aspects_known: graph.nodes.len(),
    })
}

fn mean_over<'a, S: Scalar>(
    archetypes: impl Iterator<Item = &'a Archetype>,
    per_archetype: &BTreeMap<String, S>,
) -> Option<S> {
    let mut sum = S::zero();
    let mut count = 0usize;
    for a in archetypes {
        sum += per_archetype[&a.id];
        count += 1;
    }
    if count == 0 {
        None
    } else {
        Some(sum / S::from_usize(count).expect("count fits scalar"))
    }
}
