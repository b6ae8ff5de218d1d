//! Embedding backends and pertinence scoring.
//!
//! A backend turns texts into dense vectors for a role (query or passage);
//! pertinence is the clamped cosine between a contextualized detail and an
//! archetypal question. The lexical backend is the deterministic offline
//! reference; the remote backend speaks a small HTTP protocol to a hosted
//! encoder. Both can be wrapped in a content-addressed cache.

mod cache;
mod lexical;
mod remote;

pub use cache::{CachedBackend, EmbeddingCache};
pub use lexical::LexicalBackend;
pub use remote::RemoteBackend;

use serde::{Deserialize, Serialize};

use crate::archetype::ArchetypalQuestion;
use crate::error::BackendError;
use crate::extract::Detail;
use crate::scalar::Scalar;

/// Whether a text is embedded as a question or as an answer candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Query,
    Passage,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Query => "query",
            Role::Passage => "passage",
        }
    }
}

/// A fixed-length embedding with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<S> {
    pub dims: usize,
    pub values: Vec<S>,
    pub role: Role,
    pub backend_id: String,
}

/// A pertinence score p(d, q_a) in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PertinenceScore<S> {
    pub detail_id: String,
    pub question: ArchetypalQuestion,
    pub p: S,
}

/// An embedding provider. Implementations must be deterministic per
/// backend id: the same (text, role) always yields the same vector.
pub trait EmbeddingBackend<S: Scalar>: Send + Sync {
    /// Stable identifier recorded in reports and cache keys.
    fn id(&self) -> &str;

    /// Maximum texts per underlying request, if the transport has one.
    fn batch_limit(&self) -> Option<usize> {
        None
    }

    /// Embeds texts in input order.
    fn embed(&self, texts: &[String], role: Role) -> Result<Vec<EmbeddingVector<S>>, BackendError>;
}

/// Cosine similarity in [-1, 1]. Zero vectors compare as 0 so that empty
/// or stopword-only strings are maximally non-pertinent instead of errors.
pub fn cosine<S: Scalar>(u: &EmbeddingVector<S>, v: &EmbeddingVector<S>) -> S {
    assert_eq!(u.dims, v.dims, "cosine over mismatched dimensions");
    let mut dot = S::zero();
    let mut nu = S::zero();
    let mut nv = S::zero();
    for (a, b) in u.values.iter().zip(v.values.iter()) {
        dot += *a * *b;
        nu += *a * *a;
        nv += *b * *b;
    }
    if nu.is_zero() || nv.is_zero() {
        return S::zero();
    }
    dot / (nu.sqrt() * nv.sqrt())
}

/// Token budget for the contextualized detail `d + ". " + z`.
const CONTEXT_TOKEN_BUDGET: usize = 384;

/// Detail-first concatenation of a detail with its source context,
/// truncated to a whitespace-token budget.
pub fn contextualize(detail: &Detail) -> String {
    let joined = format!("{}. {}", detail.text, detail.context);
    truncate_tokens(&joined, CONTEXT_TOKEN_BUDGET)
}

fn truncate_tokens(text: &str, budget: usize) -> String {
    let mut count = 0usize;
    let mut end = text.len();
    let mut in_token = false;
    for (idx, ch) in text.char_indices() {
        if ch.is_whitespace() {
            in_token = false;
        } else if !in_token {
            in_token = true;
            count += 1;
            if count > budget {
                end = idx;
                break;
            }
        }
    }
    text[..end].trim_end().to_string()
}

/// p(d, q_a): clamped cosine between the contextualized detail embedded as
/// a passage and the question embedded as a query.
pub fn pertinence<S: Scalar>(
    detail: &Detail,
    question: &ArchetypalQuestion,
    backend: &dyn EmbeddingBackend<S>,
) -> Result<PertinenceScore<S>, BackendError> {
    let passage = backend.embed(&[contextualize(detail)], Role::Passage)?;
    let query = backend.embed(&[question.text.clone()], Role::Query)?;
    Ok(PertinenceScore {
        detail_id: detail.id.clone(),
        question: question.clone(),
        p: cosine(&passage[0], &query[0]).clamp_unit(),
    })
}

/// Clamped cosine between two detail texts, both embedded as passages.
/// Used to spot redundant details.
pub fn similarity<S: Scalar>(
    a: &Detail,
    b: &Detail,
    backend: &dyn EmbeddingBackend<S>,
) -> Result<S, BackendError> {
    let vecs = backend.embed(&[a.text.clone(), b.text.clone()], Role::Passage)?;
    Ok(cosine(&vecs[0], &vecs[1]).clamp_unit())
}

/// Embeds a batch, splitting at the backend's batch limit and running up
/// to `jobs` chunks concurrently. Results come back in input order, so
/// downstream aggregation is independent of completion order.
pub fn embed_all<S: Scalar>(
    backend: &dyn EmbeddingBackend<S>,
    texts: &[String],
    role: Role,
    jobs: usize,
) -> Result<Vec<EmbeddingVector<S>>, BackendError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let chunk_size = backend.batch_limit().unwrap_or(texts.len()).max(1);
    let chunks: Vec<&[String]> = texts.chunks(chunk_size).collect();
    let jobs = jobs.max(1);

    if jobs == 1 || chunks.len() == 1 {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in chunks {
            out.extend(backend.embed(chunk, role)?);
        }
        return Ok(out);
    }

    let mut results: Vec<Option<Result<Vec<EmbeddingVector<S>>, BackendError>>> =
        (0..chunks.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (group, slots) in chunks
            .chunks(jobs)
            .zip(results.chunks_mut(jobs))
        {
            let mut handles = Vec::with_capacity(group.len());
            for chunk in group {
                handles.push(scope.spawn(move || backend.embed(chunk, role)));
            }
            for (slot, handle) in slots.iter_mut().zip(handles) {
                *slot = Some(handle.join().expect("embedding thread panicked"));
            }
        }
    });

    let mut out = Vec::with_capacity(texts.len());
    for slot in results {
        out.extend(slot.expect("all chunks processed")?);
    }
    Ok(out)
}
