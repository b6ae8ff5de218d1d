//! Measure how explainable a text corpus is with respect to a declared
//! set of aspects.
//!
//! The pipeline: load and segment a corpus ([`ingest`]), extract
//! template-triplets into a knowledge graph ([`extract`]), render
//! archetypal questions for each aspect ([`archetype`]), score each
//! contextualized detail against each question with an embedding backend
//! ([`embed`]), then deduplicate, threshold, and aggregate into
//! per-archetype scores and their average ([`metric`]). A naive reference
//! implementation lives in [`oracle`]; the canonical report formats in
//! [`report`].
//!
//! All scoring math is generic over a [`Scalar`] (any float). The crate
//! root exports `f64` aliases, which are what the CLI and the canonical
//! report format use.

pub mod archetype;
pub mod embed;
pub mod error;
pub mod extract;
pub mod ingest;
pub mod metric;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod text;

pub use archetype::{default_archetypes, load_custom_archetypes, render_question, Archetype,
    ArchetypalQuestion, Tier, TierSelection};
pub use embed::{
    contextualize, cosine, embed_all, pertinence, similarity, CachedBackend, EmbeddingBackend,
    EmbeddingCache, EmbeddingVector, LexicalBackend, PertinenceScore, RemoteBackend, Role,
};
pub use error::{BackendError, DoxError};
pub use extract::{build_graph, export_triplets, extract_triplets, import_triplets,
    known_aspects, realize, Detail, KnowledgeGraph, TemplateTriplet};
pub use ingest::{load_corpus, segment_sentences, Corpus, CorpusFormat, Document, Sentence};
pub use metric::{compute_dox, coverage, cumulative_pertinence, dedup, details_about,
    explanatory_illocution, DoxResult, ExplanatoryIllocution, RunParams};
pub use oracle::oracle_dox;
pub use report::Report;
pub use scalar::Scalar;

/// Default scalar for reports and the CLI.
pub type Score = f64;
/// Embedding vector over the default scalar.
pub type Vector = EmbeddingVector<Score>;
/// Run result over the default scalar.
pub type Result64 = DoxResult<Score>;
