//! Brute-force reference implementation of the metric.
//!
//! A deliberately naive triple loop over aspects, archetypes, and details:
//! no graph indices, no embedding batching, no cache, no concurrency. It
//! shares the type definitions, the text primitives, the extractor, and
//! the backend's pertinence function with the main pipeline, but matching,
//! deduplication, thresholding, and aggregation are re-implemented here in
//! straight-line code. Capped to desk-scale instances; used to validate
//! the main pipeline.

use std::collections::BTreeMap;

use crate::archetype::{render_all, Archetype, ArchetypalQuestion, Tier};
use crate::embed::{pertinence, similarity, EmbeddingBackend};
use crate::error::DoxError;
use crate::extract::{extract_triplets, realize, Detail, TemplateTriplet};
use crate::ingest::{segment_sentences, Corpus};
use crate::metric::{DoxResult, ExplanatoryIllocution, RunParams};
use crate::scalar::Scalar;
use crate::text;

const MAX_DETAILS: usize = 50;
const MAX_ASPECTS: usize = 5;
const MAX_ARCHETYPES: usize = 25;

/// Computes the full result the slow way.
pub fn oracle_dox<S: Scalar>(
    corpus: &Corpus,
    params: &RunParams<S>,
    bank: &[Archetype],
    backend: &dyn EmbeddingBackend<S>,
) -> Result<DoxResult<S>, DoxError> {
    if bank.is_empty() {
        return Err(DoxError::Config("archetype set Q is empty".into()));
    }
    if params.aspects.is_empty() {
        return Err(DoxError::Config("aspect set A is empty".into()));
    }
    if params.aspects.len() > MAX_ASPECTS {
        return Err(DoxError::TooLarge(format!(
            "{} aspects, oracle cap is {MAX_ASPECTS}",
            params.aspects.len()
        )));
    }
    if bank.len() > MAX_ARCHETYPES {
        return Err(DoxError::TooLarge(format!(
            "{} archetypes, oracle cap is {MAX_ARCHETYPES}",
            bank.len()
        )));
    }

    // Every triplet in corpus order, plus collapsed details. A duplicate
    // (text, context) keeps the representative with the smallest
    // (doc id, sentence index).
    let mut all_triplets: Vec<TemplateTriplet> = Vec::new();
    let mut details: Vec<Detail> = Vec::new();
    for doc in corpus {
        for sentence in segment_sentences(doc) {
            for triplet in extract_triplets(&sentence) {
                let realized = realize(&triplet);
                let mut found = false;
                for existing in &mut details {
                    if existing.text == realized && existing.context == triplet.context {
                        let new_rank = (triplet.doc_id.clone(), triplet.sent_index);
                        let old_rank =
                            (existing.triplet.doc_id.clone(), existing.triplet.sent_index);
                        if new_rank < old_rank {
                            existing.triplet = triplet.clone();
                        }
                        found = true;
                        break;
                    }
                }
                if !found {
                    details.push(Detail {
                        id: Detail::compute_id(&realized, &triplet.context),
                        text: realized,
                        context: triplet.context.clone(),
                        triplet: triplet.clone(),
                        aspect_keys: Default::default(),
                    });
                }
                all_triplets.push(triplet);
            }
        }
    }
    if details.len() > MAX_DETAILS {
        return Err(DoxError::TooLarge(format!(
            "{} details, oracle cap is {MAX_DETAILS}",
            details.len()
        )));
    }

    // Known aspect keys, harvested from every triplet one phrase at a time.
    let mut known: Vec<String> = Vec::new();
    let mut remember = |surface: &str, known: &mut Vec<String>| {
        let key = text::normalize_key(surface);
        if !key.is_empty() && !known.contains(&key) {
            known.push(key);
        }
    };
    for triplet in &all_triplets {
        remember(&triplet.subject, &mut known);
        for chunk in text::noun_chunks(&triplet.subject) {
            remember(chunk, &mut known);
        }
        remember(&triplet.object, &mut known);
        for chunk in text::noun_chunks(&triplet.object) {
            remember(chunk, &mut known);
        }
        for chunk in text::noun_chunks(&realize(triplet)) {
            remember(chunk, &mut known);
        }
    }

    // Coverage: how many aspects occur inside some known key.
    let mut covered = 0usize;
    for aspect in &params.aspects {
        let needle = text::normalize_tokens(aspect);
        let mut hit = false;
        for key in &known {
            let hay: Vec<String> = key.split(' ').map(str::to_string).collect();
            if occurs_contiguously(&hay, &needle) {
                hit = true;
                break;
            }
        }
        if hit {
            covered += 1;
        }
    }

    let mut per_aspect: Vec<ExplanatoryIllocution<S>> = Vec::new();
    for aspect in &params.aspects {
        let needle = text::normalize_tokens(aspect);

        // D_a by scanning every detail.
        let mut d_a: Vec<&Detail> = Vec::new();
        for detail in &details {
            let in_subject =
                occurs_contiguously(&text::normalize_tokens(&detail.triplet.subject), &needle);
            let in_object =
                occurs_contiguously(&text::normalize_tokens(&detail.triplet.object), &needle);
            let in_text = params.extended_match
                && occurs_contiguously(&text::normalize_tokens(&detail.text), &needle);
            if in_subject || in_object || in_text {
                d_a.push(detail);
            }
        }

        let mut scores = BTreeMap::new();
        let mut contributing_details = BTreeMap::new();
        for archetype in bank {
            // Pertinence per detail, max-pooled over templates.
            let mut scored: Vec<(&Detail, S)> = Vec::new();
            for detail in &d_a {
                let mut best = S::zero();
                for question_text in render_all(archetype, aspect) {
                    let question = ArchetypalQuestion {
                        archetype_id: archetype.id.clone(),
                        aspect: aspect.clone(),
                        text: question_text,
                    };
                    let score = pertinence(detail, &question, backend)?;
                    if score.p > best {
                        best = score.p;
                    }
                }
                scored.push((detail, best));
            }

            // Greedy dedup: repeatedly take the best remaining candidate
            // and keep it unless it is too similar to a kept one.
            let mut kept: Vec<(&Detail, S)> = Vec::new();
            while !scored.is_empty() {
                let mut best_idx = 0;
                for i in 1..scored.len() {
                    let (cand_d, cand_p) = &scored[i];
                    let (best_d, best_p) = &scored[best_idx];
                    if cand_p > best_p || (cand_p == best_p && cand_d.id < best_d.id) {
                        best_idx = i;
                    }
                }
                let candidate = scored.remove(best_idx);
                let mut redundant = false;
                for (kept_detail, _) in &kept {
                    if similarity(candidate.0, kept_detail, backend)? > params.r {
                        redundant = true;
                        break;
                    }
                }
                if !redundant {
                    kept.push(candidate);
                }
            }

            // Threshold (inclusive) and sum in kept order.
            let mut total = S::zero();
            let mut contributing = Vec::new();
            for (detail, p) in &kept {
                if *p >= params.t {
                    total += *p;
                    contributing.push((detail.id.clone(), *p));
                }
            }
            scores.insert(archetype.id.clone(), total);
            contributing_details.insert(archetype.id.clone(), contributing);
        }
        per_aspect.push(ExplanatoryIllocution {
            aspect: aspect.clone(),
            scores,
            contributing_details,
        });
    }

    // R per archetype, then the averages.
    let aspect_count = S::from_usize(params.aspects.len()).expect("count fits scalar");
    let mut per_archetype = BTreeMap::new();
    for archetype in bank {
        let mut sum = S::zero();
        for ei in &per_aspect {
            sum += ei.scores[&archetype.id];
        }
        per_archetype.insert(archetype.id.clone(), sum / aspect_count);
    }
    let mut average = S::zero();
    for archetype in bank {
        average += per_archetype[&archetype.id];
    }
    average = average / S::from_usize(bank.len()).expect("count fits scalar");

    let tier_average = |tier: Tier| {
        let mut sum = S::zero();
        let mut count = 0usize;
        for archetype in bank {
            if archetype.tier == tier {
                sum += per_archetype[&archetype.id];
                count += 1;
            }
        }
        if count == 0 {
            None
        } else {
            Some(sum / S::from_usize(count).expect("count fits scalar"))
        }
    };

    Ok(DoxResult {
        params: params.clone(),
        archetype_ids: bank.iter().map(|a| a.id.clone()).collect(),
        per_archetype,
        average,
        primary_average: tier_average(Tier::Primary),
        secondary_average: tier_average(Tier::Secondary),
        coverage: S::from_usize(covered).expect("count fits scalar")
            / S::from_usize(params.aspects.len()).expect("count fits scalar"),
        per_aspect,
        detail_count: details.len(),
        aspects_known: known.len(),
    })
}

fn occurs_contiguously(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || haystack.len() < needle.len() {
        return false;
    }
    for start in 0..=(haystack.len() - needle.len()) {
        let mut all = true;
        for (offset, want) in needle.iter().enumerate() {
            if &haystack[start + offset] != want {
                all = false;
                break;
            }
        }
        if all {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archetype::{default_archetypes, TierSelection};
    use crate::embed::{cosine, embed_all, LexicalBackend, Role};
    use crate::ingest::Document;
    use crate::metric::compute_dox;

    #[test]
    fn empty_corpus_is_all_zero() {
        let backend = LexicalBackend::<f64>::default();
        let params = RunParams::new(0.15, 0.97, &["angina".to_string()], "lexical-2048").unwrap();
        let bank = default_archetypes(TierSelection::All);
        let result = oracle_dox(&vec![], &params, &bank, &backend).unwrap();
        assert_eq!(result.average, 0.0);
        assert_eq!(result.detail_count, 0);
    }

    #[test]
    fn oversized_instances_are_rejected() {
        let backend = LexicalBackend::<f64>::default();
        let aspects: Vec<String> = (0..6).map(|i| format!("aspect{i}")).collect();
        let params = RunParams::new(0.15, 0.97, &aspects, "lexical-2048").unwrap();
        let bank = default_archetypes(TierSelection::Primary);
        assert!(matches!(
            oracle_dox(&vec![], &params, &bank, &backend),
            Err(DoxError::TooLarge(_))
        ));

        let big: Corpus = (0..60)
            .map(|i| Document::new(format!("d{i}"), format!("The item{i} is a unit{i}.")))
            .collect();
        let params =
            RunParams::new(0.15, 0.97, &["item1".to_string()], "lexical-2048").unwrap();
        assert!(matches!(
            oracle_dox(&big, &params, &bank, &backend),
            Err(DoxError::TooLarge(_))
        ));
    }

    #[test]
    fn matches_a_hand_computed_lexical_cosine() {
        // Single detail, single aspect, single archetype. The expected R is
        // recomputed here from scratch: hash the character n-grams and
        // stemmed tokens of both texts with an independent FNV-1a helper,
        // build the two count vectors, and take their cosine.
        let backend = LexicalBackend::<f64>::default();
        let corpus = vec![Document::new("d", "widget is gadget")];
        let params = RunParams::new(0.0, 0.97, &["widget".to_string()], "lexical-2048").unwrap();
        let bank = vec![default_archetypes(TierSelection::Primary)[0].clone()];

        let result = oracle_dox(&corpus, &params, &bank, &backend).unwrap();

        let detail_text = "widget is gadget. widget is gadget";
        let question_text = "What is widget?";
        let expected = hand_cosine(detail_text, question_text).max(0.0);
        assert!((result.per_archetype["what"] - expected).abs() < 1e-9);
        assert!(expected > 0.0);
    }

    // Independent re-implementation of the lexical feature hashing used
    // only by this test.
    fn hand_cosine(a: &str, b: &str) -> f64 {
        let fa = hand_features(a);
        let fb = hand_features(b);
        let dot: f64 = fa
            .iter()
            .filter_map(|(k, va)| fb.get(k).map(|vb| (*va as f64) * (*vb as f64)))
            .sum();
        let na: f64 = fa.values().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = fb.values().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn hand_features(text: &str) -> BTreeMap<usize, u32> {
        let lower = text.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        let mut counts = BTreeMap::new();
        let mut bump = |bytes: &[u8]| {
            let mut hash = 0xcbf2_9ce4_8422_2325u64;
            for &byte in bytes {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
            *counts.entry((hash % 2048) as usize).or_insert(0u32) += 1;
        };
        for n in 3..=5usize {
            for window in chars.windows(n) {
                bump(window.iter().collect::<String>().as_bytes());
            }
        }
        for token in crate::text::tokenize(&lower) {
            bump(format!("tok:{}", crate::text::stem(token.text)).as_bytes());
        }
        counts
    }

    #[test]
    fn agrees_with_the_main_pipeline_on_a_small_fixture() {
        let backend = LexicalBackend::<f64>::default();
        let corpus = vec![Document::new(
            "d",
            "In particular, angina pectoris happens when some part of your heart does not get enough oxygen.",
        )];
        let params = RunParams::new(
            0.1,
            0.97,
            &["angina".to_string(), "heart".to_string()],
            "lexical-2048",
        )
        .unwrap();
        let bank = default_archetypes(TierSelection::Primary);

        let oracle = oracle_dox(&corpus, &params, &bank, &backend).unwrap();

        let mut triplets = Vec::new();
        for doc in &corpus {
            for sent in segment_sentences(doc) {
                triplets.extend(extract_triplets(&sent));
            }
        }
        let graph = crate::extract::build_graph(&triplets);
        let main = compute_dox(&graph, &params, &bank, &backend, 1).unwrap();

        assert_eq!(oracle.detail_count, main.detail_count);
        assert_eq!(oracle.aspects_known, main.aspects_known);
        assert!((oracle.average - main.average).abs() < 1e-9);
        assert!((oracle.coverage - main.coverage).abs() < 1e-9);
        for (id, r) in &main.per_archetype {
            assert!((oracle.per_archetype[id] - *r).abs() < 1e-9);
        }
    }

    // Keep the test-only helper honest: its cosine must agree with the
    // production cosine on the same backend vectors.
    #[test]
    fn hand_cosine_matches_backend_cosine() {
        let backend = LexicalBackend::<f64>::default();
        let texts = vec!["alpha beta".to_string(), "beta gamma".to_string()];
        let vecs = embed_all(&backend, &texts, Role::Passage, 1).unwrap();
        let expected = cosine(&vecs[0], &vecs[1]);
        assert!((hand_cosine("alpha beta", "beta gamma") - expected).abs() < 1e-9);
    }
}
