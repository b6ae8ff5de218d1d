//! Corpus loading and sentence segmentation.
//!
//! Turns files and directories of support material into an ordered list of
//! [`Document`]s with stable content-derived ids, then splits each document
//! into [`Sentence`]s whose spans reconstruct the original text exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::DoxError;

/// How raw file contents are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// Text is taken verbatim.
    #[default]
    Plain,
    /// `<...>` tag runs are deleted, the five XML entities decoded, and
    /// whitespace runs collapsed before the text is stored.
    MarkupStripped,
}

/// One unit of support material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// First 16 hex chars of the SHA-256 of the stored text.
    pub id: String,
    pub source_uri: String,
    pub text: String,
}

/// A sentence inside a document; `span` indexes into `Document::text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    pub text: String,
    pub span: (usize, usize),
}

/// Ordered list of documents.
pub type Corpus = Vec<Document>;

/// Tokens that never end a sentence when followed by a period.
const ABBREVIATIONS: &[&str] = &[
    "Dr", "Mr", "Mrs", "Ms", "e.g", "i.e", "etc", "vs", "Fig", "Eq", "No", "St",
];

/// Stable 16-hex-char content id.
pub fn content_id(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)[..16].to_string()
}

impl Document {
    pub fn new(source_uri: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        Document { id: content_id(&text), source_uri: source_uri.into(), text }
    }
}

/// Deletes `<...>` runs, decodes `&amp; &lt; &gt; &quot; &apos;`, and
/// collapses whitespace runs to single spaces.
pub fn strip_markup(raw: &str) -> String {
    let mut without_tags = String::with_capacity(raw.len());
    let mut in_tag = false;
    for ch in raw.chars() {
        match ch {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            c if !in_tag => without_tags.push(c),
            _ => {}
        }
    }
    let decoded = without_tags
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'");
    let mut out = String::with_capacity(decoded.len());
    let mut last_was_space = false;
    for ch in decoded.chars() {
        if ch.is_whitespace() {
            if !last_was_space {
                out.push(' ');
            }
            last_was_space = true;
        } else {
            out.push(ch);
            last_was_space = false;
        }
    }
    out.trim().to_string()
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: Option<String>,
    source_uri: Option<String>,
    text: String,
}

/// Loads documents from files and directories. Directories are walked
/// recursively; all resolved file paths are sorted lexicographically so
/// the corpus order is stable across runs and platforms. `.jsonl` files
/// are parsed one record per line.
pub fn load_corpus(paths: &[PathBuf], format: CorpusFormat) -> Result<Corpus, DoxError> {
    if paths.is_empty() {
        return Err(DoxError::Config("no corpus paths given".into()));
    }
    let mut files = Vec::new();
    for path in paths {
        collect_files(path, &mut files)?;
    }
    files.sort_by(|a, b| a.to_string_lossy().cmp(&b.to_string_lossy()));
    files.dedup();

    let mut corpus = Vec::new();
    for file in &files {
        let raw = fs::read_to_string(file).map_err(|e| DoxError::Ingest {
            path: file.clone(),
            message: e.to_string(),
        })?;
        if file.extension().is_some_and(|ext| ext == "jsonl") {
            for (lineno, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: JsonlRecord =
                    serde_json::from_str(line).map_err(|e| DoxError::Schema {
                        line: lineno + 1,
                        message: format!("{} in {}", e, file.display()),
                    })?;
                let text = apply_format(&record.text, format);
                let id = record.id.unwrap_or_else(|| content_id(&text));
                let source_uri = record
                    .source_uri
                    .unwrap_or_else(|| format!("{}#{}", file.display(), lineno + 1));
                corpus.push(Document { id, source_uri, text });
            }
        } else {
            let text = apply_format(&raw, format);
            corpus.push(Document::new(file.to_string_lossy(), text));
        }
    }
    Ok(corpus)
}

fn apply_format(raw: &str, format: CorpusFormat) -> String {
    match format {
        CorpusFormat::Plain => raw.to_string(),
        CorpusFormat::MarkupStripped => strip_markup(raw),
    }
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), DoxError> {
    let ingest_err = |e: std::io::Error| DoxError::Ingest {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let meta = fs::metadata(path).map_err(ingest_err)?;
    if meta.is_dir() {
        for entry in fs::read_dir(path).map_err(ingest_err)? {
            let entry = entry.map_err(ingest_err)?;
            collect_files(&entry.path(), out)?;
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

/// Splits a document at `.`, `!`, `?` followed by whitespace and a capital,
/// unless the token before a period is a known abbreviation. Spans cover
/// all non-whitespace text and slice the document verbatim.
pub fn segment_sentences(doc: &Document) -> Vec<Sentence> {
    let text = &doc.text;
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let bytes = text.as_bytes();

    let mut push = |from: usize, to: usize, sentences: &mut Vec<Sentence>| {
        let slice = &text[from..to];
        let trimmed = slice.trim();
        if trimmed.is_empty() {
            return;
        }
        let lead = slice.len() - slice.trim_start().len();
        let span = (from + lead, from + lead + trimmed.len());
        sentences.push(Sentence {
            doc_id: doc.id.clone(),
            index: sentences.len(),
            text: trimmed.to_string(),
            span,
        });
    };

    for (idx, ch) in text.char_indices() {
        if ch != '.' && ch != '!' && ch != '?' {
            continue;
        }
        if !followed_by_ws_and_capital(text, idx + ch.len_utf8()) {
            continue;
        }
        if ch == '.' && is_abbreviation(bytes, idx) {
            continue;
        }
        push(start, idx + ch.len_utf8(), &mut sentences);
        start = idx + ch.len_utf8();
    }
    push(start, text.len(), &mut sentences);
    sentences
}

fn followed_by_ws_and_capital(text: &str, from: usize) -> bool {
    let rest = &text[from..];
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_whitespace() => {}
        _ => return false,
    }
    for c in chars {
        if c.is_whitespace() {
            continue;
        }
        return c.is_uppercase();
    }
    false
}

fn is_abbreviation(bytes: &[u8], period_idx: usize) -> bool {
    let mut start = period_idx;
    while start > 0 {
        let b = bytes[start - 1];
        if b.is_ascii_alphanumeric() || b == b'.' {
            start -= 1;
        } else {
            break;
        }
    }
    let token = std::str::from_utf8(&bytes[start..period_idx])
        .unwrap_or("")
        .trim_matches('.');
    ABBREVIATIONS.contains(&token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_file_passthrough() {
        let doc = Document::new("a.txt", "Angina is chest pain.");
        assert_eq!(doc.text, "Angina is chest pain.");
        assert_eq!(doc.id.len(), 16);
        // Deterministic id for identical text.
        assert_eq!(doc.id, Document::new("b.txt", "Angina is chest pain.").id);
    }

    #[test]
    fn directory_order_is_lexicographic() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), "bee").unwrap();
        fs::write(dir.path().join("a.txt"), "ay").unwrap();
        let corpus = load_corpus(&[dir.path().to_path_buf()], CorpusFormat::Plain).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].text, "ay");
        assert_eq!(corpus[1].text, "bee");
    }

    #[test]
    fn markup_is_stripped() {
        // Derived by applying the tag rule by hand: delete <...> runs,
        // collapse whitespace.
        assert_eq!(strip_markup("<p>Angina</p>"), "Angina");
        assert_eq!(strip_markup("<p>a</p>\n\n<p>b &amp; c</p>"), "a b & c");
        assert_eq!(strip_markup("&lt;p&gt;"), "<p>");
    }

    #[test]
    fn empty_path_list_is_config_error() {
        assert!(matches!(
            load_corpus(&[], CorpusFormat::Plain),
            Err(DoxError::Config(_))
        ));
    }

    #[test]
    fn missing_file_is_ingest_error_naming_path() {
        let err = load_corpus(&[PathBuf::from("/nonexistent/xyz.txt")], CorpusFormat::Plain)
            .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/xyz.txt"));
    }

    #[test]
    fn jsonl_records_are_loaded_in_line_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(
            &path,
            "{\"source_uri\":\"u1\",\"text\":\"first\"}\n{\"id\":\"fixed\",\"source_uri\":\"u2\",\"text\":\"second\"}\n",
        )
        .unwrap();
        let corpus = load_corpus(&[path], CorpusFormat::Plain).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].text, "first");
        assert_eq!(corpus[1].id, "fixed");
    }

    #[test]
    fn period_split_on_capitals() {
        let doc = Document::new("t", "A. B.");
        let sents = segment_sentences(&doc);
        assert_eq!(
            sents.iter().map(|s| s.text.as_str()).collect::<Vec<_>>(),
            vec!["A.", "B."]
        );
    }

    #[test]
    fn abbreviations_do_not_split() {
        // Derived by applying the abbreviation rule by hand.
        let doc = Document::new("t", "Dr. Smith left.");
        assert_eq!(segment_sentences(&doc).len(), 1);
        let doc = Document::new("t", "See e.g. Figure one. Then stop.");
        assert_eq!(segment_sentences(&doc).len(), 2);
    }

    #[test]
    fn empty_and_whitespace_yield_nothing() {
        assert!(segment_sentences(&Document::new("t", "")).is_empty());
        assert!(segment_sentences(&Document::new("t", "  \n\t ")).is_empty());
    }

    #[test]
    fn spans_slice_the_document() {
        let doc = Document::new("t", "One thing happened. Another thing!  A third?");
        let sents = segment_sentences(&doc);
        assert_eq!(sents.len(), 3);
        for s in &sents {
            assert_eq!(&doc.text[s.span.0..s.span.1], s.text);
        }
    }

    proptest! {
        // Joining sentence spans and inter-span whitespace reconstructs the
        // document text exactly.
        #[test]
        fn segmentation_is_lossless(text in "[ A-Za-z.!?\\n]{0,120}") {
            let doc = Document::new("t", text.clone());
            let sents = segment_sentences(&doc);
            let mut cursor = 0usize;
            for s in &sents {
                prop_assert!(s.span.0 >= cursor);
                prop_assert!(doc.text[cursor..s.span.0].chars().all(char::is_whitespace));
                prop_assert_eq!(&doc.text[s.span.0..s.span.1], s.text.as_str());
                cursor = s.span.1;
            }
            prop_assert!(doc.text[cursor..].chars().all(char::is_whitespace));
        }

        #[test]
        fn segmentation_is_deterministic(text in ".{0,80}") {
            let doc = Document::new("t", text);
            prop_assert_eq!(segment_sentences(&doc), segment_sentences(&doc));
        }
    }
}
