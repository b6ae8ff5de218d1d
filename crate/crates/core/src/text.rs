//! Tokenization, stemming, phrase normalization, and noun chunking.
//!
//! These are the deterministic, dependency-free text primitives shared by
//! ingestion, extraction, aspect matching, and the lexical backend. The
//! stemmer is a small suffix stripper, not a full Porter stemmer: it only
//! has to be consistent, since both sides of every comparison go through
//! the same rules.

/// A word token with its byte span in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Determiners stripped during phrase normalization.
const DETERMINERS: &[&str] = &["a", "an", "the", "this", "that", "his", "her", "your", "its"];

/// Closed stopword list used for noun chunking and aspect-key harvesting.
/// Chunk boundaries fall on these tokens and on punctuation.
const STOPWORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "his", "her", "your", "its", "their",
    "theirs", "our", "ours", "my", "mine", "yours", "of", "in", "on", "at", "by", "for", "with",
    "from", "to", "into", "onto", "over", "under", "between", "among", "through", "during",
    "before", "after", "above", "below", "about", "against", "within", "without", "along",
    "across", "behind", "beyond", "near", "since", "until", "upon", "as", "and", "or", "but",
    "nor", "because", "when", "while", "although", "though", "which", "who", "whom", "whose",
    "where", "why", "how", "what", "if", "then", "than", "so", "such", "both", "either",
    "neither", "each", "every", "all", "any", "some", "few", "several", "most", "more", "less",
    "least", "much", "many", "no", "not", "only", "own", "same", "just", "also", "too", "very",
    "quite", "rather", "even", "still", "yet", "again", "once", "there", "here", "now", "is",
    "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "doing", "done",
    "have", "has", "had", "having", "will", "would", "can", "could", "shall", "should", "may",
    "might", "must", "it", "they", "them", "we", "us", "you", "he", "him", "she", "i", "me",
    "get", "gets", "got", "enough", "out", "up", "down", "off",
];

/// Words that look like verbs or auxiliaries to the baseline extractor.
/// Inflected forms are listed explicitly; rarer verbs are caught by the
/// suffix heuristics in the extractor.
const VERBS: &[&str] = &[
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does",
    "did", "done", "can", "could", "will", "would", "shall", "should", "may", "might", "must",
    "happen", "happens", "happened", "get", "gets", "got", "gotten", "make", "makes", "made",
    "take", "takes", "took", "taken", "use", "uses", "used", "show", "shows", "showed", "shown",
    "mean", "means", "meant", "need", "needs", "needed", "help", "helps", "helped", "cause",
    "causes", "caused", "consider", "considers", "considered", "predict", "predicts",
    "predicted", "provide", "provides", "provided", "give", "gives", "gave", "given", "contain",
    "contains", "contained", "describe", "describes", "described", "explain", "explains",
    "explained", "indicate", "indicates", "indicated", "represent", "represents", "represented",
    "measure", "measures", "measured", "compute", "computes", "computed", "estimate",
    "estimates", "estimated", "produce", "produces", "produced", "affect", "affects",
    "affected", "improve", "improves", "improved", "increase", "increases", "increased",
    "decrease", "decreases", "decreased", "reduce", "reduces", "reduced", "raise", "raises",
    "raised", "lower", "lowers", "lowered", "lead", "leads", "led", "allow", "allows",
    "allowed", "require", "requires", "required", "depend", "depends", "depended", "determine",
    "determines", "determined", "suggest", "suggests", "suggested", "occur", "occurs",
    "occurred", "come", "comes", "came", "go", "goes", "went", "gone", "say", "says", "said",
    "tell", "tells", "told", "know", "knows", "knew", "known", "think", "thinks", "thought",
    "find", "finds", "found", "feel", "feels", "felt", "keep", "keeps", "kept", "begin",
    "begins", "began", "begun", "start", "starts", "started", "stop", "stops", "stopped",
    "call", "calls", "called", "try", "tries", "tried", "ask", "asks", "asked", "work",
    "works", "worked", "seem", "seems", "seemed", "become", "becomes", "became", "leave",
    "leaves", "left", "put", "puts", "look", "looks", "looked", "want", "wants", "wanted",
    "see", "sees", "saw", "seen", "run", "runs", "ran", "turn", "turns", "turned", "bring",
    "brings", "brought", "write", "writes", "wrote", "written", "read", "reads", "sit", "sits",
    "set", "sets", "learn", "learns", "learned", "change", "changes", "changed", "play",
    "plays", "played", "move", "moves", "moved", "live", "lives", "lived", "believe",
    "believes", "believed", "hold", "holds", "held", "list", "lists", "listed", "examine",
    "examines", "examined", "train", "trains", "trained", "rank", "ranks", "ranked", "deny",
    "denies", "denied", "approve", "approves", "approved", "apply", "applies", "applied",
    "check", "checks", "checked", "answer", "answers", "answered", "carry", "carries",
    "carried", "treat", "treats", "treated", "prevent", "prevents", "prevented", "feed",
    "feeds", "fed", "send", "sends", "sent", "receive", "receives", "received", "remain",
    "remains", "remained", "include", "includes", "included",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}

pub fn is_determiner(word: &str) -> bool {
    DETERMINERS.contains(&word)
}

pub fn is_listed_verb(word: &str) -> bool {
    VERBS.contains(&word)
}

/// Splits text into maximal alphanumeric runs, keeping byte spans.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (idx, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some(idx);
            }
        } else if let Some(s) = start.take() {
            tokens.push(Token { text: &text[s..idx], start: s, end: idx });
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &text[s..], start: s, end: text.len() });
    }
    tokens
}

/// Suffix-stripping stemmer. Rules: -ies -> -y, -es after x/z/ch/sh,
/// plain -s (but not -ss/-us/-is), -ing, -ed, with doubled-consonant
/// undoubling after -ing/-ed (run(n), stop(p), but not -ll/-ss/-zz).
pub fn stem(word: &str) -> String {
    if !word.is_ascii() {
        return word.to_string();
    }
    let n = word.len();
    if n <= 3 {
        return word.to_string();
    }
    if n > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..n - 3]);
    }
    if word.ends_with("sses") {
        return word[..n - 2].to_string();
    }
    if word.ends_with("ss") {
        return word.to_string();
    }
    if n > 4 && word.ends_with("es") {
        let stem = &word[..n - 2];
        if stem.ends_with('x') || stem.ends_with('z') || stem.ends_with("ch") || stem.ends_with("sh")
        {
            return stem.to_string();
        }
    }
    if word.ends_with('s') && !word.ends_with("us") && !word.ends_with("is") {
        return word[..n - 1].to_string();
    }
    if n > 5 && word.ends_with("ing") {
        return undouble(&word[..n - 3]);
    }
    if n > 4 && word.ends_with("ed") {
        return undouble(&word[..n - 2]);
    }
    word.to_string()
}

fn undouble(s: &str) -> String {
    let bytes = s.as_bytes();
    let n = bytes.len();
    if n >= 2 && bytes[n - 1] == bytes[n - 2] {
        let c = bytes[n - 1] as char;
        if c.is_ascii_alphabetic() && !"aeioulsz".contains(c) {
            return s[..n - 1].to_string();
        }
    }
    s.to_string()
}

/// Normalizes a phrase to matchable tokens: lowercase, determiners
/// removed, each remaining token stemmed.
pub fn normalize_tokens(phrase: &str) -> Vec<String> {
    tokenize(phrase)
        .iter()
        .map(|t| t.text.to_lowercase())
        .filter(|w| !is_determiner(w))
        .map(|w| stem(&w))
        .collect()
}

/// Normalized phrase as a single space-joined key.
pub fn normalize_key(phrase: &str) -> String {
    normalize_tokens(phrase).join(" ")
}

/// True if `needle` occurs as a contiguous subsequence of `haystack`.
pub fn contains_token_seq(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Noun chunks: maximal runs of non-stopword tokens with nothing but
/// whitespace between them. Returned as raw slices of the input.
pub fn noun_chunks(text: &str) -> Vec<&str> {
    let tokens = tokenize(text);
    let mut chunks = Vec::new();
    let mut run_start: Option<usize> = None;
    let mut run_end = 0usize;
    for tok in &tokens {
        let lower = tok.text.to_lowercase();
        let breaks_run = match run_start {
            // Punctuation in the gap ends the current chunk.
            Some(_) => text[run_end..tok.start].chars().any(|c| !c.is_whitespace()),
            None => false,
        };
        if is_stopword(&lower) || breaks_run {
            if let Some(s) = run_start.take() {
                chunks.push(&text[s..run_end]);
            }
            if is_stopword(&lower) {
                continue;
            }
        }
        if run_start.is_none() {
            run_start = Some(tok.start);
        }
        run_end = tok.end;
    }
    if let Some(s) = run_start {
        chunks.push(&text[s..run_end]);
    }
    chunks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stem_plurals_and_inflections() {
        assert_eq!(stem("diseases"), "disease");
        assert_eq!(stem("disease"), "disease");
        assert_eq!(stem("happens"), "happen");
        assert_eq!(stem("studies"), "study");
        assert_eq!(stem("boxes"), "box");
        assert_eq!(stem("classes"), "class");
        assert_eq!(stem("class"), "class");
        assert_eq!(stem("running"), "run");
        assert_eq!(stem("stopped"), "stop");
        assert_eq!(stem("telling"), "tell");
        assert_eq!(stem("changing"), "chang");
        assert_eq!(stem("factors"), "factor");
        assert_eq!(stem("pectoris"), "pectoris");
        assert_eq!(stem("status"), "status");
        assert_eq!(stem("houses"), "house");
    }

    #[test]
    fn normalize_strips_determiners_and_stems() {
        assert_eq!(
            normalize_tokens("The probability of having a disease"),
            vec!["probability", "of", "hav", "disease"]
        );
        assert_eq!(normalize_key("Angina Pectoris"), "angina pectoris");
    }

    #[test]
    fn token_seq_matching_respects_boundaries() {
        let hay = normalize_tokens("heart disease risk");
        assert!(contains_token_seq(&hay, &normalize_tokens("heart")));
        assert!(contains_token_seq(&hay, &normalize_tokens("heart disease")));
        let burn = normalize_tokens("heartburn");
        assert!(!contains_token_seq(&burn, &normalize_tokens("heart")));
        assert!(!contains_token_seq(&hay, &[]));
    }

    #[test]
    fn chunks_break_at_stopwords_and_punctuation() {
        assert_eq!(
            noun_chunks("the probability of having a disease"),
            vec!["probability", "disease"]
        );
        assert_eq!(
            noun_chunks("In particular, angina pectoris happens when some part of your heart."),
            vec!["particular", "angina pectoris happens", "part", "heart"]
        );
    }

    #[test]
    fn tokenize_keeps_spans() {
        let toks = tokenize("A b-c.");
        assert_eq!(toks.len(), 3);
        assert_eq!(toks[1].text, "b");
        assert_eq!((toks[2].start, toks[2].end), (4, 5));
    }
}
