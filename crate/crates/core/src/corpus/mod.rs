//! Relation-classification corpora with inline entity markers.
//!
//! The on-disk form is one sentence per line: `label<TAB>tok tok …`, where the
//! four markers `<e1> </e1> <e2> </e2>` appear as ordinary tokens.

mod semeval;
mod synthetic;
mod vocab;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

pub use semeval::import_semeval;
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use vocab::{build_vocabulary, encode_sentence, Vocabulary, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};

pub const E1_OPEN: &str = "<e1>";
pub const E1_CLOSE: &str = "</e1>";
pub const E2_OPEN: &str = "<e2>";
pub const E2_CLOSE: &str = "</e2>";

/// The four position-indicator tokens in their required order.
pub const MARKERS: [&str; 4] = [E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE];

pub fn is_marker(token: &str) -> bool {
    MARKERS.contains(&token)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("missing marker token {0}")]
    MissingMarker(&'static str),
    #[error("marker token {0} occurs more than once")]
    DuplicateMarker(&'static str),
    #[error("marker tokens out of order (expected <e1> … </e1> … <e2> … </e2>)")]
    MarkerOrder,
    #[error("no token between {0} and its closing marker")]
    EmptyArgument(&'static str),
    #[error("empty relation label")]
    EmptyLabel,
    #[error("empty token sequence")]
    EmptyTokens,
    #[error("expected `label<TAB>tokens`")]
    MissingTab,
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("malformed SemEval record {0}")]
    MalformedRecord(usize),
    #[error("SemEval record {index}: {source}")]
    Record {
        index: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

/// A sentence with inline entity markers and its relation label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledSentence {
    pub id: String,
    pub label: String,
    pub tokens: Vec<String>,
}

impl LabeledSentence {
    /// Builds a sentence after checking the label and marker invariants.
    pub fn new(id: impl Into<String>, label: impl Into<String>, tokens: Vec<String>) -> Result<Self, CorpusError> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(CorpusError::EmptyLabel);
        }
        validate_markers(&tokens)?;
        Ok(LabeledSentence {
            id: id.into(),
            label,
            tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Normalized line form, without a line terminator.
    pub fn to_line(&self) -> String {
        format!("{}\t{}", self.label, self.tokens.join(" "))
    }

    /// Token positions of `<e1>`, `</e1>`, `<e2>`, `</e2>`. Only meaningful on
    /// validated sentences.
    pub fn marker_positions(&self) -> [usize; 4] {
        let mut pos = [0; 4];
        for (slot, marker) in pos.iter_mut().zip(MARKERS) {
            *slot = self.tokens.iter().position(|t| t == marker).unwrap_or(0);
        }
        pos
    }

    /// Keeps only `<e1> arg1 </e1> context <e2> arg2 </e2>`, dropping tokens
    /// before the first and after the last marker.
    pub fn truncated_to_arguments(&self) -> LabeledSentence {
        let pos = self.marker_positions();
        LabeledSentence {
            id: self.id.clone(),
            label: self.label.clone(),
            tokens: self.tokens[pos[0]..=pos[3]].to_vec(),
        }
    }
}

/// Checks the marker invariants on a token sequence.
pub fn validate_markers<S: AsRef<str>>(tokens: &[S]) -> Result<(), CorpusError> {
    if tokens.is_empty() {
        return Err(CorpusError::EmptyTokens);
    }
    let mut pos = [None; 4];
    for (i, tok) in tokens.iter().enumerate() {
        if let Some(m) = MARKERS.iter().position(|&m| m == tok.as_ref()) {
            if pos[m].is_some() {
                return Err(CorpusError::DuplicateMarker(MARKERS[m]));
            }
            pos[m] = Some(i);
        }
    }
    let mut found = [0usize; 4];
    for (m, p) in pos.iter().enumerate() {
        found[m] = p.ok_or(CorpusError::MissingMarker(MARKERS[m]))?;
    }
    if !found.windows(2).all(|w| w[0] < w[1]) {
        return Err(CorpusError::MarkerOrder);
    }
    if found[1] == found[0] + 1 {
        return Err(CorpusError::EmptyArgument(E1_OPEN));
    }
    if found[3] == found[2] + 1 {
        return Err(CorpusError::EmptyArgument(E2_OPEN));
    }
    Ok(())
}

/// Parses one normalized line `label<TAB>tokens`. Tokens are split on
/// whitespace only. The returned sentence has an empty id.
pub fn parse_marked_sentence(line: &str) -> Result<LabeledSentence, CorpusError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let (label, text) = line.split_once('\t').ok_or(CorpusError::MissingTab)?;
    let tokens: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
    if label.trim().is_empty() {
        return Err(CorpusError::EmptyLabel);
    }
    LabeledSentence::new("", label.trim(), tokens)
}

/// Parses a normalized corpus. Sentence ids are 1-based line numbers; blank
/// lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<LabeledSentence>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut s = parse_marked_sentence(line).map_err(|e| CorpusError::Line {
            line: i + 1,
            source: Box::new(e),
        })?;
        s.id = (i + 1).to_string();
        out.push(s);
    }
    Ok(out)
}

/// Writes sentences in the normalized format with LF endings.
pub fn write_corpus(sentences: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.to_line());
        out.push('\n');
    }
    out
}

/// Train/dev/test partition with a fixed label order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<LabeledSentence>,
    pub dev: Vec<LabeledSentence>,
    pub test: Vec<LabeledSentence>,
    pub label_set: Vec<String>,
    /// Planted trigger phrase per relation; empty for real corpora.
    pub triggers: BTreeMap<String, Vec<String>>,
}

impl CorpusSplit {
    /// Builds a split whose label set is the sorted union of all labels.
    /// Sentence ids must be unique across the three parts.
    pub fn new(
        train: Vec<LabeledSentence>,
        dev: Vec<LabeledSentence>,
        test: Vec<LabeledSentence>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for s in train.iter().chain(&dev).chain(&test) {
            if !seen.insert(s.id.as_str()) {
                return Err(CorpusError::ConfigInvalid(format!(
                    "sentence id {:?} appears in more than one place",
                    s.id
                )));
            }
        }
        let label_set: BTreeSet<&str> = train
            .iter()
            .chain(&dev)
            .chain(&test)
            .map(|s| s.label.as_str())
            .collect();
        let label_set = label_set.into_iter().map(str::to_owned).collect();
        Ok(CorpusSplit {
            train,
            dev,
            test,
            label_set,
            triggers: BTreeMap::new(),
        })
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.label_set.iter().position(|l| l == label)
    }
}

/// Re-ids sentences as `<prefix><n>` so that parts loaded from separate files
/// stay disjoint by id.
pub fn with_id_prefix(sentences: Vec<LabeledSentence>, prefix: &str) -> Vec<LabeledSentence> {
    sentences
        .into_iter()
        .map(|mut s| {
            s.id = format!("{prefix}{}", s.id);
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CAUSE: &str = "cause-effect(e1,e2)\t<e1> demolition </e1> was the cause of <e2> terror </e2>";

    #[test]
    fn parses_example_sentence() {
        let s = parse_marked_sentence(CAUSE).unwrap();
        assert_eq!(s.label, "cause-effect(e1,e2)");
        assert_eq!(s.len(), 10);
        assert_eq!(s.tokens[6], "of");
    }

    #[test]
    fn minimal_sentence() {
        let s = parse_marked_sentence("X\t<e1> a </e1> <e2> b </e2>").unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.marker_positions(), [0, 2, 3, 5]);
    }

    #[test]
    fn marker_errors() {
        let cases = [
            ("X\t<e1> a <e2> b </e2> </e1>", CorpusError::MarkerOrder),
            ("X\t<e1> a </e1> b </e2>", CorpusError::MissingMarker(E2_OPEN)),
            (
                "X\t<e1> a </e1> <e2> b </e2> <e1>",
                CorpusError::DuplicateMarker(E1_OPEN),
            ),
            ("X\t<e1> </e1> <e2> b </e2>", CorpusError::EmptyArgument(E1_OPEN)),
            ("X\t<e1> a </e1> <e2> </e2>", CorpusError::EmptyArgument(E2_OPEN)),
            ("\t<e1> a </e1> <e2> b </e2>", CorpusError::EmptyLabel),
            ("X\t   ", CorpusError::EmptyTokens),
            ("X <e1> a </e1> <e2> b </e2>", CorpusError::MissingTab),
        ];
        for (line, err) in cases {
            assert_eq!(parse_marked_sentence(line).unwrap_err(), err, "{line}");
        }
    }

    #[test]
    fn corpus_reports_line_numbers() {
        let text = format!("{CAUSE}\n\nX\t<e1> a </e1> b\n");
        match parse_corpus(&text).unwrap_err() {
            CorpusError::Line { line, source } => {
                assert_eq!(line, 3);
                assert_eq!(*source, CorpusError::MissingMarker(E2_OPEN));
            }
            e => panic!("unexpected {e}"),
        }
        let ok = parse_corpus(&format!("{CAUSE}\n{CAUSE}\n")).unwrap();
        assert_eq!(ok[1].id, "2");
    }

    #[test]
    fn truncation_keeps_argument_span() {
        let s = parse_marked_sentence("X\tthe <e1> a </e1> of <e2> b </e2> here .").unwrap();
        assert_eq!(
            s.truncated_to_arguments().tokens.join(" "),
            "<e1> a </e1> of <e2> b </e2>"
        );
    }

    #[test]
    fn split_rejects_shared_ids() {
        let mut a = parse_marked_sentence(CAUSE).unwrap();
        a.id = "1".into();
        let err = CorpusSplit::new(vec![a.clone()], vec![], vec![a]).unwrap_err();
        assert!(matches!(err, CorpusError::ConfigInvalid(_)));
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-z,.'()-]{1,6}"
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(
            label in "[A-Za-z-]{1,8}(\\(e[12],e[12]\\))?",
            pre in prop::collection::vec(word(), 0..3),
            a1 in prop::collection::vec(word(), 1..3),
            mid in prop::collection::vec(word(), 0..4),
            a2 in prop::collection::vec(word(), 1..3),
            post in prop::collection::vec(word(), 0..3),
        ) {
            let mut tokens = pre;
            tokens.push(E1_OPEN.into());
            tokens.extend(a1);
            tokens.push(E1_CLOSE.into());
            tokens.extend(mid);
            tokens.push(E2_OPEN.into());
            tokens.extend(a2);
            tokens.push(E2_CLOSE.into());
            tokens.extend(post);
            let s = LabeledSentence::new("", label, tokens).unwrap();
            prop_assert_eq!(parse_marked_sentence(&s.to_line()).unwrap(), s);
        }
    }
}
