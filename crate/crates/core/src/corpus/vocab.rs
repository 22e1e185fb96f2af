use std::collections::HashMap;

use super::{CorpusError, LabeledSentence, MARKERS};

pub const PAD_TOKEN: &str = "__PAD__";
pub const UNK_TOKEN: &str = "__UNK__";
pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

/// Token ↔ id mapping. Ids are contiguous; `__PAD__` is 0, `__UNK__` is 1
/// and the four markers follow at 2..=5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    fn with_specials() -> Self {
        let mut v = Vocabulary {
            token_to_id: HashMap::new(),
            id_to_token: Vec::new(),
        };
        for t in [PAD_TOKEN, UNK_TOKEN].into_iter().chain(MARKERS) {
            v.insert(t);
        }
        v
    }

    fn insert(&mut self, token: &str) -> usize {
        if let Some(&id) = self.token_to_id.get(token) {
            return id;
        }
        let id = self.id_to_token.len();
        self.token_to_id.insert(token.to_owned(), id);
        self.id_to_token.push(token.to_owned());
        id
    }

    /// Rebuilds a vocabulary from its id-ordered token list, as stored in a
    /// model file.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        let expected = [PAD_TOKEN, UNK_TOKEN].into_iter().chain(MARKERS);
        if tokens.len() < 6 || !tokens.iter().zip(expected).all(|(t, e)| t == e) {
            return Err(CorpusError::ConfigInvalid(
                "vocabulary must start with __PAD__ __UNK__ <e1> </e1> <e2> </e2>".into(),
            ));
        }
        let mut token_to_id = HashMap::with_capacity(tokens.len());
        for (id, t) in tokens.iter().enumerate() {
            if token_to_id.insert(t.clone(), id).is_some() {
                return Err(CorpusError::ConfigInvalid(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token: tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    /// Id of `token`, or `UNK_ID` when it is out of vocabulary.
    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id_or_unk(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<&str> {
        ids.iter().map(|&i| self.token(i).unwrap_or(UNK_TOKEN)).collect()
    }
}

/// Builds a vocabulary from tokens occurring at least `min_count` times.
/// Ids follow first-occurrence order after the specials and markers.
pub fn build_vocabulary(sentences: &[LabeledSentence], min_count: usize) -> Result<Vocabulary, CorpusError> {
    if sentences.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    if min_count == 0 {
        return Err(CorpusError::ConfigInvalid("min_count must be at least 1".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for tok in sentences.iter().flat_map(|s| &s.tokens) {
        let c = counts.entry(tok).or_insert(0);
        if *c == 0 {
            order.push(tok);
        }
        *c += 1;
    }
    let mut vocab = Vocabulary::with_specials();
    for tok in order {
        if counts[tok] >= min_count {
            vocab.insert(tok);
        }
    }
    Ok(vocab)
}

pub fn encode_sentence(s: &LabeledSentence, v: &Vocabulary) -> Vec<usize> {
    v.encode(&s.tokens)
}
