use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, CorpusSplit, LabeledSentence, E1_CLOSE, E1_OPEN, E2_CLOSE, E2_OPEN};

const TRIGGER_WORDS: &[&str] = &[
    "caused", "by", "inside", "into", "made", "from", "part", "of", "produced", "using", "contains", "toward", "born",
    "near", "married", "to", "emits", "under", "owned", "across", "sent", "via", "built", "upon", "derived", "beside",
    "carried", "onto", "left", "behind", "moved", "through", "placed", "within", "drawn", "out",
];

const FILLER_WORDS: &[&str] = &[
    "the", "a", "was", "is", "very", "quite", "then", "also", "some", "that", "this", "it", "and", "recently", "often",
    "all", "its", "new", "old", "many",
];

const ENTITY_WORDS: &[&str] = &[
    "demolition",
    "terror",
    "damage",
    "bombing",
    "castle",
    "courtyard",
    "marble",
    "bowl",
    "car",
    "plant",
    "cigarettes",
    "producer",
    "women",
    "person",
    "location",
    "spouse",
    "company",
    "chairs",
    "audits",
    "waste",
    "river",
    "valley",
    "engine",
    "smoke",
    "letter",
    "office",
    "child",
    "school",
    "wine",
    "grape",
    "storm",
    "flood",
    "student",
    "book",
    "lamp",
    "light",
];

/// Size and seed of a generated corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub n_relations: usize,
    pub sentences_per_relation: usize,
    pub seed: u64,
}

fn relation_name(r: usize) -> String {
    format!("rel{r}(e1,e2)")
}

fn trigger_phrases(n_relations: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut next = 0;
    let word = |next: &mut usize| {
        let w = TRIGGER_WORDS
            .get(*next)
            .map(|w| (*w).to_owned())
            .unwrap_or_else(|| format!("trig{}", *next));
        *next += 1;
        w
    };
    (0..n_relations)
        .map(|_| {
            let len = rng.gen_range(2..=3);
            (0..len).map(|_| word(&mut next)).collect()
        })
        .collect()
}

fn pick<'a>(pool: &[&'a str], rng: &mut ChaCha8Rng) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn fillers(max: usize, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
    let n = rng.gen_range(0..=max);
    out.extend((0..n).map(|_| pick(FILLER_WORDS, rng).to_owned()));
}

fn sentence(trigger: &[String], rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut t = Vec::new();
    fillers(2, rng, &mut t);
    t.push(E1_OPEN.into());
    if rng.gen_bool(0.3) {
        t.push(pick(FILLER_WORDS, rng).into());
    }
    t.push(pick(ENTITY_WORDS, rng).into());
    t.push(E1_CLOSE.into());
    fillers(1, rng, &mut t);
    t.extend(trigger.iter().cloned());
    fillers(1, rng, &mut t);
    t.push(E2_OPEN.into());
    t.push(pick(ENTITY_WORDS, rng).into());
    t.push(E2_CLOSE.into());
    fillers(2, rng, &mut t);
    t
}

/// Generates a separable desk-scale corpus: each relation has its own 2–3
/// token trigger phrase between the two argument spans, while fillers and
/// argument words come from pools shared by every relation.
///
/// Every relation is split 70/10/20 into train/dev/test; each part is then
/// shuffled. The planted trigger phrases are recorded in `triggers`.
pub fn generate_synthetic(config: SyntheticConfig) -> Result<CorpusSplit, CorpusError> {
    if config.n_relations < 2 {
        return Err(CorpusError::ConfigInvalid("n_relations must be at least 2".into()));
    }
    if config.sentences_per_relation < 20 {
        return Err(CorpusError::ConfigInvalid(
            "sentences_per_relation must be at least 20".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let phrases = trigger_phrases(config.n_relations, &mut rng);
    let per = config.sentences_per_relation;
    let n_train = per * 7 / 10;
    let n_dev = per / 10;

    let (mut train, mut dev, mut test) = (Vec::new(), Vec::new(), Vec::new());
    let mut triggers = BTreeMap::new();
    for (r, phrase) in phrases.iter().enumerate() {
        let label = relation_name(r);
        triggers.insert(label.clone(), phrase.clone());
        for i in 0..per {
            let s = LabeledSentence::new(format!("syn-{r}-{i}"), label.clone(), sentence(phrase, &mut rng))?;
            match i {
                i if i < n_train => train.push(s),
                i if i < n_train + n_dev => dev.push(s),
                _ => test.push(s),
            }
        }
    }
    train.shuffle(&mut rng);
    dev.shuffle(&mut rng);
    test.shuffle(&mut rng);
    let mut split = CorpusSplit::new(train, dev, test)?;
    split.triggers = triggers;
    Ok(split)
}
