use super::{is_marker, CorpusError, LabeledSentence, MARKERS};

const SPLIT_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', '"', '\'', '(', ')'];

/// Converts the official SemEval-2010 Task 8 text format into normalized
/// sentences.
///
/// A record is a numbered, quoted sentence line followed by a relation line
/// and an optional `Comment:` line; records are separated by blank lines.
/// Record indices in errors are 0-based.
pub fn import_semeval(raw: &str) -> Result<Vec<LabeledSentence>, CorpusError> {
    let mut out = Vec::new();
    for (index, record) in records(raw).into_iter().enumerate() {
        let (id, text) = record
            .first()
            .and_then(|l| split_sentence_line(l))
            .ok_or(CorpusError::MalformedRecord(index))?;
        let relation = record
            .get(1)
            .map(|l| l.trim())
            .filter(|l| !l.is_empty() && !l.starts_with("Comment"))
            .ok_or(CorpusError::MalformedRecord(index))?;
        let tokens = tokenize(text);
        let s = LabeledSentence::new(id, relation, tokens).map_err(|e| CorpusError::Record {
            index,
            source: Box::new(e),
        })?;
        out.push(s);
    }
    Ok(out)
}

fn records(raw: &str) -> Vec<Vec<&str>> {
    let mut records = Vec::new();
    let mut current = Vec::new();
    for line in raw.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                records.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        records.push(current);
    }
    records
}

/// `8001\t"The <e1>...</e1> ..."` → ("8001", inner text).
fn split_sentence_line(line: &str) -> Option<(&str, &str)> {
    let line = line.trim();
    let digits = line.find(|c: char| !c.is_ascii_digit())?;
    if digits == 0 {
        return None;
    }
    let (num, rest) = line.split_at(digits);
    let rest = rest.trim_start();
    let inner = rest.strip_prefix('"')?.strip_suffix('"')?;
    Some((num, inner))
}

fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = text.to_owned();
    for m in MARKERS {
        spaced = spaced.replace(m, &format!(" {m} "));
    }
    let mut tokens = Vec::new();
    for raw in spaced.split_whitespace() {
        if is_marker(raw) {
            tokens.push(raw.to_owned());
            continue;
        }
        let core_start = raw.find(|c| !SPLIT_PUNCT.contains(&c)).unwrap_or(raw.len());
        let (lead, rest) = raw.split_at(core_start);
        let core_end = rest
            .rfind(|c| !SPLIT_PUNCT.contains(&c))
            .map_or(0, |i| i + rest[i..].chars().next().map_or(0, char::len_utf8));
        let (core, trail) = rest.split_at(core_end);
        tokens.extend(lead.chars().map(String::from));
        if !core.is_empty() {
            tokens.push(core.to_lowercase());
        }
        tokens.extend(trail.chars().map(String::from));
    }
    tokens
}
