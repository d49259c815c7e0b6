//! WordPiece tokenization and model input encoding.
//!
//! Text is lowercased, split on whitespace and punctuation, then segmented by
//! greedy longest-match against a fixed vocabulary with `##` continuation
//! pieces. Articles are encoded either as a sentence pair
//! (`[CLS] title [SEP] abstract [SEP]`, with segment ids 0/1) or as a single
//! sentence (`[CLS] title abstract [SEP]`, all segment ids 0). Masked
//! language-model examples are drawn with a seeded generator so that every
//! epoch can re-mask the same sequences at different positions,
//! reproducibly.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The five special tokens every vocabulary must define.
pub const SPECIAL_TOKENS: [&str; 5] = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"];

/// Words longer than this many characters are mapped to `[UNK]` without
/// attempting segmentation.
const MAX_WORD_CHARS: usize = 100;

/// Fixed token inventory with id = position, plus resolved special-token ids.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    pad: u32,
    unk: u32,
    cls: u32,
    sep: u32,
    mask: u32,
    /// Ids of all non-special tokens, in id order (candidates for random
    /// replacement during masking).
    non_special: Vec<u32>,
    /// SHA-256 over the canonical one-token-per-line serialization.
    fingerprint: String,
}

impl Vocabulary {
    /// Build a vocabulary from tokens in id order.
    pub fn from_lines<I, S>(lines: I) -> Result<Vocabulary>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let id_to_token: Vec<String> = lines.into_iter().map(Into::into).collect();
        let mut token_to_id = HashMap::with_capacity(id_to_token.len());
        for (i, token) in id_to_token.iter().enumerate() {
            if token_to_id.insert(token.clone(), i as u32).is_some() {
                return Err(Error::DuplicateToken {
                    token: token.clone(),
                    line: i + 1,
                });
            }
        }
        let special = |name: &'static str| -> Result<u32> {
            token_to_id
                .get(name)
                .copied()
                .ok_or(Error::MissingSpecialToken(name))
        };
        let pad = special("[PAD]")?;
        let unk = special("[UNK]")?;
        let cls = special("[CLS]")?;
        let sep = special("[SEP]")?;
        let mask = special("[MASK]")?;
        let specials = [pad, unk, cls, sep, mask];
        let non_special = (0..id_to_token.len() as u32)
            .filter(|id| !specials.contains(id))
            .collect();

        let mut hasher = Sha256::new();
        for token in &id_to_token {
            hasher.update(token.as_bytes());
            hasher.update(b"\n");
        }
        let fingerprint = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();

        Ok(Vocabulary {
            token_to_id,
            id_to_token,
            pad,
            unk,
            cls,
            sep,
            mask,
            non_special,
            fingerprint,
        })
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    pub fn cls_id(&self) -> u32 {
        self.cls
    }

    pub fn sep_id(&self) -> u32 {
        self.sep
    }

    pub fn mask_id(&self) -> u32 {
        self.mask
    }

    pub fn is_special(&self, id: u32) -> bool {
        id == self.pad || id == self.unk || id == self.cls || id == self.sep || id == self.mask
    }

    /// Hex SHA-256 of the vocabulary content; stored in checkpoints so a
    /// model is never silently fine-tuned with a different token inventory.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

/// Load a vocabulary file: UTF-8, one token per line, id = line index.
pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Vocabulary::from_lines(content.lines().map(|l| l.trim_end_matches('\r')))
}

/// How an article was packed into one token sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodeMode {
    /// `[CLS] title [SEP] abstract [SEP]` with segment ids 0/1.
    Pair,
    /// `[CLS] title abstract [SEP]` with all segment ids 0.
    Single,
}

impl fmt::Display for EncodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeMode::Pair => f.write_str("pair"),
            EncodeMode::Single => f.write_str("single"),
        }
    }
}

impl std::str::FromStr for EncodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<EncodeMode> {
        match s.to_lowercase().as_str() {
            "pair" => Ok(EncodeMode::Pair),
            "single" => Ok(EncodeMode::Single),
            other => Err(Error::InvalidInput(format!(
                "unknown encode mode `{other}` (expected pair or single)"
            ))),
        }
    }
}

/// One encoded sequence: token ids, segment ids and attention mask, all the
/// same length (unpadded until [`pad_batch`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedInput {
    pub token_ids: Vec<u32>,
    pub segment_ids: Vec<u8>,
    pub attention_mask: Vec<u8>,
    pub mode: EncodeMode,
}

impl EncodedInput {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

fn is_word_punctuation(c: char) -> bool {
    // Any non-alphanumeric, non-whitespace character splits a word and
    // becomes its own token.
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Lowercase and pre-split into words, with punctuation characters isolated.
fn basic_split(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut words = Vec::new();
    let mut current = String::new();
    for c in lowered.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
        } else if is_word_punctuation(c) {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            words.push(c.to_string());
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Greedy longest-match segmentation of one pre-split word. Returns `None`
/// when the word has no valid segmentation (the caller emits `[UNK]`).
fn wordpiece_word(word: &str, vocab: &Vocabulary) -> Option<Vec<String>> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return None;
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut matched = None;
        while start < end {
            let piece: String = if start == 0 {
                chars[start..end].iter().collect()
            } else {
                let mut s = String::from("##");
                s.extend(&chars[start..end]);
                s
            };
            if vocab.token_id(&piece).is_some() {
                matched = Some(piece);
                break;
            }
            end -= 1;
        }
        match matched {
            Some(piece) => {
                pieces.push(piece);
                start = end;
            }
            None => return None,
        }
    }
    Some(pieces)
}

/// WordPiece tokenization: lowercase, whitespace+punctuation pre-split, then
/// greedy longest-match with `##` continuation pieces. A word with no valid
/// segmentation (or longer than 100 characters) becomes a single `[UNK]`.
pub fn wordpiece(text: &str, vocab: &Vocabulary) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in basic_split(text) {
        match wordpiece_word(&word, vocab) {
            Some(pieces) => tokens.extend(pieces),
            None => tokens.push("[UNK]".to_string()),
        }
    }
    tokens
}

/// Token strings for a slice of ids (padding skipped). Inverse of the
/// tokenizer for sequences free of `[UNK]`.
pub fn decode_tokens(ids: &[u32], vocab: &Vocabulary) -> Vec<String> {
    ids.iter()
        .filter(|&&id| id != vocab.pad_id())
        .filter_map(|&id| vocab.token(id))
        .map(str::to_string)
        .collect()
}

fn token_ids(tokens: &[String], vocab: &Vocabulary) -> Vec<u32> {
    tokens
        .iter()
        .map(|t| vocab.token_id(t).unwrap_or_else(|| vocab.unk_id()))
        .collect()
}

/// Encode `[CLS] title [SEP] abstract [SEP]` with segment ids 0 for the
/// title half (including `[CLS]` and the first `[SEP]`) and 1 for the
/// abstract half (including the final `[SEP]`).
///
/// Truncation drops the abstract tail first; only if the title alone
/// overflows the budget is the title tail cut (and the abstract dropped
/// entirely). Both `[SEP]`s are always retained, so an empty abstract yields
/// `[CLS] title [SEP] [SEP]`.
pub fn encode_pair(
    title: &str,
    abstract_text: &str,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<EncodedInput> {
    // [CLS] + at least one title token + two [SEP]s.
    if max_len < 4 {
        return Err(Error::MaxLenTooSmall {
            max_len,
            needed: 4,
        });
    }
    let mut title_tokens = wordpiece(title, vocab);
    if title_tokens.is_empty() {
        return Err(Error::InvalidInput(
            "cannot encode an article with an empty title".to_string(),
        ));
    }
    let mut abstract_tokens = wordpiece(abstract_text, vocab);

    let budget = max_len - 3;
    if title_tokens.len() > budget {
        title_tokens.truncate(budget);
        abstract_tokens.clear();
    } else {
        abstract_tokens.truncate(budget - title_tokens.len());
    }

    let mut ids = Vec::with_capacity(title_tokens.len() + abstract_tokens.len() + 3);
    let mut segments = Vec::with_capacity(ids.capacity());
    ids.push(vocab.cls_id());
    segments.push(0);
    ids.extend(token_ids(&title_tokens, vocab));
    segments.resize(ids.len(), 0);
    ids.push(vocab.sep_id());
    segments.push(0);
    ids.extend(token_ids(&abstract_tokens, vocab));
    segments.resize(ids.len(), 1);
    ids.push(vocab.sep_id());
    segments.push(1);

    let mask = vec![1u8; ids.len()];
    Ok(EncodedInput {
        token_ids: ids,
        segment_ids: segments,
        attention_mask: mask,
        mode: EncodeMode::Pair,
    })
}

/// Encode `[CLS] title abstract [SEP]` as one sentence: all segment ids 0,
/// a single `[SEP]`, tail truncation of the concatenated token sequence.
pub fn encode_single(
    title: &str,
    abstract_text: &str,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<EncodedInput> {
    // [CLS] + at least one token + [SEP].
    if max_len < 3 {
        return Err(Error::MaxLenTooSmall {
            max_len,
            needed: 3,
        });
    }
    let mut tokens = wordpiece(title, vocab);
    if tokens.is_empty() {
        return Err(Error::InvalidInput(
            "cannot encode an article with an empty title".to_string(),
        ));
    }
    tokens.extend(wordpiece(abstract_text, vocab));
    tokens.truncate(max_len - 2);

    let mut ids = Vec::with_capacity(tokens.len() + 2);
    ids.push(vocab.cls_id());
    ids.extend(token_ids(&tokens, vocab));
    ids.push(vocab.sep_id());

    Ok(EncodedInput {
        segment_ids: vec![0; ids.len()],
        attention_mask: vec![1; ids.len()],
        token_ids: ids,
        mode: EncodeMode::Single,
    })
}

/// The 80/10/10 replacement scheme for selected mask positions.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MaskScheme {
    /// Probability of replacing the token with `[MASK]`.
    pub mask_p: f64,
    /// Probability of replacing it with a uniform-random non-special token.
    pub random_p: f64,
    /// Probability of keeping the original token.
    pub keep_p: f64,
}

impl Default for MaskScheme {
    fn default() -> Self {
        MaskScheme {
            mask_p: 0.8,
            random_p: 0.1,
            keep_p: 0.1,
        }
    }
}

impl MaskScheme {
    pub fn validate(&self) -> Result<()> {
        let sum = self.mask_p + self.random_p + self.keep_p;
        if self.mask_p < 0.0 || self.random_p < 0.0 || self.keep_p < 0.0 || (sum - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidInput(format!(
                "mask scheme probabilities must be non-negative and sum to 1 (got {sum})"
            )));
        }
        Ok(())
    }
}

/// A masked copy of one sequence plus the positions and original ids the
/// model must reconstruct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlmExample {
    pub input_ids: Vec<u32>,
    /// Strictly increasing, never pointing at a special token or padding.
    pub target_positions: Vec<usize>,
    /// Original (pre-masking) ids at `target_positions`.
    pub target_ids: Vec<u32>,
}

/// Select `round(rate × eligible)` distinct non-special, non-padding
/// positions with the seeded generator and apply the replacement scheme.
/// Identical seeds reproduce the example bit for bit.
pub fn mask_for_mlm(
    encoded: &EncodedInput,
    vocab: &Vocabulary,
    rate: f64,
    scheme: MaskScheme,
    seed: u64,
) -> Result<MlmExample> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidInput(format!(
            "masking rate must be in [0, 1], got {rate}"
        )));
    }
    scheme.validate()?;

    let eligible: Vec<usize> = encoded
        .token_ids
        .iter()
        .enumerate()
        .filter(|&(i, &id)| encoded.attention_mask[i] == 1 && !vocab.is_special(id))
        .map(|(i, _)| i)
        .collect();
    let count = (rate * eligible.len() as f64).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<usize> = rand::seq::index::sample(&mut rng, eligible.len(), count)
        .into_iter()
        .map(|k| eligible[k])
        .collect();
    positions.sort_unstable();

    // Replacement decisions are drawn in position order so the example is a
    // pure function of (sequence, seed).
    let mut input_ids = encoded.token_ids.clone();
    let mut target_ids = Vec::with_capacity(positions.len());
    for &pos in &positions {
        target_ids.push(encoded.token_ids[pos]);
        let draw: f64 = rng.random();
        if draw < scheme.mask_p {
            input_ids[pos] = vocab.mask_id();
        } else if draw < scheme.mask_p + scheme.random_p && !vocab.non_special.is_empty() {
            let k = rng.random_range(0..vocab.non_special.len());
            input_ids[pos] = vocab.non_special[k];
        }
        // Otherwise the original token is kept.
    }

    Ok(MlmExample {
        input_ids,
        target_positions: positions,
        target_ids,
    })
}

/// A right-padded batch: three row-major `size × seq_len` integer planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub size: usize,
    pub seq_len: usize,
    pub token_ids: Vec<u32>,
    pub segment_ids: Vec<u8>,
    pub attention_mask: Vec<u8>,
    pub mode: EncodeMode,
}

impl Batch {
    pub fn row_ids(&self, row: usize) -> &[u32] {
        &self.token_ids[row * self.seq_len..(row + 1) * self.seq_len]
    }

    pub fn row_mask(&self, row: usize) -> &[u8] {
        &self.attention_mask[row * self.seq_len..(row + 1) * self.seq_len]
    }
}

/// Right-pad a set of same-mode sequences to the batch maximum length with
/// `[PAD]` (attention mask 0 on padding).
pub fn pad_batch(inputs: &[EncodedInput], vocab: &Vocabulary) -> Result<Batch> {
    let first = inputs.first().ok_or(Error::EmptyBatch)?;
    let mode = first.mode;
    if inputs.iter().any(|i| i.mode != mode) {
        return Err(Error::MixedBatchModes);
    }
    let seq_len = inputs.iter().map(EncodedInput::len).max().unwrap_or(0);
    let size = inputs.len();
    let mut token_ids = Vec::with_capacity(size * seq_len);
    let mut segment_ids = Vec::with_capacity(size * seq_len);
    let mut attention_mask = Vec::with_capacity(size * seq_len);
    for input in inputs {
        token_ids.extend_from_slice(&input.token_ids);
        token_ids.resize(token_ids.len() + seq_len - input.len(), vocab.pad_id());
        segment_ids.extend_from_slice(&input.segment_ids);
        segment_ids.resize(segment_ids.len() + seq_len - input.len(), 0);
        attention_mask.extend_from_slice(&input.attention_mask);
        attention_mask.resize(attention_mask.len() + seq_len - input.len(), 0);
    }
    Ok(Batch {
        size,
        seq_len,
        token_ids,
        segment_ids,
        attention_mask,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 9-line toy vocabulary: ids 0..=8.
    fn toy_vocab() -> Vocabulary {
        Vocabulary::from_lines([
            "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "corona", "##virus", "virus",
            "treatment",
        ])
        .unwrap()
    }

    #[test]
    fn load_vocab_assigns_line_index_ids() {
        let vocab = toy_vocab();
        assert_eq!(vocab.len(), 9);
        assert_eq!(vocab.pad_id(), 0);
        assert_eq!(vocab.unk_id(), 1);
        assert_eq!(vocab.cls_id(), 2);
        assert_eq!(vocab.sep_id(), 3);
        assert_eq!(vocab.mask_id(), 4);
        assert_eq!(vocab.token_id("corona"), Some(5));
        assert_eq!(vocab.token_id("treatment"), Some(8));
    }

    #[test]
    fn duplicate_token_is_rejected() {
        let err = Vocabulary::from_lines([
            "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "virus", "virus",
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateToken { .. }));
        assert!(err.to_string().contains("virus"));
    }

    #[test]
    fn missing_special_is_named() {
        let err =
            Vocabulary::from_lines(["[PAD]", "[UNK]", "[CLS]", "[SEP]", "virus"]).unwrap_err();
        assert_eq!(err.to_string(), "vocabulary is missing special token [MASK]");
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = toy_vocab();
        let b = Vocabulary::from_lines([
            "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "corona", "##virus", "virus", "vaccine",
        ])
        .unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), toy_vocab().fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn wordpiece_greedy_longest_match() {
        let vocab = toy_vocab();
        assert_eq!(wordpiece("coronavirus", &vocab), ["corona", "##virus"]);
        assert_eq!(wordpiece("xyzzy", &vocab), ["[UNK]"]);
        assert_eq!(wordpiece("Virus treatment", &vocab), ["virus", "treatment"]);
    }

    #[test]
    fn wordpiece_splits_punctuation_and_collapses_whitespace() {
        let vocab = toy_vocab();
        // Punctuation has no vocab entry here, so each mark becomes [UNK].
        assert_eq!(
            wordpiece("virus, treatment", &vocab),
            ["virus", "[UNK]", "treatment"]
        );
        assert_eq!(
            wordpiece("  virus \t treatment \n", &vocab),
            ["virus", "treatment"]
        );
    }

    #[test]
    fn wordpiece_overlong_word_is_unk() {
        let vocab = toy_vocab();
        let long = "a".repeat(101);
        assert_eq!(wordpiece(&long, &vocab), ["[UNK]"]);
    }

    #[test]
    fn encode_pair_matches_format_definition() {
        let vocab = toy_vocab();
        let e = encode_pair("virus", "coronavirus treatment", &vocab, 16).unwrap();
        assert_eq!(e.token_ids, [2, 7, 3, 5, 6, 8, 3]);
        assert_eq!(e.segment_ids, [0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(e.attention_mask, [1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(e.mode, EncodeMode::Pair);
    }

    #[test]
    fn encode_pair_truncates_abstract_tail_first() {
        let vocab = toy_vocab();
        let e = encode_pair("virus", "coronavirus treatment", &vocab, 6).unwrap();
        assert_eq!(e.token_ids, [2, 7, 3, 5, 6, 3]);
        assert_eq!(e.segment_ids, [0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn encode_pair_truncates_title_only_when_it_overflows() {
        let vocab = toy_vocab();
        // Title "virus virus virus" (3 tokens) with budget 1.
        let e = encode_pair("virus virus virus", "treatment", &vocab, 4).unwrap();
        assert_eq!(e.token_ids, [2, 7, 3, 3]);
        assert_eq!(e.segment_ids, [0, 0, 0, 1]);
    }

    #[test]
    fn encode_pair_empty_abstract_keeps_both_seps() {
        let vocab = toy_vocab();
        let e = encode_pair("virus", "", &vocab, 16).unwrap();
        assert_eq!(e.token_ids, [2, 7, 3, 3]);
        assert_eq!(e.segment_ids, [0, 0, 0, 1]);
    }

    #[test]
    fn encode_pair_rejects_tiny_max_len() {
        let vocab = toy_vocab();
        let err = encode_pair("virus", "treatment", &vocab, 3).unwrap_err();
        assert!(matches!(err, Error::MaxLenTooSmall { .. }));
    }

    #[test]
    fn encode_single_matches_format_definition() {
        let vocab = toy_vocab();
        let e = encode_single("virus", "coronavirus treatment", &vocab, 16).unwrap();
        assert_eq!(e.token_ids, [2, 7, 5, 6, 8, 3]);
        assert!(e.segment_ids.iter().all(|&s| s == 0));
        assert_eq!(e.mode, EncodeMode::Single);
    }

    #[test]
    fn encode_single_tail_truncates() {
        let vocab = toy_vocab();
        let e = encode_single("virus", "coronavirus treatment", &vocab, 5).unwrap();
        assert_eq!(e.token_ids, [2, 7, 5, 6, 3]);
    }

    #[test]
    fn encode_single_empty_abstract() {
        let vocab = toy_vocab();
        let e = encode_single("virus", "", &vocab, 16).unwrap();
        assert_eq!(e.token_ids, [2, 7, 3]);
    }

    #[test]
    fn decode_reproduces_wordpiece_tokens() {
        let vocab = toy_vocab();
        let e = encode_pair("virus", "coronavirus treatment", &vocab, 16).unwrap();
        let tokens = decode_tokens(&e.token_ids, &vocab);
        assert_eq!(
            tokens,
            ["[CLS]", "virus", "[SEP]", "corona", "##virus", "treatment", "[SEP]"]
        );
    }

    fn long_input(vocab: &Vocabulary, words: usize) -> EncodedInput {
        let text = vec!["coronavirus"; words].join(" ");
        encode_single("virus", &text, vocab, 4 * words).unwrap()
    }

    #[test]
    fn mask_rate_zero_changes_nothing() {
        let vocab = toy_vocab();
        let e = long_input(&vocab, 10);
        let m = mask_for_mlm(&e, &vocab, 0.0, MaskScheme::default(), 7).unwrap();
        assert_eq!(m.input_ids, e.token_ids);
        assert!(m.target_positions.is_empty());
        assert!(m.target_ids.is_empty());
    }

    #[test]
    fn mask_count_is_round_of_rate_times_eligible() {
        let vocab = toy_vocab();
        // 50 "coronavirus" words -> 100 eligible pieces + [CLS]/[SEP] + title.
        let e = long_input(&vocab, 50);
        let eligible = e
            .token_ids
            .iter()
            .filter(|&&id| !vocab.is_special(id))
            .count();
        assert_eq!(eligible, 101); // title "virus" + 50×2 pieces
        let m = mask_for_mlm(&e, &vocab, 0.15, MaskScheme::default(), 3).unwrap();
        assert_eq!(m.target_positions.len(), (0.15f64 * 101.0).round() as usize);
        for &pos in &m.target_positions {
            assert!(!vocab.is_special(e.token_ids[pos]));
        }
        let increasing = m
            .target_positions
            .windows(2)
            .all(|w| w[0] < w[1]);
        assert!(increasing);
    }

    #[test]
    fn mask_is_deterministic_and_seed_sensitive() {
        let vocab = toy_vocab();
        let e = long_input(&vocab, 100);
        for seed in 0..20u64 {
            let a = mask_for_mlm(&e, &vocab, 0.15, MaskScheme::default(), seed).unwrap();
            let b = mask_for_mlm(&e, &vocab, 0.15, MaskScheme::default(), seed).unwrap();
            assert_eq!(a, b, "same seed must be bit-identical");
            let c = mask_for_mlm(&e, &vocab, 0.15, MaskScheme::default(), seed + 1).unwrap();
            assert_ne!(
                a.target_positions, c.target_positions,
                "adjacent seeds should select different position sets"
            );
        }
    }

    #[test]
    fn mask_targets_record_original_ids() {
        let vocab = toy_vocab();
        let e = long_input(&vocab, 30);
        let m = mask_for_mlm(&e, &vocab, 0.3, MaskScheme::default(), 11).unwrap();
        for (&pos, &original) in m.target_positions.iter().zip(&m.target_ids) {
            assert_eq!(e.token_ids[pos], original);
        }
        // Unmasked positions are untouched.
        for i in 0..e.len() {
            if !m.target_positions.contains(&i) {
                assert_eq!(m.input_ids[i], e.token_ids[i]);
            }
        }
    }

    #[test]
    fn mask_scheme_all_mask_replaces_every_target() {
        let vocab = toy_vocab();
        let e = long_input(&vocab, 30);
        let scheme = MaskScheme {
            mask_p: 1.0,
            random_p: 0.0,
            keep_p: 0.0,
        };
        let m = mask_for_mlm(&e, &vocab, 0.5, scheme, 5).unwrap();
        for &pos in &m.target_positions {
            assert_eq!(m.input_ids[pos], vocab.mask_id());
        }
    }

    #[test]
    fn mask_scheme_must_sum_to_one() {
        let vocab = toy_vocab();
        let e = long_input(&vocab, 5);
        let scheme = MaskScheme {
            mask_p: 0.8,
            random_p: 0.3,
            keep_p: 0.1,
        };
        assert!(mask_for_mlm(&e, &vocab, 0.15, scheme, 0).is_err());
    }

    #[test]
    fn pad_batch_right_pads_to_max() {
        let vocab = toy_vocab();
        let a = encode_pair("virus", "", &vocab, 16).unwrap(); // len 4
        let b = encode_pair("virus", "coronavirus", &vocab, 16).unwrap(); // len 6
        let batch = pad_batch(&[a, b], &vocab).unwrap();
        assert_eq!(batch.size, 2);
        assert_eq!(batch.seq_len, 6);
        assert_eq!(batch.row_ids(0), [2, 7, 3, 3, 0, 0]);
        assert_eq!(batch.row_mask(0).iter().map(|&m| m as usize).sum::<usize>(), 4);
        assert_eq!(batch.row_mask(1).iter().map(|&m| m as usize).sum::<usize>(), 6);
    }

    #[test]
    fn pad_batch_single_input_is_unchanged() {
        let vocab = toy_vocab();
        let a = encode_pair("virus", "treatment", &vocab, 16).unwrap();
        let batch = pad_batch(std::slice::from_ref(&a), &vocab).unwrap();
        assert_eq!(batch.token_ids, a.token_ids);
        assert!(batch.attention_mask.iter().all(|&m| m == 1));
    }

    #[test]
    fn pad_batch_rejects_empty_and_mixed_modes() {
        let vocab = toy_vocab();
        assert!(matches!(pad_batch(&[], &vocab), Err(Error::EmptyBatch)));
        let a = encode_pair("virus", "treatment", &vocab, 16).unwrap();
        let b = encode_single("virus", "treatment", &vocab, 16).unwrap();
        assert!(matches!(
            pad_batch(&[a, b], &vocab),
            Err(Error::MixedBatchModes)
        ));
    }
}
