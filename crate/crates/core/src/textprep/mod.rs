//! Tweet text to token lists.
//!
//! Stage order: lowercase (then NFC) → drop URLs → drop @-mentions and
//! standalone `rt` → non-letters to spaces → spelling correction (optional)
//! → whitespace split → stopwords → query keywords → POS filter (optional) →
//! Porter stemming (optional).

mod porter;
mod spell;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::ingest::TweetRecord;
use crate::par::Parallelism;

pub use porter::stem;
pub use spell::SpellDictionary;

pub const DEFAULT_QUERY_KEYWORDS: [&str; 5] =
    ["coronavirus", "koronavirus", "corona", "covid-19", "covid"];

const BUNDLED_STOPWORDS: [(&str, &str); 4] = [
    ("de", include_str!("../../data/stopwords/german.txt")),
    ("en", include_str!("../../data/stopwords/english.txt")),
    ("fr", include_str!("../../data/stopwords/french.txt")),
    ("nl", include_str!("../../data/stopwords/dutch.txt")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemmerKind {
    #[default]
    None,
    Porter,
}

/// Word → part-of-speech lexicon. Words absent from it always pass the filter.
#[derive(Debug, Clone, Default)]
pub struct PosLexicon {
    tags: BTreeMap<String, String>,
}

impl PosLexicon {
    pub fn new(entries: impl IntoIterator<Item = (String, String)>) -> Self {
        PosLexicon {
            tags: entries.into_iter().collect(),
        }
    }

    /// TSV `word<TAB>tag`.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        let mut tags = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((w, t)) = line.split_once('\t') else {
                return Err(Error::MalformedLine {
                    path: path.display().to_string(),
                    line: i + 1,
                    reason: "expected word<TAB>tag".into(),
                });
            };
            tags.insert(w.trim().to_lowercase(), t.trim().to_string());
        }
        Ok(PosLexicon { tags })
    }

    /// Nouns, verbs, adjectives and adverbs, in universal (NOUN, PROPN, VERB,
    /// ADJ, ADV) or Penn (NN*, VB*, JJ*, RB*) tags.
    pub fn keeps(&self, word: &str) -> bool {
        match self.tags.get(word) {
            None => true,
            Some(t) => {
                let t = t.to_ascii_uppercase();
                matches!(t.as_str(), "NOUN" | "PROPN" | "VERB" | "ADJ" | "ADV")
                    || ["NN", "VB", "JJ", "RB"].iter().any(|p| t.starts_with(p))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub stopword_lists: BTreeMap<String, BTreeSet<String>>,
    pub query_keywords: BTreeSet<String>,
    pub spell: Option<SpellDictionary>,
    pub pos: Option<PosLexicon>,
    pub stemmer: StemmerKind,
    stopwords: BTreeSet<String>,
    keywords: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        let lists = BUNDLED_STOPWORDS
            .iter()
            .map(|(lang, text)| {
                (
                    lang.to_string(),
                    text.lines()
                        .map(str::trim)
                        .filter(|w| !w.is_empty())
                        .map(str::to_string)
                        .collect(),
                )
            })
            .collect();
        PreprocessConfig::new(
            lists,
            DEFAULT_QUERY_KEYWORDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
    }
}

impl PreprocessConfig {
    pub fn new(
        stopword_lists: BTreeMap<String, BTreeSet<String>>,
        query_keywords: BTreeSet<String>,
    ) -> Self {
        let mut c = PreprocessConfig {
            stopword_lists,
            query_keywords,
            spell: None,
            pos: None,
            stemmer: StemmerKind::None,
            stopwords: BTreeSet::new(),
            keywords: BTreeSet::new(),
        };
        c.rebuild();
        c
    }

    /// Add words from a one-word-per-line file to a language's list.
    pub fn extend_stopwords(&mut self, lang: &str, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        let list = self.stopword_lists.entry(lang.to_string()).or_default();
        list.extend(
            text.lines()
                .map(str::trim)
                .filter(|w| !w.is_empty())
                .map(str::to_string),
        );
        self.rebuild();
        Ok(())
    }

    pub fn with_spell(mut self, dict: SpellDictionary) -> Self {
        self.spell = Some(dict);
        self
    }

    pub fn with_pos(mut self, lexicon: PosLexicon) -> Self {
        self.pos = Some(lexicon);
        self
    }

    pub fn with_stemmer(mut self, stemmer: StemmerKind) -> Self {
        self.stemmer = stemmer;
        self
    }

    // List entries such as "don't" or "covid-19" go through the same
    // character stages as tweet text so they match the tokens they become.
    fn rebuild(&mut self) {
        let norm = |set: &BTreeSet<String>| -> BTreeSet<String> {
            set.iter()
                .flat_map(|w| {
                    letters_only(&lowercase(w))
                        .split_whitespace()
                        .map(str::to_string)
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        self.stopwords = self.stopword_lists.values().flat_map(|s| norm(s)).collect();
        self.keywords = norm(&self.query_keywords);
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn is_query_keyword(&self, token: &str) -> bool {
        self.keywords.contains(token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedTweet {
    pub tweet_id: String,
    pub tokens: Vec<String>,
}

fn lowercase(text: &str) -> String {
    text.to_lowercase().nfc().collect()
}

fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        let hit = ["http://", "https://", "www."]
            .iter()
            .filter_map(|p| rest.find(p))
            .min();
        let Some(at) = hit else {
            out.push_str(rest);
            return out;
        };
        out.push_str(&rest[..at]);
        out.push(' ');
        let tail = &rest[at..];
        let end = tail.find(char::is_whitespace).unwrap_or(tail.len());
        rest = &tail[end..];
    }
}

fn is_handle_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn strip_mentions_and_rt(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '@' {
            while chars.peek().is_some_and(|c| is_handle_char(*c)) {
                chars.next();
            }
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    // "rt" as a word of its own, however it is delimited ("rt:", "(rt)")
    let mut cleaned = String::with_capacity(out.len());
    let mut word = String::new();
    let flush = |word: &mut String, cleaned: &mut String| {
        if word != "rt" {
            cleaned.push_str(word);
        } else {
            cleaned.push(' ');
        }
        word.clear();
    };
    for c in out.chars() {
        if c.is_alphabetic() {
            word.push(c);
        } else {
            flush(&mut word, &mut cleaned);
            cleaned.push(c);
        }
    }
    flush(&mut word, &mut cleaned);
    cleaned
}

fn letters_only(text: &str) -> String {
    text.chars()
        .map(|c| {
            if c.is_alphabetic() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect()
}

/// Run the full pipeline on one text.
pub fn preprocess(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let text = lowercase(text);
    let text = strip_urls(&text);
    let text = strip_mentions_and_rt(&text);
    let text = letters_only(&text);
    text.split_whitespace()
        .map(|w| match &config.spell {
            Some(d) => d.correct(w),
            None => w.to_string(),
        })
        .filter(|w| !config.is_stopword(w))
        .filter(|w| !config.is_query_keyword(w))
        .filter(|w| config.pos.as_ref().is_none_or(|p| p.keeps(w)))
        .map(|w| match config.stemmer {
            StemmerKind::None => w,
            StemmerKind::Porter => stem(&w),
        })
        .collect()
}

pub fn preprocess_tweets(
    tweets: &[TweetRecord],
    config: &PreprocessConfig,
    par: Parallelism,
) -> Vec<TokenizedTweet> {
    par.map(tweets, |t| TokenizedTweet {
        tweet_id: t.tweet_id.clone(),
        tokens: preprocess(&t.full_text, config),
    })
}
