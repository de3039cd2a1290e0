//! Arabic text normalization and whitespace tokenization.
//!
//! Every lookup key in the linguistic and lexical databases goes through
//! [`NormalizeConfig::normalize`], so the same configuration must be used for
//! loading and for querying. Tokens keep the text the user typed alongside the
//! canonical form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kv::{self, KvError};

const TATWEEL: char = '\u{0640}';
const BARE_ALEF: char = '\u{0627}';
const ALEF_MAQSURA: char = '\u{0649}';
const YA: char = '\u{064A}';
const TA_MARBUTA: char = '\u{0629}';
const HA: char = '\u{0647}';

/// Which folds [`NormalizeConfig::normalize`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeConfig {
    pub strip_diacritics: bool,
    pub strip_tatweel: bool,
    pub fold_alef: bool,
    pub fold_ya: bool,
    pub fold_ta_marbuta: bool,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self {
            strip_diacritics: true,
            strip_tatweel: true,
            fold_alef: true,
            fold_ya: false,
            fold_ta_marbuta: false,
        }
    }
}

/// Harakat, tanwin, shadda, sukun and the superscript alef.
pub fn is_diacritic(ch: char) -> bool {
    matches!(ch, '\u{064B}'..='\u{0652}' | '\u{0670}')
}

/// Alef with hamza above, hamza below, or madda.
pub fn is_alef_variant(ch: char) -> bool {
    matches!(ch, '\u{0622}' | '\u{0623}' | '\u{0625}')
}

impl NormalizeConfig {
    /// Reads a `key=value` file with the keys `strip_diacritics`,
    /// `strip_tatweel`, `fold_alef`, `fold_ya` and `fold_ta_marbuta`.
    /// Keys that are absent keep their default.
    pub fn from_file(path: &Path) -> Result<Self, KvError> {
        let pairs = kv::read_file(path)?;
        let mut config = Self::default();
        for pair in &pairs {
            config
                .set(&pair.key, &pair.value)
                .map_err(|message| KvError::Invalid {
                    path: path.to_path_buf(),
                    line: pair.line,
                    message,
                })?;
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let flag = kv::parse_bool(value)?;
        match key {
            "strip_diacritics" => self.strip_diacritics = flag,
            "strip_tatweel" => self.strip_tatweel = flag,
            "fold_alef" => self.fold_alef = flag,
            "fold_ya" => self.fold_ya = flag,
            "fold_ta_marbuta" => self.fold_ta_marbuta = flag,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        format!(
            "strip_diacritics={}\nstrip_tatweel={}\nfold_alef={}\nfold_ya={}\nfold_ta_marbuta={}\n",
            self.strip_diacritics,
            self.strip_tatweel,
            self.fold_alef,
            self.fold_ya,
            self.fold_ta_marbuta
        )
    }

    /// Maps a single character to its canonical form, or `None` when the
    /// character is dropped.
    fn fold(&self, ch: char) -> Option<char> {
        if self.strip_diacritics && is_diacritic(ch) {
            return None;
        }
        if self.strip_tatweel && ch == TATWEEL {
            return None;
        }
        if self.fold_alef && is_alef_variant(ch) {
            return Some(BARE_ALEF);
        }
        if self.fold_ya && ch == ALEF_MAQSURA {
            return Some(YA);
        }
        if self.fold_ta_marbuta && ch == TA_MARBUTA {
            return Some(HA);
        }
        Some(ch)
    }

    /// Canonical matching form of `text`. Non-Arabic characters pass through.
    pub fn normalize(&self, text: &str) -> String {
        text.chars().filter_map(|ch| self.fold(ch)).collect()
    }

    /// Splits on whitespace and trims punctuation from both token edges.
    /// Runs made only of punctuation produce no token.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        text.split_whitespace()
            .map(|run| run.trim_matches(is_punctuation))
            .filter(|surface| !surface.is_empty())
            .enumerate()
            .map(|(position, surface)| Token {
                surface: surface.to_string(),
                normalized: self.normalize(surface),
                position,
            })
            .collect()
    }
}

/// A whitespace-delimited form from a query or document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    /// Text as typed, punctuation trimmed.
    pub surface: String,
    /// Canonical matching form; empty only when the surface was all diacritics.
    pub normalized: String,
    pub position: usize,
}

/// ASCII punctuation plus the Arabic and general punctuation that shows up
/// around words in queries.
pub fn is_punctuation(ch: char) -> bool {
    ch.is_ascii_punctuation()
        || matches!(
            ch,
            '\u{060C}' // arabic comma
                | '\u{061B}' // arabic semicolon
                | '\u{061F}' // arabic question mark
                | '\u{066A}'..='\u{066D}'
                | '\u{06D4}'
                | '\u{00AB}'
                | '\u{00BB}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
        )
}

/// [`NormalizeConfig::normalize`] with the default configuration.
pub fn normalize_text(text: &str) -> String {
    NormalizeConfig::default().normalize(text)
}

/// [`NormalizeConfig::tokenize`] with the default configuration.
pub fn tokenize(text: &str) -> Vec<Token> {
    NormalizeConfig::default().tokenize(text)
}
