//! Brute-force reference for segmentation: every way of cutting a form into
//! five contiguous pieces, kept when each piece is in its table.

use qamar_core::morph::{AffixSlot, LinguisticDb, MorphAnalysis, PartOfSpeech};
use qamar_core::NormalizeConfig;

pub const ALPHABET: [char; 6] = ['ا', 'ل', 'و', 'ب', 'ت', 'ه'];

/// Small database over [`ALPHABET`] with overlapping affixes and a stem
/// carrying two entries.
pub fn toy_db() -> LinguisticDb {
    let mut b = LinguisticDb::builder(NormalizeConfig::default());
    b.affixes(AffixSlot::Proclitic, &["و", "ب", "وب"])
        .affixes(AffixSlot::Prefix, &["ال", "ت", "ا"])
        .affixes(AffixSlot::Suffix, &["ت", "ات", "ا", "تا"])
        .affixes(AffixSlot::Enclitic, &["ه", "ها", "هو"]);
    for stem in [
        "ب", "لب", "ات", "هل", "وت", "ال", "تاب", "ابو", "لوب", "ه", "ت",
    ] {
        b.word(stem, stem, stem, PartOfSpeech::Noun);
    }
    b.word("بت", "بت", "بت", PartOfSpeech::Noun);
    b.word("بت", "بات", "بيت", PartOfSpeech::Verb);
    b.build()
}

pub fn brute_segment(db: &LinguisticDb, form: &str) -> Vec<MorphAnalysis> {
    // byte offsets of every char boundary
    let cuts: Vec<usize> = form
        .char_indices()
        .map(|(i, _)| i)
        .chain([form.len()])
        .collect();
    let n = cuts.len() - 1;
    let mut out = Vec::new();
    for i in 0..=n {
        let proclitic = &form[..cuts[i]];
        if !db.table(AffixSlot::Proclitic).contains(proclitic) {
            continue;
        }
        for j in i..=n {
            let prefix = &form[cuts[i]..cuts[j]];
            if !db.table(AffixSlot::Prefix).contains(prefix) {
                continue;
            }
            for m in j + 1..=n {
                let enclitic = &form[cuts[m]..];
                if !db.table(AffixSlot::Enclitic).contains(enclitic) {
                    continue;
                }
                for l in j + 1..=m {
                    let suffix = &form[cuts[l]..cuts[m]];
                    if !db.table(AffixSlot::Suffix).contains(suffix) {
                        continue;
                    }
                    let stem = &form[cuts[j]..cuts[l]];
                    for entry in db.entries(stem) {
                        out.push(MorphAnalysis {
                            surface: form.to_string(),
                            proclitic: proclitic.to_string(),
                            prefix: prefix.to_string(),
                            stem: stem.to_string(),
                            suffix: suffix.to_string(),
                            enclitic: enclitic.to_string(),
                            entry: entry.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Every string over `alphabet` of length 1 to `max_len`, shortest first.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
