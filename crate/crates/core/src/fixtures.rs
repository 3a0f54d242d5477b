//! Built-in phoneme inventories shaped like the reference corpus: 82
//! homographs, of which 71 have two phonemes, 10 have three and one has
//! four. Useful for synthetic experiments when the real corpus is not at
//! hand.
//!
//! The source table lists `کشت` twice with different phoneme pairs; the
//! second entry is keyed `کشت-2` so that both survive as separate
//! homographs.

use std::collections::BTreeMap;

use crate::embeddings::SynthInventory;

const TABLE: &str = include_str!("../fixtures/corpus_inventory.tsv");

/// Inventories with the reference per-phoneme sentence counts, in file
/// order.
pub fn corpus_inventories() -> Vec<SynthInventory> {
    TABLE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut cols = line.split('\t');
            let homograph = cols.next().expect("homograph column").to_string();
            let phonemes = cols.next().expect("phonemes column").split(',');
            let counts = cols.next().expect("counts column").split(',');
            let counts = phonemes
                .zip(counts)
                .map(|(p, c)| (p.to_string(), c.parse().expect("numeric count")))
                .collect::<BTreeMap<String, usize>>();
            SynthInventory { homograph, counts }
        })
        .collect()
}

/// The same homographs and phonemes with `per_phoneme` records each.
pub fn uniform_inventories(per_phoneme: usize) -> Vec<SynthInventory> {
    corpus_inventories()
        .into_iter()
        .map(|mut inv| {
            inv.counts.values_mut().for_each(|c| *c = per_phoneme);
            inv
        })
        .collect()
}
