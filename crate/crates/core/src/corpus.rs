//! Simple modules of small height, generated as iterated heads `S ∇ L(i)`.
//!
//! Every simple `L` of height `n+1` is a quotient of `S ∘ L(i)` for some simple `S` of height `n`,
//! and `S ∘ L(i)` has a simple head because `L(i)` is real, so the recursion reaches all simples.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::character::{character, QCharacter};
use crate::klr::Klr;
use crate::module::GradedModule;
use crate::rmatrix::{head_product, RError};

#[derive(Clone, Debug)]
pub struct Corpus {
    /// simples sorted by height, then by character
    pub modules: Vec<GradedModule>,
}

fn char_key(c: &QCharacter) -> String {
    c.to_json().to_string()
}

impl Corpus {
    /// All self-dual simples of height `1..=max_height`, deduplicated by character.
    pub fn generate(klr: &Klr, max_height: usize) -> Result<Corpus, RError> {
        let rank = klr.rank();
        let letters: Vec<GradedModule> = (0..rank)
            .map(|i| {
                let mut l = GradedModule::letter(rank, i);
                l.name = format!("L({})", i + 1);
                l
            })
            .collect();
        let mut all: Vec<GradedModule> = Vec::new();
        let mut layer: Vec<GradedModule> = vec![GradedModule::unit(rank)];
        for _ in 0..max_height {
            let jobs: Vec<(&GradedModule, &GradedModule)> = layer.iter().flat_map(|s| letters.iter().map(move |l| (s, l))).collect();
            let heads: Vec<Result<GradedModule, RError>> = jobs.par_iter().map(|(s, l)| head_product(klr, s, l)).collect();
            let mut seen: BTreeMap<String, GradedModule> = BTreeMap::new();
            for (h, (s, l)) in heads.into_iter().zip(&jobs) {
                let mut h = h?;
                h.name = if s.height() == 0 { l.name.clone() } else { format!("{}∇{}", s.name, l.name) };
                seen.entry(char_key(&character(&h))).or_insert(h);
            }
            layer = seen.into_values().collect();
            all.extend(layer.iter().cloned());
        }
        Ok(Corpus { modules: all })
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn by_height(&self, h: usize) -> impl Iterator<Item = &GradedModule> {
        self.modules.iter().filter(move |m| m.height() == h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radical::is_simple;

    #[test]
    fn a1_corpus_is_divided_powers() {
        let c = Corpus::generate(&Klr::preset("A1"), 4).unwrap();
        let dims: Vec<usize> = c.modules.iter().map(|m| m.dim()).collect();
        assert_eq!(dims, vec![1, 2, 6, 24]);
    }

    #[test]
    fn a2_corpus_small_heights() {
        let c = Corpus::generate(&Klr::preset("A2"), 3).unwrap();
        assert!(c.modules.iter().all(is_simple));
        // height 1: two letters; height 2: L(11), L(22), L(12), L(21)
        assert_eq!(c.by_height(1).count(), 2);
        assert_eq!(c.by_height(2).count(), 4);
        // Kostant partition counts
        assert_eq!(c.by_height(3).count(), 6);
    }
}
