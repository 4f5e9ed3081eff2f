use proptest::prelude::*;

use klr::cartan::{CartanDatum, WeylElement};
use klr::character::{character, shuffle_product, LPoly, QCharacter};
use klr::conv::convolution;
use klr::klr::{check_relations, Klr};
use klr::module::GradedModule;

fn word_char(rank: usize, w: &[u8], e: i64) -> QCharacter {
    let mut beta = vec![0; rank];
    for &l in w {
        beta[l as usize] += 1;
    }
    let mut c = QCharacter::zero(&beta);
    c.add_term(w.to_vec(), &LPoly::monomial(e, 1));
    c
}

fn words(rank: u8, max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..rank, 0..=max)
}

fn preset() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["A1", "A2", "B2", "A3"])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shuffle_is_associative(p in preset(), a in words(3, 3), b in words(3, 3), c in words(3, 2), e in -3i64..3) {
        let d = CartanDatum::preset(p).unwrap();
        let fix = |w: Vec<u8>| -> Vec<u8> { w.into_iter().map(|x| x % d.rank as u8).collect() };
        let (a, b, c) = (word_char(d.rank, &fix(a), e), word_char(d.rank, &fix(b), 0), word_char(d.rank, &fix(c), -e));
        let l = shuffle_product(&d, &shuffle_product(&d, &a, &b), &c);
        let r = shuffle_product(&d, &a, &shuffle_product(&d, &b, &c));
        prop_assert_eq!(l, r);
    }

    #[test]
    fn shuffle_unit_and_dimension(p in preset(), a in words(3, 4), b in words(3, 3)) {
        let d = CartanDatum::preset(p).unwrap();
        let fix = |w: Vec<u8>| -> Vec<u8> { w.into_iter().map(|x| x % d.rank as u8).collect() };
        let (a, b) = (fix(a), fix(b));
        let (ca, cb) = (word_char(d.rank, &a, 0), word_char(d.rank, &b, 0));
        prop_assert_eq!(shuffle_product(&d, &QCharacter::unit(d.rank), &ca), ca.clone());
        let binom = (1..=b.len()).fold(1i64, |acc, k| acc * (a.len() + k) as i64 / k as i64);
        prop_assert_eq!(shuffle_product(&d, &ca, &cb).total_dim(), binom);
    }

    #[test]
    fn letter_products_match_shuffles(p in prop::sample::select(vec!["A1", "A2", "B2"]), w in prop::collection::vec(0u8..2, 1..=4)) {
        let k = Klr::preset(p);
        let r = k.cartan.rank;
        let mut m = GradedModule::unit(r);
        let mut ch = QCharacter::unit(r);
        for &l in &w {
            let l = (l as usize) % r;
            let x = GradedModule::letter(r, l);
            ch = shuffle_product(&k.cartan, &ch, &character(&x));
            m = convolution(&k, &m, &x).unwrap();
        }
        prop_assert_eq!(character(&m), ch);
        prop_assert_eq!(m.dim(), (1..=w.len()).product::<usize>());
        prop_assert!(check_relations(&k, &m).unwrap().all_pass());
    }

    #[test]
    fn bruhat_criteria_agree(a in 0usize..24, b in 0usize..24) {
        let c = CartanDatum::preset("A3").unwrap();
        let g = c.weyl_group().unwrap();
        let (v, w) = (&g[a], &g[b]);
        let le = c.bruhat_le(v, w).unwrap();
        prop_assert_eq!(le, c.bruhat_le_subword(v, w));
        if le {
            prop_assert!(v.len() <= w.len());
            prop_assert_eq!(c.bruhat_le(w, v).unwrap(), v == w);
        }
    }

    #[test]
    fn weyl_action_preserves_the_form(p in preset(), x in prop::collection::vec(-2i64..3, 3), y in prop::collection::vec(-2i64..3, 3), word in prop::collection::vec(0usize..3, 0..5)) {
        let c = CartanDatum::preset(p).unwrap();
        let n = c.rank;
        let word: Vec<usize> = word.into_iter().map(|i| i % n).collect();
        let w = WeylElement::from_word(&c, &word);
        let (x, y) = (&x[..n], &y[..n]);
        let before = c.pair_weights(x, y).unwrap();
        let after = c.pair_weights(&c.weyl_act(&w, x), &c.weyl_act(&w, y)).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn reduced_words_act_alike(p in preset(), word in prop::collection::vec(0usize..3, 0..6)) {
        let c = CartanDatum::preset(p).unwrap();
        let word: Vec<usize> = word.into_iter().map(|i| i % c.rank).collect();
        let w = WeylElement::from_word(&c, &word);
        let rho = c.rho();
        for r in w.reduced_words(&c) {
            prop_assert_eq!(c.weyl_act(&WeylElement { word: r }, &rho), c.weyl_act(&w, &rho));
        }
    }
}
