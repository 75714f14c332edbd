use std::collections::BTreeSet;
use std::path::Path;

use hcnlda::data::{apply_mask, normalize_name, parse_associations, EntityKind, FoldMask};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parse(text: &str) -> hcnlda::data::AssociationMatrix {
    parse_associations(text.as_bytes(), Path::new("ld.tsv"), EntityKind::LncRna, EntityKind::Disease).unwrap()
}

fn lines_for(pairs: &[(usize, usize)]) -> Vec<String> {
    pairs.iter().map(|(l, d)| format!("lnc{l}\tdis{d}")).collect()
}

fn name_pairs(m: &hcnlda::data::AssociationMatrix) -> BTreeSet<(String, String)> {
    m.positives()
        .into_iter()
        .map(|(i, j)| (normalize_name(m.rows().name(i)), normalize_name(m.cols().name(j))))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ones_count_distinct_pairs_and_ignore_line_order(seed in any::<u64>(), n in 1usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|_| (rng.gen_range(0..15), rng.gen_range(0..12))).collect();
        let distinct: BTreeSet<_> = pairs.iter().copied().collect();
        let a = parse(&lines_for(&pairs).join("\n"));
        prop_assert_eq!(a.count_ones(), distinct.len());
        pairs.shuffle(&mut rng);
        let mut lines = lines_for(&pairs);
        // case and padding differences must not create new names
        if let Some(first) = lines.first_mut() {
            *first = format!("  {}  ", first.to_uppercase());
        }
        let b = parse(&lines.join("\n"));
        prop_assert_eq!(b.count_ones(), distinct.len());
        prop_assert_eq!(name_pairs(&a), name_pairs(&b));
    }
}

#[test]
fn table_sized_file_and_one_fold_mask() {
    let mut rng = ChaCha8Rng::seed_from_u64(2697);
    // a diagonal sweep names every lncRNA and disease, the rest is random
    let mut chosen: BTreeSet<(usize, usize)> = (0..412).map(|d| (d % 240, d)).collect();
    let mut rest: Vec<(usize, usize)> = (0..240).flat_map(|l| (0..412).map(move |d| (l, d))).collect();
    rest.shuffle(&mut rng);
    for p in rest {
        if chosen.len() == 2697 {
            break;
        }
        chosen.insert(p);
    }
    let mut pairs: Vec<(usize, usize)> = chosen.into_iter().collect();
    pairs.shuffle(&mut rng);
    let ld = parse(&lines_for(&pairs).join("\n"));
    assert_eq!(ld.shape(), (240, 412));
    assert_eq!(ld.count_ones(), 2697);
    let mask = FoldMask::new(0, ld.positives().into_iter().step_by(5).take(539));
    assert_eq!(mask.len(), 539);
    assert_eq!(apply_mask(&ld, &mask).unwrap().count_ones(), 2158);
}
