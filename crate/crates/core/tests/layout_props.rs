mod common;

use foldscope_core::fold::{build_layout, FoldVerb};
use foldscope_core::{FoldError, FoldState, LayoutConfig, LayoutPos, LeafKind, RegionState, SubsectionState};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::sample::Index;

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

const VERBS: [FoldVerb; 6] = [
    FoldVerb::Open,
    FoldVerb::Close,
    FoldVerb::Compress,
    FoldVerb::Uncompress,
    FoldVerb::OpenSub,
    FoldVerb::CloseSub,
];

type Op = (usize, Index, Index);

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec((0usize..6, any::<Index>(), any::<Index>()), 0..25)
}

/// Apply ops, skipping the ones the state machine refuses.
fn fold(chrom: &foldscope_core::Chromosome, ops: &[Op]) -> FoldState {
    let mut state = FoldState::new(chrom.id.clone(), LayoutConfig::default());
    for (v, ri, si) in ops {
        let region = ri.get(&chrom.regions);
        let verb = VERBS[*v];
        let target = match verb {
            FoldVerb::OpenSub | FoldVerb::CloseSub => si.get(&region.subsections).name.clone(),
            _ => region.name.clone(),
        };
        match state.apply(chrom, verb, &target) {
            Ok(next) => state = next,
            Err(FoldError::ParentNotOpen { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
    state
}

/// Leaf lengths computed straight from the region/subsection states under
/// the default configuration.
fn expected_total(chrom: &foldscope_core::Chromosome, state: &FoldState) -> BigRational {
    let bpu = int(1_000_000);
    let mut total = int(0);
    for r in &chrom.regions {
        let g = int(r.span.len());
        total += match state.region_state(&r.name) {
            RegionState::Closed => g / &bpu,
            RegionState::Compressed => std::cmp::max(frac(1, 2), g / (&bpu * int(10))),
            RegionState::Open => r
                .subsections
                .iter()
                .map(|s| match state.subsection_state(&s.name) {
                    SubsectionState::Closed => std::cmp::max(frac(1, 5), int(s.span.len()) / &bpu),
                    SubsectionState::Open => int(u64::from(s.gene_count.max(1))),
                })
                .fold(int(0), |a, b| a + b),
        };
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn leaves_tile_genome_and_layout(rows in common::rows(), ops in ops(), pick in any::<Index>()) {
        let a = rows.build();
        let chrom = pick.get(&a.chromosomes);
        let state = fold(chrom, &ops);
        let map = build_layout(&a, &state).unwrap();
        let mut g = 0;
        let mut l = LayoutPos::zero();
        for leaf in &map.leaves {
            prop_assert_eq!(leaf.genomic.start, g);
            prop_assert!(leaf.genomic.end > leaf.genomic.start);
            prop_assert_eq!(&leaf.layout_start, &l);
            prop_assert!(leaf.layout_end > leaf.layout_start);
            g = leaf.genomic.end;
            l = leaf.layout_end.clone();
        }
        prop_assert_eq!(g, chrom.length_bp);
        prop_assert_eq!(&l, &map.total_length);
        prop_assert_eq!(map.total_length.0.clone(), expected_total(chrom, &state));
    }

    #[test]
    fn leaf_kinds_follow_state(rows in common::rows(), ops in ops(), pick in any::<Index>()) {
        let a = rows.build();
        let chrom = pick.get(&a.chromosomes);
        let state = fold(chrom, &ops);
        let map = build_layout(&a, &state).unwrap();
        for leaf in &map.leaves {
            let expected = match (state.region_state(&leaf.region), &leaf.subsection) {
                (RegionState::Closed, None) => LeafKind::ClosedRegion,
                (RegionState::Compressed, None) => LeafKind::CompressedRegion,
                (RegionState::Open, Some(s)) => match state.subsection_state(s) {
                    SubsectionState::Closed => LeafKind::ClosedSubsection,
                    SubsectionState::Open => LeafKind::OpenSubsection,
                },
                other => panic!("leaf {} in state {other:?}", leaf.node()),
            };
            prop_assert_eq!(leaf.kind, expected);
            if leaf.kind == LeafKind::OpenSubsection {
                let genes = chrom.genes_starting_in(leaf.genomic);
                prop_assert_eq!(leaf.rows.len(), genes.len());
                for (row, g) in leaf.rows.iter().zip(genes) {
                    prop_assert_eq!(&row.symbol, &g.symbol);
                }
            } else {
                prop_assert!(leaf.rows.is_empty());
            }
        }
        for (name, s) in &state.subsection_states {
            let (region, _) = chrom.subsection(name).unwrap();
            prop_assert_eq!(*s, SubsectionState::Open);
            prop_assert_eq!(state.region_state(&region.name), RegionState::Open);
        }
    }

    #[test]
    fn mapping_is_monotone_and_invertible(
        rows in common::rows(),
        ops in ops(),
        pick in any::<Index>(),
        probes in prop::collection::vec(any::<Index>(), 1..40),
    ) {
        let a = rows.build();
        let chrom = pick.get(&a.chromosomes);
        let map = build_layout(&a, &fold(chrom, &ops)).unwrap();
        let len = chrom.length_bp;
        let mut xs: Vec<u64> = probes.iter().map(|i| i.index(len as usize) as u64).collect();
        for leaf in &map.leaves {
            xs.push(leaf.genomic.start);
            xs.push(leaf.genomic.end - 1);
        }
        xs.push(len - 1);
        xs.sort_unstable();
        xs.dedup();
        let ys: Vec<LayoutPos> = xs.iter().map(|&x| map.to_layout(x).unwrap()).collect();
        for w in ys.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert_eq!(map.from_layout(y).unwrap(), *x);
        }
        prop_assert!(map.to_layout(len).is_err());
        prop_assert!(map.from_layout(&map.total_length).is_err());
    }

    #[test]
    fn all_closed_is_identity_scaled(rows in common::rows(), pick in any::<Index>(), probes in prop::collection::vec(any::<Index>(), 1..40)) {
        let a = rows.build();
        let chrom = pick.get(&a.chromosomes);
        let map = build_layout(&a, &FoldState::new(chrom.id.clone(), LayoutConfig::default())).unwrap();
        prop_assert_eq!(map.total_length.0.clone(), int(chrom.length_bp) / int(1_000_000));
        for p in probes {
            let x = p.index(chrom.length_bp as usize) as u64;
            let y = map.to_layout(x).unwrap();
            prop_assert_eq!(y.0.clone(), int(x) / int(1_000_000));
            prop_assert_eq!(y.to_f64(), x as f64 / 1e6);
            prop_assert_eq!(map.from_layout_f64(x as f64 / 1e6).unwrap(), x);
        }
    }

    #[test]
    fn verbs_are_reversible(rows in common::rows(), ops in ops(), pick in any::<Index>(), ri in any::<Index>()) {
        let a = rows.build();
        let chrom = pick.get(&a.chromosomes);
        let state = fold(chrom, &ops);
        let region = ri.get(&chrom.regions);
        if state.region_state(&region.name) == RegionState::Closed {
            let opened = state.open_region(chrom, &region.name).unwrap();
            prop_assert_eq!(&opened.close_region(chrom, &region.name).unwrap(), &state);
            let squeezed = state.compress_region(chrom, &region.name).unwrap();
            prop_assert_eq!(&squeezed.uncompress_region(chrom, &region.name).unwrap(), &state);
        }
        let text = serde_json::to_string(&state).unwrap();
        let back: FoldState = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &state);
        prop_assert_eq!(build_layout(&a, &back).unwrap(), build_layout(&a, &state).unwrap());
    }
}

#[test]
fn grch38_chromosome_11_all_closed_round_trip_is_exact() {
    let a = common::grch38();
    let chrom = a.chromosome("11").unwrap();
    let map = build_layout(&a, &FoldState::new("11", LayoutConfig::default())).unwrap();
    let step = 9_973;
    let mut x = 0;
    while x < chrom.length_bp {
        let y = map.to_layout(x).unwrap();
        assert_eq!(y.to_f64(), x as f64 / 1e6, "at {x}");
        assert_eq!(map.from_layout(&y).unwrap(), x);
        x += step;
    }
}

#[test]
fn scripted_folds_give_expected_lengths() {
    let a = common::grch38();
    let chrom = a.chromosome("4").unwrap();
    let first = &chrom.regions[0];
    let state = FoldState::new("4", LayoutConfig::default());
    let base = build_layout(&a, &state).unwrap().total_length.0;
    let squeezed = state.compress_region(chrom, &first.name).unwrap();
    let after = build_layout(&a, &squeezed).unwrap().total_length.0;
    let g = int(first.span.len());
    let expected = base - &g / int(1_000_000) + std::cmp::max(frac(1, 2), g / int(10_000_000));
    assert_eq!(after, expected);
}
