mod common;

use std::collections::BTreeSet;

use foldscope_core::model::quintile_edges;
use foldscope_core::{ingest, GenomeAssembly, NodeRef, ParseMode};
use proptest::prelude::*;

/// Nearest-rank percentile straight from its definition.
fn nearest_rank(sorted: &[u32], pct: usize) -> u32 {
    let n = sorted.len();
    let mut rank = 1;
    while rank * 100 < pct * n {
        rank += 1;
    }
    sorted[rank - 1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn build_is_deterministic_and_valid(rows in common::rows()) {
        let a = rows.build();
        prop_assert_eq!(a.validate(), Ok(()));
        prop_assert_eq!(&rows.build(), &a);
        let back = GenomeAssembly::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(&back, &a);
    }

    #[test]
    fn counts_match_brute_force(rows in common::rows()) {
        let a = rows.build();
        for c in &a.chromosomes {
            for r in &c.regions {
                let n = rows.genes.iter().filter(|g| g.chromosome == c.id && r.span.contains(g.start_bp)).count();
                prop_assert_eq!(r.gene_count as usize, n);
                let sub_total: u32 = r.subsections.iter().map(|s| s.gene_count).sum();
                prop_assert_eq!(sub_total, r.gene_count);
            }
        }
        prop_assert_eq!(a.total_genes(), rows.genes.len());
    }

    #[test]
    fn region_markers_are_union_of_gene_markers(rows in common::rows()) {
        let a = rows.build();
        for c in &a.chromosomes {
            for r in &c.regions {
                let union: BTreeSet<String> = c
                    .genes
                    .iter()
                    .filter(|g| r.span.contains(g.start_bp))
                    .flat_map(|g| a.markers(NodeRef::Gene(g)))
                    .collect();
                prop_assert_eq!(&a.markers(NodeRef::Region(c, r)), &union);
                let sub_union: BTreeSet<String> = r
                    .subsections
                    .iter()
                    .flat_map(|s| a.markers(NodeRef::Subsection(c, s)))
                    .collect();
                prop_assert_eq!(&sub_union, &union);
            }
            for g in &c.genes {
                let expected: BTreeSet<String> = rows
                    .phenotypes
                    .iter()
                    .filter(|p| p.symbol == g.symbol)
                    .map(|p| p.phenotype.clone())
                    .collect();
                prop_assert_eq!(a.gene_markers(g), expected);
            }
        }
    }

    #[test]
    fn bins_are_monotone(rows in common::rows(), x in 0u32..200, y in 0u32..200) {
        let a = rows.build();
        let (lo, hi) = (x.min(y), x.max(y));
        prop_assert!(a.gene_count_bin(lo) <= a.gene_count_bin(hi));
        prop_assert_eq!(a.gene_count_bin(0), 0);
        prop_assert!(a.gene_count_bin(hi) <= 5);
    }

    #[test]
    fn quintile_edges_match_definition(counts in prop::collection::vec(0u32..60, 0..80)) {
        let edges = quintile_edges(counts.iter().copied());
        prop_assert_eq!(edges[0], 0);
        let mut nonzero: Vec<u32> = counts.iter().copied().filter(|&c| c > 0).collect();
        nonzero.sort_unstable();
        let mut prev = 0;
        for k in 1..5 {
            let q = if nonzero.is_empty() { 0 } else { nearest_rank(&nonzero, 20 * k) };
            let expected = q.max(prev + 1);
            prop_assert_eq!(edges[k], expected);
            prev = expected;
        }
    }

    #[test]
    fn tables_round_trip(rows in common::rows()) {
        let bands = ingest::parse_cytobands(&ingest::write_cytobands(&rows.bands), ParseMode::Strict).unwrap();
        prop_assert_eq!(&bands.rows, &rows.bands);
        let genes = ingest::parse_gene_table(&ingest::write_gene_table(&rows.genes), ParseMode::Strict).unwrap();
        prop_assert_eq!(&genes.rows, &rows.genes);
        let phen = ingest::parse_phenotype_table(&ingest::write_phenotype_table(&rows.phenotypes), ParseMode::Strict).unwrap();
        prop_assert_eq!(&phen.rows, &rows.phenotypes);
    }
}

#[test]
fn grch38_fixture_shape() {
    let a = common::grch38();
    assert_eq!(a.validate(), Ok(()));
    let ids: Vec<&str> = a.chromosomes.iter().map(|c| c.id.as_str()).collect();
    let mut expected: Vec<String> = (1..=22).map(|i| i.to_string()).collect();
    expected.extend(["X".to_string(), "Y".to_string()]);
    assert_eq!(ids, expected);
    let c11 = a.chromosome("11").unwrap();
    let c4 = a.chromosome("4").unwrap();
    assert_eq!(c11.length_bp, 135_086_622);
    assert_eq!(c4.length_bp, 190_214_555);
    assert!(c11.gene_count() > c4.gene_count());
    for c in &a.chromosomes {
        assert!(c.centromere.len() > 0, "chr{} has no centromere", c.id);
        assert!(c.arms[0].span.end == c.arms[1].span.start);
    }
    assert_eq!(a.phenotypes.len(), 3);
}
