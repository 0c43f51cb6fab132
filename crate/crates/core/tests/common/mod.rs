#![allow(dead_code)]

use std::path::PathBuf;

use foldscope_core::{
    build_assembly, ingest, CytobandRow, GeneRow, GenomeAssembly, ModelConfig, ParseMode, PhenotypeRow, Stain,
    Strand,
};
use proptest::prelude::*;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/grch38")
}

pub fn grch38() -> GenomeAssembly {
    let dir = data_dir();
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    let bands = ingest::parse_cytobands(&read("cytobands.tsv"), ParseMode::Strict).unwrap();
    let genes = ingest::parse_gene_table(&read("genes.tsv"), ParseMode::Strict).unwrap();
    let phen = ingest::parse_phenotype_table(&read("phenotypes.csv"), ParseMode::Strict).unwrap();
    build_assembly(
        &bands.rows,
        &genes.rows,
        &phen.rows,
        &ModelConfig {
            name: "GRCh38".into(),
            ..ModelConfig::default()
        },
    )
    .unwrap()
}

/// Raw rows for a randomly shaped assembly.
#[derive(Debug, Clone)]
pub struct Rows {
    pub bands: Vec<CytobandRow>,
    pub genes: Vec<GeneRow>,
    pub phenotypes: Vec<PhenotypeRow>,
}

impl Rows {
    pub fn build(&self) -> GenomeAssembly {
        build_assembly(&self.bands, &self.genes, &self.phenotypes, &ModelConfig::default()).unwrap()
    }
}

const STAINS: [Stain; 4] = [Stain::Gneg, Stain::Gpos25, Stain::Gpos50, Stain::Gvar];

/// One region: its sub-band lengths (a single entry means no sub-bands).
fn region_shape() -> impl Strategy<Value = Vec<u64>> {
    prop_oneof![
        (1u64..12_000_000).prop_map(|l| vec![l]),
        prop::collection::vec(1u64..3_000_000, 2..4),
        prop::collection::vec(1u64..50, 2..3),
    ]
}

fn chromosome_bands(id: String) -> impl Strategy<Value = Vec<CytobandRow>> {
    (
        prop::collection::vec(region_shape(), 0..3),
        prop::collection::vec(region_shape(), 1..4),
        any::<u64>(),
    )
        .prop_map(move |(p, q, stain_seed)| {
            let mut rows = Vec::new();
            let mut cursor = 0;
            let mut emit = |name: String, lens: &[u64], k: usize| {
                for (j, len) in lens.iter().enumerate() {
                    let band_name = if lens.len() == 1 {
                        name.clone()
                    } else {
                        format!("{name}.{}", j + 1)
                    };
                    let stain = STAINS[((stain_seed >> ((k + j) % 32)) as usize) % STAINS.len()];
                    rows.push(CytobandRow {
                        chromosome: id.clone(),
                        start_bp: cursor,
                        end_bp: cursor + len,
                        band_name,
                        stain,
                    });
                    cursor += len;
                }
            };
            for (i, lens) in p.iter().enumerate() {
                emit(format!("p{}", 11 + p.len() - 1 - i), lens, i);
            }
            for (i, lens) in q.iter().enumerate() {
                emit(format!("q{}", 11 + i), lens, i + 7);
            }
            rows
        })
}

fn gene_rows(id: String, length: u64, n: usize) -> impl Strategy<Value = Vec<GeneRow>> {
    prop::collection::vec((0..length, 1u64..80_000, any::<bool>()), n).prop_map(move |raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (start, len, plus))| GeneRow {
                chromosome: id.clone(),
                start_bp: start,
                end_bp: (start + len).min(length),
                strand: if plus { Strand::Plus } else { Strand::Minus },
                symbol: format!("G{id}X{i}"),
            })
            .collect()
    })
}

fn chromosome_rows(id: String) -> impl Strategy<Value = (Vec<CytobandRow>, Vec<GeneRow>)> {
    (chromosome_bands(id.clone()), 0usize..60).prop_flat_map(move |(bands, n)| {
        let length = bands.last().unwrap().end_bp;
        (Just(bands), gene_rows(id.clone(), length, n))
    })
}

pub fn rows() -> impl Strategy<Value = Rows> {
    let ids = ["1", "2", "X"];
    (1usize..=3)
        .prop_flat_map(move |k| {
            ids[..k]
                .iter()
                .map(|id| chromosome_rows(id.to_string()))
                .collect::<Vec<_>>()
        })
        .prop_flat_map(|chroms| {
            let mut bands = Vec::new();
            let mut genes = Vec::new();
            for (b, g) in chroms {
                bands.extend(b);
                genes.extend(g);
            }
            let symbols: Vec<String> = genes.iter().map(|g| g.symbol.clone()).collect();
            let picks = prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 0..12), 0..5);
            (Just(bands), Just(genes), Just(symbols), picks)
        })
        .prop_map(|(bands, genes, symbols, picks)| {
            let mut phenotypes = Vec::new();
            if !symbols.is_empty() {
                for (p, idx) in picks.iter().enumerate() {
                    let mut chosen: Vec<&String> = idx.iter().map(|i| i.get(&symbols)).collect();
                    chosen.sort();
                    chosen.dedup();
                    for s in chosen {
                        phenotypes.push(PhenotypeRow {
                            phenotype: format!("P{p}"),
                            color: format!("#{:02X}0000", p * 40),
                            symbol: s.clone(),
                        });
                    }
                }
            }
            Rows {
                bands,
                genes,
                phenotypes,
            }
        })
}
