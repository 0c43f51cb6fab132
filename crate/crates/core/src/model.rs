//! Immutable genome assembly model.
//!
//! A [`GenomeAssembly`] is built once from parsed rows and never mutated. The
//! hierarchy is chromosome → region (major band, e.g. `q13`) → subsection
//! (sub-band, e.g. `q13.1`) → gene. Every gene belongs to exactly one region
//! and one subsection, chosen by its start coordinate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{CytobandRow, GeneRow, PhenotypeRow};
use crate::span::Span;

/// Number of gene-count bins, including the reserved zero bin.
pub const BIN_COUNT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stain {
    Gneg,
    Gpos25,
    Gpos50,
    Gpos75,
    Gpos100,
    Acen,
    Gvar,
    Stalk,
}

impl Stain {
    pub const ALL: [Stain; 8] = [
        Stain::Gneg,
        Stain::Gpos25,
        Stain::Gpos50,
        Stain::Gpos75,
        Stain::Gpos100,
        Stain::Acen,
        Stain::Gvar,
        Stain::Stalk,
    ];

    pub fn from_name(name: &str) -> Option<Stain> {
        Stain::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Stain::Gneg => "gneg",
            Stain::Gpos25 => "gpos25",
            Stain::Gpos50 => "gpos50",
            Stain::Gpos75 => "gpos75",
            Stain::Gpos100 => "gpos100",
            Stain::Acen => "acen",
            Stain::Gvar => "gvar",
            Stain::Stalk => "stalk",
        }
    }
}

impl fmt::Display for Stain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strand {
    Plus,
    Minus,
}

impl Strand {
    pub fn symbol(self) -> char {
        match self {
            Strand::Plus => '+',
            Strand::Minus => '-',
        }
    }

    pub fn flipped(self) -> Strand {
        match self {
            Strand::Plus => Strand::Minus,
            Strand::Minus => Strand::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    P,
    Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gene {
    pub symbol: String,
    pub chromosome: String,
    /// 0-based first base.
    pub start_bp: u64,
    pub end_bp: u64,
    pub strand: Strand,
}

impl Gene {
    /// First base in the 1-based convention used in labels and files.
    pub fn start_1based(&self) -> u64 {
        self.start_bp + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsection {
    pub name: String,
    pub span: Span,
    pub stain: Stain,
    pub gene_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub arm: Arm,
    pub span: Span,
    pub stain: Stain,
    pub subsections: Vec<Subsection>,
    pub gene_count: u32,
    pub count_bin: u8,
}

impl Region {
    pub fn subsection(&self, name: &str) -> Option<&Subsection> {
        self.subsections.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmSpan {
    pub arm: Arm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chromosome {
    pub id: String,
    pub length_bp: u64,
    pub arms: [ArmSpan; 2],
    pub centromere: Span,
    pub regions: Vec<Region>,
    /// Sorted by `(start_bp, symbol)`.
    pub genes: Vec<Gene>,
}

impl Chromosome {
    pub fn span(&self) -> Span {
        Span::new(0, self.length_bp)
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    pub fn region_index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.name == name)
    }

    /// The subsection named `name` and the region it belongs to.
    pub fn subsection(&self, name: &str) -> Option<(&Region, &Subsection)> {
        self.regions
            .iter()
            .find_map(|r| r.subsection(name).map(|s| (r, s)))
    }

    pub fn region_at(&self, pos: u64) -> Option<&Region> {
        if pos >= self.length_bp {
            return None;
        }
        let idx = self.regions.partition_point(|r| r.span.end <= pos);
        self.regions.get(idx)
    }

    /// Genes whose start lies in `span`, in start order.
    pub fn genes_starting_in(&self, span: Span) -> &[Gene] {
        let lo = self.genes.partition_point(|g| g.start_bp < span.start);
        let hi = self.genes.partition_point(|g| g.start_bp < span.end);
        &self.genes[lo..hi.max(lo)]
    }

    pub fn gene_count(&self) -> usize {
        self.genes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phenotype {
    pub name: String,
    pub color: String,
    pub gene_symbols: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: String,
    /// Upper bound on the length of subsections synthesized for regions that
    /// have no sub-bands.
    pub max_synthetic_subsection_bp: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            name: "assembly".into(),
            max_synthetic_subsection_bp: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown chromosome {0}")]
    UnknownChromosome(String),
    #[error("gene {symbol} at [{start}, {end}) lies outside chromosome {chromosome} of length {length}")]
    GeneOutsideChromosome {
        symbol: String,
        chromosome: String,
        start: u64,
        end: u64,
        length: u64,
    },
    #[error("phenotype {phenotype} references unknown gene {symbol}")]
    UnknownGeneSymbol { phenotype: String, symbol: String },
    #[error("position {position} is outside chromosome {chromosome} of length {length}")]
    PositionOutOfRange {
        chromosome: String,
        position: u64,
        length: u64,
    },
    #[error("interval {span} is not a valid interval of chromosome {chromosome} of length {length}")]
    IntervalOutOfRange {
        chromosome: String,
        span: Span,
        length: u64,
    },
    #[error("bands of chromosome {chromosome} do not tile at {position}")]
    TilingViolation { chromosome: String, position: u64 },
    #[error("band {band} on chromosome {chromosome} does not name a p or q arm")]
    BadBandName { chromosome: String, band: String },
    #[error("p-arm band {band} follows q-arm bands on chromosome {chromosome}")]
    ArmOrder { chromosome: String, band: String },
    #[error("region {region} on chromosome {chromosome} is split by other bands")]
    NonContiguousRegion { chromosome: String, region: String },
    #[error("duplicate chromosome {0}")]
    DuplicateChromosome(String),
    #[error("unknown region {region} on chromosome {chromosome}")]
    UnknownRegion { chromosome: String, region: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomeAssembly {
    pub name: String,
    pub chromosomes: Vec<Chromosome>,
    /// Sorted by name.
    pub phenotypes: Vec<Phenotype>,
    /// Inclusive upper bounds of bins 0..=4; counts above the last edge fall
    /// in bin 5. Strictly increasing, first edge is 0.
    pub bin_edges: [u32; BIN_COUNT - 1],
}

/// A node of the hierarchy, for marker queries.
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Region(&'a Chromosome, &'a Region),
    Subsection(&'a Chromosome, &'a Subsection),
    Gene(&'a Gene),
}

impl GenomeAssembly {
    pub fn chromosome(&self, id: &str) -> Result<&Chromosome, ModelError> {
        self.chromosomes
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| ModelError::UnknownChromosome(id.to_string()))
    }

    pub fn phenotype(&self, name: &str) -> Option<&Phenotype> {
        self.phenotypes.iter().find(|p| p.name == name)
    }

    pub fn total_length(&self) -> u64 {
        self.chromosomes.iter().map(|c| c.length_bp).sum()
    }

    pub fn total_genes(&self) -> usize {
        self.chromosomes.iter().map(|c| c.genes.len()).sum()
    }

    /// The region containing `position_bp`.
    pub fn region_of(&self, chromosome_id: &str, position_bp: u64) -> Result<&Region, ModelError> {
        let chrom = self.chromosome(chromosome_id)?;
        chrom.region_at(position_bp).ok_or(ModelError::PositionOutOfRange {
            chromosome: chrom.id.clone(),
            position: position_bp,
            length: chrom.length_bp,
        })
    }

    /// Genes starting in `interval`, ordered by start then symbol.
    pub fn genes_in(&self, chromosome_id: &str, interval: Span) -> Result<&[Gene], ModelError> {
        let chrom = self.chromosome(chromosome_id)?;
        if interval.start > interval.end || interval.end > chrom.length_bp {
            return Err(ModelError::IntervalOutOfRange {
                chromosome: chrom.id.clone(),
                span: interval,
                length: chrom.length_bp,
            });
        }
        Ok(chrom.genes_starting_in(interval))
    }

    /// Names of phenotypes annotating `gene`.
    pub fn gene_markers(&self, gene: &Gene) -> BTreeSet<String> {
        self.phenotypes
            .iter()
            .filter(|p| p.gene_symbols.contains(&gene.symbol))
            .map(|p| p.name.clone())
            .collect()
    }

    /// Phenotypes with at least one annotated gene starting in `span`.
    pub fn span_markers(&self, chrom: &Chromosome, span: Span) -> BTreeSet<String> {
        let genes = chrom.genes_starting_in(span);
        self.phenotypes
            .iter()
            .filter(|p| genes.iter().any(|g| p.gene_symbols.contains(&g.symbol)))
            .map(|p| p.name.clone())
            .collect()
    }

    pub fn markers(&self, node: NodeRef<'_>) -> BTreeSet<String> {
        match node {
            NodeRef::Region(c, r) => self.span_markers(c, r.span),
            NodeRef::Subsection(c, s) => self.span_markers(c, s.span),
            NodeRef::Gene(g) => self.gene_markers(g),
        }
    }

    pub fn gene_count_bin(&self, count: u32) -> u8 {
        bin_for(&self.bin_edges, count)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("assembly serializes")
    }

    pub fn from_json(text: &str) -> Result<GenomeAssembly, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Check the structural invariants. Used after loading snapshots and in
    /// tests.
    pub fn validate(&self) -> Result<(), String> {
        let mut ids = HashSet::new();
        for c in &self.chromosomes {
            if !ids.insert(&c.id) {
                return Err(format!("duplicate chromosome {}", c.id));
            }
            let mut cursor = 0;
            let mut seen_q = false;
            for r in &c.regions {
                if r.span.start != cursor || r.span.is_empty() {
                    return Err(format!("chr{} regions do not tile at {cursor}", c.id));
                }
                if r.arm == Arm::Q {
                    seen_q = true;
                } else if seen_q {
                    return Err(format!("chr{} region {} on p after q", c.id, r.name));
                }
                let mut sub_cursor = r.span.start;
                for s in &r.subsections {
                    if s.span.start != sub_cursor || s.span.is_empty() {
                        return Err(format!("chr{} {} subsections do not tile", c.id, r.name));
                    }
                    sub_cursor = s.span.end;
                    if s.gene_count as usize != c.genes_starting_in(s.span).len() {
                        return Err(format!("chr{} {} gene count mismatch", c.id, s.name));
                    }
                }
                if sub_cursor != r.span.end {
                    return Err(format!("chr{} {} subsections stop short", c.id, r.name));
                }
                if r.gene_count as usize != c.genes_starting_in(r.span).len() {
                    return Err(format!("chr{} {} gene count mismatch", c.id, r.name));
                }
                if r.count_bin != self.gene_count_bin(r.gene_count) {
                    return Err(format!("chr{} {} bin mismatch", c.id, r.name));
                }
                cursor = r.span.end;
            }
            if cursor != c.length_bp {
                return Err(format!("chr{} regions stop at {cursor}", c.id));
            }
            if c.genes.iter().any(|g| g.start_bp >= g.end_bp || g.end_bp > c.length_bp) {
                return Err(format!("chr{} has a gene outside its bounds", c.id));
            }
        }
        if self.bin_edges[0] != 0 || self.bin_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("bin edges {:?} not strictly increasing from 0", self.bin_edges));
        }
        Ok(())
    }
}

fn bin_for(edges: &[u32; BIN_COUNT - 1], count: u32) -> u8 {
    edges.iter().position(|&e| count <= e).unwrap_or(BIN_COUNT - 1) as u8
}

/// Nearest-rank quintile edges of the nonzero counts, forced strictly
/// increasing.
pub fn quintile_edges(counts: impl IntoIterator<Item = u32>) -> [u32; BIN_COUNT - 1] {
    let mut nonzero: Vec<u32> = counts.into_iter().filter(|&c| c > 0).collect();
    nonzero.sort_unstable();
    let m = nonzero.len();
    let mut edges = [0u32; BIN_COUNT - 1];
    for k in 1..BIN_COUNT - 1 {
        let q = if m == 0 {
            0
        } else {
            let rank = (k * m).div_ceil(BIN_COUNT - 1);
            nonzero[rank.max(1) - 1]
        };
        edges[k] = q.max(edges[k - 1] + 1);
    }
    edges
}

/// Sort key placing 1..22 numerically, then X, Y, then anything else.
pub fn chromosome_order(id: &str) -> (u8, u64, String) {
    if let Ok(n) = id.parse::<u64>() {
        (0, n, String::new())
    } else {
        match id {
            "X" => (1, 0, String::new()),
            "Y" => (2, 0, String::new()),
            _ => (3, 0, id.to_string()),
        }
    }
}

fn cmp_chromosomes(a: &str, b: &str) -> Ordering {
    chromosome_order(a).cmp(&chromosome_order(b))
}

fn major_band(name: &str) -> &str {
    name.split('.').next().unwrap_or(name)
}

fn build_subsections(
    region_name: &str,
    bands: &[&CytobandRow],
    max_bp: u64,
) -> Vec<Subsection> {
    let has_sub_bands = bands.len() > 1 || bands[0].band_name != region_name;
    if has_sub_bands {
        return bands
            .iter()
            .map(|b| Subsection {
                name: b.band_name.clone(),
                span: Span::new(b.start_bp, b.end_bp),
                stain: b.stain,
                gene_count: 0,
            })
            .collect();
    }
    let band = bands[0];
    let len = band.end_bp - band.start_bp;
    let n = len.div_ceil(max_bp.max(1));
    let (base, extra) = (len / n, len % n);
    let mut start = band.start_bp;
    (0..n)
        .map(|i| {
            let size = base + u64::from(i < extra);
            let span = Span::new(start, start + size);
            start += size;
            Subsection {
                name: format!("{region_name}.s{}", i + 1),
                span,
                stain: band.stain,
                gene_count: 0,
            }
        })
        .collect()
}

fn dominant_stain(bands: &[&CytobandRow]) -> Stain {
    let mut best = bands[0];
    for b in &bands[1..] {
        if b.end_bp - b.start_bp > best.end_bp - best.start_bp {
            best = b;
        }
    }
    best.stain
}

fn build_chromosome(
    id: &str,
    bands: &[&CytobandRow],
    config: &ModelConfig,
) -> Result<Chromosome, ModelError> {
    let mut cursor = 0;
    for b in bands {
        if b.start_bp != cursor || b.end_bp <= b.start_bp {
            return Err(ModelError::TilingViolation {
                chromosome: id.to_string(),
                position: cursor,
            });
        }
        cursor = b.end_bp;
    }
    let length_bp = cursor;

    let mut regions: Vec<Region> = Vec::new();
    let mut seen_names: HashSet<&str> = HashSet::new();
    let mut seen_q = false;
    let mut i = 0;
    while i < bands.len() {
        let name = major_band(&bands[i].band_name);
        let arm = match name.as_bytes().first() {
            Some(b'p') => Arm::P,
            Some(b'q') => Arm::Q,
            _ => {
                return Err(ModelError::BadBandName {
                    chromosome: id.to_string(),
                    band: bands[i].band_name.clone(),
                })
            }
        };
        match arm {
            Arm::Q => seen_q = true,
            Arm::P if seen_q => {
                return Err(ModelError::ArmOrder {
                    chromosome: id.to_string(),
                    band: bands[i].band_name.clone(),
                })
            }
            Arm::P => {}
        }
        if !seen_names.insert(name) {
            return Err(ModelError::NonContiguousRegion {
                chromosome: id.to_string(),
                region: name.to_string(),
            });
        }
        let mut j = i + 1;
        while j < bands.len() && major_band(&bands[j].band_name) == name {
            j += 1;
        }
        let group = &bands[i..j];
        regions.push(Region {
            name: name.to_string(),
            arm,
            span: Span::new(group[0].start_bp, group[group.len() - 1].end_bp),
            stain: dominant_stain(group),
            subsections: build_subsections(name, group, config.max_synthetic_subsection_bp),
            gene_count: 0,
            count_bin: 0,
        });
        i = j;
    }

    let q_start = regions
        .iter()
        .find(|r| r.arm == Arm::Q)
        .map_or(length_bp, |r| r.span.start);
    let acen: Vec<&&CytobandRow> = bands.iter().filter(|b| b.stain == Stain::Acen).collect();
    let centromere = match (acen.first(), acen.last()) {
        (Some(first), Some(last)) => Span::new(first.start_bp, last.end_bp),
        _ => Span::new(q_start, q_start),
    };

    Ok(Chromosome {
        id: id.to_string(),
        length_bp,
        arms: [
            ArmSpan {
                arm: Arm::P,
                span: Span::new(0, q_start),
            },
            ArmSpan {
                arm: Arm::Q,
                span: Span::new(q_start, length_bp),
            },
        ],
        centromere,
        regions,
        genes: Vec::new(),
    })
}

/// Assemble parsed rows into a [`GenomeAssembly`].
///
/// Chromosomes are ordered 1..22, X, Y, then any other names. Gene counts and
/// count bins are computed here; the quintile bin edges are derived from the
/// nonzero region counts of the whole assembly.
pub fn build_assembly(
    cytobands: &[CytobandRow],
    genes: &[GeneRow],
    phenotypes: &[PhenotypeRow],
    config: &ModelConfig,
) -> Result<GenomeAssembly, ModelError> {
    let mut by_chrom: BTreeMap<&str, Vec<&CytobandRow>> = BTreeMap::new();
    for row in cytobands {
        by_chrom.entry(row.chromosome.as_str()).or_default().push(row);
    }
    let mut ids: Vec<&str> = by_chrom.keys().copied().collect();
    ids.sort_by(|a, b| cmp_chromosomes(a, b));

    let mut chromosomes = Vec::with_capacity(ids.len());
    for id in ids {
        let mut bands = by_chrom.remove(id).unwrap_or_default();
        bands.sort_by_key(|b| (b.start_bp, b.end_bp));
        chromosomes.push(build_chromosome(id, &bands, config)?);
    }

    let mut known_symbols: HashSet<&str> = HashSet::new();
    for row in genes {
        let chrom = chromosomes
            .iter_mut()
            .find(|c| c.id == row.chromosome)
            .ok_or_else(|| ModelError::UnknownChromosome(row.chromosome.clone()))?;
        if row.start_bp >= chrom.length_bp || row.end_bp > chrom.length_bp || row.start_bp >= row.end_bp {
            return Err(ModelError::GeneOutsideChromosome {
                symbol: row.symbol.clone(),
                chromosome: row.chromosome.clone(),
                start: row.start_bp,
                end: row.end_bp,
                length: chrom.length_bp,
            });
        }
        known_symbols.insert(&row.symbol);
        chrom.genes.push(Gene {
            symbol: row.symbol.clone(),
            chromosome: row.chromosome.clone(),
            start_bp: row.start_bp,
            end_bp: row.end_bp,
            strand: row.strand,
        });
    }

    for chrom in &mut chromosomes {
        chrom
            .genes
            .sort_by(|a, b| a.start_bp.cmp(&b.start_bp).then_with(|| a.symbol.cmp(&b.symbol)));
        let genes = std::mem::take(&mut chrom.genes);
        let count_in = |span: Span| {
            let lo = genes.partition_point(|g| g.start_bp < span.start);
            let hi = genes.partition_point(|g| g.start_bp < span.end);
            (hi - lo) as u32
        };
        for region in &mut chrom.regions {
            region.gene_count = count_in(region.span);
            for sub in &mut region.subsections {
                sub.gene_count = count_in(sub.span);
            }
        }
        chrom.genes = genes;
    }

    let bin_edges = quintile_edges(
        chromosomes
            .iter()
            .flat_map(|c| c.regions.iter().map(|r| r.gene_count)),
    );
    for chrom in &mut chromosomes {
        for region in &mut chrom.regions {
            region.count_bin = bin_for(&bin_edges, region.gene_count);
        }
    }

    let mut grouped: BTreeMap<&str, Phenotype> = BTreeMap::new();
    for row in phenotypes {
        if !known_symbols.contains(row.symbol.as_str()) {
            return Err(ModelError::UnknownGeneSymbol {
                phenotype: row.phenotype.clone(),
                symbol: row.symbol.clone(),
            });
        }
        grouped
            .entry(row.phenotype.as_str())
            .or_insert_with(|| Phenotype {
                name: row.phenotype.clone(),
                color: row.color.clone(),
                gene_symbols: BTreeSet::new(),
            })
            .gene_symbols
            .insert(row.symbol.clone());
    }

    Ok(GenomeAssembly {
        name: config.name.clone(),
        chromosomes,
        phenotypes: grouped.into_values().collect(),
        bin_edges,
    })
}
