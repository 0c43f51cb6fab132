//! Space-folding layout.
//!
//! A [`FoldState`] records, per chromosome, which regions are open,
//! compressed or closed and which subsections of open regions are open. It is
//! an immutable value: every verb returns a new state. [`build_layout`] turns a
//! state into a [`LayoutMap`], a monotone piecewise-linear map from base pairs
//! to layout units made of one leaf per closed/compressed region or per
//! subsection of an open region:
//!
//! | leaf               | layout length                                   |
//! |--------------------|-------------------------------------------------|
//! | closed region      | `g / bp_per_unit`                               |
//! | compressed region  | `max(min_compressed_width, g / (bp_per_unit·K))` |
//! | closed subsection  | `max(min_subsection_width, g / bp_per_unit)`    |
//! | open subsection    | `row_height · max(1, gene_count)`               |
//!
//! Layout positions are exact rationals, so tiling sums, the all-closed
//! identity and the inverse map hold exactly rather than up to rounding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{Chromosome, Gene, GenomeAssembly, ModelError, Strand};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoldError {
    #[error("unknown chromosome {0}")]
    UnknownChromosome(String),
    #[error("fold state is for chromosome {expected}, not {found}")]
    ChromosomeMismatch { expected: String, found: String },
    #[error("unknown region {region} on chromosome {chromosome}")]
    UnknownRegion { chromosome: String, region: String },
    #[error("unknown subsection {subsection} on chromosome {chromosome}")]
    UnknownSubsection { chromosome: String, subsection: String },
    #[error("subsection {subsection} cannot open while region {region} is not open")]
    ParentNotOpen { subsection: String, region: String },
    #[error("subsection {0} is not open")]
    SubsectionNotOpen(String),
    #[error("position {position} is outside [0, {length})")]
    PositionOutOfRange { position: u64, length: u64 },
    #[error("layout position {position} is outside [0, {total})")]
    LayoutOutOfRange { position: f64, total: f64 },
    #[error("invalid layout config: {0}")]
    InvalidConfig(String),
}

impl From<ModelError> for FoldError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownChromosome(c) => FoldError::UnknownChromosome(c),
            other => FoldError::InvalidConfig(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionState {
    #[default]
    Closed,
    Compressed,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsectionState {
    #[default]
    Closed,
    Open,
}

/// Fold verbs, as accepted by the service and by fold scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldVerb {
    Open,
    Close,
    Compress,
    Uncompress,
    OpenSub,
    CloseSub,
}

impl FoldVerb {
    pub fn name(self) -> &'static str {
        match self {
            FoldVerb::Open => "open",
            FoldVerb::Close => "close",
            FoldVerb::Compress => "compress",
            FoldVerb::Uncompress => "uncompress",
            FoldVerb::OpenSub => "open_sub",
            FoldVerb::CloseSub => "close_sub",
        }
    }
}

impl FromStr for FoldVerb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            FoldVerb::Open,
            FoldVerb::Close,
            FoldVerb::Compress,
            FoldVerb::Uncompress,
            FoldVerb::OpenSub,
            FoldVerb::CloseSub,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| format!("unknown fold verb {s:?}"))
    }
}

impl fmt::Display for FoldVerb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub bp_per_unit: f64,
    /// Compression factor K, > 1.
    pub compress_factor: f64,
    pub min_compressed_width: f64,
    pub min_subsection_width: f64,
    /// Layout units per gene row of an open subsection.
    pub row_height: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            bp_per_unit: 1e6,
            compress_factor: 10.0,
            min_compressed_width: 0.5,
            min_subsection_width: 0.2,
            row_height: 1.0,
        }
    }
}

/// Exact value of the shortest decimal rendering of `x`.
fn decimal_ratio(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{}", x.abs());
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, denom);
    Some(if x < 0.0 { -r } else { r })
}

#[derive(Debug, Clone)]
struct ExactConfig {
    bp_per_unit: BigRational,
    compress_factor: BigRational,
    min_compressed_width: BigRational,
    min_subsection_width: BigRational,
    row_height: BigRational,
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<(), FoldError> {
        let fields = [
            ("bp_per_unit", self.bp_per_unit),
            ("compress_factor", self.compress_factor),
            ("min_compressed_width", self.min_compressed_width),
            ("min_subsection_width", self.min_subsection_width),
            ("row_height", self.row_height),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(FoldError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.compress_factor <= 1.0 {
            return Err(FoldError::InvalidConfig(format!(
                "compress_factor must exceed 1, got {}",
                self.compress_factor
            )));
        }
        Ok(())
    }

    fn exact(&self) -> Result<ExactConfig, FoldError> {
        self.validate()?;
        let conv = |v: f64| decimal_ratio(v).ok_or_else(|| FoldError::InvalidConfig(v.to_string()));
        Ok(ExactConfig {
            bp_per_unit: conv(self.bp_per_unit)?,
            compress_factor: conv(self.compress_factor)?,
            min_compressed_width: conv(self.min_compressed_width)?,
            min_subsection_width: conv(self.min_subsection_width)?,
            row_height: conv(self.row_height)?,
        })
    }

    /// `bp_per_unit` as an exact rational.
    pub fn bp_per_unit_exact(&self) -> BigRational {
        decimal_ratio(self.bp_per_unit).unwrap_or_else(BigRational::zero)
    }
}

/// Per-chromosome display state. Only non-default entries are stored:
/// regions absent from `region_states` are closed and subsections absent
/// from `subsection_states` are closed, so equal displays compare equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldState {
    pub chromosome_id: String,
    pub region_states: BTreeMap<String, RegionState>,
    pub subsection_states: BTreeMap<String, SubsectionState>,
    pub config: LayoutConfig,
}

impl FoldState {
    /// All-closed state.
    pub fn new(chromosome_id: impl Into<String>, config: LayoutConfig) -> Self {
        FoldState {
            chromosome_id: chromosome_id.into(),
            region_states: BTreeMap::new(),
            subsection_states: BTreeMap::new(),
            config,
        }
    }

    pub fn region_state(&self, region: &str) -> RegionState {
        self.region_states.get(region).copied().unwrap_or_default()
    }

    pub fn subsection_state(&self, subsection: &str) -> SubsectionState {
        self.subsection_states.get(subsection).copied().unwrap_or_default()
    }

    pub fn is_all_closed(&self) -> bool {
        self.region_states.is_empty()
    }

    fn check_chromosome(&self, chrom: &Chromosome) -> Result<(), FoldError> {
        if chrom.id != self.chromosome_id {
            return Err(FoldError::ChromosomeMismatch {
                expected: self.chromosome_id.clone(),
                found: chrom.id.clone(),
            });
        }
        Ok(())
    }

    fn with_region(&self, chrom: &Chromosome, region: &str, target: RegionState) -> Result<FoldState, FoldError> {
        self.check_chromosome(chrom)?;
        let r = chrom.region(region).ok_or_else(|| FoldError::UnknownRegion {
            chromosome: chrom.id.clone(),
            region: region.to_string(),
        })?;
        let mut next = self.clone();
        if target != RegionState::Open || self.region_state(region) != RegionState::Open {
            for s in &r.subsections {
                next.subsection_states.remove(&s.name);
            }
        }
        match target {
            RegionState::Closed => next.region_states.remove(region),
            other => next.region_states.insert(region.to_string(), other),
        };
        Ok(next)
    }

    /// Open a region. Compression is cleared; subsections start closed.
    pub fn open_region(&self, chrom: &Chromosome, region: &str) -> Result<FoldState, FoldError> {
        self.with_region(chrom, region, RegionState::Open)
    }

    pub fn close_region(&self, chrom: &Chromosome, region: &str) -> Result<FoldState, FoldError> {
        self.with_region(chrom, region, RegionState::Closed)
    }

    pub fn compress_region(&self, chrom: &Chromosome, region: &str) -> Result<FoldState, FoldError> {
        self.with_region(chrom, region, RegionState::Compressed)
    }

    /// Compressed → closed. Any other state is left as is.
    pub fn uncompress_region(&self, chrom: &Chromosome, region: &str) -> Result<FoldState, FoldError> {
        if self.region_state(region) == RegionState::Compressed {
            self.with_region(chrom, region, RegionState::Closed)
        } else {
            self.check_chromosome(chrom)?;
            chrom.region(region).ok_or_else(|| FoldError::UnknownRegion {
                chromosome: chrom.id.clone(),
                region: region.to_string(),
            })?;
            Ok(self.clone())
        }
    }

    /// Compress every region intersecting `span`.
    pub fn compress_interval(&self, chrom: &Chromosome, span: Span) -> Result<FoldState, FoldError> {
        let mut next = self.clone();
        for r in chrom.regions.iter().filter(|r| r.span.intersects(&span)) {
            next = next.compress_region(chrom, &r.name)?;
        }
        Ok(next)
    }

    pub fn open_subsection(&self, chrom: &Chromosome, subsection: &str) -> Result<FoldState, FoldError> {
        self.check_chromosome(chrom)?;
        let (region, _) = chrom.subsection(subsection).ok_or_else(|| FoldError::UnknownSubsection {
            chromosome: chrom.id.clone(),
            subsection: subsection.to_string(),
        })?;
        if self.region_state(&region.name) != RegionState::Open {
            return Err(FoldError::ParentNotOpen {
                subsection: subsection.to_string(),
                region: region.name.clone(),
            });
        }
        let mut next = self.clone();
        next.subsection_states.insert(subsection.to_string(), SubsectionState::Open);
        Ok(next)
    }

    pub fn close_subsection(&self, chrom: &Chromosome, subsection: &str) -> Result<FoldState, FoldError> {
        self.check_chromosome(chrom)?;
        chrom.subsection(subsection).ok_or_else(|| FoldError::UnknownSubsection {
            chromosome: chrom.id.clone(),
            subsection: subsection.to_string(),
        })?;
        let mut next = self.clone();
        next.subsection_states.remove(subsection);
        Ok(next)
    }

    pub fn apply(&self, chrom: &Chromosome, verb: FoldVerb, target: &str) -> Result<FoldState, FoldError> {
        match verb {
            FoldVerb::Open => self.open_region(chrom, target),
            FoldVerb::Close => self.close_region(chrom, target),
            FoldVerb::Compress => self.compress_region(chrom, target),
            FoldVerb::Uncompress => self.uncompress_region(chrom, target),
            FoldVerb::OpenSub => self.open_subsection(chrom, target),
            FoldVerb::CloseSub => self.close_subsection(chrom, target),
        }
    }
}

/// A position in layout units, held exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayoutPos(pub BigRational);

impl LayoutPos {
    pub fn zero() -> Self {
        LayoutPos(BigRational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Value of the shortest decimal rendering of `x`, so that a coordinate
    /// printed by [`LayoutPos::to_f64`] reads back to the same rational.
    pub fn from_f64(x: f64) -> Option<Self> {
        decimal_ratio(x).map(LayoutPos)
    }
}

impl Serialize for LayoutPos {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl fmt::Display for LayoutPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafKind {
    ClosedRegion,
    CompressedRegion,
    ClosedSubsection,
    OpenSubsection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadingDirection {
    /// Plus-strand genes read from the bottom up.
    BottomUp,
    /// Minus-strand genes read from the top down.
    TopDown,
}

/// One gene as listed in an open subsection or an inset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneRowView {
    pub row_index: usize,
    pub symbol: String,
    pub start_1based: u64,
    pub strand: Strand,
    pub label: String,
    pub reading_direction: ReadingDirection,
    pub markers: BTreeSet<String>,
}

impl GeneRowView {
    pub fn new(row_index: usize, gene: &Gene, markers: BTreeSet<String>) -> Self {
        let start = gene.start_1based();
        let (label, reading_direction) = match gene.strand {
            Strand::Plus => (format!("{start} {}", gene.symbol), ReadingDirection::BottomUp),
            Strand::Minus => (format!("{} {start}", gene.symbol), ReadingDirection::TopDown),
        };
        GeneRowView {
            row_index,
            symbol: gene.symbol.clone(),
            start_1based: start,
            strand: gene.strand,
            label,
            reading_direction,
            markers,
        }
    }
}

/// Gene rows for every gene starting in `span`, in start order.
pub fn gene_rows(assembly: &GenomeAssembly, chrom: &Chromosome, span: Span) -> Vec<GeneRowView> {
    chrom
        .genes_starting_in(span)
        .iter()
        .enumerate()
        .map(|(i, g)| GeneRowView::new(i, g, assembly.gene_markers(g)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafSegment {
    pub kind: LeafKind,
    pub region: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsection: Option<String>,
    pub genomic: Span,
    pub layout_start: LayoutPos,
    pub layout_end: LayoutPos,
    pub gene_count: u32,
    pub count_bin: u8,
    pub markers: BTreeSet<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<GeneRowView>,
}

impl LeafSegment {
    pub fn layout_length(&self) -> BigRational {
        &self.layout_end.0 - &self.layout_start.0
    }

    /// Name of the node this leaf draws.
    pub fn node(&self) -> &str {
        self.subsection.as_deref().unwrap_or(&self.region)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutMap {
    pub chromosome_id: String,
    pub length_bp: u64,
    pub bp_per_unit: f64,
    pub leaves: Vec<LeafSegment>,
    pub total_length: LayoutPos,
}

impl LayoutMap {
    /// Genomic → layout. Linear inside each leaf.
    pub fn to_layout(&self, position_bp: u64) -> Result<LayoutPos, FoldError> {
        if position_bp >= self.length_bp {
            return Err(FoldError::PositionOutOfRange {
                position: position_bp,
                length: self.length_bp,
            });
        }
        let idx = self.leaves.partition_point(|l| l.genomic.end <= position_bp);
        let leaf = &self.leaves[idx];
        let offset = BigRational::from_integer(BigInt::from(position_bp - leaf.genomic.start));
        let glen = BigRational::from_integer(BigInt::from(leaf.genomic.len()));
        Ok(LayoutPos(&leaf.layout_start.0 + offset * leaf.layout_length() / glen))
    }

    /// Layout → genomic, rounding down to the base pair.
    pub fn from_layout(&self, pos: &LayoutPos) -> Result<u64, FoldError> {
        if pos.0 < BigRational::zero() || *pos >= self.total_length {
            return Err(FoldError::LayoutOutOfRange {
                position: pos.to_f64(),
                total: self.total_length.to_f64(),
            });
        }
        let idx = self.leaves.partition_point(|l| l.layout_end <= *pos);
        let leaf = &self.leaves[idx];
        let glen = BigRational::from_integer(BigInt::from(leaf.genomic.len()));
        let frac = (&pos.0 - &leaf.layout_start.0) * glen / leaf.layout_length();
        let offset = frac.floor().to_integer().to_u64().unwrap_or(0);
        Ok((leaf.genomic.start + offset).min(leaf.genomic.end - 1))
    }

    pub fn from_layout_f64(&self, pos: f64) -> Result<u64, FoldError> {
        let exact = LayoutPos::from_f64(pos).ok_or(FoldError::LayoutOutOfRange {
            position: pos,
            total: self.total_length.to_f64(),
        })?;
        self.from_layout(&exact)
    }

    pub fn leaf_at(&self, position_bp: u64) -> Option<&LeafSegment> {
        let idx = self.leaves.partition_point(|l| l.genomic.end <= position_bp);
        self.leaves.get(idx)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("layout serializes")
    }
}

fn ratio(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn max_ratio(a: BigRational, b: BigRational) -> BigRational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Materialize the layout of `state` against `assembly`.
pub fn build_layout(assembly: &GenomeAssembly, state: &FoldState) -> Result<LayoutMap, FoldError> {
    let chrom = assembly.chromosome(&state.chromosome_id)?;
    let cfg = state.config.exact()?;
    let mut leaves = Vec::new();
    let mut cursor = BigRational::zero();

    let mut push = |leaves: &mut Vec<LeafSegment>, len: BigRational, leaf: LeafSegment| {
        let start = cursor.clone();
        cursor = &cursor + len;
        leaves.push(LeafSegment {
            layout_start: LayoutPos(start),
            layout_end: LayoutPos(cursor.clone()),
            ..leaf
        });
    };

    for region in &chrom.regions {
        let g = ratio(region.span.len());
        let base = LeafSegment {
            kind: LeafKind::ClosedRegion,
            region: region.name.clone(),
            subsection: None,
            genomic: region.span,
            layout_start: LayoutPos::zero(),
            layout_end: LayoutPos::zero(),
            gene_count: region.gene_count,
            count_bin: region.count_bin,
            markers: assembly.span_markers(chrom, region.span),
            rows: Vec::new(),
        };
        match state.region_state(&region.name) {
            RegionState::Closed => push(&mut leaves, g / &cfg.bp_per_unit, base),
            RegionState::Compressed => {
                let len = max_ratio(
                    cfg.min_compressed_width.clone(),
                    g / (&cfg.bp_per_unit * &cfg.compress_factor),
                );
                push(
                    &mut leaves,
                    len,
                    LeafSegment {
                        kind: LeafKind::CompressedRegion,
                        ..base
                    },
                );
            }
            RegionState::Open => {
                for sub in &region.subsections {
                    let leaf = LeafSegment {
                        kind: LeafKind::ClosedSubsection,
                        region: region.name.clone(),
                        subsection: Some(sub.name.clone()),
                        genomic: sub.span,
                        layout_start: LayoutPos::zero(),
                        layout_end: LayoutPos::zero(),
                        gene_count: sub.gene_count,
                        count_bin: assembly.gene_count_bin(sub.gene_count),
                        markers: assembly.span_markers(chrom, sub.span),
                        rows: Vec::new(),
                    };
                    match state.subsection_state(&sub.name) {
                        SubsectionState::Closed => {
                            let len = max_ratio(
                                cfg.min_subsection_width.clone(),
                                ratio(sub.span.len()) / &cfg.bp_per_unit,
                            );
                            push(&mut leaves, len, leaf);
                        }
                        SubsectionState::Open => {
                            let len = &cfg.row_height * ratio(u64::from(sub.gene_count.max(1)));
                            push(
                                &mut leaves,
                                len,
                                LeafSegment {
                                    kind: LeafKind::OpenSubsection,
                                    rows: gene_rows(assembly, chrom, sub.span),
                                    ..leaf
                                },
                            );
                        }
                    }
                }
            }
        }
    }

    Ok(LayoutMap {
        chromosome_id: chrom.id.clone(),
        length_bp: chrom.length_bp,
        bp_per_unit: state.config.bp_per_unit,
        leaves,
        total_length: LayoutPos(cursor),
    })
}

/// Gene rows shown inside an open subsection.
pub fn embedded_gene_rows(
    assembly: &GenomeAssembly,
    state: &FoldState,
    subsection: &str,
) -> Result<Vec<GeneRowView>, FoldError> {
    let chrom = assembly.chromosome(&state.chromosome_id)?;
    let (_, sub) = chrom.subsection(subsection).ok_or_else(|| FoldError::UnknownSubsection {
        chromosome: chrom.id.clone(),
        subsection: subsection.to_string(),
    })?;
    if state.subsection_state(subsection) != SubsectionState::Open {
        return Err(FoldError::SubsectionNotOpen(subsection.to_string()));
    }
    Ok(gene_rows(assembly, chrom, sub.span))
}
