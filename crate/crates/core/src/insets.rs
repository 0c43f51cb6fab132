//! Scope-driven inset windows.
//!
//! An inset is a detached window bound to a genomic scope. Its content lists
//! every region intersecting the scope, each with full-region statistics,
//! followed by that region's gene rows when the region is expanded inside the
//! window. Insets are independent of each other and of the fold state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fold::{gene_rows, GeneRowView};
use crate::model::{Chromosome, GenomeAssembly};
use crate::span::Span;

pub const DEFAULT_FRAME_WIDTH: f64 = 40.0;
pub const DEFAULT_FRAME_HEIGHT: f64 = 30.0;
const DEFAULT_FRAME_GAP: f64 = 2.0;
/// Top edge of default frames, just below the ideogram.
const DEFAULT_FRAME_Y: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InsetId(pub u64);

impl fmt::Display for InsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InsetError {
    #[error("unknown inset {0}")]
    UnknownInset(InsetId),
    #[error("inset {0} is locked")]
    InsetLocked(InsetId),
    #[error("region {region} does not intersect the scope of inset {inset}")]
    RegionNotInScope { inset: InsetId, region: String },
    #[error("unknown chromosome {0}")]
    UnknownChromosome(String),
    #[error("interval {span} is outside chromosome {chromosome} of length {length}")]
    PositionOutOfRange {
        chromosome: String,
        span: Span,
        length: u64,
    },
    #[error("scope {0} has zero length")]
    ZeroLengthScope(Span),
    #[error("frame must have positive width and height")]
    InvalidFrame,
    #[error("viewport must show at least one row")]
    InvalidViewport,
}

/// Window placement in abstract workspace units. The workspace is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    /// Left-to-right tiling below the ideogram.
    pub fn tiled(index: usize) -> Frame {
        Frame {
            x: index as f64 * (DEFAULT_FRAME_WIDTH + DEFAULT_FRAME_GAP),
            y: DEFAULT_FRAME_Y,
            width: DEFAULT_FRAME_WIDTH,
            height: DEFAULT_FRAME_HEIGHT,
        }
    }

    fn is_valid(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.width.is_finite()
            && self.height.is_finite()
            && self.width > 0.0
            && self.height > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    pub chromosome_id: String,
    pub interval: Span,
    pub owner_inset: InsetId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inset {
    pub id: InsetId,
    pub scope: Scope,
    pub frame: Frame,
    /// Index of the first content entry shown.
    pub scroll_offset: usize,
    pub locked: bool,
    /// Regions expanded inside this window.
    pub open_regions: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InsetEntry {
    Header {
        region: String,
        span: Span,
        gene_count: u32,
        phenotypes: BTreeSet<String>,
        open: bool,
    },
    Gene {
        region: String,
        row: GeneRowView,
        /// Colors of the phenotypes annotating this gene.
        colors: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsetPage {
    pub inset_id: InsetId,
    pub offset: usize,
    pub total: usize,
    pub entries: Vec<InsetEntry>,
}

fn check_scope(chrom: &Chromosome, span: Span) -> Result<(), InsetError> {
    if span.start > span.end || span.end > chrom.length_bp {
        return Err(InsetError::PositionOutOfRange {
            chromosome: chrom.id.clone(),
            span,
            length: chrom.length_bp,
        });
    }
    if span.is_empty() {
        return Err(InsetError::ZeroLengthScope(span));
    }
    Ok(())
}

/// Full content of `inset`, independent of scrolling.
pub fn content_entries(assembly: &GenomeAssembly, inset: &Inset) -> Result<Vec<InsetEntry>, InsetError> {
    let chrom = assembly
        .chromosome(&inset.scope.chromosome_id)
        .map_err(|_| InsetError::UnknownChromosome(inset.scope.chromosome_id.clone()))?;
    let mut entries = Vec::new();
    for region in chrom.regions.iter().filter(|r| r.span.intersects(&inset.scope.interval)) {
        let open = inset.open_regions.contains(&region.name);
        entries.push(InsetEntry::Header {
            region: region.name.clone(),
            span: region.span,
            gene_count: region.gene_count,
            phenotypes: assembly.span_markers(chrom, region.span),
            open,
        });
        if open {
            for row in gene_rows(assembly, chrom, region.span) {
                let colors = row
                    .markers
                    .iter()
                    .filter_map(|m| assembly.phenotype(m).map(|p| p.color.clone()))
                    .collect();
                entries.push(InsetEntry::Gene {
                    region: region.name.clone(),
                    row,
                    colors,
                });
            }
        }
    }
    Ok(entries)
}

/// The set of insets owned by one session.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InsetBoard {
    next_id: u64,
    insets: BTreeMap<InsetId, Inset>,
}

impl InsetBoard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: InsetId) -> Result<&Inset, InsetError> {
        self.insets.get(&id).ok_or(InsetError::UnknownInset(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Inset> {
        self.insets.values()
    }

    pub fn len(&self) -> usize {
        self.insets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insets.is_empty()
    }

    fn get_mut(&mut self, id: InsetId) -> Result<&mut Inset, InsetError> {
        self.insets.get_mut(&id).ok_or(InsetError::UnknownInset(id))
    }

    /// New unlocked inset scrolled to the top with no regions expanded. When
    /// `frame` is `None` the window is tiled after the previous ones.
    pub fn create(
        &mut self,
        assembly: &GenomeAssembly,
        chromosome_id: &str,
        interval: Span,
        frame: Option<Frame>,
    ) -> Result<Inset, InsetError> {
        let chrom = assembly
            .chromosome(chromosome_id)
            .map_err(|_| InsetError::UnknownChromosome(chromosome_id.to_string()))?;
        check_scope(chrom, interval)?;
        let frame = frame.unwrap_or_else(|| Frame::tiled(self.next_id as usize));
        if !frame.is_valid() {
            return Err(InsetError::InvalidFrame);
        }
        self.next_id += 1;
        let id = InsetId(self.next_id);
        let inset = Inset {
            id,
            scope: Scope {
                chromosome_id: chrom.id.clone(),
                interval,
                owner_inset: id,
            },
            frame,
            scroll_offset: 0,
            locked: false,
            open_regions: BTreeSet::new(),
        };
        self.insets.insert(id, inset.clone());
        Ok(inset)
    }

    fn reclamp(assembly: &GenomeAssembly, inset: &mut Inset) -> Result<(), InsetError> {
        let total = content_entries(assembly, inset)?.len();
        inset.scroll_offset = inset.scroll_offset.min(total.saturating_sub(1));
        Ok(())
    }

    /// Move the scope. Expanded regions that fall outside it are collapsed.
    pub fn set_scope(&mut self, assembly: &GenomeAssembly, id: InsetId, interval: Span) -> Result<Inset, InsetError> {
        let chrom_id = self.get(id)?.scope.chromosome_id.clone();
        let chrom = assembly
            .chromosome(&chrom_id)
            .map_err(|_| InsetError::UnknownChromosome(chrom_id.clone()))?;
        check_scope(chrom, interval)?;
        let inset = self.get_mut(id)?;
        inset.scope.interval = interval;
        inset
            .open_regions
            .retain(|name| chrom.region(name).is_some_and(|r| r.span.intersects(&interval)));
        Self::reclamp(assembly, inset)?;
        Ok(inset.clone())
    }

    pub fn set_frame(&mut self, id: InsetId, frame: Frame) -> Result<Inset, InsetError> {
        let inset = self.get_mut(id)?;
        if inset.locked {
            return Err(InsetError::InsetLocked(id));
        }
        if !frame.is_valid() {
            return Err(InsetError::InvalidFrame);
        }
        inset.frame = frame;
        Ok(inset.clone())
    }

    pub fn set_locked(&mut self, id: InsetId, locked: bool) -> Result<Inset, InsetError> {
        let inset = self.get_mut(id)?;
        inset.locked = locked;
        Ok(inset.clone())
    }

    /// Scroll to entry `offset`, clamped to the last entry.
    pub fn scroll(&mut self, assembly: &GenomeAssembly, id: InsetId, offset: usize) -> Result<Inset, InsetError> {
        let inset = self.get_mut(id)?;
        inset.scroll_offset = offset;
        Self::reclamp(assembly, inset)?;
        Ok(inset.clone())
    }

    /// Expand or collapse a region inside the window.
    pub fn toggle_region(&mut self, assembly: &GenomeAssembly, id: InsetId, region: &str) -> Result<Inset, InsetError> {
        let inset = self.get_mut(id)?;
        let chrom = assembly
            .chromosome(&inset.scope.chromosome_id)
            .map_err(|_| InsetError::UnknownChromosome(inset.scope.chromosome_id.clone()))?;
        let in_scope = chrom
            .region(region)
            .is_some_and(|r| r.span.intersects(&inset.scope.interval));
        if !in_scope {
            return Err(InsetError::RegionNotInScope {
                inset: id,
                region: region.to_string(),
            });
        }
        if !inset.open_regions.remove(region) {
            inset.open_regions.insert(region.to_string());
        }
        Self::reclamp(assembly, inset)?;
        Ok(inset.clone())
    }

    /// Up to `viewport_rows` entries starting at the scroll offset.
    pub fn content(&self, assembly: &GenomeAssembly, id: InsetId, viewport_rows: usize) -> Result<InsetPage, InsetError> {
        if viewport_rows == 0 {
            return Err(InsetError::InvalidViewport);
        }
        let inset = self.get(id)?;
        let all = content_entries(assembly, inset)?;
        let total = all.len();
        let offset = inset.scroll_offset.min(total);
        let entries = all.into_iter().skip(offset).take(viewport_rows).collect();
        Ok(InsetPage {
            inset_id: id,
            offset,
            total,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CytobandRow, GeneRow, PhenotypeRow};
    use crate::model::{build_assembly, ModelConfig, Stain, Strand};

    fn toy() -> GenomeAssembly {
        let band = |s: u64, e: u64, n: &str| CytobandRow {
            chromosome: "T1".into(),
            start_bp: s,
            end_bp: e,
            band_name: n.into(),
            stain: Stain::Gneg,
        };
        let bands = vec![
            band(0, 4_000_000, "p11"),
            band(4_000_000, 7_000_000, "q11"),
            band(7_000_000, 10_000_000, "q12"),
        ];
        let gene = |s: u64, sym: &str| GeneRow {
            chromosome: "T1".into(),
            start_bp: s,
            end_bp: s + 10,
            strand: Strand::Plus,
            symbol: sym.into(),
        };
        let genes = vec![
            gene(100, "P1"),
            gene(4_100_000, "Q1"),
            gene(4_200_000, "Q2"),
            gene(8_000_000, "R1"),
        ];
        let phen = vec![PhenotypeRow {
            phenotype: "A".into(),
            color: "#FF0000".into(),
            symbol: "Q2".into(),
        }];
        build_assembly(&bands, &genes, &phen, &ModelConfig::default()).unwrap()
    }

    fn headers(entries: &[InsetEntry]) -> Vec<String> {
        entries
            .iter()
            .filter_map(|e| match e {
                InsetEntry::Header { region, .. } => Some(region.clone()),
                InsetEntry::Gene { .. } => None,
            })
            .collect()
    }

    #[test]
    fn scope_selects_intersecting_regions() {
        let a = toy();
        let mut board = InsetBoard::new();
        let i = board.create(&a, "T1", Span::new(5_000_000, 9_000_000), None).unwrap();
        let page = board.content(&a, i.id, 100).unwrap();
        assert_eq!(headers(&page.entries), ["q11", "q12"]);

        let j = board.create(&a, "T1", Span::new(4_500_000, 4_600_000), None).unwrap();
        let page = board.content(&a, j.id, 100).unwrap();
        assert_eq!(
            page.entries,
            vec![InsetEntry::Header {
                region: "q11".into(),
                span: Span::new(4_000_000, 7_000_000),
                gene_count: 2,
                phenotypes: BTreeSet::from(["A".to_string()]),
                open: false,
            }]
        );
    }

    #[test]
    fn identical_scopes_are_independent() {
        let a = toy();
        let mut board = InsetBoard::new();
        let span = Span::new(0, 10_000_000);
        let i = board.create(&a, "T1", span, None).unwrap();
        let j = board.create(&a, "T1", span, None).unwrap();
        assert_ne!(i.id, j.id);
        assert_ne!(i.frame, j.frame);
        board.set_locked(i.id, true).unwrap();
        board.toggle_region(&a, i.id, "q11").unwrap();
        assert_eq!(board.get(j.id).unwrap(), &j);
    }

    #[test]
    fn scope_errors() {
        let a = toy();
        let mut board = InsetBoard::new();
        assert!(matches!(
            board.create(&a, "T1", Span::new(5, 5), None),
            Err(InsetError::ZeroLengthScope(_))
        ));
        assert!(matches!(
            board.create(&a, "T1", Span::new(0, 10_000_001), None),
            Err(InsetError::PositionOutOfRange { .. })
        ));
        assert!(matches!(
            board.create(&a, "T2", Span::new(0, 1), None),
            Err(InsetError::UnknownChromosome(_))
        ));
        assert!(matches!(board.set_locked(InsetId(42), true), Err(InsetError::UnknownInset(_))));
    }

    #[test]
    fn locked_inset_rejects_frame_changes() {
        let a = toy();
        let mut board = InsetBoard::new();
        let i = board.create(&a, "T1", Span::new(0, 1_000), None).unwrap();
        board.set_locked(i.id, true).unwrap();
        let moved = Frame {
            x: 100.0,
            ..i.frame
        };
        assert_eq!(board.set_frame(i.id, moved).unwrap_err(), InsetError::InsetLocked(i.id));
        assert_eq!(board.get(i.id).unwrap().frame, i.frame);
        board.set_locked(i.id, false).unwrap();
        assert_eq!(board.set_frame(i.id, moved).unwrap().frame, moved);
    }

    #[test]
    fn toggling_expands_gene_rows_after_header() {
        let a = toy();
        let mut board = InsetBoard::new();
        let i = board.create(&a, "T1", Span::new(0, 10_000_000), None).unwrap();
        board.toggle_region(&a, i.id, "q11").unwrap();
        let page = board.content(&a, i.id, 100).unwrap();
        assert_eq!(page.total, 5);
        match &page.entries[2] {
            InsetEntry::Gene { region, row, colors } => {
                assert_eq!(region, "q11");
                assert_eq!(row.label, "4100001 Q1");
                assert!(colors.is_empty());
            }
            other => panic!("expected gene row, got {other:?}"),
        }
        match &page.entries[3] {
            InsetEntry::Gene { colors, .. } => assert_eq!(colors, &["#FF0000"]),
            other => panic!("expected gene row, got {other:?}"),
        }
        board.toggle_region(&a, i.id, "q11").unwrap();
        assert_eq!(board.content(&a, i.id, 100).unwrap().total, 3);
    }

    #[test]
    fn toggle_outside_scope_is_rejected() {
        let a = toy();
        let mut board = InsetBoard::new();
        let i = board.create(&a, "T1", Span::new(0, 1_000), None).unwrap();
        assert!(matches!(
            board.toggle_region(&a, i.id, "q12"),
            Err(InsetError::RegionNotInScope { .. })
        ));
    }

    #[test]
    fn scrolling_clamps_and_pages() {
        let a = toy();
        let mut board = InsetBoard::new();
        let i = board.create(&a, "T1", Span::new(0, 10_000_000), None).unwrap();
        board.toggle_region(&a, i.id, "q11").unwrap();
        assert_eq!(board.scroll(&a, i.id, 99).unwrap().scroll_offset, 4);
        board.scroll(&a, i.id, 2).unwrap();
        let page = board.content(&a, i.id, 2).unwrap();
        assert_eq!(page.offset, 2);
        assert_eq!(page.entries.len(), 2);
        assert!(board.content(&a, i.id, 0).is_err());
    }

    #[test]
    fn shrinking_scope_collapses_outside_regions() {
        let a = toy();
        let mut board = InsetBoard::new();
        let i = board.create(&a, "T1", Span::new(0, 10_000_000), None).unwrap();
        board.toggle_region(&a, i.id, "q12").unwrap();
        board.scroll(&a, i.id, 4).unwrap();
        let shrunk = board.set_scope(&a, i.id, Span::new(0, 1_000)).unwrap();
        assert!(shrunk.open_regions.is_empty());
        assert_eq!(shrunk.scroll_offset, 0);
    }
}
