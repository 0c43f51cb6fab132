//! Engine for multi-focus querying of genome ideograms.
//!
//! The crate is split along the data flow:
//!
//! * [`ingest`] parses cytoband, gene and phenotype tables into rows.
//! * [`model`] assembles rows into an immutable [`GenomeAssembly`].
//! * [`fold`] holds per-chromosome fold state and the piecewise-linear
//!   genomic to layout transform ([`LayoutMap`]).
//! * [`insets`] manages scope-driven detail windows.
//! * [`tasks`] and [`metrics`] provide the query-task oracles and the
//!   interaction measures computed from event logs.
//!
//! Coordinates are 0-based half-open everywhere inside the engine. The gene
//! table and the gene labels shown to users are 1-based.

pub mod fold;
pub mod ingest;
pub mod insets;
pub mod metrics;
pub mod model;
pub mod span;
pub mod tasks;

pub use fold::{
    FoldError, FoldState, GeneRowView, LayoutConfig, LayoutMap, LayoutPos, LeafKind, LeafSegment,
    ReadingDirection, RegionState, SubsectionState,
};
pub use ingest::{CytobandRow, GeneRow, ParseError, ParseMode, Parsed, PhenotypeRow};
pub use insets::{Frame, Inset, InsetBoard, InsetEntry, InsetError, InsetId, InsetPage, Scope};
pub use metrics::{Event, EventKind, EventLog, MetricsError};
pub use model::{
    build_assembly, Arm, Chromosome, Gene, GenomeAssembly, ModelConfig, ModelError, NodeRef,
    Phenotype, Region, Stain, Strand, Subsection,
};
pub use span::Span;
pub use tasks::{Answer, Dominance, PhenotypeSummary, TaskError, TaskKind, TaskParams, TaskSpec};
