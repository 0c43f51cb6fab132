//! Static SVG export of one chromosome's layout.
//!
//! The ideogram runs left to right. Every x coordinate is
//! `margin + scale * layout_position`, so the drawing is an affine image of
//! the [`LayoutMap`]. From top to bottom: phenotype marker squares, the
//! six-level gene-count bar, the stained band, node labels, and gene rows for
//! open subsections. All numbers are printed with three decimals so output is
//! byte-stable.

use std::fmt::Write as _;

use foldscope_core::{GenomeAssembly, LayoutMap, LeafKind, LeafSegment, ReadingDirection, Stain};

const MARKER_Y: f64 = 4.0;
const MARKER_SIZE: f64 = 5.0;
const BAR_BASE: f64 = 34.0;
const BAR_STEP: f64 = 3.0;
const BAND_Y: f64 = 38.0;
const BAND_HEIGHT: f64 = 18.0;
const LABEL_Y: f64 = 68.0;
const ROWS_TOP: f64 = 76.0;
const ROWS_BOTTOM: f64 = 236.0;
const HEIGHT: f64 = 244.0;

/// Fill for each count bin, light to dark.
pub const BIN_FILLS: [&str; 6] = ["#F7FBFF", "#C6DBEF", "#9ECAE1", "#6BAED6", "#3182BD", "#08519C"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    /// Pixels per layout unit.
    pub scale: f64,
    pub margin: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            scale: 8.0,
            margin: 20.0,
        }
    }
}

pub fn stain_fill(stain: Stain) -> &'static str {
    match stain {
        Stain::Gneg => "#FFFFFF",
        Stain::Gpos25 => "#C8C8C8",
        Stain::Gpos50 => "#969696",
        Stain::Gpos75 => "#646464",
        Stain::Gpos100 => "#000000",
        Stain::Acen => "#D92F27",
        Stain::Gvar => "#DCDCDC",
        Stain::Stalk => "#647FA4",
    }
}

fn n(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn kind_class(kind: LeafKind) -> &'static str {
    match kind {
        LeafKind::ClosedRegion => "closed_region",
        LeafKind::CompressedRegion => "compressed_region",
        LeafKind::ClosedSubsection => "closed_subsection",
        LeafKind::OpenSubsection => "open_subsection",
    }
}

fn leaf_stain(assembly: &GenomeAssembly, chromosome: &str, leaf: &LeafSegment) -> Stain {
    let Ok(chrom) = assembly.chromosome(chromosome) else {
        return Stain::Gneg;
    };
    match &leaf.subsection {
        Some(s) => chrom.subsection(s).map_or(Stain::Gneg, |(_, s)| s.stain),
        None => chrom.region(&leaf.region).map_or(Stain::Gneg, |r| r.stain),
    }
}

fn markers(out: &mut String, assembly: &GenomeAssembly, node: &str, names: impl Iterator<Item = String>, x: f64, y: f64, size: f64) {
    for (i, name) in names.enumerate() {
        let color = assembly.phenotype(&name).map_or("#000000", |p| p.color.as_str());
        let _ = writeln!(
            out,
            r#"<rect class="marker" data-node="{}" data-phenotype="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            esc(node),
            esc(&name),
            n(x + i as f64 * (size + 1.0)),
            n(y),
            n(size),
            n(size),
            color
        );
    }
}

pub fn render_svg(assembly: &GenomeAssembly, layout: &LayoutMap, opts: &SvgOptions) -> String {
    let x_of = |pos: f64| opts.margin + opts.scale * pos;
    let width = 2.0 * opts.margin + opts.scale * layout.total_length.to_f64();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-chromosome="{c}">"#,
        w = n(width),
        h = n(HEIGHT),
        c = esc(&layout.chromosome_id)
    );
    let _ = writeln!(out, "<title>chr{}</title>", esc(&layout.chromosome_id));
    let _ = writeln!(
        out,
        r#"<style>text{{font-family:sans-serif;font-size:7px}} .compressed_region .band{{fill-opacity:0.35;stroke-dasharray:2 1}}</style>"#
    );
    for leaf in &layout.leaves {
        let x0 = x_of(leaf.layout_start.to_f64());
        let x1 = x_of(leaf.layout_end.to_f64());
        let w = x1 - x0;
        let node = leaf.node();
        let _ = writeln!(
            out,
            r#"<g class="leaf {}" data-node="{}" data-region="{}" data-start="{}" data-end="{}" data-genes="{}">"#,
            kind_class(leaf.kind),
            esc(node),
            esc(&leaf.region),
            leaf.genomic.start,
            leaf.genomic.end,
            leaf.gene_count
        );
        markers(&mut out, assembly, node, leaf.markers.iter().cloned(), x0, MARKER_Y, MARKER_SIZE);
        let bar = BAR_STEP * f64::from(leaf.count_bin + 1);
        let _ = writeln!(
            out,
            r#"<rect class="count-bar" data-bin="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            leaf.count_bin,
            n(x0),
            n(BAR_BASE - bar),
            n(w),
            n(bar),
            BIN_FILLS[usize::from(leaf.count_bin).min(BIN_FILLS.len() - 1)]
        );
        let _ = writeln!(
            out,
            r##"<rect class="band" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#333333" stroke-width="0.5"/>"##,
            n(x0),
            n(BAND_Y),
            n(w),
            n(BAND_HEIGHT),
            stain_fill(leaf_stain(assembly, &layout.chromosome_id, leaf))
        );
        let _ = writeln!(
            out,
            r#"<text class="label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            n((x0 + x1) / 2.0),
            n(LABEL_Y),
            esc(node)
        );
        let slot = if leaf.rows.is_empty() { w } else { w / leaf.rows.len() as f64 };
        for row in &leaf.rows {
            let cx = x0 + slot * (row.row_index as f64 + 0.5);
            let (arrow, text_y, angle) = match row.reading_direction {
                ReadingDirection::BottomUp => (
                    format!("{},{} {},{} {},{}", n(cx - 2.0), n(ROWS_TOP + 6.0), n(cx + 2.0), n(ROWS_TOP + 6.0), n(cx), n(ROWS_TOP)),
                    ROWS_BOTTOM,
                    -90,
                ),
                ReadingDirection::TopDown => (
                    format!("{},{} {},{} {},{}", n(cx - 2.0), n(ROWS_BOTTOM - 6.0), n(cx + 2.0), n(ROWS_BOTTOM - 6.0), n(cx), n(ROWS_BOTTOM)),
                    ROWS_TOP,
                    90,
                ),
            };
            let _ = writeln!(
                out,
                r#"<g class="gene-row" data-node="{s}" data-strand="{st}"><polygon class="arrow" points="{arrow}"/><text x="{x}" y="{y}" transform="rotate({angle} {x} {y})">{label}</text></g>"#,
                s = esc(&row.symbol),
                st = row.strand.symbol(),
                x = n(cx),
                y = n(text_y),
                label = esc(&row.label),
            );
            markers(&mut out, assembly, &row.symbol, row.markers.iter().cloned(), cx - 2.0, ROWS_TOP - 6.0, 3.0);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
