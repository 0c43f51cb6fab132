//! Parsers for the three input tables.
//!
//! * cytobands: UCSC `cytoBand` layout, tab-separated, no header,
//!   `chrom start end name stain`, 0-based half-open.
//! * genes: tab-separated with header `chrom\tstart\tend\tstrand\tsymbol`,
//!   1-based inclusive coordinates (converted to 0-based half-open on parse).
//! * phenotypes: RFC-4180 CSV with header `phenotype,color,symbol`.
//!
//! A `chr` prefix on chromosome names is stripped. Mitochondrial and
//! unplaced/alt scaffolds (any name containing `_`) are skipped with a
//! warning. In [`ParseMode::Strict`] the first error aborts the parse; in
//! [`ParseMode::Lenient`] line-level errors are collected in
//! [`Parsed::skipped`] and the offending line is dropped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Stain, Strand};

pub const GENE_HEADER: &str = "chrom\tstart\tend\tstrand\tsymbol";
pub const PHENOTYPE_HEADER: [&str; 3] = ["phenotype", "color", "symbol"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// Every variant carries the 1-based line number it was raised on.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParseError {
    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown stain {stain:?}")]
    UnknownStain { line: usize, stain: String },
    #[error("line {line}: bands {band_a} and {band_b} overlap on chromosome {chromosome}")]
    OverlapDetected {
        line: usize,
        chromosome: String,
        band_a: String,
        band_b: String,
    },
    #[error("line {line}: gap in band coverage of chromosome {chromosome} at {position}")]
    GapDetected {
        line: usize,
        chromosome: String,
        position: u64,
    },
    #[error("line {line}: bad strand {strand:?} (expected '+' or '-')")]
    BadStrand { line: usize, strand: String },
    #[error("line {line}: duplicate gene {symbol} on chromosome {chromosome}")]
    DuplicateSymbol {
        line: usize,
        symbol: String,
        chromosome: String,
    },
    #[error("line {line}: expected header {expected:?}")]
    HeaderMissing { line: usize, expected: String },
    #[error("line {line}: phenotype {phenotype} has conflicting colors")]
    ColorConflict { line: usize, phenotype: String },
    #[error("line {line}: bad color {color:?} (expected #RRGGBB)")]
    BadColor { line: usize, color: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::MalformedLine { line, .. }
            | ParseError::UnknownStain { line, .. }
            | ParseError::OverlapDetected { line, .. }
            | ParseError::GapDetected { line, .. }
            | ParseError::BadStrand { line, .. }
            | ParseError::DuplicateSymbol { line, .. }
            | ParseError::HeaderMissing { line, .. }
            | ParseError::ColorConflict { line, .. }
            | ParseError::BadColor { line, .. } => *line,
        }
    }
}

/// Parsed rows plus whatever was skipped along the way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub rows: Vec<T>,
    /// Line-level errors dropped in lenient mode. Always empty in strict mode.
    pub skipped: Vec<ParseError>,
    /// Non-fatal notices, e.g. skipped mitochondrial rows.
    pub warnings: Vec<String>,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed {
            rows: Vec::new(),
            skipped: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

impl<T> Parsed<T> {
    fn reject(&mut self, mode: ParseMode, err: ParseError) -> Result<(), ParseError> {
        match mode {
            ParseMode::Strict => Err(err),
            ParseMode::Lenient => {
                log::warn!("skipping: {err}");
                self.skipped.push(err);
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CytobandRow {
    pub chromosome: String,
    pub start_bp: u64,
    pub end_bp: u64,
    pub band_name: String,
    pub stain: Stain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneRow {
    pub chromosome: String,
    /// 0-based first base.
    pub start_bp: u64,
    /// Exclusive end.
    pub end_bp: u64,
    pub strand: Strand,
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhenotypeRow {
    pub phenotype: String,
    /// Uppercase `#RRGGBB`.
    pub color: String,
    pub symbol: String,
}

enum ChromName {
    Keep(String),
    Skip,
}

fn normalize_chromosome(raw: &str) -> ChromName {
    let name = raw.strip_prefix("chr").unwrap_or(raw);
    if name.is_empty() || name == "M" || name == "MT" || name.contains('_') || name.starts_with("Un") {
        ChromName::Skip
    } else {
        ChromName::Keep(name.to_string())
    }
}

fn parse_u64(field: &str, what: &str, line: usize) -> Result<u64, ParseError> {
    field.parse::<u64>().map_err(|_| ParseError::MalformedLine {
        line,
        reason: format!("{what} {field:?} is not a non-negative integer"),
    })
}

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_band_line(line_no: usize, line: &str) -> Result<Option<CytobandRow>, ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(ParseError::MalformedLine {
            line: line_no,
            reason: format!("expected 5 tab-separated fields, found {}", fields.len()),
        });
    }
    let chromosome = match normalize_chromosome(fields[0]) {
        ChromName::Keep(c) => c,
        ChromName::Skip => return Ok(None),
    };
    let start_bp = parse_u64(fields[1], "start", line_no)?;
    let end_bp = parse_u64(fields[2], "end", line_no)?;
    if start_bp >= end_bp {
        return Err(ParseError::MalformedLine {
            line: line_no,
            reason: format!("start {start_bp} is not below end {end_bp}"),
        });
    }
    if fields[3].is_empty() {
        return Err(ParseError::MalformedLine {
            line: line_no,
            reason: "empty band name".into(),
        });
    }
    let stain = Stain::from_name(fields[4]).ok_or_else(|| ParseError::UnknownStain {
        line: line_no,
        stain: fields[4].to_string(),
    })?;
    Ok(Some(CytobandRow {
        chromosome,
        start_bp,
        end_bp,
        band_name: fields[3].to_string(),
        stain,
    }))
}

/// Parse a UCSC cytoBand table. Rows come back grouped by chromosome (in
/// order of first appearance) and sorted by start within each chromosome.
/// Bands of a chromosome must tile `[0, last end)`.
pub fn parse_cytobands(text: &str, mode: ParseMode) -> Result<Parsed<CytobandRow>, ParseError> {
    let mut out = Parsed::default();
    let mut order: Vec<String> = Vec::new();
    let mut by_chrom: HashMap<String, Vec<(usize, CytobandRow)>> = HashMap::new();
    let mut skipped_names: BTreeMap<String, usize> = BTreeMap::new();

    for (line_no, line) in significant_lines(text) {
        match parse_band_line(line_no, line) {
            Ok(Some(row)) => {
                if !by_chrom.contains_key(&row.chromosome) {
                    order.push(row.chromosome.clone());
                }
                by_chrom.entry(row.chromosome.clone()).or_default().push((line_no, row));
            }
            Ok(None) => {
                let name = line.split('\t').next().unwrap_or_default().to_string();
                *skipped_names.entry(name).or_default() += 1;
            }
            Err(e) => out.reject(mode, e)?,
        }
    }
    for (name, n) in skipped_names {
        out.warnings.push(format!("skipped {n} band(s) on non-nuclear sequence {name}"));
    }

    for chrom in order {
        let mut bands = by_chrom.remove(&chrom).unwrap_or_default();
        bands.sort_by_key(|(_, r)| (r.start_bp, r.end_bp));
        let mut cursor = 0u64;
        let mut prev_name = String::new();
        for (line_no, row) in bands {
            if row.start_bp < cursor {
                out.reject(
                    mode,
                    ParseError::OverlapDetected {
                        line: line_no,
                        chromosome: chrom.clone(),
                        band_a: prev_name.clone(),
                        band_b: row.band_name.clone(),
                    },
                )?;
                continue;
            }
            if row.start_bp > cursor {
                // Gaps cannot be repaired by dropping a line, so they are
                // fatal in both modes.
                return Err(ParseError::GapDetected {
                    line: line_no,
                    chromosome: chrom,
                    position: cursor,
                });
            }
            cursor = row.end_bp;
            prev_name = row.band_name.clone();
            out.rows.push(row);
        }
    }
    Ok(out)
}

fn parse_gene_line(line_no: usize, line: &str) -> Result<Option<GeneRow>, ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(ParseError::MalformedLine {
            line: line_no,
            reason: format!("expected 5 tab-separated fields, found {}", fields.len()),
        });
    }
    let chromosome = match normalize_chromosome(fields[0]) {
        ChromName::Keep(c) => c,
        ChromName::Skip => return Ok(None),
    };
    let start = parse_u64(fields[1], "start", line_no)?;
    let end = parse_u64(fields[2], "end", line_no)?;
    if start == 0 || start > end {
        return Err(ParseError::MalformedLine {
            line: line_no,
            reason: format!("need 1 <= start <= end, got start {start} end {end}"),
        });
    }
    let strand = match fields[3] {
        "+" => Strand::Plus,
        "-" => Strand::Minus,
        other => {
            return Err(ParseError::BadStrand {
                line: line_no,
                strand: other.to_string(),
            })
        }
    };
    if fields[4].is_empty() {
        return Err(ParseError::MalformedLine {
            line: line_no,
            reason: "empty gene symbol".into(),
        });
    }
    Ok(Some(GeneRow {
        chromosome,
        start_bp: start - 1,
        end_bp: end,
        strand,
        symbol: fields[4].to_string(),
    }))
}

/// Parse the 5-column gene table. Coordinates are converted from 1-based
/// inclusive to 0-based half-open.
pub fn parse_gene_table(text: &str, mode: ParseMode) -> Result<Parsed<GeneRow>, ParseError> {
    let mut out = Parsed::default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, header)) if header == GENE_HEADER => {}
        _ => {
            return Err(ParseError::HeaderMissing {
                line: 1,
                expected: GENE_HEADER.to_string(),
            })
        }
    }
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut skipped = 0usize;
    for (line_no, line) in lines.filter(|(_, l)| !l.is_empty()) {
        match parse_gene_line(line_no, line) {
            Ok(Some(row)) => {
                if !seen.insert((row.symbol.clone(), row.chromosome.clone())) {
                    out.reject(
                        mode,
                        ParseError::DuplicateSymbol {
                            line: line_no,
                            symbol: row.symbol,
                            chromosome: row.chromosome,
                        },
                    )?;
                    continue;
                }
                out.rows.push(row);
            }
            Ok(None) => skipped += 1,
            Err(e) => out.reject(mode, e)?,
        }
    }
    if skipped > 0 {
        out.warnings.push(format!("skipped {skipped} gene(s) on non-nuclear sequences"));
    }
    Ok(out)
}

fn valid_color(color: &str) -> bool {
    color.len() == 7
        && color.starts_with('#')
        && color[1..].chars().all(|c| c.is_ascii_hexdigit())
}

/// Parse the phenotype CSV. One row per (phenotype, gene) pair; repeated
/// pairs are collapsed with a warning.
pub fn parse_phenotype_table(text: &str, mode: ParseMode) -> Result<Parsed<PhenotypeRow>, ParseError> {
    let mut out = Parsed::default();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header_ok = match records.next() {
        Some(Ok(rec)) => rec.iter().eq(PHENOTYPE_HEADER.iter().copied()),
        _ => false,
    };
    if !header_ok {
        return Err(ParseError::HeaderMissing {
            line: 1,
            expected: PHENOTYPE_HEADER.join(","),
        });
    }

    let mut colors: HashMap<String, String> = HashMap::new();
    let mut pairs: HashSet<(String, String)> = HashSet::new();
    for rec in records {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                out.reject(
                    mode,
                    ParseError::MalformedLine {
                        line,
                        reason: e.to_string(),
                    },
                )?;
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != 3 || rec.iter().any(str::is_empty) {
            out.reject(
                mode,
                ParseError::MalformedLine {
                    line,
                    reason: format!("expected 3 non-empty fields, found {}", rec.len()),
                },
            )?;
            continue;
        }
        let (phenotype, color, symbol) = (&rec[0], &rec[1], &rec[2]);
        if !valid_color(color) {
            out.reject(
                mode,
                ParseError::BadColor {
                    line,
                    color: color.to_string(),
                },
            )?;
            continue;
        }
        let color = color.to_ascii_uppercase();
        match colors.get(phenotype) {
            Some(existing) if *existing != color => {
                out.reject(
                    mode,
                    ParseError::ColorConflict {
                        line,
                        phenotype: phenotype.to_string(),
                    },
                )?;
                continue;
            }
            Some(_) => {}
            None => {
                colors.insert(phenotype.to_string(), color.clone());
            }
        }
        if !pairs.insert((phenotype.to_string(), symbol.to_string())) {
            out.warnings.push(format!("line {line}: repeated pair {phenotype},{symbol}"));
            continue;
        }
        out.rows.push(PhenotypeRow {
            phenotype: phenotype.to_string(),
            color,
            symbol: symbol.to_string(),
        });
    }
    Ok(out)
}

pub fn write_cytobands(rows: &[CytobandRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(
            s,
            "chr{}\t{}\t{}\t{}\t{}",
            r.chromosome,
            r.start_bp,
            r.end_bp,
            r.band_name,
            r.stain.name()
        );
    }
    s
}

pub fn write_gene_table(rows: &[GeneRow]) -> String {
    let mut s = String::from(GENE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "chr{}\t{}\t{}\t{}\t{}",
            r.chromosome,
            r.start_bp + 1,
            r.end_bp,
            r.strand.symbol(),
            r.symbol
        );
    }
    s
}

pub fn write_phenotype_table(rows: &[PhenotypeRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    w.write_record(PHENOTYPE_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([&r.phenotype, &r.color, &r.symbol]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
