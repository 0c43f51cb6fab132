//! Oracles for the three query tasks (identify a gene-count region, compare
//! strand orientation of two regions, summarize the dominant phenotype),
//! seeded task generation and answer checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Arm, Chromosome, GenomeAssembly, Region, Strand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Identify,
    Compare,
    Summarize,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::Identify, TaskKind::Compare, TaskKind::Summarize];
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Identify => "identify",
            TaskKind::Compare => "compare",
            TaskKind::Summarize => "summarize",
        })
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| format!("unknown task kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskParams {
    Identify { target_gene_count: u32 },
    Compare { region_a: String, region_b: String },
    Summarize { phenotypes: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub chromosome_id: String,
    #[serde(flatten)]
    pub params: TaskParams,
}

impl TaskSpec {
    pub fn kind(&self) -> TaskKind {
        match self.params {
            TaskParams::Identify { .. } => TaskKind::Identify,
            TaskParams::Compare { .. } => TaskKind::Compare,
            TaskParams::Summarize { .. } => TaskKind::Summarize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    Plus,
    Minus,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Answer {
    Identify { region: String },
    Compare { region_a: Dominance, region_b: Dominance },
    Summarize { phenotype: String },
}

impl Answer {
    pub fn kind(&self) -> TaskKind {
        match self {
            Answer::Identify { .. } => TaskKind::Identify,
            Answer::Compare { .. } => TaskKind::Compare,
            Answer::Summarize { .. } => TaskKind::Summarize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhenotypeSummary {
    pub winner: String,
    pub counts: BTreeMap<String, usize>,
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("unknown chromosome {0}")]
    UnknownChromosome(String),
    #[error("unknown region {region} on chromosome {chromosome}")]
    UnknownRegion { chromosome: String, region: String },
    #[error("unknown phenotype {0}")]
    UnknownPhenotype(String),
    #[error("no phenotypes given")]
    NoPhenotypes,
    #[error("no feasible {0} task in this assembly")]
    NoFeasibleTask(TaskKind),
    #[error("{answer} answer given for a {task} task")]
    AnswerTypeMismatch { task: TaskKind, answer: TaskKind },
}

fn chromosome<'a>(assembly: &'a GenomeAssembly, id: &str) -> Result<&'a Chromosome, TaskError> {
    assembly
        .chromosome(id)
        .map_err(|_| TaskError::UnknownChromosome(id.to_string()))
}

/// Regions whose gene count is exactly `n`, in genomic order.
pub fn find_regions_with_gene_count<'a>(
    assembly: &'a GenomeAssembly,
    chromosome_id: &str,
    n: u32,
) -> Result<Vec<&'a Region>, TaskError> {
    let chrom = chromosome(assembly, chromosome_id)?;
    Ok(chrom.regions.iter().filter(|r| r.gene_count == n).collect())
}

fn dominance_of(chrom: &Chromosome, region: &Region) -> Dominance {
    let (plus, minus) = chrom
        .genes_starting_in(region.span)
        .iter()
        .fold((0usize, 0usize), |(p, m), g| match g.strand {
            Strand::Plus => (p + 1, m),
            Strand::Minus => (p, m + 1),
        });
    match plus.cmp(&minus) {
        std::cmp::Ordering::Greater => Dominance::Plus,
        std::cmp::Ordering::Less => Dominance::Minus,
        std::cmp::Ordering::Equal => Dominance::Tie,
    }
}

/// Strand majority among genes starting in the region.
pub fn orientation_dominance(assembly: &GenomeAssembly, chromosome_id: &str, region: &str) -> Result<Dominance, TaskError> {
    let chrom = chromosome(assembly, chromosome_id)?;
    let r = chrom.region(region).ok_or_else(|| TaskError::UnknownRegion {
        chromosome: chromosome_id.to_string(),
        region: region.to_string(),
    })?;
    Ok(dominance_of(chrom, r))
}

fn phenotype_counts(
    assembly: &GenomeAssembly,
    chrom: &Chromosome,
    names: &[String],
) -> Result<BTreeMap<String, usize>, TaskError> {
    names
        .iter()
        .map(|name| {
            let p = assembly
                .phenotype(name)
                .ok_or_else(|| TaskError::UnknownPhenotype(name.clone()))?;
            let n = chrom.genes.iter().filter(|g| p.gene_symbols.contains(&g.symbol)).count();
            Ok((name.clone(), n))
        })
        .collect()
}

/// The phenotype annotating the most genes on the chromosome. Ties go to the
/// lexicographically smallest name and set `tied`.
pub fn dominant_phenotype(
    assembly: &GenomeAssembly,
    chromosome_id: &str,
    phenotype_names: &[String],
) -> Result<PhenotypeSummary, TaskError> {
    let chrom = chromosome(assembly, chromosome_id)?;
    let counts = phenotype_counts(assembly, chrom, phenotype_names)?;
    let max = counts.values().copied().max().ok_or(TaskError::NoPhenotypes)?;
    let mut leaders = counts.iter().filter(|(_, &n)| n == max).map(|(k, _)| k);
    let winner = leaders.next().cloned().ok_or(TaskError::NoPhenotypes)?;
    let tied = leaders.next().is_some();
    Ok(PhenotypeSummary { winner, counts, tied })
}

/// Gene counts achieved by exactly one nonzero region of `chrom`.
fn unique_counts(chrom: &Chromosome) -> Vec<u32> {
    let mut freq: BTreeMap<u32, usize> = BTreeMap::new();
    for r in &chrom.regions {
        *freq.entry(r.gene_count).or_default() += 1;
    }
    freq.into_iter()
        .filter(|&(n, k)| n > 0 && k == 1)
        .map(|(n, _)| n)
        .collect()
}

fn decisive_regions(chrom: &Chromosome, arm: Arm) -> Vec<&Region> {
    chrom
        .regions
        .iter()
        .filter(|r| r.arm == arm && dominance_of(chrom, r) != Dominance::Tie)
        .collect()
}

/// Three-phenotype subsets with pairwise distinct counts on `chrom`.
fn ordered_triples(assembly: &GenomeAssembly, chrom: &Chromosome) -> Vec<Vec<String>> {
    let names: Vec<String> = assembly.phenotypes.iter().map(|p| p.name.clone()).collect();
    let Ok(counts) = phenotype_counts(assembly, chrom, &names) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            for k in j + 1..names.len() {
                let c: BTreeSet<usize> = [&names[i], &names[j], &names[k]]
                    .iter()
                    .map(|n| counts[*n])
                    .collect();
                if c.len() == 3 {
                    out.push(vec![names[i].clone(), names[j].clone(), names[k].clone()]);
                }
            }
        }
    }
    out
}

pub fn generate_task(assembly: &GenomeAssembly, kind: TaskKind, seed: u64) -> Result<TaskSpec, TaskError> {
    generate_task_excluding(assembly, kind, seed, &BTreeSet::new())
}

/// Seeded task generation over chromosomes not listed in `used`.
///
/// * identify: a nonzero gene count held by exactly one region;
/// * compare: one p-arm and one q-arm region, neither tied in orientation;
/// * summarize: three phenotypes whose gene counts are strictly ordered.
pub fn generate_task_excluding(
    assembly: &GenomeAssembly,
    kind: TaskKind,
    seed: u64,
    used: &BTreeSet<String>,
) -> Result<TaskSpec, TaskError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = assembly.chromosomes.iter().filter(|c| !used.contains(&c.id));
    let none = || TaskError::NoFeasibleTask(kind);
    match kind {
        TaskKind::Identify => {
            let options: Vec<(&Chromosome, Vec<u32>)> = pool
                .map(|c| (c, unique_counts(c)))
                .filter(|(_, counts)| !counts.is_empty())
                .collect();
            let (chrom, counts) = options.choose(&mut rng).ok_or_else(none)?;
            let n = *counts.choose(&mut rng).ok_or_else(none)?;
            Ok(TaskSpec {
                chromosome_id: chrom.id.clone(),
                params: TaskParams::Identify { target_gene_count: n },
            })
        }
        TaskKind::Compare => {
            let options: Vec<(&Chromosome, Vec<&Region>, Vec<&Region>)> = pool
                .map(|c| (c, decisive_regions(c, Arm::P), decisive_regions(c, Arm::Q)))
                .filter(|(_, p, q)| !p.is_empty() && !q.is_empty())
                .collect();
            let (chrom, p, q) = options.choose(&mut rng).ok_or_else(none)?;
            let a = p.choose(&mut rng).ok_or_else(none)?;
            let b = q.choose(&mut rng).ok_or_else(none)?;
            Ok(TaskSpec {
                chromosome_id: chrom.id.clone(),
                params: TaskParams::Compare {
                    region_a: a.name.clone(),
                    region_b: b.name.clone(),
                },
            })
        }
        TaskKind::Summarize => {
            let options: Vec<(&Chromosome, Vec<Vec<String>>)> = pool
                .map(|c| (c, ordered_triples(assembly, c)))
                .filter(|(_, t)| !t.is_empty())
                .collect();
            let (chrom, triples) = options.choose(&mut rng).ok_or_else(none)?;
            let phenotypes = triples.choose(&mut rng).ok_or_else(none)?.clone();
            Ok(TaskSpec {
                chromosome_id: chrom.id.clone(),
                params: TaskParams::Summarize { phenotypes },
            })
        }
    }
}

/// Regions a participant has to locate for `task`: the unique gene-count
/// match for identify, both named regions for compare, none for summarize.
pub fn target_regions<'a>(assembly: &'a GenomeAssembly, task: &TaskSpec) -> Result<Vec<&'a Region>, TaskError> {
    let chrom = chromosome(assembly, &task.chromosome_id)?;
    let lookup = |name: &str| {
        chrom.region(name).ok_or_else(|| TaskError::UnknownRegion {
            chromosome: task.chromosome_id.clone(),
            region: name.to_string(),
        })
    };
    match &task.params {
        TaskParams::Identify { target_gene_count } => {
            find_regions_with_gene_count(assembly, &task.chromosome_id, *target_gene_count)
        }
        TaskParams::Compare { region_a, region_b } => Ok(vec![lookup(region_a)?, lookup(region_b)?]),
        TaskParams::Summarize { .. } => Ok(Vec::new()),
    }
}

/// The answer the oracles give for `task`.
pub fn oracle_answer(assembly: &GenomeAssembly, task: &TaskSpec) -> Result<Answer, TaskError> {
    match &task.params {
        TaskParams::Identify { target_gene_count } => {
            let regions = find_regions_with_gene_count(assembly, &task.chromosome_id, *target_gene_count)?;
            let first = regions.first().ok_or(TaskError::NoFeasibleTask(TaskKind::Identify))?;
            Ok(Answer::Identify {
                region: first.name.clone(),
            })
        }
        TaskParams::Compare { region_a, region_b } => Ok(Answer::Compare {
            region_a: orientation_dominance(assembly, &task.chromosome_id, region_a)?,
            region_b: orientation_dominance(assembly, &task.chromosome_id, region_b)?,
        }),
        TaskParams::Summarize { phenotypes } => Ok(Answer::Summarize {
            phenotype: dominant_phenotype(assembly, &task.chromosome_id, phenotypes)?.winner,
        }),
    }
}

pub fn check_answer(assembly: &GenomeAssembly, task: &TaskSpec, answer: &Answer) -> Result<bool, TaskError> {
    if task.kind() != answer.kind() {
        return Err(TaskError::AnswerTypeMismatch {
            task: task.kind(),
            answer: answer.kind(),
        });
    }
    match (&task.params, answer) {
        (TaskParams::Identify { target_gene_count }, Answer::Identify { region }) => {
            let hits = find_regions_with_gene_count(assembly, &task.chromosome_id, *target_gene_count)?;
            Ok(hits.len() == 1 && hits[0].name == *region)
        }
        _ => Ok(oracle_answer(assembly, task)? == *answer),
    }
}
