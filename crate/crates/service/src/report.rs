//! Per-chromosome interaction measures, optionally tied to a task.

use foldscope_core::metrics::{analysis_time, exploration_percentage, time_to_first_hit};
use foldscope_core::tasks::target_regions;
use foldscope_core::{EventLog, GenomeAssembly, Span, TaskKind, TaskSpec};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetHit {
    pub region: String,
    pub span: Span,
    pub time_to_first_hit_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub chromosome: String,
    pub chromosome_length_bp: u64,
    /// Events on this chromosome.
    pub events: usize,
    pub exploration: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<TaskKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<TargetHit>,
    /// Compare tasks only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis_time_ms: Option<u64>,
}

/// Measures over the events of `log` on `chromosome`. With a task, the
/// chromosome is the task's and its target regions get first-hit times.
pub fn metrics_report(
    assembly: &GenomeAssembly,
    log: &EventLog,
    chromosome: &str,
    task: Option<&TaskSpec>,
) -> Result<MetricsReport, ServiceError> {
    let chromosome = task.map_or(chromosome, |t| t.chromosome_id.as_str());
    let chrom = assembly
        .chromosome(chromosome)
        .map_err(|e| ServiceError::not_found("unknown_chromosome", e.to_string()))?;
    let log = log.for_chromosome(chromosome);
    let mut report = MetricsReport {
        chromosome: chrom.id.clone(),
        chromosome_length_bp: chrom.length_bp,
        events: log.len(),
        exploration: exploration_percentage(&log, chrom.length_bp)?,
        kind: task.map(|t| t.kind()),
        targets: Vec::new(),
        analysis_time_ms: None,
    };
    if let Some(task) = task {
        for r in target_regions(assembly, task)? {
            report.targets.push(TargetHit {
                region: r.name.clone(),
                span: r.span,
                time_to_first_hit_ms: time_to_first_hit(&log, r.span),
            });
        }
        if let (TaskKind::Compare, [a, b]) = (task.kind(), report.targets.as_slice()) {
            report.analysis_time_ms = analysis_time(&log, a.span, b.span);
        }
    }
    Ok(report)
}

impl MetricsReport {
    /// `key\tvalue` lines; absent values print as `none`.
    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<u64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        let mut out = format!(
            "chromosome\t{}\nlength_bp\t{}\nevents\t{}\nexploration\t{:.3}\n",
            self.chromosome, self.chromosome_length_bp, self.events, self.exploration
        );
        if let Some(kind) = self.kind {
            out.push_str(&format!("task\t{kind}\n"));
        }
        for t in &self.targets {
            out.push_str(&format!("time_to_first_hit_ms\t{}\t{}\n", t.region, opt(t.time_to_first_hit_ms)));
        }
        if self.kind == Some(TaskKind::Compare) {
            out.push_str(&format!("analysis_time_ms\t{}\n", opt(self.analysis_time_ms)));
        }
        out
    }
}
