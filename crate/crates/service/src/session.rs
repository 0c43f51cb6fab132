//! Session state and the operations that mutate it.
//!
//! Every mutation is a [`SessionOp`]. Applying the same ops in the same order
//! to a fresh [`Session`] reproduces it exactly, which is what the on-disk op
//! log relies on.

use std::collections::{BTreeMap, BTreeSet};

use foldscope_core::fold::{build_layout, FoldVerb};
use foldscope_core::tasks::{check_answer, generate_task_excluding};
use foldscope_core::{
    Answer, Event, EventKind, EventLog, FoldState, Frame, GenomeAssembly, Inset, InsetBoard, InsetId, LayoutConfig,
    LayoutMap, Span, TaskKind, TaskSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

/// Everything needed to recreate a session before any op is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub id: String,
    pub assembly_id: String,
    pub created_at_ms: u64,
    #[serde(default)]
    pub config: LayoutConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: u64,
    pub spec: TaskSpec,
    pub answer: Option<Answer>,
    pub correct: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub header: SessionHeader,
    /// Chromosomes never folded are all-closed and absent here.
    pub fold_states: BTreeMap<String, FoldState>,
    pub insets: InsetBoard,
    pub events: EventLog,
    pub tasks: Vec<TaskRecord>,
    /// Number of ops applied so far.
    pub op_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsetPatch {
    Scope { start: u64, end: u64 },
    Frame(Frame),
    Locked(bool),
    Scroll(usize),
    ToggleRegion(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SessionOp {
    Fold {
        chromosome: String,
        verb: FoldVerb,
        target: String,
    },
    CreateInset {
        chromosome: String,
        start: u64,
        end: u64,
        #[serde(default)]
        frame: Option<Frame>,
    },
    PatchInset {
        inset: InsetId,
        patch: InsetPatch,
    },
    AppendEvents {
        events: Vec<Event>,
    },
    CreateTask {
        kind: TaskKind,
        seed: u64,
    },
    SubmitAnswer {
        task: u64,
        t_ms: u64,
        answer: Answer,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum OpOutcome {
    Layout(LayoutMap),
    Inset(Inset),
    Events { appended: usize, total: usize },
    Task(TaskRecord),
}

impl Session {
    pub fn new(header: SessionHeader) -> Self {
        Session {
            header,
            fold_states: BTreeMap::new(),
            insets: InsetBoard::new(),
            events: EventLog::new(),
            tasks: Vec::new(),
            op_count: 0,
        }
    }

    pub fn fold_state(&self, chromosome: &str) -> FoldState {
        self.fold_states
            .get(chromosome)
            .cloned()
            .unwrap_or_else(|| FoldState::new(chromosome, self.header.config.clone()))
    }

    pub fn layout(&self, assembly: &GenomeAssembly, chromosome: &str) -> Result<LayoutMap, ServiceError> {
        Ok(build_layout(assembly, &self.fold_state(chromosome))?)
    }

    pub fn task(&self, id: u64) -> Result<&TaskRecord, ServiceError> {
        self.tasks
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| ServiceError::not_found("unknown_task", format!("unknown task {id}")))
    }

    /// Apply `op`. On error the session is left untouched.
    pub fn apply(&mut self, assembly: &GenomeAssembly, op: &SessionOp) -> Result<OpOutcome, ServiceError> {
        let outcome = match op {
            SessionOp::Fold {
                chromosome,
                verb,
                target,
            } => {
                let chrom = assembly.chromosome(chromosome).map_err(|e| {
                    ServiceError::not_found("unknown_chromosome", e.to_string())
                })?;
                let next = self.fold_state(chromosome).apply(chrom, *verb, target)?;
                let layout = build_layout(assembly, &next)?;
                self.fold_states.insert(chromosome.clone(), next);
                OpOutcome::Layout(layout)
            }
            SessionOp::CreateInset {
                chromosome,
                start,
                end,
                frame,
            } => OpOutcome::Inset(self.insets.create(assembly, chromosome, Span::new(*start, *end), *frame)?),
            SessionOp::PatchInset { inset, patch } => {
                let id = *inset;
                let updated = match patch {
                    InsetPatch::Scope { start, end } => self.insets.set_scope(assembly, id, Span::new(*start, *end))?,
                    InsetPatch::Frame(frame) => self.insets.set_frame(id, *frame)?,
                    InsetPatch::Locked(locked) => self.insets.set_locked(id, *locked)?,
                    InsetPatch::Scroll(offset) => self.insets.scroll(assembly, id, *offset)?,
                    InsetPatch::ToggleRegion(region) => self.insets.toggle_region(assembly, id, region)?,
                };
                OpOutcome::Inset(updated)
            }
            SessionOp::AppendEvents { events } => {
                let mut log = self.events.clone();
                for e in events {
                    check_event(assembly, e)?;
                    log.push(e.clone())?;
                }
                self.events = log;
                OpOutcome::Events {
                    appended: events.len(),
                    total: self.events.len(),
                }
            }
            SessionOp::CreateTask { kind, seed } => {
                let used: BTreeSet<String> = self.tasks.iter().map(|t| t.spec.chromosome_id.clone()).collect();
                let spec = generate_task_excluding(assembly, *kind, *seed, &used)?;
                let record = TaskRecord {
                    id: self.tasks.len() as u64 + 1,
                    spec,
                    answer: None,
                    correct: None,
                };
                self.tasks.push(record.clone());
                OpOutcome::Task(record)
            }
            SessionOp::SubmitAnswer { task, t_ms, answer } => {
                let record = self.task(*task)?;
                if record.answer.is_some() {
                    return Err(ServiceError::Conflict {
                        code: "already_answered",
                        message: format!("task {task} already has an answer"),
                    });
                }
                let correct = check_answer(assembly, &record.spec, answer)?;
                let event = Event {
                    t_ms: *t_ms,
                    kind: EventKind::AnswerSubmit,
                    chrom: record.spec.chromosome_id.clone(),
                    start: 0,
                    end: 0,
                    payload: serde_json::to_value(answer).unwrap_or_default(),
                };
                self.events.push(event)?;
                let record = self
                    .tasks
                    .iter_mut()
                    .find(|t| t.id == *task)
                    .expect("task looked up above");
                record.answer = Some(answer.clone());
                record.correct = Some(correct);
                OpOutcome::Task(record.clone())
            }
        };
        self.op_count += 1;
        Ok(outcome)
    }
}

fn check_event(assembly: &GenomeAssembly, e: &Event) -> Result<(), ServiceError> {
    let chrom = assembly
        .chromosome(&e.chrom)
        .map_err(|err| ServiceError::not_found("unknown_chromosome", err.to_string()))?;
    if e.start > e.end || e.end > chrom.length_bp {
        return Err(ServiceError::Invalid {
            code: "invalid_event",
            message: format!(
                "event interval [{}, {}) is outside chromosome {} of length {}",
                e.start, e.end, chrom.id, chrom.length_bp
            ),
        });
    }
    Ok(())
}

/// Rebuild a session from its header and op log.
pub fn replay<'a>(
    header: SessionHeader,
    assembly: &GenomeAssembly,
    ops: impl IntoIterator<Item = &'a SessionOp>,
) -> Result<Session, ServiceError> {
    let mut session = Session::new(header);
    for op in ops {
        session.apply(assembly, op)?;
    }
    Ok(session)
}
