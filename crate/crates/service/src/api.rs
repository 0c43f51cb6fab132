//! HTTP routes. Every handler delegates to one store or engine call.

use std::collections::BTreeSet;
use std::net::SocketAddr;

use axum::extract::{FromRequest, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use foldscope_core::{
    build_assembly, ingest, Arm, Event, GenomeAssembly, InsetId, LayoutConfig, ModelConfig, ParseMode, Span, Stain,
    TaskKind,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::render::{render_svg, SvgOptions};
use crate::report::metrics_report;
use crate::session::{InsetPatch, OpOutcome, SessionOp};
use crate::store::Store;

/// JSON body whose rejections map to 400.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ServiceError))]
pub struct Body<T>(pub T);

pub fn router(store: Store) -> Router {
    Router::new()
        .route("/assemblies", get(list_assemblies).post(upload_assembly))
        .route("/assemblies/{id}/chromosomes", get(chromosomes))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/fold", post(fold))
        .route("/sessions/{id}/layout/{chromosome}", get(layout))
        .route("/sessions/{id}/insets", get(list_insets).post(create_inset))
        .route("/sessions/{id}/insets/{iid}", patch(patch_inset).get(get_inset))
        .route("/sessions/{id}/insets/{iid}/content", get(inset_content))
        .route("/sessions/{id}/events", get(list_events).post(append_events))
        .route("/sessions/{id}/metrics", get(metrics))
        .route("/sessions/{id}/tasks", get(list_tasks).post(create_task))
        .route("/sessions/{id}/answer", post(answer))
        .with_state(store)
}

pub async fn serve(store: Store, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

type ApiResult<T> = Result<T, ServiceError>;

#[derive(Debug, Deserialize)]
struct UploadQuery {
    #[serde(default)]
    mode: ParseMode,
    name: Option<String>,
    id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UploadReport {
    pub assembly_id: String,
    pub name: String,
    pub chromosomes: usize,
    pub total_length_bp: u64,
    pub genes: usize,
    pub phenotypes: usize,
    pub warnings: Vec<String>,
    pub skipped: Vec<serde_json::Value>,
}

async fn upload_assembly(
    State(store): State<Store>,
    query: Result<Query<UploadQuery>, axum::extract::rejection::QueryRejection>,
    mut multipart: Multipart,
) -> ApiResult<(StatusCode, Json<UploadReport>)> {
    let Query(query) = query?;
    let (mut bands, mut genes, mut phenotypes) = (None, None, None);
    while let Some(field) = multipart.next_field().await? {
        let name = field.name().unwrap_or_default().to_string();
        let text = field.text().await?;
        match name.as_str() {
            "cytobands" => bands = Some(text),
            "genes" => genes = Some(text),
            "phenotypes" => phenotypes = Some(text),
            other => return Err(ServiceError::invalid(format!("unexpected form field {other:?}"))),
        }
    }
    let bands = bands.ok_or_else(|| ServiceError::invalid("missing form field \"cytobands\""))?;
    let genes = genes.ok_or_else(|| ServiceError::invalid("missing form field \"genes\""))?;
    let bands = ingest::parse_cytobands(&bands, query.mode)?;
    let genes = ingest::parse_gene_table(&genes, query.mode)?;
    let phenotypes = match phenotypes {
        Some(text) => ingest::parse_phenotype_table(&text, query.mode)?,
        None => Default::default(),
    };
    let name = query.name.unwrap_or_else(|| ModelConfig::default().name);
    let assembly = build_assembly(
        &bands.rows,
        &genes.rows,
        &phenotypes.rows,
        &ModelConfig {
            name: name.clone(),
            ..ModelConfig::default()
        },
    )?;
    let report = UploadReport {
        assembly_id: String::new(),
        name,
        chromosomes: assembly.chromosomes.len(),
        total_length_bp: assembly.total_length(),
        genes: assembly.total_genes(),
        phenotypes: assembly.phenotypes.len(),
        warnings: [bands.warnings, genes.warnings, phenotypes.warnings].concat(),
        skipped: bands
            .skipped
            .iter()
            .chain(&genes.skipped)
            .chain(&phenotypes.skipped)
            .map(|e| serde_json::json!({ "line": e.line(), "message": e.to_string(), "detail": e }))
            .collect(),
    };
    let assembly_id = store.add_assembly(assembly, query.id)?;
    Ok((StatusCode::CREATED, Json(UploadReport { assembly_id, ..report })))
}

async fn list_assemblies(State(store): State<Store>) -> Json<Vec<String>> {
    Json(store.assembly_ids())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubsectionSummary {
    pub name: String,
    pub span: Span,
    pub stain: Stain,
    pub gene_count: u32,
    pub count_bin: u8,
    pub markers: BTreeSet<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegionSummary {
    pub name: String,
    pub arm: Arm,
    pub span: Span,
    pub stain: Stain,
    pub gene_count: u32,
    pub count_bin: u8,
    pub markers: BTreeSet<String>,
    pub subsections: Vec<SubsectionSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChromosomeSummary {
    pub id: String,
    pub length_bp: u64,
    pub gene_count: usize,
    pub centromere: Span,
    pub regions: Vec<RegionSummary>,
}

fn summarize(assembly: &GenomeAssembly) -> Vec<ChromosomeSummary> {
    assembly
        .chromosomes
        .iter()
        .map(|c| ChromosomeSummary {
            id: c.id.clone(),
            length_bp: c.length_bp,
            gene_count: c.gene_count(),
            centromere: c.centromere,
            regions: c
                .regions
                .iter()
                .map(|r| RegionSummary {
                    name: r.name.clone(),
                    arm: r.arm,
                    span: r.span,
                    stain: r.stain,
                    gene_count: r.gene_count,
                    count_bin: r.count_bin,
                    markers: assembly.span_markers(c, r.span),
                    subsections: r
                        .subsections
                        .iter()
                        .map(|s| SubsectionSummary {
                            name: s.name.clone(),
                            span: s.span,
                            stain: s.stain,
                            gene_count: s.gene_count,
                            count_bin: assembly.gene_count_bin(s.gene_count),
                            markers: assembly.span_markers(c, s.span),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect()
}

async fn chromosomes(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    let assembly = store.assembly(&id)?;
    Ok(Json(serde_json::json!({
        "assembly_id": id,
        "name": assembly.name,
        "bin_edges": assembly.bin_edges,
        "phenotypes": assembly.phenotypes.iter().map(|p| serde_json::json!({"name": p.name, "color": p.color})).collect::<Vec<_>>(),
        "chromosomes": summarize(&assembly),
    })))
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    assembly_id: String,
    #[serde(default)]
    config: Option<LayoutConfig>,
}

async fn create_session(State(store): State<Store>, Body(req): Body<CreateSession>) -> ApiResult<impl IntoResponse> {
    let session = store.create_session(&req.assembly_id, req.config)?;
    Ok((
        StatusCode::CREATED,
        Json(serde_json::json!({
            "session_id": session.header.id,
            "assembly_id": session.header.assembly_id,
            "created_at_ms": session.header.created_at_ms,
        })),
    ))
}

async fn get_session(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Response> {
    let (session, _) = store.session(&id)?;
    Ok(Json(session.as_ref()).into_response())
}

fn outcome(o: OpOutcome) -> Response {
    Json(o).into_response()
}

async fn fold(State(store): State<Store>, Path(id): Path<String>, Body(op): Body<FoldRequest>) -> ApiResult<Response> {
    let op = SessionOp::Fold {
        chromosome: op.chromosome,
        verb: op.verb,
        target: op.target,
    };
    Ok(outcome(store.apply(&id, op)?))
}

#[derive(Debug, Deserialize)]
struct FoldRequest {
    chromosome: String,
    verb: foldscope_core::fold::FoldVerb,
    target: String,
}

#[derive(Debug, Deserialize)]
struct LayoutQuery {
    format: Option<String>,
    scale: Option<f64>,
}

async fn layout(
    State(store): State<Store>,
    Path((id, chromosome)): Path<(String, String)>,
    query: Result<Query<LayoutQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Response> {
    let Query(query) = query?;
    let (session, assembly) = store.session(&id)?;
    let map = session.layout(&assembly, &chromosome)?;
    match query.format.as_deref() {
        None | Some("json") => Ok(Json(map.to_json()).into_response()),
        Some("svg") => {
            let mut opts = SvgOptions::default();
            if let Some(scale) = query.scale {
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(ServiceError::invalid("scale must be positive"));
                }
                opts.scale = scale;
            }
            let svg = render_svg(&assembly, &map, &opts);
            Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
        }
        Some(other) => Err(ServiceError::invalid(format!("unknown format {other:?}"))),
    }
}

#[derive(Debug, Deserialize)]
struct CreateInset {
    chromosome: String,
    start: u64,
    end: u64,
    #[serde(default)]
    frame: Option<foldscope_core::Frame>,
}

async fn create_inset(State(store): State<Store>, Path(id): Path<String>, Body(req): Body<CreateInset>) -> ApiResult<Response> {
    let op = SessionOp::CreateInset {
        chromosome: req.chromosome,
        start: req.start,
        end: req.end,
        frame: req.frame,
    };
    Ok((StatusCode::CREATED, outcome(store.apply(&id, op)?)).into_response())
}

async fn list_insets(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Response> {
    let (session, _) = store.session(&id)?;
    Ok(Json(session.insets.iter().collect::<Vec<_>>()).into_response())
}

async fn get_inset(State(store): State<Store>, Path((id, iid)): Path<(String, u64)>) -> ApiResult<Response> {
    let (session, _) = store.session(&id)?;
    Ok(Json(session.insets.get(InsetId(iid))?).into_response())
}

async fn patch_inset(
    State(store): State<Store>,
    Path((id, iid)): Path<(String, u64)>,
    Body(patch): Body<InsetPatch>,
) -> ApiResult<Response> {
    Ok(outcome(store.apply(&id, SessionOp::PatchInset { inset: InsetId(iid), patch })?))
}

#[derive(Debug, Deserialize)]
struct ContentQuery {
    rows: Option<usize>,
}

pub const DEFAULT_VIEWPORT_ROWS: usize = 20;

async fn inset_content(
    State(store): State<Store>,
    Path((id, iid)): Path<(String, u64)>,
    query: Result<Query<ContentQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Response> {
    let Query(query) = query?;
    let (session, assembly) = store.session(&id)?;
    let page = session
        .insets
        .content(&assembly, InsetId(iid), query.rows.unwrap_or(DEFAULT_VIEWPORT_ROWS))?;
    Ok(Json(page).into_response())
}

#[derive(Debug, Deserialize)]
struct AppendEvents {
    events: Vec<Event>,
}

async fn append_events(State(store): State<Store>, Path(id): Path<String>, Body(req): Body<AppendEvents>) -> ApiResult<Response> {
    Ok(outcome(store.apply(&id, SessionOp::AppendEvents { events: req.events })?))
}

async fn list_events(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Response> {
    let (session, _) = store.session(&id)?;
    Ok(Json(session.events.events()).into_response())
}

#[derive(Debug, Deserialize)]
struct MetricsQuery {
    task: Option<u64>,
    chromosome: Option<String>,
}

async fn metrics(
    State(store): State<Store>,
    Path(id): Path<String>,
    query: Result<Query<MetricsQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Response> {
    let Query(query) = query?;
    let (session, assembly) = store.session(&id)?;
    let report = match (query.task, query.chromosome) {
        (Some(task), _) => {
            let record = session.task(task)?;
            metrics_report(&assembly, &session.events, &record.spec.chromosome_id, Some(&record.spec))?
        }
        (None, Some(chromosome)) => metrics_report(&assembly, &session.events, &chromosome, None)?,
        (None, None) => return Err(ServiceError::invalid("pass either task=<id> or chromosome=<id>")),
    };
    Ok(Json(report).into_response())
}

#[derive(Debug, Deserialize)]
struct CreateTask {
    kind: TaskKind,
    seed: u64,
}

async fn create_task(State(store): State<Store>, Path(id): Path<String>, Body(req): Body<CreateTask>) -> ApiResult<Response> {
    let op = SessionOp::CreateTask {
        kind: req.kind,
        seed: req.seed,
    };
    Ok((StatusCode::CREATED, outcome(store.apply(&id, op)?)).into_response())
}

async fn list_tasks(State(store): State<Store>, Path(id): Path<String>) -> ApiResult<Response> {
    let (session, _) = store.session(&id)?;
    Ok(Json(&session.tasks).into_response())
}

#[derive(Debug, Deserialize)]
struct AnswerRequest {
    task_id: u64,
    t_ms: u64,
    answer: foldscope_core::Answer,
}

async fn answer(State(store): State<Store>, Path(id): Path<String>, Body(req): Body<AnswerRequest>) -> ApiResult<Response> {
    let op = SessionOp::SubmitAnswer {
        task: req.task_id,
        t_ms: req.t_ms,
        answer: req.answer,
    };
    Ok(outcome(store.apply(&id, op)?))
}
