use std::convert::Infallible;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use seacat_core::catalog::{Catalog, ImageEntry, Localization, VerificationState};
use seacat_core::ingest::{csv_header, csv_rows, parse_collection_csv};
use seacat_core::stats::{concepts_per_image, instances_per_image, relative_size_distribution, Histogram};
use seacat_core::taxonomy::{record_for, Rank};
use seacat_core::BoundingBox;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::ApiError;
use crate::events::{emit, EventEnvelope, EventSink, EventType};
use crate::query::{parse_filter, FILTER_PARAMS};

/// Largest accepted request body.
pub const MAX_UPLOAD_BYTES: usize = 256 << 20;

const EXPORT_CHUNK_IMAGES: usize = 256;

#[derive(Clone)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
    pub events: Arc<dyn EventSink>,
    /// Bearer token for writes. `None` refuses every write.
    pub token: Option<String>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/concepts", get(concept_search))
        .route("/concepts/{name}", get(concept))
        .route("/concepts/{name}/descendants", get(descendants))
        .route("/images", get(images))
        .route("/images/{id}", get(image))
        .route("/images/{id}/localizations", post(add_localization))
        .route("/collections", post(create_collection))
        .route("/localizations/{id}", patch(review_localization))
        .route("/export", get(export))
        .route("/stats/instances", get(stats_instances))
        .route("/stats/concepts", get(stats_concepts))
        .route("/stats/sizes", get(stats_sizes))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

type Pairs = Vec<(String, String)>;

fn pairs(q: Result<Query<Pairs>, QueryRejection>) -> Result<Pairs, ApiError> {
    q.map(|Query(p)| p).map_err(|e| ApiError::bad_request("query", e.body_text()))
}

/// Runs catalog work off the async executor so reads stay responsive
/// while a large upload is validated.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

fn authorize(state: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(token) = &state.token else {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "writes_disabled", "no write token is configured"));
    };
    let given = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim);
    match given {
        None => Err(ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "bearer token required")),
        Some(t) if t == token => Ok(()),
        Some(_) => Err(ApiError::new(StatusCode::FORBIDDEN, "forbidden", "bad token")),
    }
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("body", e.to_string()))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    store: StoreHealth,
    taxonomy: TaxonomyHealth,
}

#[derive(Serialize)]
struct StoreHealth {
    status: &'static str,
    backend: String,
    collections: usize,
    images: usize,
    localizations: usize,
    integrity: Option<String>,
}

#[derive(Serialize)]
struct TaxonomyHealth {
    status: &'static str,
    concepts: usize,
    root: String,
    generation: u64,
}

async fn health(State(s): State<AppState>) -> Json<Health> {
    let c = &s.catalog;
    let integrity = c.check_integrity().err();
    let tree = c.taxonomy();
    let store_ok = integrity.is_none();
    Json(Health {
        status: if store_ok { "ok" } else { "degraded" },
        store: StoreHealth {
            status: if store_ok { "ok" } else { "inconsistent" },
            backend: c.store_description(),
            collections: c.collections().len(),
            images: c.image_count(),
            localizations: c.localization_count(),
            integrity,
        },
        taxonomy: TaxonomyHealth {
            status: "ok",
            concepts: tree.len(),
            root: tree.name(tree.root()).to_string(),
            generation: tree.generation(),
        },
    })
}

#[derive(Serialize)]
struct ConceptHit {
    name: String,
    rank: Rank,
    /// The alias that matched, when the match was not on the name.
    #[serde(skip_serializing_if = "Option::is_none")]
    alias: Option<String>,
}

/// Prefix search over names and aliases for autocomplete.
async fn concept_search(State(s): State<AppState>, q: Result<Query<Pairs>, QueryRejection>) -> Result<Response, ApiError> {
    let mut prefix = String::new();
    let mut limit = 20usize;
    for (k, v) in pairs(q)? {
        match k.as_str() {
            "prefix" => prefix = v.trim().to_lowercase(),
            "limit" => {
                limit = v.parse().map_err(|_| ApiError::bad_request("limit", "not a number"))?;
                if !(1..=1000).contains(&limit) {
                    return Err(ApiError::bad_request("limit", "must be between 1 and 1000"));
                }
            }
            other => return Err(ApiError::bad_request(other, "unknown query parameter")),
        }
    }
    let tree = s.catalog.taxonomy();
    let mut hits: Vec<(String, ConceptHit)> = Vec::new();
    for id in tree.ids() {
        let node = tree.node(id);
        let alias = if node.name.to_lowercase().starts_with(&prefix) {
            None
        } else if let Some(a) = node.aliases.iter().find(|a| a.to_lowercase().starts_with(&prefix)) {
            Some(a.clone())
        } else {
            continue;
        };
        hits.push((node.name.to_lowercase(), ConceptHit { name: node.name.clone(), rank: node.rank, alias }));
    }
    hits.sort_by(|a, b| a.0.cmp(&b.0));
    let total = hits.len();
    let body: Vec<ConceptHit> = hits.into_iter().take(limit).map(|(_, h)| h).collect();
    Ok(with_total(Json(body).into_response(), total))
}

async fn concept(State(s): State<AppState>, Path(name): Path<String>) -> Result<Response, ApiError> {
    let tree = s.catalog.taxonomy();
    let id = tree.resolve(&name)?;
    Ok(Json(record_for(&tree, id)).into_response())
}

#[derive(Serialize)]
struct Descendant {
    name: String,
    rank: Rank,
    parent: Option<String>,
}

async fn descendants(State(s): State<AppState>, Path(name): Path<String>) -> Result<Response, ApiError> {
    let tree = s.catalog.taxonomy();
    let id = tree.resolve(&name)?;
    let body: Vec<Descendant> = tree
        .descendants(id)
        .into_iter()
        .map(|d| Descendant {
            name: tree.name(d).to_string(),
            rank: tree.node(d).rank,
            parent: tree.parent(d).map(|p| tree.name(p).to_string()),
        })
        .collect();
    let n = body.len();
    Ok(with_total(Json(body).into_response(), n))
}

fn with_total(mut r: Response, total: usize) -> Response {
    r.headers_mut().insert("x-total-count", HeaderValue::from(total));
    r
}

#[derive(Serialize)]
struct PageBody {
    page: usize,
    page_size: usize,
    total: usize,
    items: Vec<ImageEntry>,
}

async fn images(State(s): State<AppState>, q: Result<Query<Pairs>, QueryRejection>) -> Result<Response, ApiError> {
    let filter = parse_filter(&pairs(q)?, &FILTER_PARAMS)?;
    let catalog = s.catalog.clone();
    let page = blocking(move || Ok(catalog.query(&filter)?)).await?;
    let total = page.total;
    let body = PageBody { page: page.page, page_size: page.page_size, total, items: page.items };
    Ok(with_total(Json(body).into_response(), total))
}

fn parse_uuid(field: &str, raw: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(raw).map_err(|e| ApiError::bad_request(field, e.to_string()))
}

async fn image(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<ImageEntry>, ApiError> {
    let id = parse_uuid("id", &id)?;
    s.catalog.image(id).map(Json).ok_or_else(|| ApiError::not_found(format!("unknown image {id}")))
}

/// Export takes the same filters as `/images` minus pagination.
async fn export(State(s): State<AppState>, q: Result<Query<Pairs>, QueryRejection>) -> Result<Response, ApiError> {
    let filter = parse_filter(&pairs(q)?, &FILTER_PARAMS[..10])?;
    let catalog = s.catalog.clone();
    let entries = blocking(move || Ok(catalog.query_all(&filter)?)).await?;
    let header = std::iter::once(Bytes::from(csv_header()));
    let chunks: Vec<Vec<ImageEntry>> = entries.chunks(EXPORT_CHUNK_IMAGES).map(<[_]>::to_vec).collect();
    let rows = chunks.into_iter().map(|chunk| Bytes::from(chunk.iter().flat_map(csv_rows).collect::<Vec<u8>>()));
    let stream = futures_util::stream::iter(header.chain(rows).map(Ok::<_, Infallible>));
    Ok((
        [(header::CONTENT_TYPE, "text/csv; charset=utf-8"), (header::CONTENT_DISPOSITION, "attachment; filename=\"export.csv\"")],
        Body::from_stream(stream),
    )
        .into_response())
}

#[derive(Serialize)]
struct UploadBody {
    collection: Uuid,
    created: bool,
    images: usize,
    localizations: usize,
    rows: usize,
    warnings: Vec<String>,
}

async fn create_collection(
    State(s): State<AppState>,
    headers: HeaderMap,
    mut form: Multipart,
) -> Result<Response, ApiError> {
    authorize(&s, &headers)?;
    let (mut csv, mut meta) = (None, None);
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::bad_request("multipart", e.body_text()))? {
        let name = field.name().unwrap_or_default().to_string();
        let data = field.bytes().await.map_err(|e| ApiError::bad_request(name.as_str(), e.body_text()))?;
        match name.as_str() {
            "csv" if csv.is_none() => csv = Some(data),
            "meta" if meta.is_none() => meta = Some(data),
            "csv" | "meta" => return Err(ApiError::bad_request(name, "given more than once")),
            other => return Err(ApiError::bad_request(other, "unknown form part; expected csv and meta")),
        }
    }
    let csv = csv.ok_or_else(|| ApiError::bad_request("csv", "missing form part"))?;
    let meta = meta.ok_or_else(|| ApiError::bad_request("meta", "missing form part"))?;
    let meta = String::from_utf8(meta.to_vec()).map_err(|_| ApiError::bad_request("meta", "not valid UTF-8"))?;

    let catalog = s.catalog.clone();
    let (outcome, report, actor) = blocking(move || {
        let parsed = parse_collection_csv(&meta, &csv)?;
        if !parsed.report.is_clean() {
            return Err(ApiError::rows(&parsed.report.errors));
        }
        let actor = parsed.collection.contributor_email.clone();
        let outcome = catalog.ingest(parsed.collection, parsed.images)?;
        Ok((outcome, parsed.report, actor))
    })
    .await?;
    let kind = if outcome.created { EventType::CollectionCreated } else { EventType::ImagesAdded };
    emit(s.events.as_ref(), EventEnvelope::now(kind, outcome.collection, actor));
    let status = if outcome.created { StatusCode::CREATED } else { StatusCode::OK };
    let body = UploadBody {
        collection: outcome.collection,
        created: outcome.created,
        images: outcome.images,
        localizations: outcome.localizations,
        rows: report.rows_read,
        warnings: report.warnings,
    };
    Ok((status, Json(body)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Review {
    state: VerificationState,
    verifier: Option<String>,
}

/// Default reviewer name when the request does not carry one.
const ANONYMOUS_VERIFIER: &str = "api";

async fn review_localization(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    authorize(&s, &headers)?;
    let id = parse_uuid("id", &id)?;
    let review: Review = json_body(&body)?;
    let kind = match review.state {
        VerificationState::Verified => EventType::LocalizationVerified,
        VerificationState::Rejected => EventType::LocalizationRejected,
        VerificationState::Unverified => {
            return Err(ApiError::field(StatusCode::UNPROCESSABLE_ENTITY, "state", "must be verified or rejected"))
        }
    };
    let verifier = review.verifier.unwrap_or_else(|| ANONYMOUS_VERIFIER.to_string());
    let catalog = s.catalog.clone();
    let who = verifier.clone();
    let loc = blocking(move || Ok(catalog.set_verification(id, review.state, &who)?)).await?;
    emit(s.events.as_ref(), EventEnvelope::now(kind, id, verifier.trim()));
    Ok(Json(loc).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewBox {
    concept: String,
    x: f64,
    y: f64,
    width: f64,
    height: f64,
    observer: Option<String>,
    alt_concept: Option<String>,
}

async fn add_localization(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    authorize(&s, &headers)?;
    let image = parse_uuid("id", &id)?;
    let b: NewBox = json_body(&body)?;
    let mut loc = Localization::new(b.concept, BoundingBox::new(b.x, b.y, b.width, b.height));
    loc.observer = b.observer.clone();
    loc.alt_concept = b.alt_concept;
    let catalog = s.catalog.clone();
    let loc = blocking(move || Ok(catalog.add_localization(image, loc)?)).await?;
    let actor = b.observer.unwrap_or_else(|| ANONYMOUS_VERIFIER.to_string());
    emit(s.events.as_ref(), EventEnvelope::now(EventType::LocalizationCreated, loc.uuid, actor));
    Ok((StatusCode::CREATED, Json(loc)).into_response())
}

#[derive(Serialize)]
struct Bin {
    lower: f64,
    upper: f64,
    count: u64,
    percent: f64,
}

#[derive(Serialize)]
struct HistogramBody {
    total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<Rank>,
    #[serde(skip_serializing_if = "Option::is_none")]
    excluded: Option<usize>,
    bins: Vec<Bin>,
}

impl HistogramBody {
    fn new(h: &Histogram<f64>) -> Self {
        let bins = h
            .counts
            .iter()
            .zip(h.percents())
            .enumerate()
            .map(|(i, (&count, percent))| Bin { lower: h.edges[i], upper: h.edges[i + 1], count, percent })
            .collect();
        Self { total: h.total, rank: None, excluded: None, bins }
    }
}

fn no_params(q: Result<Query<Pairs>, QueryRejection>) -> Result<(), ApiError> {
    match pairs(q)?.first() {
        Some((k, _)) => Err(ApiError::bad_request(k.as_str(), "unknown query parameter")),
        None => Ok(()),
    }
}

async fn stats_instances(State(s): State<AppState>, q: Result<Query<Pairs>, QueryRejection>) -> Result<Json<HistogramBody>, ApiError> {
    no_params(q)?;
    let h = instances_per_image::<f64>(&s.catalog.snapshot())?;
    Ok(Json(HistogramBody::new(&h)))
}

async fn stats_concepts(State(s): State<AppState>, q: Result<Query<Pairs>, QueryRejection>) -> Result<Json<HistogramBody>, ApiError> {
    let mut rank = None;
    for (k, v) in pairs(q)? {
        match k.as_str() {
            "rank" => {
                let r: Rank = v.parse().map_err(|e: seacat_core::taxonomy::UnknownRank| ApiError::bad_request("rank", e.to_string()))?;
                if !r.is_ranked() {
                    return Err(ApiError::bad_request("rank", "needs a biological rank"));
                }
                rank = Some(r);
            }
            other => return Err(ApiError::bad_request(other, "unknown query parameter")),
        }
    }
    let rank = rank.ok_or_else(|| ApiError::bad_request("rank", "required"))?;
    let tree = s.catalog.taxonomy();
    let h = concepts_per_image::<f64>(&s.catalog.snapshot(), &tree, rank)?;
    let mut body = HistogramBody::new(&h);
    body.rank = Some(rank);
    Ok(Json(body))
}

async fn stats_sizes(State(s): State<AppState>, q: Result<Query<Pairs>, QueryRejection>) -> Result<Json<HistogramBody>, ApiError> {
    no_params(q)?;
    let d = relative_size_distribution::<f64>(&s.catalog.snapshot())?;
    let mut body = HistogramBody::new(&d.histogram);
    body.excluded = Some(d.excluded);
    Ok(Json(body))
}
