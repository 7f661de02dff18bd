//! Annotation API.
//!
//! - `GET /api/plan/{annotator}`: the annotator's items with the two outputs
//!   in plan display order, labelled by slot only.
//! - `POST /api/ratings`: one item's ratings, by slot or system id; 409 on a
//!   duplicate.
//! - `GET /api/progress/{annotator}`
//!
//! The data directory holds `plan.json`, `items.json` and `ratings.jsonl`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use simpkit::agreement::{AssignmentPlan, Criterion, ItemId, Rating, RatingStore};
use simpkit::{Error, Result};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::config::RunConfig;

/// Texts shown for one item.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServeItem {
    pub doc_id: String,
    pub sent_index: usize,
    pub source: String,
    /// System id to output text.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
struct SlotView {
    slot: u8,
    label: String,
    text: String,
}

#[derive(Debug, Serialize)]
struct ItemView {
    doc_id: String,
    sent_index: usize,
    source: String,
    outputs: Vec<SlotView>,
}

#[derive(Debug, Serialize)]
struct PlanView {
    annotator: String,
    items: Vec<ItemView>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotRating {
    #[serde(default)]
    pub slot: Option<u8>,
    #[serde(default)]
    pub system: Option<String>,
    pub criterion: Criterion,
    pub value: u8,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Submission {
    pub annotator: String,
    pub doc_id: String,
    pub sent_index: usize,
    pub ratings: Vec<SlotRating>,
}

pub struct AppState {
    plan: AssignmentPlan,
    items: HashMap<ItemId, ServeItem>,
    store: RatingStore,
}

struct ApiError(StatusCode, String);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Conflict(_) => StatusCode::CONFLICT,
            Error::Domain(_) | Error::Parse { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(simpkit::error::Locator::line(path.display().to_string(), e.line()), e.to_string())
    })
}

impl AppState {
    /// Loads the plan, item texts and ratings store from `data_dir`.
    pub fn load(data_dir: &Path) -> Result<Self> {
        let plan: AssignmentPlan = read_json(&data_dir.join("plan.json"))?;
        let list: Vec<ServeItem> = read_json(&data_dir.join("items.json"))?;
        let items: HashMap<ItemId, ServeItem> = list
            .into_iter()
            .map(|i| (ItemId::new(i.doc_id.clone(), i.sent_index), i))
            .collect();
        for task in plan.tasks.values().flatten() {
            let item = items
                .get(task)
                .ok_or_else(|| Error::Integrity(format!("planned item {task} is missing from items.json")))?;
            for s in &plan.systems {
                if !item.outputs.contains_key(s) {
                    return Err(Error::Integrity(format!("item {task} has no output for system {s}")));
                }
            }
        }
        let store = RatingStore::open(data_dir.join("ratings.jsonl"))?;
        Ok(AppState { plan, items, store })
    }

    fn tasks(&self, annotator: &str) -> std::result::Result<&Vec<ItemId>, ApiError> {
        self.plan
            .tasks
            .get(annotator)
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown annotator {annotator:?}")))
    }
}

async fn get_plan(
    State(state): State<Arc<AppState>>,
    UrlPath(annotator): UrlPath<String>,
) -> std::result::Result<Json<PlanView>, ApiError> {
    let tasks = state.tasks(&annotator)?;
    let mut items = Vec::with_capacity(tasks.len());
    for id in tasks {
        let item = &state.items[id];
        let order = state
            .plan
            .order_for(&annotator, id)
            .ok_or_else(|| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("no display order for {id}")))?;
        let outputs = order
            .iter()
            .enumerate()
            .map(|(k, system)| SlotView {
                slot: k as u8 + 1,
                label: format!("Output {}", k + 1),
                text: item.outputs[system].clone(),
            })
            .collect();
        items.push(ItemView {
            doc_id: item.doc_id.clone(),
            sent_index: item.sent_index,
            source: item.source.clone(),
            outputs,
        });
    }
    Ok(Json(PlanView { annotator, items }))
}

async fn post_ratings(
    State(state): State<Arc<AppState>>,
    Json(sub): Json<Submission>,
) -> std::result::Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let tasks = state.tasks(&sub.annotator)?;
    let id = ItemId::new(sub.doc_id.clone(), sub.sent_index);
    if !tasks.contains(&id) {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("item {id} is not assigned to {}", sub.annotator),
        ));
    }
    let order = state.plan.order_for(&sub.annotator, &id).expect("planned items have an order");
    let mut batch = Vec::with_capacity(sub.ratings.len());
    for r in &sub.ratings {
        let system = match (r.slot, &r.system) {
            (Some(s @ 1..=2), None) => order[s as usize - 1].clone(),
            (None, Some(sys)) if state.plan.systems.contains(sys) => sys.clone(),
            _ => {
                return Err(ApiError(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "each rating needs a slot (1 or 2) or a planned system id".into(),
                ))
            }
        };
        batch.push(Rating {
            annotator: sub.annotator.clone(),
            doc_id: sub.doc_id.clone(),
            sent_index: sub.sent_index,
            system,
            criterion: r.criterion,
            value: r.value,
        });
    }
    state.store.append(&batch)?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "stored": batch.len() }))))
}

async fn get_progress(
    State(state): State<Arc<AppState>>,
    UrlPath(annotator): UrlPath<String>,
) -> std::result::Result<Json<simpkit::agreement::Progress>, ApiError> {
    state.tasks(&annotator)?;
    Ok(Json(state.store.progress(&state.plan, &annotator)?))
}

pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/plan/:annotator", get(get_plan))
        .route("/api/ratings", post(post_ratings))
        .route("/api/progress/:annotator", get(get_progress))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(CorsLayer::permissive())
}

pub(crate) fn run(
    cfg: &RunConfig,
    port: Option<u16>,
    data_dir: Option<PathBuf>,
    static_dir: Option<PathBuf>,
) -> Result<()> {
    let data_dir = data_dir
        .or_else(|| cfg.serve.data_dir.clone())
        .ok_or_else(|| Error::config("no data directory given (use --data-dir)"))?;
    let port = port.or(cfg.serve.port).unwrap_or(8080);
    let static_dir = static_dir.or_else(|| cfg.serve.static_dir.clone());
    if let Some(dir) = &static_dir {
        if !dir.is_dir() {
            return Err(Error::config(format!("static directory {} does not exist", dir.display())));
        }
    }
    let state = Arc::new(AppState::load(&data_dir)?);
    let app = router(state, static_dir.as_deref());
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::config(format!("cannot start runtime: {e}")))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
            .await
            .map_err(|e| Error::config(format!("cannot bind port {port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Error::config(e.to_string()))?;
        println!("listening on http://{addr}");
        use std::io::Write;
        let _ = std::io::stdout().flush();
        axum::serve(listener, app)
            .await
            .map_err(|e| Error::config(format!("server error: {e}")))
    })
}
