//! HTTP JSON API over the contract engine and the controlled-language tools.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/api/validate` | `ruleset-id`, `spec`?, `message` | `valid` |
//! | POST | `/api/explain` | `ruleset-id`, `spec`?, `message` | `valid`, `problems`, `traceback` |
//! | POST | `/api/generate` | `ruleset-id`, `spec`?, `count`?, `seed`?, `size`? | `messages` |
//! | POST | `/api/cnl/check` | `ruleset-id`, `cnl-text` | `findings`, `sound` or `syntax-error` |
//! | POST | `/api/cnl/parse` | `cnl-text` | `document` or `syntax-error` |
//! | GET | `/api/ruleset/{id}` | | `namespace`, `specs`, `root`, `cnl-text` |
//! | GET | `/api/rulesets` | | `rulesets` |
//!
//! `spec` defaults to the ruleset root. Unknown rulesets and specs answer
//! 404, malformed bodies 400; errors carry an `error` message.

mod state;

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use regspec_core::cnl::{parse, soundness_check, traceback, Severity, TraceEntry};
use regspec_core::datagen::{sample, GenContext};
use regspec_core::engine::Problem;
use regspec_core::ruleset::ruleset_to_json;
use regspec_core::{Keyword, SpecError, Value};
use serde_json::{json, Map, Value as Json};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use state::{AppState, LoadError, LoadedRuleset};

pub const MAX_GENERATE: u64 = 1000;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, message: message.into() }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, message: message.into() }
    }
}

impl From<SpecError> for ApiError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::UnknownSpec(_) => ApiError::not_found(e.to_string()),
            other => ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, message: other.to_string() },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &json!({ "error": self.message }))
    }
}

fn json_response(status: StatusCode, body: &Json) -> Response {
    let bytes = serde_json::to_vec(body).expect("JSON values serialize");
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json; charset=utf-8"))],
        bytes,
    )
        .into_response()
}

fn ok(body: Json) -> Result<Response, ApiError> {
    Ok(json_response(StatusCode::OK, &body))
}

/// A parsed request body with kebab-case fields.
struct Body(Map<String, Json>);

impl Body {
    fn parse(bytes: &[u8]) -> Result<Self, ApiError> {
        match serde_json::from_slice(bytes) {
            Ok(Json::Object(map)) => Ok(Body(map)),
            Ok(_) => Err(ApiError::bad_request("request body must be a JSON object")),
            Err(e) => Err(ApiError::bad_request(format!("malformed JSON body: {e}"))),
        }
    }

    fn str(&self, key: &str) -> Result<&str, ApiError> {
        self.opt_str(key)?.ok_or_else(|| ApiError::bad_request(format!("missing `{key}`")))
    }

    fn opt_str(&self, key: &str) -> Result<Option<&str>, ApiError> {
        match self.0.get(key) {
            None | Some(Json::Null) => Ok(None),
            Some(Json::String(s)) => Ok(Some(s)),
            Some(_) => Err(ApiError::bad_request(format!("`{key}` must be a string"))),
        }
    }

    fn opt_u64(&self, key: &str) -> Result<Option<u64>, ApiError> {
        match self.0.get(key) {
            None | Some(Json::Null) => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| ApiError::bad_request(format!("`{key}` must be a non-negative integer"))),
        }
    }

    fn message(&self) -> Result<Value, ApiError> {
        let raw = self.0.get("message").ok_or_else(|| ApiError::bad_request("missing `message`"))?;
        Value::from_json(raw).map_err(|e| ApiError::bad_request(format!("message: {e}")))
    }

    fn ruleset<'a>(&self, state: &'a AppState) -> Result<&'a LoadedRuleset, ApiError> {
        let id = self.str("ruleset-id")?;
        state
            .rulesets
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("unknown ruleset `{id}`")))
    }

    fn spec(&self, loaded: &LoadedRuleset) -> Result<Keyword, ApiError> {
        let Some(text) = self.opt_str("spec")? else {
            return Ok(loaded.ruleset.root.clone());
        };
        let k = Keyword::parse_with_default(text, loaded.ruleset.namespace.as_deref())
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        loaded.ruleset.registry.resolve(&k)?;
        Ok(k)
    }
}

async fn validate(State(state): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let body = Body::parse(&bytes)?;
    let loaded = body.ruleset(&state)?;
    let spec = body.spec(loaded)?;
    let valid = loaded.ruleset.registry.validate(&spec, &body.message()?)?;
    ok(json!({ "valid": valid }))
}

async fn explain(State(state): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let body = Body::parse(&bytes)?;
    let loaded = body.ruleset(&state)?;
    let spec = body.spec(loaded)?;
    let problems = loaded.ruleset.registry.explain(&spec, &body.message()?)?;
    let trace = traceback(&loaded.document, &problems);
    ok(json!({
        "valid": problems.is_empty(),
        "problems": problems.iter().map(Problem::to_json).collect::<Vec<_>>(),
        "traceback": trace.iter().map(TraceEntry::to_json).collect::<Vec<_>>(),
    }))
}

async fn generate(State(state): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let body = Body::parse(&bytes)?;
    let loaded = body.ruleset(&state)?;
    let spec = body.spec(loaded)?;
    let count = body.opt_u64("count")?.unwrap_or(1);
    if count > MAX_GENERATE {
        return Err(ApiError::bad_request(format!("`count` is limited to {MAX_GENERATE}")));
    }
    let mut ctx = GenContext::seeded(body.opt_u64("seed")?.unwrap_or(0));
    if let Some(size) = body.opt_u64("size")? {
        ctx.size = size as usize;
    }
    let messages = sample(&loaded.ruleset.registry, &loaded.generators, &spec, count as usize, &ctx).map_err(|e| {
        ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, message: e.to_string() }
    })?;
    ok(json!({ "messages": messages.iter().map(Value::to_json).collect::<Vec<_>>() }))
}

async fn cnl_check(State(state): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let body = Body::parse(&bytes)?;
    let loaded = body.ruleset(&state)?;
    let doc = match parse(body.str("cnl-text")?) {
        Ok(doc) => doc,
        Err(e) => return ok(json!({ "syntax-error": e.to_json() })),
    };
    let findings = soundness_check(&doc, &loaded.ruleset.registry, None);
    ok(json!({
        "sound": findings.iter().all(|f| f.severity() != Severity::Error),
        "findings": findings.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
    }))
}

async fn cnl_parse(bytes: Bytes) -> Result<Response, ApiError> {
    let body = Body::parse(&bytes)?;
    match parse(body.str("cnl-text")?) {
        Ok(doc) => ok(json!({ "document": doc.to_json() })),
        Err(e) => ok(json!({ "syntax-error": e.to_json() })),
    }
}

async fn ruleset(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let loaded = state
        .rulesets
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown ruleset `{id}`")))?;
    let rs = &loaded.ruleset;
    let mut out = ruleset_to_json(&rs.registry, &rs.root, rs.namespace.as_deref());
    out["id"] = id.into();
    out["cnl-text"] = loaded.cnl_text.clone().into();
    ok(out)
}

async fn rulesets(State(state): State<AppState>) -> Result<Response, ApiError> {
    ok(json!({ "rulesets": state.rulesets.keys().collect::<Vec<_>>() }))
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

/// The API router. `origins` empty allows any origin.
pub fn router(state: AppState, origins: &[HeaderValue]) -> Router {
    let allow = if origins.is_empty() { AllowOrigin::any() } else { AllowOrigin::list(origins.iter().cloned()) };
    let cors = CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/validate", post(validate))
        .route("/api/explain", post(explain))
        .route("/api/generate", post(generate))
        .route("/api/cnl/check", post(cnl_check))
        .route("/api/cnl/parse", post(cnl_parse))
        .route("/api/ruleset/{id}", get(ruleset))
        .route("/api/rulesets", get(rulesets))
        .fallback(not_found)
        .layer(cors)
        .with_state(state)
}

/// Serves `router` until the process is stopped.
pub fn serve(addr: SocketAddr, state: AppState, origins: &[HeaderValue]) -> std::io::Result<()> {
    let app = router(state, origins);
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        axum::serve(listener, app).await
    })
}
