//! HTTP surface: `POST /` generates tags for a sampled matrix, `GET /healthz`
//! reports liveness.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::llm::{ChatProvider, ModelAllowlist, DEFAULT_MODEL};
use crate::pipeline::{
    generate_tags, TagCount, TagRequest, TagWarning, TaggingError, DEFAULT_TAGS,
};
use crate::sampler::{DatasetSample, DEFAULT_SAMPLE_ROWS};
use crate::translate::{Language, Translator};

pub const MAX_BODY_BYTES: usize = 1024 * 1024;

pub const ERR_DATA_LENGTH: &str = "Data length must be a maximum of 10 lines";

/// Shared, immutable collaborators for every request.
pub struct ApiState {
    pub llm: Arc<dyn ChatProvider>,
    pub translator: Arc<dyn Translator>,
    pub models: ModelAllowlist,
    pub dest_lang: Language,
}

#[derive(Debug, Clone)]
pub enum CorsPolicy {
    /// No cross-origin headers are emitted.
    Disabled,
    Origin(HeaderValue),
    /// Wildcard origin, for local development only.
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub detail: String,
}

impl ApiError {
    fn new(status: StatusCode, detail: impl Into<String>) -> Self {
        Self {
            status,
            detail: detail.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "detail": self.detail }))).into_response()
    }
}

impl From<TaggingError> for ApiError {
    fn from(err: TaggingError) -> Self {
        match err {
            TaggingError::Provider(e) => ApiError::new(StatusCode::BAD_GATEWAY, e.to_string()),
            TaggingError::TaggingFailed => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, err.to_string())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct TagParams {
    count: Option<i64>,
    model: Option<String>,
}

#[derive(Debug, Deserialize)]
struct TagBody {
    data: Vec<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TagsData {
    pub english: Vec<String>,
    pub estonian: Vec<String>,
    pub warnings: Vec<TagWarning>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TagsResponse {
    pub data: TagsData,
}

pub fn router(state: Arc<ApiState>, cors: CorsPolicy) -> Router {
    let router = Router::new()
        .route("/", post(post_root))
        .route("/healthz", get(healthz))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state);
    let origin = match cors {
        CorsPolicy::Disabled => return router,
        CorsPolicy::Origin(origin) => AllowOrigin::list([origin]),
        CorsPolicy::Any => AllowOrigin::any(),
    };
    router.layer(
        CorsLayer::new()
            .allow_origin(origin)
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([axum::http::header::CONTENT_TYPE, axum::http::header::ACCEPT]),
    )
}

async fn healthz() -> &'static str {
    "ok"
}

async fn post_root(
    State(state): State<Arc<ApiState>>,
    params: Result<Query<TagParams>, QueryRejection>,
    body: Bytes,
) -> Result<Json<TagsResponse>, ApiError> {
    let Query(params) =
        params.map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.body_text()))?;
    let body: TagBody = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("invalid request body: {e}"),
        )
    })?;
    let request = validate(&state, body, params)?;
    let tags = generate_tags(&request, state.llm.as_ref(), state.translator.as_ref()).await?;
    Ok(Json(TagsResponse {
        data: TagsData {
            english: tags.english,
            estonian: tags.translated,
            warnings: tags.warnings,
        },
    }))
}

/// Applies defaults and checks, in order: row count, tag count, model.
fn validate(state: &ApiState, body: TagBody, params: TagParams) -> Result<TagRequest, ApiError> {
    if body.data.len() > DEFAULT_SAMPLE_ROWS {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, ERR_DATA_LENGTH));
    }
    let count = TagCount::new(params.count.unwrap_or(i64::from(DEFAULT_TAGS)))
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let model = state
        .models
        .resolve(params.model.as_deref().unwrap_or(DEFAULT_MODEL))
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.message))?;
    let sample = DatasetSample::from_rows(body.data, "request")
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    Ok(TagRequest {
        sample,
        count,
        model,
        dest_lang: state.dest_lang,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::OfflineProvider;
    use crate::translate::IdentityTranslator;

    fn state() -> ApiState {
        ApiState {
            llm: Arc::new(OfflineProvider::new()),
            translator: Arc::new(IdentityTranslator),
            models: ModelAllowlist::default(),
            dest_lang: Language::ESTONIAN,
        }
    }

    fn body(rows: usize) -> TagBody {
        TagBody {
            data: vec![vec!["a".into(), "b".into()]; rows],
        }
    }

    fn params(count: Option<i64>, model: Option<&str>) -> TagParams {
        TagParams {
            count,
            model: model.map(str::to_owned),
        }
    }

    #[test]
    fn defaults_applied() {
        let req = validate(&state(), body(2), params(None, None)).unwrap();
        assert_eq!(req.count.get(), 5);
        assert_eq!(req.model.as_str(), "gpt-3.5-turbo");
    }

    #[test]
    fn row_limit_checked_first() {
        let err = validate(&state(), body(11), params(Some(2), Some("gpt-5"))).unwrap_err();
        assert_eq!(err.detail, "Data length must be a maximum of 10 lines");
        let err = validate(&state(), body(10), params(Some(2), Some("gpt-5"))).unwrap_err();
        assert_eq!(err.detail, "Count must be between 3 and 10");
        let err = validate(&state(), body(10), params(Some(10), Some("gpt-5"))).unwrap_err();
        assert_eq!(
            (err.status, err.detail.as_str()),
            (
                StatusCode::BAD_REQUEST,
                "Model must be gpt-3.5-turbo or gpt-4"
            )
        );
    }

    #[test]
    fn empty_matrix_is_unprocessable() {
        let err = validate(&state(), body(0), params(None, None)).unwrap_err();
        assert_eq!(err.status, StatusCode::UNPROCESSABLE_ENTITY);
    }
}
