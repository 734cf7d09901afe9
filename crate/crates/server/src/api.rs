//! Route table and handlers.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lingkod_core::domain::{Role, UserProfile};
use lingkod_core::evaluation::{
    validate_postedit, AiTextDetector, NewTask, PosteditDecision, ValidatedPostedit,
};
use lingkod_core::ids::{ConnectionId, ItemId, TaskId, UserId};
use lingkod_core::recruitment::{ConnectionRequest, ConnectionStatus, Decision, NewProfile};
use lingkod_core::stats::{EventKind, UsageEvent};
use lingkod_core::{Platform, PlatformError, Timestamp};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::auth;
use crate::error::ServiceError;
use crate::store::Store;

/// Minimum spacing between recorded session pings for one user.
const PING_INTERVAL_SECS: i64 = 60;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub detector: Arc<dyn AiTextDetector>,
}

type ApiResult<T> = Result<T, ServiceError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/users", post(register))
        .route("/api/profiles", get(profiles))
        .route("/api/tasks", get(list_tasks).post(create_task))
        .route("/api/connections", get(list_connections).post(request_connection))
        .route("/api/connections/{id}/respond", post(respond_connection))
        .route("/api/connections/{id}/messages", get(list_messages).post(post_message))
        .route("/api/tasks/{id}/next-item", get(next_item))
        .route("/api/tasks/{id}/judgments", post(submit_judgment))
        .route("/api/tasks/{id}/progress", get(progress))
        .route("/api/tasks/{id}/results", get(results))
        .route("/api/tasks/{id}/complete", post(complete))
        .route("/api/exports/{task_id}", get(export))
        .route("/api/map", get(map))
        .route("/api/map/{country}", get(map_country))
        .route("/api/leaderboard", get(leaderboard))
        .route("/api/analytics", get(analytics))
        .fallback(|| async { ServiceError::NotFound })
        .method_not_allowed_fallback(|| async { ServiceError::MethodNotAllowed })
        .with_state(state)
}

// ---------------------------------------------------------------------------
// Extractors

/// JSON body whose rejections render as structured errors.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| ApiJson(v))
            .map_err(|e: JsonRejection| ServiceError::BadRequest(e.body_text()))
    }
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| ApiQuery(v))
            .map_err(|e: QueryRejection| ServiceError::BadRequest(e.body_text()))
    }
}

pub struct ApiPath(pub String);

impl<S: Send + Sync> FromRequestParts<S> for ApiPath {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Path::<String>::from_request_parts(parts, state)
            .await
            .map(|Path(v)| ApiPath(v))
            .map_err(|e: PathRejection| ServiceError::BadRequest(e.body_text()))
    }
}

/// The authenticated caller.
pub struct AuthUser(pub UserProfile);

impl AuthUser {
    fn id(&self) -> &UserId {
        &self.0.user_id
    }
}

impl FromRequestParts<AppState> for AuthUser {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(auth::bearer)
            .ok_or(PlatformError::InvalidToken)?;
        let digest = auth::token_digest(token);
        let now = Timestamp::now();
        let (user, needs_ping) = state.store.read(|p| -> Result<_, PlatformError> {
            let user = p.authenticate(&digest)?.clone();
            let last = p.events().iter().rev().find(|e| e.user_id == user.user_id).map(|e| e.at);
            let stale = last.is_none_or(|at| now.unix() - at.unix() >= PING_INTERVAL_SECS);
            Ok((user, stale))
        })?;
        if needs_ping {
            let ping = UsageEvent { user_id: user.user_id.clone(), kind: EventKind::SessionPing, at: now };
            // a concurrent request may already have logged a later event
            match state.store.transact(|p| p.record_event(ping)) {
                Ok(()) | Err(ServiceError::Platform(PlatformError::EventOutOfOrder)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(AuthUser(user))
    }
}

// ---------------------------------------------------------------------------
// Views

/// The caller's own account, including private fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct AccountView {
    pub user_id: UserId,
    pub username: String,
    pub role: Role,
    pub languages: Vec<String>,
    pub certificates: Vec<String>,
    pub compensation_terms: String,
    pub contact_private: String,
    pub created_at: Timestamp,
}

impl From<UserProfile> for AccountView {
    fn from(u: UserProfile) -> Self {
        Self {
            user_id: u.user_id,
            username: u.username,
            role: u.role,
            languages: u.languages.into_iter().collect(),
            certificates: u.certificates,
            compensation_terms: u.compensation_terms,
            contact_private: u.contact_private,
            created_at: u.created_at,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Registration {
    pub profile: AccountView,
    /// Shown once; only its digest is stored.
    pub token: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConnectionView {
    pub connection_id: ConnectionId,
    pub from: String,
    pub to: String,
    pub proposed_terms: String,
    pub status: ConnectionStatus,
    pub created_at: Timestamp,
    pub resolved_at: Option<Timestamp>,
    /// The other party's compensation terms, once accepted.
    pub counterpart_terms: Option<String>,
}

fn username_of(p: &Platform, id: &UserId) -> String {
    p.user(id).map(|u| u.username.clone()).unwrap_or_default()
}

fn connection_view(p: &Platform, c: &ConnectionRequest, viewer: &UserId) -> ConnectionView {
    ConnectionView {
        connection_id: c.connection_id.clone(),
        from: username_of(p, &c.from_user),
        to: username_of(p, &c.to_user),
        proposed_terms: c.proposed_terms.clone(),
        status: c.status,
        created_at: c.created_at,
        resolved_at: c.resolved_at,
        counterpart_terms: p.counterpart_terms(&c.connection_id, viewer).ok().flatten().map(str::to_owned),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MessageView {
    pub sender: String,
    pub body: String,
    pub sent_at: Timestamp,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompletionView {
    pub task_id: TaskId,
    pub rows: usize,
    pub download_url: String,
}

// ---------------------------------------------------------------------------
// Request bodies and queries

#[derive(Deserialize)]
struct ProfileQuery {
    language: String,
    #[serde(default)]
    role: Option<String>,
}

#[derive(Deserialize)]
struct LanguageQuery {
    language: String,
}

#[derive(Deserialize)]
struct OptionalLanguage {
    #[serde(default)]
    language: Option<String>,
}

#[derive(Deserialize)]
struct ConnectionBody {
    to_username: String,
    #[serde(default)]
    proposed_terms: String,
}

#[derive(Deserialize)]
struct RespondBody {
    decision: Decision,
}

#[derive(Deserialize)]
struct MessageBody {
    body: String,
}

#[derive(Deserialize)]
struct JudgmentBody {
    item_id: ItemId,
    adequacy: i64,
    fluency: i64,
    #[serde(default)]
    postedit: Option<String>,
}

#[derive(Deserialize)]
struct WindowQuery {
    start: Timestamp,
    end: Timestamp,
}

fn parse_role(raw: Option<&str>) -> ApiResult<Role> {
    match raw.map(str::to_ascii_lowercase).as_deref() {
        None | Some("annotator") => Ok(Role::Annotator),
        Some("researcher") => Ok(Role::Researcher),
        Some(other) => Err(ServiceError::BadRequest(format!("unknown role {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Handlers

async fn register(State(st): State<AppState>, ApiJson(new): ApiJson<NewProfile>) -> ApiResult<impl IntoResponse> {
    let token = auth::issue_token();
    let digest = auth::token_digest(&token);
    let profile = st.store.transact(|p| {
        let profile = p.create_profile(new, Timestamp::now())?;
        p.bind_token(digest, &profile.user_id)?;
        Ok::<_, PlatformError>(profile)
    })?;
    Ok((StatusCode::CREATED, Json(Registration { profile: profile.into(), token })))
}

async fn profiles(State(st): State<AppState>, _: AuthUser, ApiQuery(q): ApiQuery<ProfileQuery>) -> ApiResult<Response> {
    let role = parse_role(q.role.as_deref())?;
    Ok(Json(st.store.read(|p| p.search_profiles(&q.language, role))?).into_response())
}

async fn list_tasks(State(st): State<AppState>, _: AuthUser, ApiQuery(q): ApiQuery<LanguageQuery>) -> ApiResult<Response> {
    Ok(Json(st.store.read(|p| p.search_tasks(&q.language))?).into_response())
}

async fn create_task(State(st): State<AppState>, me: AuthUser, ApiJson(new): ApiJson<NewTask>) -> ApiResult<Response> {
    let task = st.store.transact(|p| p.create_task(me.id(), new, Timestamp::now()))?;
    Ok((StatusCode::CREATED, Json(task)).into_response())
}

async fn list_connections(State(st): State<AppState>, me: AuthUser) -> ApiResult<Response> {
    let views: Vec<ConnectionView> =
        st.store.read(|p| p.connections_of(me.id()).into_iter().map(|c| connection_view(p, c, me.id())).collect());
    Ok(Json(views).into_response())
}

async fn request_connection(
    State(st): State<AppState>,
    me: AuthUser,
    ApiJson(body): ApiJson<ConnectionBody>,
) -> ApiResult<Response> {
    let view = st.store.transact(|p| {
        let to = p.user_by_username(&body.to_username)?.user_id.clone();
        let c = p.request_connection(me.id(), &to, &body.proposed_terms, Timestamp::now())?;
        Ok::<_, PlatformError>(connection_view(p, &c, me.id()))
    })?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn respond_connection(
    State(st): State<AppState>,
    me: AuthUser,
    ApiPath(id): ApiPath,
    ApiJson(body): ApiJson<RespondBody>,
) -> ApiResult<Response> {
    let id = ConnectionId(id);
    let view = st.store.transact(|p| {
        let c = p.respond_connection(&id, me.id(), body.decision, Timestamp::now())?;
        Ok::<_, PlatformError>(connection_view(p, &c, me.id()))
    })?;
    Ok(Json(view).into_response())
}

async fn list_messages(State(st): State<AppState>, me: AuthUser, ApiPath(id): ApiPath) -> ApiResult<Response> {
    let id = ConnectionId(id);
    let views = st.store.read(|p| {
        p.messages(&id, me.id()).map(|ms| {
            ms.iter()
                .map(|m| MessageView { sender: username_of(p, &m.sender), body: m.body.clone(), sent_at: m.sent_at })
                .collect::<Vec<_>>()
        })
    })?;
    Ok(Json(views).into_response())
}

async fn post_message(
    State(st): State<AppState>,
    me: AuthUser,
    ApiPath(id): ApiPath,
    ApiJson(body): ApiJson<MessageBody>,
) -> ApiResult<Response> {
    let id = ConnectionId(id);
    let msg = st.store.transact(|p| p.post_message(&id, me.id(), &body.body, Timestamp::now()))?;
    let view = MessageView { sender: me.0.username.clone(), body: msg.body, sent_at: msg.sent_at };
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn next_item(State(st): State<AppState>, me: AuthUser, ApiPath(id): ApiPath) -> ApiResult<Response> {
    let id = TaskId(id);
    Ok(Json(st.store.read(|p| p.next_item(&id, me.id()))?).into_response())
}

async fn submit_judgment(
    State(st): State<AppState>,
    me: AuthUser,
    ApiPath(id): ApiPath,
    ApiJson(body): ApiJson<JudgmentBody>,
) -> ApiResult<Response> {
    let task_id = TaskId(id);
    let postedit = body.postedit.filter(|t| !t.trim().is_empty());
    let validated: Option<ValidatedPostedit> = match postedit {
        None => None,
        Some(text) => {
            let item = st.store.read(|p| {
                p.task(&task_id)?.item(&body.item_id).cloned().ok_or(PlatformError::UnknownItem)
            })?;
            // the detector may be remote and slow; keep it off the store lock
            let detector = st.detector.clone();
            let decision = tokio::task::spawn_blocking(move || validate_postedit(&text, &item, detector.as_ref()))
                .await
                .map_err(|e| PlatformError::DetectorUnavailable(e.to_string()))?
                .map_err(|e| PlatformError::DetectorUnavailable(e.0))?;
            match decision {
                PosteditDecision::Accepted(v) => Some(v),
                PosteditDecision::Rejected(reason) => {
                    return Err(PlatformError::PosteditRejected(reason.as_str().to_owned()).into())
                }
            }
        }
    };
    let feedback = st.store.transact(|p| {
        p.record_judgment(&task_id, &body.item_id, me.id(), body.adequacy, body.fluency, validated, Timestamp::now())?;
        p.progress_feedback(&task_id, me.id())
    })?;
    Ok((StatusCode::CREATED, Json(feedback)).into_response())
}

async fn progress(State(st): State<AppState>, me: AuthUser, ApiPath(id): ApiPath) -> ApiResult<Response> {
    let id = TaskId(id);
    Ok(Json(st.store.read(|p| p.progress_feedback(&id, me.id()))?).into_response())
}

async fn results(State(st): State<AppState>, me: AuthUser, ApiPath(id): ApiPath) -> ApiResult<Response> {
    let id = TaskId(id);
    Ok(Json(st.store.transact(|p| p.results_summary(&id, me.id(), Timestamp::now()))?).into_response())
}

async fn complete(State(st): State<AppState>, me: AuthUser, ApiPath(id): ApiPath) -> ApiResult<Response> {
    let id = TaskId(id);
    let export = st.store.transact(|p| p.complete_and_export(&id, me.id(), Timestamp::now()))?;
    let view = CompletionView {
        download_url: format!("/api/exports/{}", export.task_id),
        task_id: export.task_id,
        rows: export.rows,
    };
    Ok(Json(view).into_response())
}

async fn export(State(st): State<AppState>, ApiPath(id): ApiPath) -> ApiResult<Response> {
    let id = TaskId(id);
    let body = st.store.read(|p| {
        p.task(&id)?;
        p.export(&id).map(str::to_owned).ok_or(PlatformError::NotFinished)
    })?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson; charset=utf-8")], body).into_response())
}

async fn map(State(st): State<AppState>) -> ApiResult<Response> {
    Ok(Json(st.store.read(|p| p.global_summary())).into_response())
}

async fn map_country(State(st): State<AppState>, ApiPath(country): ApiPath) -> ApiResult<Response> {
    Ok(Json(st.store.read(|p| p.country_summary(&country))?).into_response())
}

async fn leaderboard(
    State(st): State<AppState>,
    _: AuthUser,
    ApiQuery(q): ApiQuery<OptionalLanguage>,
) -> ApiResult<Response> {
    let language = q.language.filter(|l| !l.is_empty());
    Ok(Json(st.store.read(|p| p.leaderboard(language.as_deref()))?).into_response())
}

async fn analytics(State(st): State<AppState>, _: AuthUser, ApiQuery(q): ApiQuery<WindowQuery>) -> ApiResult<Response> {
    Ok(Json(st.store.read(|p| p.analytics_report(q.start, q.end))?).into_response())
}
