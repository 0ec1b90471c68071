//! Tag-coverage audit of an open-data portal catalog.
//!
//! Lists the catalog, fetches each dataset's detail record and tallies how
//! many datasets carry 0, 1, 2, ... keywords. Per-dataset failures are
//! recorded in the report and never discard counts already accumulated.

use std::collections::BTreeMap;
use std::time::Duration;

use chrono::{DateTime, Utc};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;
use url::Url;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("portal unavailable: {0}")]
    PortalUnavailable(String),
    #[error("malformed catalog response: {0}")]
    MalformedCatalog(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("dataset {id}: {error}")]
pub struct DatasetFetchError {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDetail {
    #[serde(default)]
    pub id: Option<String>,
    /// Missing or `null` keywords count as none.
    #[serde(default, deserialize_with = "null_as_empty")]
    pub keywords: Vec<serde_json::Value>,
}

impl DatasetDetail {
    pub fn tag_count(&self) -> usize {
        self.keywords.len()
    }
}

fn null_as_empty<'de, D>(d: D) -> Result<Vec<serde_json::Value>, D::Error>
where
    D: Deserializer<'de>,
{
    Ok(Option::<Vec<serde_json::Value>>::deserialize(d)?.unwrap_or_default())
}

#[derive(Debug, Deserialize)]
struct Envelope<T> {
    data: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagHistogram {
    /// Tag count → number of datasets with that many tags.
    pub counts: BTreeMap<usize, usize>,
    pub total: usize,
    pub fetched_at: DateTime<Utc>,
    pub portal: String,
}

impl TagHistogram {
    pub fn new(portal: impl Into<String>) -> Self {
        Self {
            counts: BTreeMap::new(),
            total: 0,
            fetched_at: Utc::now(),
            portal: portal.into(),
        }
    }

    pub fn record(&mut self, tag_count: usize) {
        *self.counts.entry(tag_count).or_default() += 1;
        self.total += 1;
    }

    pub fn bucket(&self, tag_count: usize) -> usize {
        self.counts.get(&tag_count).copied().unwrap_or(0)
    }

    /// `100 * bucket / total`, or `None` for an empty histogram.
    pub fn percentage(&self, tag_count: usize) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.bucket(tag_count) as f64 / self.total as f64)
    }

    /// Percentage rounded half-up to an integer, computed in exact integer arithmetic.
    pub fn headline_percentage(&self, tag_count: usize) -> Option<u32> {
        (self.total > 0).then(|| round_half_up_percent(self.bucket(tag_count), self.total))
    }

    /// `tag_count,n_datasets` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tag_count,n_datasets\n");
        for (tags, n) in &self.counts {
            out.push_str(&format!("{tags},{n}\n"));
        }
        out
    }
}

/// round(100 * part / whole) with halves rounded up; `whole` must be non-zero.
pub fn round_half_up_percent(part: usize, whole: usize) -> u32 {
    let (part, whole) = (part as u128, whole as u128);
    ((200 * part + whole) / (2 * whole)) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub histogram: TagHistogram,
    pub pct_zero_tags: Option<f64>,
    pub pct_one_tag: Option<f64>,
    pub headline_zero_tags: Option<u32>,
    pub headline_one_tag: Option<u32>,
    pub errors_encountered: Vec<DatasetFetchError>,
}

impl CoverageReport {
    /// e.g. "11% untagged, 26% single-tag (1787 datasets)".
    pub fn headline(&self) -> String {
        let fmt = |p: Option<u32>| p.map_or_else(|| "n/a".to_owned(), |p| format!("{p}%"));
        format!(
            "{} untagged, {} single-tag ({} datasets)",
            fmt(self.headline_zero_tags),
            fmt(self.headline_one_tag),
            self.histogram.total
        )
    }
}

/// Tallies fetch outcomes into a report. Percentages are over successful fetches only.
pub fn build_report<I>(portal: impl Into<String>, outcomes: I) -> CoverageReport
where
    I: IntoIterator<Item = Result<DatasetDetail, DatasetFetchError>>,
{
    let mut histogram = TagHistogram::new(portal);
    let mut errors = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(detail) => histogram.record(detail.tag_count()),
            Err(e) => errors.push(e),
        }
    }
    CoverageReport {
        pct_zero_tags: histogram.percentage(0),
        pct_one_tag: histogram.percentage(1),
        headline_zero_tags: histogram.headline_percentage(0),
        headline_one_tag: histogram.headline_percentage(1),
        histogram,
        errors_encountered: errors,
    }
}

/// Client for the `/api/datasets` catalog protocol.
#[derive(Debug, Clone)]
pub struct PortalClient {
    client: reqwest::Client,
    base: Url,
}

impl PortalClient {
    pub fn new(base: Url, timeout: Duration) -> Result<Self, AuditError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| AuditError::PortalUnavailable(e.to_string()))?;
        Ok(Self { client, base })
    }

    pub fn base(&self) -> &Url {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.base.as_str().trim_end_matches('/'), path)
    }

    pub async fn list_datasets(&self, limit: usize) -> Result<Vec<DatasetSummary>, AuditError> {
        let resp = self
            .client
            .get(self.url("api/datasets"))
            .query(&[("limit", limit)])
            .send()
            .await
            .map_err(|e| AuditError::PortalUnavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(AuditError::PortalUnavailable(format!(
                "HTTP {}",
                resp.status().as_u16()
            )));
        }
        let envelope: Envelope<Vec<DatasetSummary>> = resp
            .json()
            .await
            .map_err(|e| AuditError::MalformedCatalog(e.to_string()))?;
        envelope
            .data
            .ok_or_else(|| AuditError::MalformedCatalog("missing \"data\" array".into()))
    }

    pub async fn fetch_dataset(&self, id: &str) -> Result<DatasetDetail, DatasetFetchError> {
        let fail = |error: String| DatasetFetchError {
            id: id.to_owned(),
            error,
        };
        if id.is_empty() {
            return Err(fail("empty dataset id".into()));
        }
        let resp = self
            .client
            .get(self.url(&format!("api/datasets/{id}")))
            .send()
            .await
            .map_err(|e| fail(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(fail(format!("HTTP {}", resp.status().as_u16())));
        }
        let envelope: Envelope<DatasetDetail> = resp
            .json()
            .await
            .map_err(|e| fail(format!("malformed detail: {e}")))?;
        envelope
            .data
            .ok_or_else(|| fail("missing \"data\" object".into()))
    }
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub limit: usize,
    /// Maximum detail requests in flight.
    pub concurrency: usize,
    /// Pause before each detail request.
    pub delay: Duration,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            limit: 1787,
            concurrency: 1,
            delay: Duration::ZERO,
        }
    }
}

/// Lists the catalog and fetches every dataset. Issues exactly
/// `1 + summaries.len()` requests.
pub async fn run_audit(
    client: &PortalClient,
    options: &AuditOptions,
) -> Result<CoverageReport, AuditError> {
    let summaries = client.list_datasets(options.limit).await?;
    tracing::info!(datasets = summaries.len(), portal = %client.base(), "catalog listed");
    let outcomes: Vec<_> = stream::iter(summaries)
        .map(|summary| async move {
            if !options.delay.is_zero() {
                tokio::time::sleep(options.delay).await;
            }
            client.fetch_dataset(&summary.id).await
        })
        .buffered(options.concurrency.max(1))
        .collect()
        .await;
    Ok(build_report(client.base().as_str(), outcomes))
}
