//! Blocking HTTP helpers for talking to a test server.

#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::Value;
use ureq::Agent;

pub const TOKEN: &str = "s3cret";

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap()
}

#[derive(Debug, Clone)]
pub struct Reply {
    pub status: u16,
    pub total: Option<usize>,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.text()))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

pub struct Client {
    base: String,
    agent: Agent,
}

impl Client {
    pub fn new(base: impl Into<String>) -> Self {
        let agent: Agent = Agent::config_builder().http_status_as_error(false).build().into();
        Self { base: base.into(), agent }
    }

    fn finish(resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Reply {
        let mut resp = resp.expect("transport error");
        let header = |k: &str| resp.headers().get(k).and_then(|v| v.to_str().ok()).map(str::to_string);
        let total = header("x-total-count").map(|v| v.parse().unwrap());
        let content_type = header("content-type").unwrap_or_default();
        let status = resp.status().as_u16();
        let body = resp.body_mut().with_config().limit(1 << 30).read_to_vec().unwrap();
        Reply { status, total, content_type, body }
    }

    pub fn get(&self, path: &str) -> Reply {
        Self::finish(self.agent.get(format!("{}{path}", self.base)).call())
    }

    pub fn patch_json(&self, path: &str, token: Option<&str>, body: &str) -> Reply {
        let mut req = self.agent.patch(format!("{}{path}", self.base)).header("content-type", "application/json");
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        Self::finish(req.send(body))
    }

    pub fn post_json(&self, path: &str, token: Option<&str>, body: &str) -> Reply {
        let mut req = self.agent.post(format!("{}{path}", self.base)).header("content-type", "application/json");
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        Self::finish(req.send(body))
    }

    /// Posts a multipart form with the given named parts.
    pub fn post_form(&self, path: &str, token: Option<&str>, parts: &[(&str, &[u8])]) -> Reply {
        let boundary = "----seacat-test-boundary-7d3f";
        let mut body = Vec::new();
        for (name, data) in parts {
            body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
            body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n").as_bytes(),
            );
            body.extend_from_slice(data);
            body.extend_from_slice(b"\r\n");
        }
        body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
        let mut req = self
            .agent
            .post(format!("{}{path}", self.base))
            .header("content-type", format!("multipart/form-data; boundary={boundary}"));
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        Self::finish(req.send(&body[..]))
    }

    pub fn upload(&self, meta: &str, csv: &[u8]) -> Reply {
        self.post_form("/collections", Some(TOKEN), &[("csv", csv), ("meta", meta.as_bytes())])
    }
}
