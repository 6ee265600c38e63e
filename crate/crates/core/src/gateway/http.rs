//! Live HTTP transport for the two supported wire dialects.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ChatRequest, Role, Transport, TransportError};

pub const ANTHROPIC_VERSION: &str = "2023-06-01";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    /// `POST {base}/chat/completions`, bearer auth, system prompt as the first message.
    ChatCompletions,
    /// `POST {base}/messages`, `x-api-key` auth, system prompt as a top-level field.
    Messages,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    pub dialect: Dialect,
    pub base_url: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
}

fn default_max_tokens() -> u32 {
    1024
}

impl ProviderConfig {
    pub fn new(name: &str, dialect: Dialect, base_url: &str, api_key_env: &str) -> Self {
        ProviderConfig {
            name: name.into(),
            dialect,
            base_url: base_url.trim_end_matches('/').into(),
            api_key_env: api_key_env.into(),
            max_tokens: default_max_tokens(),
        }
    }

    /// openai, anthropic, openrouter and gemini (through its OpenAI-compatible endpoint).
    pub fn defaults() -> Vec<ProviderConfig> {
        vec![
            ProviderConfig::new(
                "openai",
                Dialect::ChatCompletions,
                "https://api.openai.com/v1",
                "OPENAI_API_KEY",
            ),
            ProviderConfig::new(
                "anthropic",
                Dialect::Messages,
                "https://api.anthropic.com/v1",
                "ANTHROPIC_API_KEY",
            ),
            ProviderConfig::new(
                "openrouter",
                Dialect::ChatCompletions,
                "https://openrouter.ai/api/v1",
                "OPENROUTER_API_KEY",
            ),
            ProviderConfig::new(
                "gemini",
                Dialect::ChatCompletions,
                "https://generativelanguage.googleapis.com/v1beta/openai",
                "GEMINI_API_KEY",
            ),
        ]
    }

    pub fn endpoint(&self) -> String {
        match self.dialect {
            Dialect::ChatCompletions => format!("{}/chat/completions", self.base_url),
            Dialect::Messages => format!("{}/messages", self.base_url),
        }
    }

    pub fn api_key(&self) -> Result<String, TransportError> {
        match std::env::var(&self.api_key_env) {
            Ok(key) if !key.trim().is_empty() => Ok(key),
            _ => Err(TransportError::Auth(format!(
                "environment variable {} is not set",
                self.api_key_env
            ))),
        }
    }
}

/// Request body for the provider's dialect.
pub fn encode_request(dialect: Dialect, request: &ChatRequest, max_tokens: u32) -> Value {
    let role = |r: Role| match r {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
    };
    match dialect {
        Dialect::ChatCompletions => json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": request
                .messages
                .iter()
                .map(|m| json!({ "role": role(m.role), "content": m.content }))
                .collect::<Vec<_>>(),
        }),
        Dialect::Messages => json!({
            "model": request.model,
            "temperature": request.temperature,
            "max_tokens": max_tokens,
            "system": request.system_prompt().unwrap_or_default(),
            "messages": request
                .messages
                .iter()
                .filter(|m| m.role != Role::System)
                .map(|m| json!({ "role": role(m.role), "content": m.content }))
                .collect::<Vec<_>>(),
        }),
    }
}

/// Assistant text from a successful response body.
pub fn decode_response(dialect: Dialect, body: &str) -> Result<String, TransportError> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| TransportError::Decode(e.to_string()))?;
    let text = match dialect {
        Dialect::ChatCompletions => value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string),
        Dialect::Messages => value.get("content").and_then(Value::as_array).map(|blocks| {
            blocks
                .iter()
                .filter(|b| b.get("type").and_then(Value::as_str) == Some("text"))
                .filter_map(|b| b.get("text").and_then(Value::as_str))
                .collect::<String>()
        }),
    };
    text.ok_or_else(|| TransportError::Decode(format!("no assistant text in {body:.200}")))
}

pub struct HttpTransport {
    providers: BTreeMap<String, ProviderConfig>,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(providers: Vec<ProviderConfig>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport {
            providers: providers.into_iter().map(|p| (p.name.clone(), p)).collect(),
            agent,
        }
    }

    pub fn with_defaults(timeout: Duration) -> Self {
        Self::new(ProviderConfig::defaults(), timeout)
    }

    pub fn provider(&self, name: &str) -> Option<&ProviderConfig> {
        self.providers.get(name)
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let provider = self
            .providers
            .get(&request.provider)
            .ok_or_else(|| TransportError::UnknownProvider(request.provider.clone()))?;
        let key = provider.api_key()?;
        let body = encode_request(provider.dialect, request, provider.max_tokens);

        let call = self.agent.post(provider.endpoint());
        let call = match provider.dialect {
            Dialect::ChatCompletions => call.header("Authorization", format!("Bearer {key}")),
            Dialect::Messages => call
                .header("x-api-key", key)
                .header("anthropic-version", ANTHROPIC_VERSION),
        };
        let mut response = call.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Network(other.to_string()),
        })?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        match status {
            200..=299 => decode_response(provider.dialect, &text),
            401 | 403 => Err(TransportError::Auth(format!("status {status}: {text}"))),
            429 => Err(TransportError::RateLimited),
            _ => Err(TransportError::Status { status, body: text }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ChatMessage;

    fn request(provider: &str) -> ChatRequest {
        ChatRequest {
            provider: provider.into(),
            model: "m".into(),
            messages: vec![
                ChatMessage::system("sys"),
                ChatMessage::user("u1"),
                ChatMessage::assistant("a1"),
                ChatMessage::user("u2"),
            ],
            temperature: 1.0,
            session_key: None,
        }
    }

    #[test]
    fn messages_dialect_lifts_system_prompt() {
        let body = encode_request(Dialect::Messages, &request("anthropic"), 256);
        assert_eq!(body["system"], "sys");
        assert_eq!(body["max_tokens"], 256);
        assert_eq!(body["messages"].as_array().unwrap().len(), 3);
        assert_eq!(body["messages"][0]["role"], "user");

        let body = encode_request(Dialect::ChatCompletions, &request("openai"), 256);
        assert_eq!(body["messages"][0]["role"], "system");
        assert!(body.get("max_tokens").is_none());
    }

    #[test]
    fn decode_both_dialects() {
        let chat = r#"{"choices":[{"message":{"role":"assistant","content":"{\"contribution\": 4}"}}]}"#;
        assert_eq!(
            decode_response(Dialect::ChatCompletions, chat).unwrap(),
            "{\"contribution\": 4}"
        );
        let msgs = r#"{"content":[{"type":"text","text":"0."},{"type":"text","text":"8"}]}"#;
        assert_eq!(decode_response(Dialect::Messages, msgs).unwrap(), "0.8");
        assert!(matches!(
            decode_response(Dialect::Messages, "{}"),
            Err(TransportError::Decode(_))
        ));
    }

    #[test]
    fn missing_credentials_fail_before_network() {
        let provider = ProviderConfig::new(
            "local",
            Dialect::ChatCompletions,
            // unroutable; reaching it would be a Network error, not Auth
            "http://192.0.2.1:9",
            "PGG_TEST_KEY_THAT_IS_NEVER_SET",
        );
        let transport = HttpTransport::new(vec![provider], Duration::from_millis(50));
        assert!(matches!(
            transport.send(&request("local")),
            Err(TransportError::Auth(_))
        ));
        assert!(matches!(
            transport.send(&request("nope")),
            Err(TransportError::UnknownProvider(_))
        ));
    }
}
