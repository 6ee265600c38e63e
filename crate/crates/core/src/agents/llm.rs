//! Model-backed player. Holds one conversation per game: system prompt, then alternating
//! round messages and replies.

use std::sync::Arc;

use super::parse::parse_decision_with;
use super::{Agent, AgentError, AgentProfile, Observation, ParseError, Strictness, Turn};
use crate::gateway::{ChatMessage, ChatRequest, Gateway};

pub const DEFAULT_MAX_REPROMPTS: u32 = 3;

pub struct LlmAgent {
    gateway: Arc<Gateway>,
    provider: String,
    model: String,
    temperature: f64,
    profile: AgentProfile,
    messages: Vec<ChatMessage>,
    session_key: Option<String>,
    strictness: Strictness,
    max_reprompts: u32,
}

impl LlmAgent {
    /// `profile.system_prompt` must be set; it opens the conversation.
    pub fn new(
        gateway: Arc<Gateway>,
        provider: impl Into<String>,
        model: impl Into<String>,
        temperature: f64,
        profile: AgentProfile,
    ) -> Self {
        let system = profile.system_prompt.clone().unwrap_or_default();
        LlmAgent {
            gateway,
            provider: provider.into(),
            model: model.into(),
            temperature,
            profile,
            messages: vec![ChatMessage::system(system)],
            session_key: None,
            strictness: Strictness::default(),
            max_reprompts: DEFAULT_MAX_REPROMPTS,
        }
    }

    pub fn with_session_key(mut self, key: impl Into<String>) -> Self {
        self.session_key = Some(key.into());
        self
    }

    pub fn with_strictness(mut self, strictness: Strictness) -> Self {
        self.strictness = strictness;
        self
    }

    pub fn with_max_reprompts(mut self, n: u32) -> Self {
        self.max_reprompts = n;
        self
    }

    pub fn messages(&self) -> &[ChatMessage] {
        &self.messages
    }

    fn complete(&self) -> Result<String, crate::gateway::GatewayError> {
        self.gateway.chat_complete(&ChatRequest {
            provider: self.provider.clone(),
            model: self.model.clone(),
            messages: self.messages.clone(),
            temperature: self.temperature,
            session_key: self.session_key.clone(),
        })
    }
}

pub fn reprompt_message(error: &ParseError, expects_reasoning: bool, endowment: u32) -> String {
    let shape = if expects_reasoning {
        format!("a JSON object with the keys 'reasoning' (string) and 'contribution' (integer between 0 and {endowment})")
    } else {
        format!("a JSON object with one key: 'contribution' (an integer from 0 to {endowment})")
    };
    format!("Your previous response could not be used ({error}). Respond again with only {shape}.")
}

impl Agent for LlmAgent {
    fn profile(&self) -> &AgentProfile {
        &self.profile
    }

    fn decide(&mut self, obs: &Observation) -> Result<Turn, AgentError> {
        let mut exchanges = Vec::new();
        let mut prompt = obs.message.clone();
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.messages.push(ChatMessage::user(prompt.clone()));
            let response = match self.complete() {
                Ok(text) => text,
                Err(source) => {
                    self.messages.pop();
                    return Err(AgentError::Gateway { source, exchanges });
                }
            };
            self.messages.push(ChatMessage::assistant(response.clone()));
            exchanges.push((prompt, response.clone()));

            match parse_decision_with(&response, obs.expects_reasoning, obs.endowment, self.strictness) {
                Ok(decision) => return Ok(Turn { decision, exchanges }),
                Err(last) if attempts > self.max_reprompts => {
                    return Err(AgentError::RetriesExhausted {
                        attempts,
                        last,
                        exchanges,
                    })
                }
                Err(err) => prompt = reprompt_message(&err, obs.expects_reasoning, obs.endowment),
            }
        }
    }
}
