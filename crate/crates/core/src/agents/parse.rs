//! Parsing model output into a [`ContributionDecision`].
//!
//! The expected reply is a single JSON object with a `contribution` key (and `reasoning`
//! when the protocol asks for it). Lenient mode, the default, also accepts the object
//! wrapped in a markdown fence or surrounded by stray text, and Python-style single-quoted
//! keys and strings.

use serde_json::{Map, Value};
use thiserror::Error;

use super::ContributionDecision;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing key '{0}'")]
    MissingKey(&'static str),
    #[error("contribution {0} is not an integer")]
    NotAnInteger(String),
    #[error("contribution {value} is outside 0..={endowment}")]
    OutOfRange { value: i64, endowment: u32 },
    #[error("response is not a JSON object: {0}")]
    Unparseable(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    #[default]
    Lenient,
}

pub fn parse_decision(
    raw: &str,
    expects_reasoning: bool,
    endowment: u32,
) -> Result<ContributionDecision, ParseError> {
    parse_decision_with(raw, expects_reasoning, endowment, Strictness::Lenient)
}

pub fn parse_decision_with(
    raw: &str,
    expects_reasoning: bool,
    endowment: u32,
    strictness: Strictness,
) -> Result<ContributionDecision, ParseError> {
    let object = match strictness {
        Strictness::Strict => parse_object(raw.trim()),
        Strictness::Lenient => lenient_object(raw),
    }
    .ok_or_else(|| ParseError::Unparseable(preview(raw)))?;

    let contribution = match object.get("contribution") {
        None => return Err(ParseError::MissingKey("contribution")),
        Some(Value::Number(n)) => {
            if let Some(v) = n.as_u64() {
                if v > endowment as u64 {
                    return Err(ParseError::OutOfRange {
                        value: i64::try_from(v).unwrap_or(i64::MAX),
                        endowment,
                    });
                }
                v as u32
            } else if let Some(v) = n.as_i64() {
                return Err(ParseError::OutOfRange { value: v, endowment });
            } else {
                return Err(ParseError::NotAnInteger(n.to_string()));
            }
        }
        Some(other) => return Err(ParseError::NotAnInteger(other.to_string())),
    };

    let reasoning = if expects_reasoning {
        match object.get("reasoning") {
            None => return Err(ParseError::MissingKey("reasoning")),
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                return Err(ParseError::Unparseable(format!(
                    "reasoning must be a string, got {other}"
                )))
            }
        }
    } else {
        None
    };

    Ok(ContributionDecision {
        contribution,
        reasoning,
    })
}

/// Canonical reply text for a decision; `parse_decision` inverts it.
pub fn render_decision(decision: &ContributionDecision) -> String {
    let mut object = Map::new();
    if let Some(reasoning) = &decision.reasoning {
        object.insert("reasoning".into(), Value::String(reasoning.clone()));
    }
    object.insert("contribution".into(), Value::from(decision.contribution));
    Value::Object(object).to_string()
}

fn parse_object(text: &str) -> Option<Map<String, Value>> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Some(map),
        _ => None,
    }
}

fn lenient_object(raw: &str) -> Option<Map<String, Value>> {
    let text = strip_fence(raw.trim());
    if let Some(map) = parse_object(text) {
        return Some(map);
    }
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    if end < start {
        return None;
    }
    let slice = &text[start..=end];
    parse_object(slice).or_else(|| parse_object(&requote_single_quotes(slice)))
}

fn strip_fence(text: &str) -> &str {
    let Some(rest) = text.strip_prefix("```") else {
        return text;
    };
    // drop the info string (```json)
    let body = rest.split_once('\n').map_or("", |(_, body)| body);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

/// Rewrites single-quoted strings as JSON strings, leaving double-quoted ones alone.
fn requote_single_quotes(text: &str) -> String {
    #[derive(PartialEq)]
    enum State {
        Bare,
        Double,
        Single,
    }
    let mut out = String::with_capacity(text.len());
    let mut state = State::Bare;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match state {
            State::Bare => match c {
                '"' => {
                    state = State::Double;
                    out.push(c);
                }
                '\'' => {
                    state = State::Single;
                    out.push('"');
                }
                _ => out.push(c),
            },
            State::Double => {
                out.push(c);
                if c == '\\' {
                    if let Some(next) = chars.next() {
                        out.push(next);
                    }
                } else if c == '"' {
                    state = State::Bare;
                }
            }
            State::Single => match c {
                '\\' => match chars.next() {
                    Some('\'') => out.push('\''),
                    Some(next) => {
                        out.push('\\');
                        out.push(next);
                    }
                    None => out.push('\\'),
                },
                '\'' => {
                    state = State::Bare;
                    out.push('"');
                }
                '"' => out.push_str("\\\""),
                _ => out.push(c),
            },
        }
    }
    out
}

fn preview(raw: &str) -> String {
    const MAX: usize = 80;
    let trimmed = raw.trim();
    match trimmed.char_indices().nth(MAX) {
        Some((idx, _)) => format!("{}...", &trimmed[..idx]),
        None => trimmed.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decision(c: u32, r: Option<&str>) -> ContributionDecision {
        ContributionDecision {
            contribution: c,
            reasoning: r.map(str::to_string),
        }
    }

    #[test]
    fn minimal_and_reasoning_forms() {
        assert_eq!(parse_decision(r#"{"contribution": 7}"#, false, 10), Ok(decision(7, None)));
        assert_eq!(
            parse_decision(r#"{"reasoning": "cooperate early", "contribution": 10}"#, true, 10),
            Ok(decision(10, Some("cooperate early")))
        );
    }

    // Hand-labelled malformed corpus.
    #[test]
    fn malformed_corpus() {
        let cases: &[(&str, bool, ParseError)] = &[
            (r#"{"contribution": 11}"#, false, ParseError::OutOfRange { value: 11, endowment: 10 }),
            (r#"{"contribution": -1}"#, false, ParseError::OutOfRange { value: -1, endowment: 10 }),
            (r#"{"contribution": 3.5}"#, false, ParseError::NotAnInteger("3.5".into())),
            (r#"{"contribution": 7.0}"#, false, ParseError::NotAnInteger("7.0".into())),
            (r#"{"contribution": "7"}"#, false, ParseError::NotAnInteger("\"7\"".into())),
            (r#"{"contribution": null}"#, false, ParseError::NotAnInteger("null".into())),
            (r#"{"amount": 4}"#, false, ParseError::MissingKey("contribution")),
            (r#"{"contribution": 4}"#, true, ParseError::MissingKey("reasoning")),
            ("I'll give 5", false, ParseError::Unparseable("I'll give 5".into())),
            ("[5]", false, ParseError::Unparseable("[5]".into())),
        ];
        for (raw, reasoning, expected) in cases {
            assert_eq!(&parse_decision(raw, *reasoning, 10).unwrap_err(), expected, "{raw}");
        }
    }

    #[test]
    fn lenient_accepts_fences_and_single_quotes() {
        assert_eq!(
            parse_decision("```json\n{\"contribution\": 4}\n```", false, 10),
            Ok(decision(4, None))
        );
        assert_eq!(parse_decision("{'contribution': 6}", false, 10), Ok(decision(6, None)));
        assert_eq!(
            parse_decision(
                "Sure! {'reasoning': 'they said \"fair\"', 'contribution': 2} thanks",
                true,
                10
            ),
            Ok(decision(2, Some("they said \"fair\"")))
        );
        // Apostrophes inside double-quoted strings survive.
        assert_eq!(
            parse_decision(r#"{"reasoning": "I'll match", "contribution": 5}"#, true, 10),
            Ok(decision(5, Some("I'll match")))
        );
    }

    #[test]
    fn strict_rejects_what_lenient_repairs() {
        for raw in ["{'contribution': 6}", "```json\n{\"contribution\": 4}\n```"] {
            assert!(matches!(
                parse_decision_with(raw, false, 10, Strictness::Strict),
                Err(ParseError::Unparseable(_))
            ));
        }
    }

    #[test]
    fn reasoning_ignored_when_not_expected() {
        assert_eq!(
            parse_decision(r#"{"reasoning": "x", "contribution": 3}"#, false, 10),
            Ok(decision(3, None))
        );
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(c in 0u32..=10, reasoning in proptest::option::of(any::<String>())) {
            let d = ContributionDecision { contribution: c, reasoning };
            let expects = d.reasoning.is_some();
            prop_assert_eq!(parse_decision(&render_decision(&d), expects, 10), Ok(d.clone()));
            prop_assert_eq!(
                parse_decision_with(&render_decision(&d), expects, 10, Strictness::Strict),
                Ok(d)
            );
        }
    }
}
