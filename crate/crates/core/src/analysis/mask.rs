//! Removing model identity from reasoning text before it is scored.
//!
//! Model names (case-insensitive) become "the other player", and the standalone words
//! "AI", "AIs", "model" and "models" are deleted. When anything changed, runs of spaces are
//! collapsed. Passes repeat until nothing changes, so masking is idempotent.

use regex::Regex;

pub const REPLACEMENT: &str = "the other player";

/// Names always masked in addition to the run's display names.
pub const KNOWN_ALIASES: &[&str] = &[
    "GPT-4o",
    "GPT",
    "Claude Sonnet 4",
    "Claude-Sonnet-4",
    "Sonnet 4",
    "Claude",
    "Sonnet",
    "Llama 4 Maverick",
    "Llama-4-Maverick",
    "Llama 4",
    "Llama",
    "Maverick",
    "Qwen3-235B-A22B",
    "Qwen3",
    "Qwen",
    "Gemini",
];

const MAX_PASSES: usize = 8;

#[derive(Clone, Debug)]
pub struct Masker {
    names: Option<Regex>,
    tokens: Regex,
    spaces: Regex,
}

impl Masker {
    /// Masks the known aliases plus `display_names`.
    pub fn new<S: AsRef<str>>(display_names: &[S]) -> Self {
        let mut names: Vec<String> = KNOWN_ALIASES
            .iter()
            .map(|s| s.to_string())
            .chain(display_names.iter().map(|s| s.as_ref().trim().to_string()))
            .filter(|s| !s.is_empty())
            .collect();
        // longest first so "Claude Sonnet 4" wins over "Claude"
        names.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        names.dedup_by(|a, b| a.eq_ignore_ascii_case(b));
        let word = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric() || c == '_');
        let alternatives: Vec<String> = names
            .iter()
            .map(|n| {
                let lead = if word(n.chars().next()) { r"\b" } else { "" };
                let tail = if word(n.chars().last()) { r"\b" } else { "" };
                format!("{lead}{}{tail}", regex::escape(n))
            })
            .collect();
        Masker {
            names: (!alternatives.is_empty())
                .then(|| Regex::new(&format!("(?i)(?:{})", alternatives.join("|"))).unwrap()),
            tokens: Regex::new(r"(?i)\b(?:AIs?|models?)\b").unwrap(),
            spaces: Regex::new(r"[ \t]{2,}").unwrap(),
        }
    }

    fn pass(&self, text: &str) -> String {
        let named = match &self.names {
            Some(re) => re.replace_all(text, REPLACEMENT).into_owned(),
            None => text.to_string(),
        };
        let stripped = self.tokens.replace_all(&named, "").into_owned();
        if stripped == text {
            return stripped;
        }
        let collapsed = self.spaces.replace_all(&stripped, " ");
        collapsed
            .lines()
            .map(str::trim)
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn mask(&self, text: &str) -> String {
        let mut current = text.to_string();
        for _ in 0..MAX_PASSES {
            let next = self.pass(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    pub fn is_masked(&self, text: &str) -> bool {
        self.mask(text) == text
    }
}

pub fn mask_reasoning<S: AsRef<str>>(text: &str, display_names: &[S]) -> String {
    Masker::new(display_names).mask(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NONE: &[&str] = &[];

    #[test]
    fn replaces_names_and_strips_tokens() {
        assert_eq!(
            mask_reasoning("GPT-4o will likely cooperate", NONE),
            "the other player will likely cooperate"
        );
        assert_eq!(
            mask_reasoning("an AI model playing Qwen3", NONE),
            "an playing the other player"
        );
        assert_eq!(
            mask_reasoning("claude sonnet 4 and LLAMA 4 MAVERICK", NONE),
            "the other player and the other player"
        );
        assert_eq!(mask_reasoning("Models differ. Remodel it.", NONE), "differ. Remodel it.");
    }

    #[test]
    fn text_without_names_is_unchanged() {
        let t = "I will  contribute 7 points to build trust.";
        assert_eq!(mask_reasoning(t, NONE), t);
    }

    #[test]
    fn display_names_are_masked() {
        let m = Masker::new(&["Mistral Large"]);
        assert_eq!(m.mask("mistral large may defect"), "the other player may defect");
        assert!(!m.mask("Mistral Largesse").contains("the other player"));
    }

    fn shared_masker() -> &'static Masker {
        static MASKER: std::sync::OnceLock<Masker> = std::sync::OnceLock::new();
        MASKER.get_or_init(|| Masker::new(&["Sonnet 4"]))
    }

    proptest! {
        #[test]
        fn idempotent(words in proptest::collection::vec(
            prop_oneof![
                Just("GPT-4o"), Just("gpt"), Just("AI"), Just("ai"), Just("model"), Just("Models"),
                Just("Sonnet"), Just("4"), Just("Claude"), Just("the"), Just("other"),
                Just("player"), Just("cooperate"), Just("  "), Just(","), Just("Qwen3"), Just("\n"),
            ],
            0..30,
        )) {
            let text = words.join(" ");
            let m = shared_masker();
            let once = m.mask(&text);
            prop_assert_eq!(m.mask(&once), once.clone());
        }
    }
}
