use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error at line {line}, column {column}: unknown key `{key}`{}", suggestion_text(.suggestion))]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
        line: usize,
        column: usize,
    },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error(transparent)]
    Core(#[from] spinlock_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

fn suggestion_text(s: &Option<String>) -> String {
    match s {
        Some(k) => format!(" (did you mean `{k}`?)"),
        None => String::new(),
    }
}

impl CliError {
    pub fn validation(key: &str, message: &str) -> Self {
        CliError::Validation {
            key: key.to_string(),
            message: message.to_string(),
        }
    }

    /// Turns a serde_json error into a positioned diagnostic; unknown keys
    /// and enum values get the closest valid spelling.
    pub fn from_parse(err: &serde_json::Error) -> Self {
        let (line, column) = (err.line(), err.column());
        let text = err.to_string();
        let message = text
            .rsplit_once(" at line ")
            .map_or(text.as_str(), |(m, _)| m)
            .to_string();
        for prefix in ["unknown field `", "unknown variant `"] {
            if let Some(rest) = message.strip_prefix(prefix) {
                if let Some((key, tail)) = rest.split_once('`') {
                    return CliError::UnknownKey {
                        key: key.to_string(),
                        suggestion: nearest(key, &backticked(tail)),
                        line,
                        column,
                    };
                }
            }
        }
        CliError::Parse {
            line,
            column,
            message,
        }
    }
}

fn backticked(s: &str) -> Vec<String> {
    s.split('`')
        .skip(1)
        .step_by(2)
        .map(str::to_string)
        .collect()
}

fn nearest(key: &str, candidates: &[String]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::levenshtein(key, c), c))
        .min_by_key(|(d, _)| *d)
        .map(|(_, c)| c.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_candidates() {
        let v = backticked(", expected one of `alpha`, `beta`, `gamma`");
        assert_eq!(v, ["alpha", "beta", "gamma"]);
        assert_eq!(nearest("gama", &v).as_deref(), Some("gamma"));
    }
}
