//! Fold scripts: one `<verb> <target>` per line, `#` starts a comment.
//!
//! ```text
//! # chr11, look at q13 in detail
//! compress p15
//! open q13
//! open_sub q13.1
//! ```

use foldscope_core::fold::FoldVerb;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub line: usize,
    pub verb: FoldVerb,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

pub fn parse(text: &str) -> Result<Vec<Step>, ScriptError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [verb, target] = fields.as_slice() else {
            return Err(ScriptError {
                line: i + 1,
                message: format!("expected `<verb> <target>`, got {line:?}"),
            });
        };
        let verb = verb.parse::<FoldVerb>().map_err(|message| ScriptError { line: i + 1, message })?;
        steps.push(Step {
            line: i + 1,
            verb,
            target: target.to_string(),
        });
    }
    Ok(steps)
}
