//! Corpus loading for Brier evaluation.
//!
//! Two layouts are understood: newline-delimited JSON where each non-empty
//! line is one document given as an array of token ids, and raw UTF-8 text
//! read through a byte-level tokenizer (token id = byte value, vocabulary 256).

use std::path::Path;

use crate::outcome::TokenId;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("corpus is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// `.jsonl` / `.ndjson` files are JSON lines, anything else is raw text.
    #[default]
    Auto,
    Jsonl,
    Bytes,
}

/// Token ids of a text under the byte-level tokenizer.
pub fn byte_tokens(bytes: &[u8]) -> Vec<TokenId> {
    bytes.iter().map(|&b| TokenId::from(b)).collect()
}

/// One document per non-empty line.
pub fn parse_jsonl(text: &str) -> Result<Vec<Vec<TokenId>>, CorpusError> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Vec<TokenId> = serde_json::from_str(line).map_err(|e| CorpusError::BadLine {
            line: i + 1,
            reason: e.to_string(),
        })?;
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<Vec<TokenId>>, CorpusError> {
    let path = path.as_ref();
    let format = match format {
        CorpusFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => CorpusFormat::Jsonl,
            _ => CorpusFormat::Bytes,
        },
        f => f,
    };
    match format {
        CorpusFormat::Jsonl => parse_jsonl(&std::fs::read_to_string(path)?),
        _ => {
            let bytes = std::fs::read(path)?;
            if bytes.is_empty() {
                return Err(CorpusError::Empty);
            }
            Ok(vec![byte_tokens(&bytes)])
        }
    }
}
