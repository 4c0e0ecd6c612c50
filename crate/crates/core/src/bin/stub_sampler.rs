//! Scriptable sampler child for protocol tests.
//!
//! ```text
//! lfree-stub-sampler --mode <mode> [--k 4] [--vocab 8] [--token 0] [--corpus FILE]
//! ```
//!
//! Modes:
//! - `constant`: every chunk is `--token` repeated `k` times
//! - `uniform`: i.i.d. uniform tokens, seeded by the request seed
//! - `unigram`: i.i.d. tokens from the byte frequencies of `--corpus`
//! - `bigram`: each token drawn from the corpus successors of the previous
//!   token (the last context token for the first one), unigram when unseen
//! - `oracle`: the `k` corpus bytes following the context (context length = position)
//! - `truncate-once`: like `constant`, but the first response's first chunk is one token short
//! - `id-mismatch`: replies with `id + 1`
//! - `bad-token`: emits token id `vocab`
//! - `malformed`: replies with a line that is not JSON
//! - `remote-error`: replies with an error object
//! - `silent`: never sends the handshake
//! - `bad-hello`: sends a handshake with `vocab_size` 1

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use lfree::categorical::CategoricalTable;
use lfree::corpus::byte_tokens;
use lfree::extproto::SampleRequest;
use lfree::{ExplicitCategorical, Outcome, RandomSeed};
use rand::Rng;

struct Args {
    mode: String,
    k: usize,
    vocab: u32,
    token: u32,
    corpus: Vec<u32>,
}

fn parse_args() -> Result<Args, String> {
    let mut args = Args {
        mode: "constant".into(),
        k: 4,
        vocab: 8,
        token: 0,
        corpus: Vec::new(),
    };
    let mut it = std::env::args().skip(1);
    while let Some(flag) = it.next() {
        let mut value = || it.next().ok_or(format!("{flag} needs a value"));
        match flag.as_str() {
            "--mode" => args.mode = value()?,
            "--k" => args.k = value()?.parse().map_err(|e| format!("--k: {e}"))?,
            "--vocab" => args.vocab = value()?.parse().map_err(|e| format!("--vocab: {e}"))?,
            "--token" => args.token = value()?.parse().map_err(|e| format!("--token: {e}"))?,
            "--corpus" => {
                let path = value()?;
                args.corpus = byte_tokens(&std::fs::read(&path).map_err(|e| format!("{path}: {e}"))?);
            }
            other => return Err(format!("unknown flag {other}")),
        }
    }
    Ok(args)
}

fn table_from_counts(counts: &BTreeMap<u32, u64>) -> Option<CategoricalTable> {
    let dist = ExplicitCategorical::from_weights(counts.iter().map(|(&t, &c)| (Outcome::token(t), c as f64))).ok()?;
    Some(CategoricalTable::new(&dist))
}

struct Tables {
    unigram: CategoricalTable,
    successors: BTreeMap<u32, CategoricalTable>,
}

impl Tables {
    fn build(corpus: &[u32]) -> Result<Self, String> {
        let mut unigram = BTreeMap::new();
        let mut pairs: BTreeMap<u32, BTreeMap<u32, u64>> = BTreeMap::new();
        for &t in corpus {
            *unigram.entry(t).or_default() += 1;
        }
        for w in corpus.windows(2) {
            *pairs.entry(w[0]).or_default().entry(w[1]).or_default() += 1;
        }
        let unigram = table_from_counts(&unigram).ok_or("this mode needs a non-empty --corpus")?;
        let successors = pairs
            .iter()
            .filter_map(|(&prev, c)| Some((prev, table_from_counts(c)?)))
            .collect();
        Ok(Tables { unigram, successors })
    }

    fn next(&self, prev: Option<u32>, rng: &mut lfree::LfRng) -> u32 {
        let table = prev.and_then(|p| self.successors.get(&p)).unwrap_or(&self.unigram);
        table.draw(rng).tokens()[0]
    }
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("lfree-stub-sampler: {e}");
            return ExitCode::from(2);
        }
    };
    let tables = if args.mode == "unigram" || args.mode == "bigram" {
        match Tables::build(&args.corpus) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("lfree-stub-sampler: {e}");
                return ExitCode::from(2);
            }
        }
    } else {
        None
    };

    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    if args.mode == "silent" {
        for _ in stdin.lock().lines() {}
        return ExitCode::SUCCESS;
    }
    let vocab = if args.mode == "bad-hello" { 1 } else { args.vocab };
    let vocab = if matches!(args.mode.as_str(), "unigram" | "bigram" | "oracle") { 256 } else { vocab };
    writeln!(out, r#"{{"hello": {{"k": {}, "vocab_size": {}}}}}"#, args.k, vocab).unwrap();
    out.flush().unwrap();

    let mut first = true;
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let req: SampleRequest = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                let msg = serde_json::json!({"id": -1, "error": e.to_string()});
                writeln!(out, "{msg}").unwrap();
                out.flush().unwrap();
                continue;
            }
        };
        let mut rng = RandomSeed(req.seed).rng();
        let mut samples: Vec<Vec<i64>> = (0..req.num_samples)
            .map(|_| match args.mode.as_str() {
                "uniform" => (0..args.k).map(|_| i64::from(rng.random_range(0..args.vocab))).collect(),
                "unigram" => {
                    let t = tables.as_ref().unwrap();
                    (0..args.k).map(|_| i64::from(t.next(None, &mut rng))).collect()
                }
                "bigram" => {
                    let t = tables.as_ref().unwrap();
                    let mut prev = req.context.last().copied();
                    (0..args.k)
                        .map(|_| {
                            let x = t.next(prev, &mut rng);
                            prev = Some(x);
                            i64::from(x)
                        })
                        .collect()
                }
                "oracle" => {
                    let t = req.context.len();
                    (0..args.k)
                        .map(|i| args.corpus.get(t + i).map_or(0, |&x| i64::from(x)))
                        .collect()
                }
                "bad-token" => vec![i64::from(args.vocab); args.k],
                _ => vec![i64::from(args.token); args.k],
            })
            .collect();
        if args.mode == "truncate-once" && first {
            if let Some(s) = samples.first_mut() {
                s.pop();
            }
        }
        first = false;
        let id = if args.mode == "id-mismatch" { req.id + 1 } else { req.id };
        match args.mode.as_str() {
            "malformed" => writeln!(out, "this is not json").unwrap(),
            "remote-error" => writeln!(out, "{}", serde_json::json!({"id": id, "error": "refused"})).unwrap(),
            _ => writeln!(out, "{}", serde_json::json!({"id": id, "samples": samples})).unwrap(),
        }
        out.flush().unwrap();
    }
    ExitCode::SUCCESS
}
