//! Test-only oracles. Nothing here calls the distance or comparison code
//! under test; histograms are read through their public bins only.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use opsim::features::{HistogramSource, OpcodeHistogram, ProgramProfile};
use proptest::prelude::*;

pub const POOL: [&str; 12] = [
    "mov", "push", "pop", "call", "ret", "xor", "add", "sub", "cmp", "jz", "nop", "lea",
];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn source(program: &str, sub: &str) -> HistogramSource {
    HistogramSource {
        program_id: program.into(),
        subroutine: sub.into(),
    }
}

/// Normalized histogram from `(pool index, count)` pairs.
pub fn hist_from(counts: &[(usize, u64)], sub: &str) -> OpcodeHistogram {
    let raw = OpcodeHistogram::from_counts(
        counts.iter().map(|&(i, c)| (POOL[i % POOL.len()], c)),
        source("p", sub),
    )
    .unwrap();
    opsim::normalize(&raw).unwrap()
}

pub fn arb_counts() -> impl Strategy<Value = Vec<(usize, u64)>> {
    prop::collection::vec((0..POOL.len(), 1u64..30), 1..8)
}

pub fn arb_hist() -> impl Strategy<Value = OpcodeHistogram> {
    arb_counts().prop_map(|c| hist_from(&c, "s"))
}

pub fn arb_profile(id: &'static str, max: usize) -> impl Strategy<Value = ProgramProfile> {
    prop::collection::vec(arb_counts(), 1..=max).prop_map(move |subs| ProgramProfile {
        program_id: id.into(),
        histograms: subs
            .iter()
            .enumerate()
            .map(|(i, c)| hist_from(c, &format!("s{i}")))
            .collect(),
    })
}

/// Dense Minkowski sum over the union of bins, plain left-to-right
/// accumulation in the order given by `keys`.
pub fn oracle_minkowski(
    x: &OpcodeHistogram,
    y: &OpcodeHistogram,
    r: u32,
    root: bool,
    keys: &[String],
) -> f64 {
    let mut s = 0.0;
    for k in keys {
        s += (x.get(k) - y.get(k)).abs().powf(r as f64);
    }
    if root {
        s.powf(1.0 / r as f64)
    } else {
        s
    }
}

pub fn union_keys(x: &OpcodeHistogram, y: &OpcodeHistogram) -> Vec<String> {
    x.bins()
        .chain(y.bins())
        .map(|(k, _)| k.to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

pub fn oracle_dist(x: &OpcodeHistogram, y: &OpcodeHistogram, r: u32, root: bool) -> f64 {
    oracle_minkowski(x, y, r, root, &union_keys(x, y))
}

/// All-pairs table, then row minima, then their mean.
pub fn oracle_directed(p1: &ProgramProfile, p2: &ProgramProfile, r: u32, root: bool) -> f64 {
    let table: Vec<Vec<f64>> = p1
        .histograms
        .iter()
        .map(|a| p2.histograms.iter().map(|b| oracle_dist(a, b, r, root)).collect())
        .collect();
    let minima: Vec<f64> = table
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    minima.iter().sum::<f64>() / minima.len() as f64
}

pub fn oracle_symmetric(p1: &ProgramProfile, p2: &ProgramProfile, r: u32, root: bool) -> f64 {
    (oracle_directed(p1, p2, r, root) + oracle_directed(p2, p1, r, root)) / 2.0
}

/// Independent line scanner for the listing fixtures: counts instruction
/// lines per `proc` block without using the library parser.
pub fn scan_proc_counts(text: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut current: Option<(String, usize)> = None;
    for line in text.lines() {
        let code = line.split(';').next().unwrap().trim();
        if code.is_empty() {
            continue;
        }
        let words: Vec<&str> = code.split_whitespace().collect();
        if words.len() >= 2 && words[1] == "proc" {
            current = Some((words[0].to_string(), 0));
        } else if words.len() >= 2 && words[1] == "endp" {
            out.push(current.take().unwrap());
        } else if let Some((_, n)) = current.as_mut() {
            let label_only = words.len() == 1 && code.ends_with(':');
            if !label_only {
                *n += 1;
            }
        }
    }
    out
}
