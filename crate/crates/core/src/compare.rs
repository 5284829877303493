//! Program-level comparison.
//!
//! Every subroutine histogram of the source program is matched against all
//! subroutine histograms of the target and keeps its closest one. The mean
//! of those minima is the directed distance; averaging both directions
//! gives the symmetric distance used for the matrix and for classification.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::SystemTime;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::distance::{minkowski_unchecked, DistanceError, MetricConfig};
use crate::features::{csv_field, ProgramProfile};
use crate::numeric::NeumaierSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("profile `{0}` has no histograms")]
    EmptyProfile(String),
    #[error("program id `{0}` appears more than once")]
    DuplicateProgramId(String),
    #[error("a distance matrix needs at least two programs")]
    TooFewPrograms,
    #[error("matrix was computed with {matrix} but the classifier uses {classifier}")]
    MetricMismatch {
        matrix: MetricConfig,
        classifier: MetricConfig,
    },
    #[error("threshold must be a positive finite number, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Best match of one source subroutine inside the target program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubroutineMatch {
    pub subroutine: String,
    pub best_match: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedComparison {
    pub from: String,
    pub to: String,
    pub per_subroutine_minima: Vec<SubroutineMatch>,
    pub directed_distance: f64,
}

fn check_profile(p: &ProgramProfile) -> Result<(), CompareError> {
    if p.histograms.is_empty() {
        return Err(CompareError::EmptyProfile(p.program_id.clone()));
    }
    if let Some(h) = p.histograms.iter().find(|h| !h.is_normalized()) {
        return Err(DistanceError::NonNormalizedInput {
            program_id: h.source.program_id.clone(),
            subroutine: h.source.subroutine.clone(),
        }
        .into());
    }
    Ok(())
}

/// Mean over `from`'s subroutines of the distance to their closest
/// subroutine in `to`. Ties go to the earliest subroutine of `to`.
pub fn directed_distance(
    from: &ProgramProfile,
    to: &ProgramProfile,
    cfg: &MetricConfig,
) -> Result<DirectedComparison, CompareError> {
    check_profile(from)?;
    check_profile(to)?;
    Ok(directed_unchecked(from, to, cfg))
}

fn directed_unchecked(from: &ProgramProfile, to: &ProgramProfile, cfg: &MetricConfig) -> DirectedComparison {
    let minima: Vec<SubroutineMatch> = from
        .histograms
        .iter()
        .map(|hi| {
            let mut best: Option<(usize, f64)> = None;
            for (j, hj) in to.histograms.iter().enumerate() {
                let d = minkowski_unchecked(hi, hj, cfg);
                if best.is_none_or(|(_, b)| d < b) {
                    best = Some((j, d));
                }
            }
            let (j, d) = best.expect("target profile is non-empty");
            SubroutineMatch {
                subroutine: hi.source.subroutine.clone(),
                best_match: to.histograms[j].source.subroutine.clone(),
                distance: d,
            }
        })
        .collect();
    let mean = NeumaierSum::sum(minima.iter().map(|m| m.distance)) / minima.len() as f64;
    DirectedComparison {
        from: from.program_id.clone(),
        to: to.program_id.clone(),
        per_subroutine_minima: minima,
        directed_distance: mean,
    }
}

/// Average of the two directed distances.
pub fn symmetric_distance(
    p1: &ProgramProfile,
    p2: &ProgramProfile,
    cfg: &MetricConfig,
) -> Result<f64, CompareError> {
    check_profile(p1)?;
    check_profile(p2)?;
    Ok(symmetric_unchecked(p1, p2, cfg))
}

fn symmetric_unchecked(p1: &ProgramProfile, p2: &ProgramProfile, cfg: &MetricConfig) -> f64 {
    let a = directed_unchecked(p1, p2, cfg).directed_distance;
    let b = directed_unchecked(p2, p1, cfg).directed_distance;
    // Addition is commutative in IEEE arithmetic, so swapping the
    // arguments gives a bit-identical result.
    (a + b) / 2.0
}

/// Symmetric pairwise program distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    program_ids: Vec<String>,
    cells: Vec<Vec<f64>>,
    metric: MetricConfig,
    generated_at: SystemTime,
}

impl DistanceMatrix {
    pub fn program_ids(&self) -> &[String] {
        &self.program_ids
    }

    pub fn metric(&self) -> MetricConfig {
        self.metric
    }

    pub fn generated_at(&self) -> SystemTime {
        self.generated_at
    }

    pub fn len(&self) -> usize {
        self.program_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.program_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.program_ids.iter().position(|p| p == id)
    }

    /// Matrix as CSV. Cells are written with three decimals unless
    /// `full_precision` is set, in which case the shortest representation
    /// that round-trips is used.
    pub fn to_csv(&self, full_precision: bool) -> String {
        let mut out = String::from("symmetric_distance");
        for id in &self.program_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (id, row) in self.program_ids.iter().zip(&self.cells) {
            out.push_str(&csv_field(id));
            for d in row {
                if full_precision {
                    let _ = write!(out, ",{d}");
                } else {
                    let _ = write!(out, ",{d:.3}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "distance": "symmetric",
            "metric": self.metric.to_string(),
            "program_ids": self.program_ids,
            "cells": self.cells,
        })
    }
}

/// Fills the symmetric distance for every unordered pair of profiles.
/// Pairs are computed in parallel; each cell is computed once and mirrored.
pub fn distance_matrix(
    profiles: &[ProgramProfile],
    cfg: &MetricConfig,
) -> Result<DistanceMatrix, CompareError> {
    if profiles.len() < 2 {
        return Err(CompareError::TooFewPrograms);
    }
    let mut seen = HashSet::new();
    for p in profiles {
        if !seen.insert(p.program_id.as_str()) {
            return Err(CompareError::DuplicateProgramId(p.program_id.clone()));
        }
        check_profile(p)?;
    }

    let n = profiles.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| symmetric_unchecked(&profiles[i], &profiles[j], cfg))
        .collect();

    let mut cells = vec![vec![0.0; n]; n];
    for (&(i, j), d) in pairs.iter().zip(values) {
        cells[i][j] = d;
        cells[j][i] = d;
    }
    Ok(DistanceMatrix {
        program_ids: profiles.iter().map(|p| p.program_id.clone()).collect(),
        cells,
        metric: *cfg,
        generated_at: SystemTime::now(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    threshold: f64,
    pub metric: MetricConfig,
}

impl ClassifierConfig {
    pub fn new(threshold: f64, metric: MetricConfig) -> Result<Self, CompareError> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(CompareError::InvalidThreshold(threshold));
        }
        Ok(ClassifierConfig { threshold, metric })
    }

    /// Uses the metric's shipped threshold, if it has one.
    pub fn with_default_threshold(metric: MetricConfig) -> Option<Self> {
        metric
            .default_threshold()
            .map(|threshold| ClassifierConfig { threshold, metric })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    VariantPair,
    Distinct,
}

/// `VariantPair` iff the distance is strictly below the threshold.
pub fn classify_pair(distance: f64, cfg: &ClassifierConfig) -> Verdict {
    if distance < cfg.threshold {
        Verdict::VariantPair
    } else {
        Verdict::Distinct
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub pair: (String, String),
    pub distance: f64,
    pub threshold: f64,
    pub metric: String,
    pub verdict: Verdict,
}

/// One verdict per unordered pair, ordered lexicographically by id.
pub fn classify_corpus(
    matrix: &DistanceMatrix,
    cfg: &ClassifierConfig,
) -> Result<Vec<PairVerdict>, CompareError> {
    if matrix.metric != cfg.metric {
        return Err(CompareError::MetricMismatch {
            matrix: matrix.metric,
            classifier: cfg.metric,
        });
    }
    let mut order: Vec<usize> = (0..matrix.len()).collect();
    order.sort_by(|&a, &b| matrix.program_ids[a].cmp(&matrix.program_ids[b]));
    let metric = cfg.metric.to_string();
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            let distance = matrix.cells[i][j];
            out.push(PairVerdict {
                pair: (matrix.program_ids[i].clone(), matrix.program_ids[j].clone()),
                distance,
                threshold: cfg.threshold,
                metric: metric.clone(),
                verdict: classify_pair(distance, cfg),
            });
        }
    }
    Ok(out)
}

/// Verdicts as pretty JSON with sorted keys.
pub fn verdicts_json(verdicts: &[PairVerdict]) -> String {
    let value = serde_json::to_value(verdicts).expect("verdicts serialize");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}
