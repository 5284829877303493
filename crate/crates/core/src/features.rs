//! Opcode frequency histograms.
//!
//! Each subroutine is summarized by how often every mnemonic occurs in it.
//! Raw histograms hold counts; normalized histograms hold proportions that
//! sum to one, which makes subroutines of different lengths comparable.
//! Bins are sparse: a mnemonic that never occurs has no entry and reads as
//! zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::listing::{Program, Subroutine};
use crate::numeric::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramKind {
    Raw,
    Normalized,
}

/// Where a histogram came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramSource {
    pub program_id: String,
    pub subroutine: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpcodeHistogram {
    bins: BTreeMap<String, f64>,
    kind: HistogramKind,
    pub source: HistogramSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("subroutine `{subroutine}` of `{program_id}` has no instructions")]
    EmptySubroutine {
        program_id: String,
        subroutine: String,
    },
    #[error("histogram of `{0}` has a zero total and cannot be normalized")]
    ZeroTotal(String),
    #[error("program `{0}` has no subroutines")]
    EmptyProgram(String),
    #[error("histogram bin `{0}` holds an invalid value")]
    InvalidBin(String),
}

impl OpcodeHistogram {
    /// Builds a raw histogram from explicit counts. Zero counts are dropped.
    pub fn from_counts<'a, I>(counts: I, source: HistogramSource) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut bins = BTreeMap::new();
        for (mnemonic, count) in counts {
            if count > 0 {
                *bins.entry(mnemonic.to_string()).or_insert(0.0) += count as f64;
            }
        }
        if bins.is_empty() {
            return Err(FeatureError::ZeroTotal(source.subroutine));
        }
        Ok(OpcodeHistogram {
            bins,
            kind: HistogramKind::Raw,
            source,
        })
    }

    /// Builds a normalized histogram from explicit proportions. The values
    /// must be in `[0, 1]` and sum to one within `1e-9`.
    pub fn from_proportions<'a, I>(
        proportions: I,
        source: HistogramSource,
    ) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut bins = BTreeMap::new();
        for (mnemonic, p) in proportions {
            if !(0.0..=1.0).contains(&p) {
                return Err(FeatureError::InvalidBin(mnemonic.to_string()));
            }
            if p > 0.0 {
                *bins.entry(mnemonic.to_string()).or_insert(0.0) += p;
            }
        }
        let total: f64 = NeumaierSum::sum(bins.values().copied());
        if (total - 1.0).abs() > 1e-9 {
            return Err(FeatureError::ZeroTotal(source.subroutine));
        }
        Ok(OpcodeHistogram {
            bins,
            kind: HistogramKind::Normalized,
            source,
        })
    }

    pub fn kind(&self) -> HistogramKind {
        self.kind
    }

    pub fn is_normalized(&self) -> bool {
        self.kind == HistogramKind::Normalized
    }

    /// Value of one bin; absent mnemonics are zero.
    pub fn get(&self, mnemonic: &str) -> f64 {
        self.bins.get(mnemonic).copied().unwrap_or(0.0)
    }

    /// Non-zero bins in mnemonic order.
    pub fn bins(&self) -> impl Iterator<Item = (&str, f64)> {
        self.bins.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub(crate) fn bin_map(&self) -> &BTreeMap<String, f64> {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> f64 {
        NeumaierSum::sum(self.bins.values().copied())
    }
}

/// Counts mnemonics in a subroutine.
pub fn build_histogram(program_id: &str, sub: &Subroutine) -> Result<OpcodeHistogram, FeatureError> {
    if sub.is_empty() {
        return Err(FeatureError::EmptySubroutine {
            program_id: program_id.to_string(),
            subroutine: sub.name.clone(),
        });
    }
    let mut bins: BTreeMap<String, f64> = BTreeMap::new();
    for ins in &sub.instructions {
        *bins.entry(ins.mnemonic.clone()).or_insert(0.0) += 1.0;
    }
    Ok(OpcodeHistogram {
        bins,
        kind: HistogramKind::Raw,
        source: HistogramSource {
            program_id: program_id.to_string(),
            subroutine: sub.name.clone(),
        },
    })
}

/// Divides every bin by the histogram total. Already-normalized input is
/// renormalized, which leaves it unchanged up to rounding.
pub fn normalize(h: &OpcodeHistogram) -> Result<OpcodeHistogram, FeatureError> {
    let total = h.total();
    if total <= 0.0 || !total.is_finite() {
        return Err(FeatureError::ZeroTotal(h.source.subroutine.clone()));
    }
    let bins = h
        .bins
        .iter()
        .map(|(k, v)| (k.clone(), v / total))
        .collect();
    Ok(OpcodeHistogram {
        bins,
        kind: HistogramKind::Normalized,
        source: h.source.clone(),
    })
}

/// A program summarized as one normalized histogram per subroutine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramProfile {
    pub program_id: String,
    pub histograms: Vec<OpcodeHistogram>,
}

impl ProgramProfile {
    pub fn len(&self) -> usize {
        self.histograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histograms.is_empty()
    }
}

pub fn profile(program: &Program) -> Result<ProgramProfile, FeatureError> {
    if program.subroutines.is_empty() {
        return Err(FeatureError::EmptyProgram(program.id.clone()));
    }
    let histograms = program
        .subroutines
        .iter()
        .map(|sub| normalize(&build_histogram(&program.id, sub)?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProgramProfile {
        program_id: program.id.clone(),
        histograms,
    })
}

/// One row of the histogram dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub program_id: String,
    pub subroutine: String,
    pub mnemonic: String,
    pub count: u64,
    pub proportion: f64,
}

/// Flattens programs into dump rows sorted by program, subroutine and
/// mnemonic.
pub fn histogram_rows(programs: &[Program]) -> Result<Vec<HistogramRow>, FeatureError> {
    let mut rows = Vec::new();
    for program in programs {
        for sub in &program.subroutines {
            let raw = build_histogram(&program.id, sub)?;
            let norm = normalize(&raw)?;
            for (mnemonic, count) in raw.bins() {
                rows.push(HistogramRow {
                    program_id: program.id.clone(),
                    subroutine: sub.name.clone(),
                    mnemonic: mnemonic.to_string(),
                    count: count as u64,
                    proportion: norm.get(mnemonic),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.program_id, &a.subroutine, &a.mnemonic).cmp(&(&b.program_id, &b.subroutine, &b.mnemonic))
    });
    Ok(rows)
}

pub fn histogram_csv(rows: &[HistogramRow]) -> String {
    let mut out = String::from("program_id,subroutine,mnemonic,count,proportion\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.program_id),
            csv_field(&r.subroutine),
            csv_field(&r.mnemonic),
            r.count,
            r.proportion
        );
    }
    out
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::listing::{parse_listing, Instruction};

    fn sub(mnemonics: &[&str]) -> Subroutine {
        Subroutine::new(
            "s",
            mnemonics
                .iter()
                .enumerate()
                .map(|(i, m)| Instruction::new(m, &[], i + 1))
                .collect(),
        )
    }

    fn src() -> HistogramSource {
        HistogramSource {
            program_id: "p".into(),
            subroutine: "s".into(),
        }
    }

    #[test]
    fn counts_mnemonics() {
        let h = build_histogram("p", &sub(&["mov", "mov", "ret"])).unwrap();
        assert_eq!(h.kind(), HistogramKind::Raw);
        assert_eq!(h.get("mov"), 2.0);
        assert_eq!(h.get("ret"), 1.0);
        assert_eq!(h.get("xor"), 0.0);
        assert_eq!(h.len(), 2);

        let h = build_histogram("p", &sub(&["xor"])).unwrap();
        assert_eq!(h.bins().collect::<Vec<_>>(), [("xor", 1.0)]);
    }

    #[test]
    fn empty_subroutine_is_an_error() {
        assert!(matches!(
            build_histogram("p", &sub(&[])),
            Err(FeatureError::EmptySubroutine { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        let h = OpcodeHistogram::from_counts([("mov", 2), ("ret", 2)], src()).unwrap();
        let n = normalize(&h).unwrap();
        assert!(n.is_normalized());
        assert_eq!(n.get("mov"), 0.5);
        assert_eq!(n.get("ret"), 0.5);

        let n = normalize(&OpcodeHistogram::from_counts([("xor", 1)], src()).unwrap()).unwrap();
        assert_eq!(n.get("xor"), 1.0);

        let h = OpcodeHistogram::from_counts(
            [("mov", 3), ("push", 1), ("call", 1), ("ret", 1)],
            src(),
        )
        .unwrap();
        let n = normalize(&h).unwrap();
        assert!((n.get("mov") - 0.5).abs() < 1e-12);
        for m in ["push", "call", "ret"] {
            assert!((n.get(m) - 1.0 / 6.0).abs() < 1e-12);
        }
        assert!((n.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_total_rejected() {
        assert!(matches!(
            OpcodeHistogram::from_counts([("mov", 0)], src()),
            Err(FeatureError::ZeroTotal(_))
        ));
        assert!(OpcodeHistogram::from_proportions([("mov", 0.4)], src()).is_err());
        assert!(OpcodeHistogram::from_proportions([("mov", 1.5)], src()).is_err());
    }

    #[test]
    fn profile_of_identical_bodies() {
        let p = parse_listing("a proc\n mov eax, 1\n ret\na endp\nb proc\n mov ebx, 2\n ret\nb endp", "p")
            .unwrap();
        let prof = profile(&p).unwrap();
        assert_eq!(prof.len(), 2);
        assert_eq!(prof.histograms[0].bin_map(), prof.histograms[1].bin_map());
        assert_eq!(prof.histograms[1].source.subroutine, "b");
    }

    #[test]
    fn empty_program_has_no_profile() {
        let p = Program {
            id: "p".into(),
            subroutines: vec![],
        };
        assert!(matches!(profile(&p), Err(FeatureError::EmptyProgram(_))));
    }

    #[test]
    fn csv_dump_sorted() {
        let b = parse_listing("z proc\n nop\n mov a, b\nz endp\na proc\n ret\na endp", "b").unwrap();
        let a = parse_listing("m proc\n ret\n ret\nm endp", "a").unwrap();
        let rows = histogram_rows(&[b, a]).unwrap();
        let csv = histogram_csv(&rows);
        assert_eq!(
            csv,
            "program_id,subroutine,mnemonic,count,proportion\n\
             a,m,ret,2,1\n\
             b,a,ret,1,1\n\
             b,z,mov,1,0.5\n\
             b,z,nop,1,0.5\n"
        );
    }
}
