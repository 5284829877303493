//! File-level drivers behind the `opsim` subcommands.
//!
//! Each `cmd_*` function reads its inputs, computes everything in memory
//! and only then writes its artifacts, so a failing run leaves no partial
//! output behind. Outputs are byte-stable for identical inputs: matrices
//! use fixed precision, JSON keys are sorted and pairs are ordered by id.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compare::{
    classify_corpus, distance_matrix, verdicts_json, ClassifierConfig, DistanceMatrix,
    PairVerdict, Verdict,
};
use crate::distance::MetricConfig;
use crate::features::{histogram_csv, histogram_rows, normalize, build_histogram, profile};
use crate::listing::{parse_listing, Program};
use crate::mutate::{generate_corpus, read_manifest, CorpusManifest, MutationSpec, Technique};

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "OPSIM_CONFIG";

/// File extensions picked up when a directory is given as input.
const LISTING_EXTENSIONS: &[&str] = &["asm", "lst"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", .0.join("\n"))]
    Input(Vec<String>),
    #[error("manifest and verdicts disagree: {0}")]
    IdMismatch(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for usage errors, 2 for anything wrong with the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(CliError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub metric: MetricConfig,
    /// Falls back to the metric's shipped threshold when unset.
    pub threshold: Option<f64>,
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub plot: bool,
    pub full_precision: bool,
    pub seed: u64,
    pub intensity: f64,
    pub techniques: Vec<Technique>,
    /// Variants generated per technique; seeds are `seed`, `seed + 1`, ...
    pub variants: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: MetricConfig::manhattan(),
            threshold: None,
            inputs: Vec::new(),
            out: PathBuf::from("opsim-out"),
            format: ReportFormat::Csv,
            plot: false,
            full_precision: false,
            seed: 0,
            intensity: 0.5,
            techniques: Vec::new(),
            variants: 1,
        }
    }
}

impl RunConfig {
    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// ignored; unknown keys are usage errors.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        self.apply_config_text(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bool_value = || match value {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(format!("`{key}` expects true or false")),
        };
        match key {
            "metric" => {
                let root = self.metric.apply_root;
                self.metric = value.parse::<MetricConfig>().map_err(|e| e.to_string())?;
                self.metric.apply_root |= root;
            }
            "root" => self.metric.apply_root = bool_value()?,
            "threshold" => self.threshold = Some(parse_num(key, value)?),
            "out" => self.out = PathBuf::from(value),
            "format" => self.format = value.parse().map_err(|e: CliError| e.to_string())?,
            "plot" => self.plot = bool_value()?,
            "full_precision" => self.full_precision = bool_value()?,
            "seed" => self.seed = parse_num(key, value)?,
            "intensity" => self.intensity = parse_num(key, value)?,
            "variants" => self.variants = parse_num(key, value)?,
            "technique" => {
                self.techniques = value
                    .split(',')
                    .map(|t| t.trim().parse::<Technique>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn classifier(&self) -> Result<ClassifierConfig, CliError> {
        match self.threshold {
            Some(t) => ClassifierConfig::new(t, self.metric).map_err(|e| CliError::Usage(e.to_string())),
            None => ClassifierConfig::with_default_threshold(self.metric).ok_or_else(|| {
                CliError::Usage(format!("metric {} has no default threshold; pass --threshold", self.metric))
            }),
        }
    }

    /// One spec per (technique, variant index).
    pub fn mutation_specs(&self) -> Result<Vec<MutationSpec>, CliError> {
        let mut specs = Vec::new();
        for &t in &self.techniques {
            for k in 0..self.variants {
                specs.push(
                    MutationSpec::new(t, self.intensity, self.seed.wrapping_add(k as u64))
                        .map_err(|e| CliError::Usage(e.to_string()))?,
                );
            }
        }
        Ok(specs)
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` has invalid value `{value}`"))
}

// ---------------------------------------------------------------------------
// Input loading.

/// Expands directories into their listing files, sorted by path.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(input)
                .map_err(io_err(input))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| LISTING_EXTENSIONS.contains(&e))
                })
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

/// Program id for a listing path: its file stem.
pub fn program_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Reads and parses every input in parallel. All parse failures are
/// collected and reported together as `path:line: message`.
pub fn load_programs(inputs: &[PathBuf]) -> Result<Vec<Program>, CliError> {
    let paths = expand_inputs(inputs)?;
    let results: Vec<Result<Program, String>> = paths
        .par_iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_listing(&text, &program_id(path))
                .map_err(|e| format!("{}:{}: {e}", path.display(), e.line()))
        })
        .collect();
    let mut programs = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(p) => programs.push(p),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Input(errors));
    }
    let mut seen = BTreeSet::new();
    for p in &programs {
        if !seen.insert(p.id.as_str()) {
            return Err(CliError::Input(vec![format!("duplicate program id `{}`", p.id)]));
        }
    }
    Ok(programs)
}

fn write_all(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    for (path, contents) in files {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        fs::write(path, contents).map_err(io_err(path))?;
    }
    Ok(())
}

fn json_string<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// compare

#[derive(Debug)]
pub struct CompareOutcome {
    pub matrix: DistanceMatrix,
    pub verdicts: Vec<PairVerdict>,
    pub written: Vec<PathBuf>,
}

/// Parses the inputs, fills the distance matrix, classifies every pair and
/// writes `matrix.csv` (or `matrix.json`), `verdicts.json` and, with
/// `plot`, one text bar chart per subroutine under `plots/`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareOutcome, CliError> {
    let classifier = cfg.classifier()?;
    if expand_inputs(&cfg.inputs)?.len() < 2 {
        return Err(CliError::Usage("compare needs at least two listings".into()));
    }
    let programs = load_programs(&cfg.inputs)?;
    let profiles = programs
        .iter()
        .map(profile)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(vec![e.to_string()]))?;
    let matrix = distance_matrix(&profiles, &cfg.metric).map_err(|e| CliError::Input(vec![e.to_string()]))?;
    let verdicts = classify_corpus(&matrix, &classifier).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut files = Vec::new();
    match cfg.format {
        ReportFormat::Csv => files.push((cfg.out.join("matrix.csv"), matrix.to_csv(cfg.full_precision))),
        ReportFormat::Json => files.push((cfg.out.join("matrix.json"), json_string(&matrix.to_json()))),
    }
    files.push((cfg.out.join("verdicts.json"), verdicts_json(&verdicts)));
    if cfg.plot {
        for program in &programs {
            for sub in &program.subroutines {
                let path = cfg
                    .out
                    .join("plots")
                    .join(sanitize(&program.id))
                    .join(format!("{}.txt", sanitize(&sub.name)));
                files.push((path, bar_chart(program, sub)?));
            }
        }
    }
    write_all(&files)?;
    Ok(CompareOutcome {
        matrix,
        verdicts,
        written: files.into_iter().map(|(p, _)| p).collect(),
    })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') { c } else { '_' })
        .collect()
}

/// Plain-text opcode frequency bar chart for one subroutine.
pub fn bar_chart(program: &Program, sub: &crate::listing::Subroutine) -> Result<String, CliError> {
    const WIDTH: f64 = 40.0;
    let raw = build_histogram(&program.id, sub).map_err(|e| CliError::Input(vec![e.to_string()]))?;
    let norm = normalize(&raw).map_err(|e| CliError::Input(vec![e.to_string()]))?;
    let pad = raw.bins().map(|(m, _)| m.len()).max().unwrap_or(0);
    let mut out = format!("{} / {} ({} instructions)\n", program.id, sub.name, sub.len());
    for (mnemonic, p) in norm.bins() {
        let bar = "#".repeat((p * WIDTH).round() as usize);
        let _ = writeln!(
            out,
            "{mnemonic:<pad$} |{bar:<w$}| {count:>5} {p:.3}",
            w = WIDTH as usize,
            count = raw.get(mnemonic) as u64
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// mutate

/// Generates the mutation corpus for every input seed.
pub fn cmd_mutate(cfg: &RunConfig, specs: &[MutationSpec]) -> Result<CorpusManifest, CliError> {
    let seeds = load_programs(&cfg.inputs)?;
    generate_corpus(&seeds, specs, &cfg.out).map_err(|e| match e {
        crate::mutate::MutateError::Io { path, source } => CliError::Io { path, source },
        other => CliError::Input(vec![other.to_string()]),
    })
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cut: f64,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub metric: String,
    pub threshold: f64,
    pub pairs: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub sweep: Vec<SweepRow>,
}

/// Maps every program id to its family root. Ids absent from the manifest
/// are families of their own.
fn families(manifest: &CorpusManifest) -> HashMap<String, String> {
    let parent: HashMap<&str, &str> = manifest
        .iter()
        .map(|r| (r.variant_id.as_str(), r.parent_id.as_str()))
        .collect();
    let mut out = HashMap::new();
    for r in manifest {
        for id in [r.variant_id.as_str(), r.parent_id.as_str()] {
            let mut root = id;
            let mut hops = 0;
            while let Some(&p) = parent.get(root) {
                if hops > parent.len() {
                    break;
                }
                root = p;
                hops += 1;
            }
            out.insert(id.to_string(), root.to_string());
        }
    }
    out
}

/// Scores verdict distances against the manifest's family labels. A pair
/// is a true variant pair when both programs descend from the same seed.
/// A pair is predicted variant iff its distance is strictly below the cut.
pub fn evaluate(
    manifest: &CorpusManifest,
    verdicts: &[PairVerdict],
    threshold: f64,
) -> Result<EvalSummary, CliError> {
    let ids: BTreeSet<&str> = verdicts
        .iter()
        .flat_map(|v| [v.pair.0.as_str(), v.pair.1.as_str()])
        .collect();
    let missing: Vec<&str> = manifest
        .iter()
        .flat_map(|r| [r.variant_id.as_str(), r.parent_id.as_str()])
        .filter(|id| !ids.contains(id))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing.is_empty() {
        return Err(CliError::IdMismatch(format!(
            "manifest ids without verdicts: {}",
            missing.join(", ")
        )));
    }

    let family = families(manifest);
    let root = |id: &str| family.get(id).cloned().unwrap_or_else(|| id.to_string());
    let labeled: Vec<(bool, f64)> = verdicts
        .iter()
        .map(|v| (root(&v.pair.0) == root(&v.pair.1), v.distance))
        .collect();

    let count = |cut: f64| {
        let mut c = [0usize; 4]; // tp, fp, tn, fn
        for &(same, d) in &labeled {
            let predicted = d < cut;
            let slot = match (same, predicted) {
                (true, true) => 0,
                (false, true) => 1,
                (false, false) => 2,
                (true, false) => 3,
            };
            c[slot] += 1;
        }
        c
    };

    let mut cuts: Vec<f64> = labeled.iter().map(|&(_, d)| d).collect();
    cuts.push(0.0);
    cuts.push(threshold);
    if let Some(max) = labeled.iter().map(|&(_, d)| d).reduce(f64::max) {
        cuts.push(max.next_up());
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let sweep = cuts
        .into_iter()
        .map(|cut| {
            let c = count(cut);
            SweepRow {
                cut,
                false_positives: c[1],
                false_negatives: c[3],
            }
        })
        .collect();

    let [tp, fp, tn, fneg] = count(threshold);
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(EvalSummary {
        metric: verdicts.first().map(|v| v.metric.clone()).unwrap_or_default(),
        threshold,
        pairs: labeled.len(),
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fneg,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fneg),
        sweep,
    })
}

pub fn read_verdicts(path: &Path) -> Result<Vec<PairVerdict>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(vec![format!("{}: {e}", path.display())]))
}

/// Scores a compare run against a mutation manifest and writes
/// `eval.json` and `sweep.csv`. The threshold defaults to the one stored
/// in the verdicts.
pub fn cmd_eval(
    manifest_path: &Path,
    verdicts_path: &Path,
    threshold: Option<f64>,
    out: &Path,
) -> Result<EvalSummary, CliError> {
    let manifest = read_manifest(manifest_path).map_err(|e| CliError::Input(vec![e.to_string()]))?;
    let verdicts = read_verdicts(verdicts_path)?;
    let threshold = match threshold.or_else(|| verdicts.first().map(|v| v.threshold)) {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => return Err(CliError::Usage(format!("invalid threshold {t}"))),
        None => return Err(CliError::Usage("no verdicts and no --threshold given".into())),
    };
    let summary = evaluate(&manifest, &verdicts, threshold)?;
    let mut sweep = String::from("cut,false_positives,false_negatives\n");
    for row in &summary.sweep {
        let _ = writeln!(sweep, "{},{},{}", row.cut, row.false_positives, row.false_negatives);
    }
    write_all(&[
        (out.join("eval.json"), json_string(&summary)),
        (out.join("sweep.csv"), sweep),
    ])?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// dump-histograms

/// Writes every subroutine histogram as `histograms.csv` or
/// `histograms.json`.
pub fn cmd_dump_histograms(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let programs = load_programs(&cfg.inputs)?;
    let rows = histogram_rows(&programs).map_err(|e| CliError::Input(vec![e.to_string()]))?;
    let (path, contents) = match cfg.format {
        ReportFormat::Csv => (cfg.out.join("histograms.csv"), histogram_csv(&rows)),
        ReportFormat::Json => (cfg.out.join("histograms.json"), json_string(&rows)),
    };
    write_all(&[(path.clone(), contents)])?;
    Ok(path)
}

/// Counts verdicts per kind, for summaries printed by the binary.
pub fn verdict_counts(verdicts: &[PairVerdict]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for v in verdicts {
        let key = match v.verdict {
            Verdict::VariantPair => "variant-pair",
            Verdict::Distinct => "distinct",
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mutate::{Edit, VariantRecord};

    fn record(parent: &str, variant: &str) -> VariantRecord {
        VariantRecord {
            parent_id: parent.into(),
            variant_id: variant.into(),
            spec: MutationSpec::new(Technique::RegisterExchange, 1.0, 0).unwrap(),
            edits: vec![Edit {
                line: 1,
                kind: "rename".into(),
                detail: String::new(),
            }],
            skipped: vec![],
        }
    }

    fn verdict(a: &str, b: &str, d: f64) -> PairVerdict {
        PairVerdict {
            pair: (a.into(), b.into()),
            distance: d,
            threshold: 0.832,
            metric: "manhattan".into(),
            verdict: if d < 0.832 { Verdict::VariantPair } else { Verdict::Distinct },
        }
    }

    #[test]
    fn config_text() {
        let mut cfg = RunConfig::default();
        cfg.apply_config_text(
            "# pinned run\nmetric = euclidean\nroot = true\nthreshold = 0.2\nplot = yes\ntechnique = garbage, permutation\n",
        )
        .unwrap();
        assert_eq!(cfg.metric, MetricConfig::euclidean().with_root(true));
        assert_eq!(cfg.threshold, Some(0.2));
        assert!(cfg.plot);
        assert_eq!(
            cfg.techniques,
            [Technique::GarbageInsertion, Technique::InstructionPermutation]
        );
        assert!(matches!(
            cfg.apply_config_text("colour = red"),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(cfg.apply_config_text("metric"), Err(CliError::Usage(_))));
    }

    #[test]
    fn classifier_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.classifier().unwrap().threshold(), 0.832);
        let cfg = RunConfig {
            metric: MetricConfig::minkowski(3).unwrap(),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.classifier(), Err(CliError::Usage(_))));
    }

    #[test]
    fn mutation_specs_per_variant() {
        let cfg = RunConfig {
            techniques: vec![Technique::RegisterExchange, Technique::InstructionPermutation],
            variants: 3,
            seed: 10,
            ..RunConfig::default()
        };
        let specs = cfg.mutation_specs().unwrap();
        assert_eq!(specs.len(), 6);
        assert_eq!(specs[2].seed, 12);
        assert_eq!(specs[3].technique, Technique::InstructionPermutation);
        assert!(RunConfig::default().mutation_specs().unwrap().is_empty());
    }

    #[test]
    fn evaluate_perfect_corpus() {
        let manifest = vec![record("s", "v1"), record("s", "v2")];
        let verdicts = vec![
            verdict("b", "s", 2.0),
            verdict("b", "v1", 2.0),
            verdict("b", "v2", 2.0),
            verdict("s", "v1", 0.0),
            verdict("s", "v2", 0.0),
            verdict("v1", "v2", 0.0),
        ];
        let s = evaluate(&manifest, &verdicts, 0.832).unwrap();
        assert_eq!((s.false_positives, s.false_negatives), (0, 0));
        assert_eq!((s.true_positives, s.true_negatives), (3, 3));
        assert_eq!(s.precision, Some(1.0));

        let s = evaluate(&manifest, &verdicts, 0.0).unwrap();
        assert_eq!(s.false_negatives, 3);
        assert_eq!(s.recall, Some(0.0));
    }

    #[test]
    fn evaluate_chained_variants_share_family() {
        let manifest = vec![record("s", "v1"), record("v1", "v2")];
        let verdicts = vec![
            verdict("s", "v1", 0.1),
            verdict("s", "v2", 0.9),
            verdict("v1", "v2", 0.1),
        ];
        let s = evaluate(&manifest, &verdicts, 0.832).unwrap();
        assert_eq!(s.false_negatives, 1);
        assert_eq!(s.true_positives, 2);
    }

    #[test]
    fn evaluate_sweep_is_monotone() {
        let manifest = vec![record("s", "v1"), record("s", "v2")];
        let verdicts = vec![
            verdict("b", "s", 0.5),
            verdict("b", "v1", 1.2),
            verdict("b", "v2", 0.3),
            verdict("s", "v1", 0.1),
            verdict("s", "v2", 0.9),
            verdict("v1", "v2", 0.7),
        ];
        let s = evaluate(&manifest, &verdicts, 0.832).unwrap();
        assert!(s.sweep.windows(2).all(|w| w[0].cut < w[1].cut
            && w[0].false_positives <= w[1].false_positives
            && w[0].false_negatives >= w[1].false_negatives));
        let last = s.sweep.last().unwrap();
        assert_eq!((last.false_positives, last.false_negatives), (3, 0));
        assert_eq!(s.sweep[0].false_negatives, 3);
    }

    #[test]
    fn evaluate_rejects_unknown_manifest_ids() {
        let manifest = vec![record("s", "v1")];
        let verdicts = vec![verdict("a", "b", 0.0)];
        assert!(matches!(
            evaluate(&manifest, &verdicts, 0.832),
            Err(CliError::IdMismatch(_))
        ));
    }

    #[test]
    fn program_ids_from_paths() {
        assert_eq!(program_id(Path::new("/x/seed.00.register_exchange.asm")), "seed.00.register_exchange");
        assert_eq!(program_id(Path::new("lib.asm")), "lib");
    }
}
