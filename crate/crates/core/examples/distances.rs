//! Minkowski-family distances between two normalized histograms.

use opsim::distance::{minkowski_distance, MetricConfig};
use opsim::features::{normalize, HistogramSource, OpcodeHistogram};

fn hist(counts: &[(&str, u64)]) -> OpcodeHistogram {
    let source = HistogramSource {
        program_id: "demo".into(),
        subroutine: "f".into(),
    };
    normalize(&OpcodeHistogram::from_counts(counts.iter().copied(), source).unwrap()).unwrap()
}

fn main() {
    let a = hist(&[("mov", 6), ("add", 2), ("ret", 1), ("call", 1)]);
    let b = hist(&[("mov", 5), ("add", 2), ("ret", 1), ("nop", 2)]);

    let metrics = [
        MetricConfig::manhattan(),
        MetricConfig::euclidean(),
        MetricConfig::euclidean().with_root(true),
        "minkowski:3".parse().unwrap(),
    ];
    for m in metrics {
        let d = minkowski_distance(&a, &b, &m).unwrap();
        match m.default_threshold() {
            Some(t) => println!("{m:<16} {d:.6}  (threshold {t})"),
            None => println!("{m:<16} {d:.6}"),
        }
    }

    // Raw counts are rejected; distances are only defined on proportions.
    let raw = OpcodeHistogram::from_counts(
        [("mov", 3)],
        HistogramSource { program_id: "demo".into(), subroutine: "g".into() },
    )
    .unwrap();
    println!("raw input: {}", minkowski_distance(&raw, &a, &MetricConfig::manhattan()).unwrap_err());
}
