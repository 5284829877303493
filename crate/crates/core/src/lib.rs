//! Opcode-frequency similarity for spotting morphed program variants.
//!
//! The pipeline runs in two stages. Textual disassembly listings are parsed
//! into programs made of subroutines ([`listing`]), and each subroutine is
//! reduced to a normalized opcode histogram ([`features`]). Programs are
//! then compared by matching every subroutine histogram to its closest
//! counterpart under a Minkowski-form distance ([`distance`], [`compare`]),
//! and pairs whose symmetric distance falls below a threshold are reported
//! as variants of each other.
//!
//! [`mutate`] is a deterministic obfuscation engine that produces labeled
//! variants of a seed program, and [`report`] drives the whole thing from
//! files on disk the way the `opsim` binary does.
//!
//! ```
//! use opsim::{compare, distance::MetricConfig, features, listing};
//!
//! let a = listing::parse_listing("f proc\n mov eax, 0\n ret\nf endp", "a").unwrap();
//! let b = listing::parse_listing("g proc\n mov ebx, 0\n ret\ng endp", "b").unwrap();
//! let pa = features::profile(&a).unwrap();
//! let pb = features::profile(&b).unwrap();
//! let d = compare::symmetric_distance(&pa, &pb, &MetricConfig::manhattan()).unwrap();
//! assert_eq!(d, 0.0);
//! ```

pub mod compare;
pub mod distance;
pub mod features;
pub mod listing;
pub mod mutate;
mod numeric;
pub mod report;
pub mod rng;

pub use compare::{
    classify_corpus, classify_pair, directed_distance, distance_matrix, symmetric_distance,
    ClassifierConfig, DirectedComparison, DistanceMatrix, PairVerdict, Verdict,
};
pub use distance::{euclidean, manhattan, minkowski_distance, MetricConfig};
pub use features::{build_histogram, normalize, profile, OpcodeHistogram, ProgramProfile};
pub use listing::{parse_listing, split_subroutines, Instruction, Program, Subroutine};
pub use mutate::{MutationSpec, Technique, VariantRecord};
