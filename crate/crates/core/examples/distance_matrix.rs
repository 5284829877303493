//! Pairwise matrix and verdicts for a small set of programs.

use opsim::compare::{classify_corpus, distance_matrix, verdicts_json, ClassifierConfig};
use opsim::distance::MetricConfig;
use opsim::features::profile;
use opsim::listing::parse_listing;

fn main() {
    let sources = [
        ("stack", "f proc\n push eax\n push ebx\n pop ebx\n pop eax\n ret\nf endp\n"),
        ("stack2", "f proc\n push ecx\n push edx\n pop edx\n pop ecx\n ret\nf endp\n"),
        ("math", "f proc\n fld st0\n fmul st0, st1\n fstp st0\n ret\nf endp\n"),
        ("mixed", "f proc\n push eax\n fld st0\n pop eax\n ret\nf endp\n"),
    ];
    let profiles: Vec<_> = sources
        .iter()
        .map(|(id, text)| profile(&parse_listing(text, id).unwrap()).unwrap())
        .collect();

    let metric = MetricConfig::euclidean();
    let matrix = distance_matrix(&profiles, &metric).unwrap();
    print!("{}", matrix.to_csv(false));

    let cfg = ClassifierConfig::with_default_threshold(metric).unwrap();
    print!("{}", verdicts_json(&classify_corpus(&matrix, &cfg).unwrap()));
}
