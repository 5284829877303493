//! Generate a labeled corpus, compare everything and score the verdicts,
//! the same pipeline as `opsim mutate`, `opsim compare` and `opsim eval`.

use std::fs;

use opsim::distance::MetricConfig;
use opsim::mutate::Technique;
use opsim::report::{cmd_compare, cmd_eval, cmd_mutate, RunConfig};

const SEED: &str = "\
main proc
    push ebp
    mov ebp, esp
    mov eax, 0
    mov ecx, 0
    mov edx, ebx
    add eax, edx
    sub ecx, 1
    xor esi, edi
    pop ebp
    ret
main endp
";

const UNRELATED: &str = "\
calc proc
    fld qword ptr [esp+4]
    fsqrt
    fmul st0, st0
    fstp qword ptr [esp+4]
    ret
calc endp
";

fn main() {
    let dir = std::env::temp_dir().join(format!("opsim-corpus-{}", std::process::id()));
    let corpus = dir.join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    fs::write(corpus.join("seed.asm"), SEED).unwrap();
    fs::write(corpus.join("unrelated.asm"), UNRELATED).unwrap();

    let mutate_cfg = RunConfig {
        inputs: vec![corpus.join("seed.asm")],
        out: corpus.clone(),
        techniques: Technique::ALL.to_vec(),
        intensity: 1.0,
        seed: 3,
        ..RunConfig::default()
    };
    let manifest = cmd_mutate(&mutate_cfg, &mutate_cfg.mutation_specs().unwrap()).unwrap();
    println!("{} variants in {}", manifest.len(), corpus.display());

    for metric in [MetricConfig::manhattan(), MetricConfig::euclidean()] {
        let out = dir.join(metric.to_string());
        let cfg = RunConfig {
            metric,
            inputs: vec![corpus.clone()],
            out: out.clone(),
            ..RunConfig::default()
        };
        let outcome = cmd_compare(&cfg).unwrap();
        for v in outcome.verdicts.iter().filter(|v| v.pair.0 == "seed" || v.pair.1 == "seed") {
            println!("  {metric:<10} {:<40} {:.4} {:?}", format!("{} / {}", v.pair.0, v.pair.1), v.distance, v.verdict);
        }
        let summary = cmd_eval(&corpus.join("manifest.json"), &out.join("verdicts.json"), None, &out).unwrap();
        println!(
            "{metric} at {}: TP {} FP {} TN {} FN {}",
            summary.threshold,
            summary.true_positives,
            summary.false_positives,
            summary.true_negatives,
            summary.false_negatives
        );
    }
    fs::remove_dir_all(&dir).unwrap();
}
