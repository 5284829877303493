//! Match subroutines between two programs and classify the pair.

use opsim::compare::{classify_pair, directed_distance, symmetric_distance, ClassifierConfig};
use opsim::distance::MetricConfig;
use opsim::features::profile;
use opsim::listing::parse_listing;

const ORIGINAL: &str = "\
init proc
    push ebp
    mov ebp, esp
    xor eax, eax
    pop ebp
    ret
init endp

work proc
    mov ecx, 10
    add eax, ecx
    sub ecx, 1
    cmp ecx, 0
    jnz work
    ret
work endp
";

// Same code with the registers renamed and one subroutine dropped.
const VARIANT: &str = "\
start proc
    push ebp
    mov ebp, esp
    xor ebx, ebx
    pop ebp
    ret
start endp
";

fn main() {
    let p1 = profile(&parse_listing(ORIGINAL, "original").unwrap()).unwrap();
    let p2 = profile(&parse_listing(VARIANT, "variant").unwrap()).unwrap();
    let metric = MetricConfig::manhattan();

    for (from, to) in [(&p1, &p2), (&p2, &p1)] {
        let d = directed_distance(from, to, &metric).unwrap();
        println!("{} -> {}: {:.4}", d.from, d.to, d.directed_distance);
        for m in &d.per_subroutine_minima {
            println!("    {:<6} best {:<6} {:.4}", m.subroutine, m.best_match, m.distance);
        }
    }

    let d = symmetric_distance(&p1, &p2, &metric).unwrap();
    let cfg = ClassifierConfig::with_default_threshold(metric).unwrap();
    println!("symmetric {d:.4} -> {:?} at {}", classify_pair(d, &cfg), cfg.threshold());
}
