//! Apply each obfuscation technique to one seed and show the effect on
//! the distance to the parent.

use opsim::compare::symmetric_distance;
use opsim::distance::MetricConfig;
use opsim::features::profile;
use opsim::listing::parse_listing;
use opsim::mutate::{mutate, MutationSpec, Technique};

const SEED: &str = "\
body proc
    push ebp
    mov ebp, esp
    mov eax, 0
    mov ebx, ecx
    add eax, 4
    xor edx, esi
    push esi
    pop edi
    cmp eax, ebx
    jz done
    sub ecx, edx
done:
    pop ebp
    ret
body endp
";

fn main() {
    let parent = parse_listing(SEED, "seed").unwrap();
    let parent_profile = profile(&parent).unwrap();
    let metric = MetricConfig::manhattan();

    for technique in Technique::ALL {
        let spec = MutationSpec::new(technique, 0.5, 42).unwrap();
        let (variant, record) = mutate(&parent, &spec).unwrap();
        let d = symmetric_distance(&parent_profile, &profile(&variant).unwrap(), &metric).unwrap();
        println!("== {} ({} edits, distance {d:.4})", record.variant_id, record.edits.len());
        for e in &record.edits {
            println!("   line {:>2} {:<8} {}", e.line, e.kind, e.detail);
        }
        for s in &record.skipped {
            println!("   skipped {}: {}", s.subroutine, s.reason);
        }
    }

    let spec = MutationSpec::new(Technique::GarbageInsertion, 1.0, 7).unwrap();
    let (variant, _) = mutate(&parent, &spec).unwrap();
    print!("\n{}", variant.to_listing());
}
