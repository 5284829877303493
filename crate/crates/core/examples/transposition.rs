//! Code transposition: blocks are reordered and stitched back together
//! with unconditional jumps so execution order is unchanged.

use opsim::listing::parse_listing;
use opsim::mutate::{mutate, MutationSpec, Technique};

fn main() {
    let text = "\
route proc
    mov eax, [esp+4]
    add eax, 1
    shl eax, 2
    cmp eax, 64
    jb small
    sub eax, 64
small:
    and eax, 63
    ret
route endp

tiny proc
    ret
tiny endp
";
    let parent = parse_listing(text, "route").unwrap();
    for seed in 0..3 {
        let spec = MutationSpec::new(Technique::CodeTransposition, 1.0, seed).unwrap();
        let (variant, record) = mutate(&parent, &spec).unwrap();
        println!("-- seed {seed}");
        print!("{}", variant.to_listing());
        for s in &record.skipped {
            println!("; skipped {}: {}", s.subroutine, s.reason);
        }
    }
}
