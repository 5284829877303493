//! Parse a disassembly listing and print its subroutines.
//!
//! ```text
//! cargo run --example parse_listing [path/to/listing.asm]
//! ```

use opsim::listing::{parse_listing, split_subroutines};

const SAMPLE: &str = "\
; a tiny listing
.model flat
start proc
        push    ebp
        mov     ebp, esp
again:
        rep movsb
        dec     ecx
        jnz     again       ; loop back
        pop     ebp
        ret
start endp

helper proc
        xor     eax, eax
        ret
helper endp
";

fn main() {
    let (id, text) = match std::env::args().nth(1) {
        Some(path) => (path.clone(), std::fs::read_to_string(&path).expect("readable listing")),
        None => ("sample".to_string(), SAMPLE.to_string()),
    };
    let program = match parse_listing(&text, &id) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{id}:{}: {e}", e.line());
            std::process::exit(2);
        }
    };

    println!("{} ({} instructions)", program.id, program.instruction_count());
    for sub in split_subroutines(&program) {
        println!("  {} [{}]", sub.name, sub.len());
        for label in &sub.labels {
            println!("    label {} before instruction {}", label.name, label.position);
        }
        for ins in &sub.instructions {
            println!("    {:>4}  {ins}", ins.line_no);
        }
    }
}
