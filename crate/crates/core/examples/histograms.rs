//! Build raw and normalized opcode histograms for each subroutine.

use opsim::features::{build_histogram, histogram_csv, histogram_rows, normalize};
use opsim::listing::parse_listing;

fn main() {
    let text = "\
copy proc
    mov esi, [ebp+8]
    mov edi, [ebp+12]
    mov ecx, 16
    rep movsd
    mov eax, edi
    ret
copy endp
";
    let program = parse_listing(text, "demo").unwrap();
    let sub = &program.subroutines[0];

    let raw = build_histogram(&program.id, sub).unwrap();
    let norm = normalize(&raw).unwrap();
    println!("{} opcodes, {} distinct", raw.total(), raw.len());
    for (mnemonic, count) in raw.bins() {
        println!("  {mnemonic:<10} {count:>3}  {:.4}", norm.get(mnemonic));
    }

    // The same data in the dump format the CLI writes.
    print!("\n{}", histogram_csv(&histogram_rows(&[program]).unwrap()));
}
