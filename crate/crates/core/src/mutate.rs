//! Deterministic metamorphic mutation engine.
//!
//! Produces obfuscated variants of a seed program with one of five
//! techniques: dead-code insertion, register exchange, instruction
//! replacement, instruction permutation and code transposition. Each
//! variant carries a [`VariantRecord`] listing every edit, which serves as
//! ground truth when the detector is evaluated.
//!
//! The engine understands a small x86 surface (two-operand register forms,
//! immediates, push/pop, nop, mov, xor, and, sub, add, jmp, jcc, cmp, call,
//! ret). Anything else passes through untouched.
//!
//! Site selection is nested: for a fixed seed, the sites transformed at a
//! lower intensity are a subset of those transformed at a higher one, and
//! the per-site choices (which dead-code form, which replacement) do not
//! depend on the intensity.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::listing::{Instruction, Label, ListingError, Program, Subroutine};
use crate::rng::{site_count, SeededStream};

/// Registers that register exchange may permute.
pub const EXCHANGEABLE: [&str; 6] = ["eax", "ebx", "ecx", "edx", "esi", "edi"];
const GPR32: [&str; 8] = ["eax", "ebx", "ecx", "edx", "esi", "edi", "ebp", "esp"];
const SUB_REGISTERS: [&str; 14] = [
    "ax", "bx", "cx", "dx", "si", "di", "al", "ah", "bl", "bh", "cl", "ch", "dl", "dh",
];
/// Mnemonics that read or write registers implicitly, which a plain
/// operand rename would break.
const IMPLICIT_REGISTER_USE: &[&str] = &[
    "mul", "div", "idiv", "cdq", "cwd", "cbw", "cwde", "loop", "loope", "loopne", "loopz",
    "loopnz", "jecxz", "jcxz", "lodsb", "lodsw", "lodsd", "stosb", "stosw", "stosd", "scasb",
    "scasw", "scasd", "cmpsb", "cmpsw", "cmpsd", "movsb", "movsw", "movsd", "in", "out",
    "pusha", "pushad", "popa", "popad", "xlat", "xlatb", "cpuid", "rdtsc", "enter", "leave",
];
/// Two-operand forms eligible for permutation.
const SWAPPABLE: &[&str] = &["mov", "add", "sub", "and", "or", "xor", "cmp", "test", "imul"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    GarbageInsertion,
    RegisterExchange,
    InstructionReplacement,
    InstructionPermutation,
    CodeTransposition,
}

impl Technique {
    pub const ALL: [Technique; 5] = [
        Technique::GarbageInsertion,
        Technique::RegisterExchange,
        Technique::InstructionReplacement,
        Technique::InstructionPermutation,
        Technique::CodeTransposition,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Technique::GarbageInsertion => "garbage_insertion",
            Technique::RegisterExchange => "register_exchange",
            Technique::InstructionReplacement => "instruction_replacement",
            Technique::InstructionPermutation => "instruction_permutation",
            Technique::CodeTransposition => "code_transposition",
        }
    }

    /// Whether the technique leaves every opcode count unchanged.
    pub fn preserves_histogram(&self) -> bool {
        matches!(
            self,
            Technique::RegisterExchange | Technique::InstructionPermutation
        )
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = MutateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "garbage_insertion" | "garbage" => Technique::GarbageInsertion,
            "register_exchange" | "register" => Technique::RegisterExchange,
            "instruction_replacement" | "replacement" => Technique::InstructionReplacement,
            "instruction_permutation" | "permutation" => Technique::InstructionPermutation,
            "code_transposition" | "transposition" => Technique::CodeTransposition,
            other => return Err(MutateError::UnknownTechnique(other.to_string())),
        })
    }
}

/// Dead-code forms available to garbage insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarbageKind {
    /// `nop`
    Nop,
    /// `push R` immediately followed by `pop R`
    PushPop,
    /// `mov R, R`
    SelfMove,
}

/// Equivalence families used by instruction replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementFamily {
    /// `mov R, 0` / `xor R, R` / `and R, 0` / `sub R, R`
    Zeroing,
    /// `mov R, 0` / `xor R, R` only
    ZeroingMovXor,
    /// `add R, k` / `sub R, -k`
    AddSub,
    /// `push R; pop S` / `mov S, R`
    PushPopMov,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationOptions {
    pub garbage: Vec<GarbageKind>,
    pub replacement: Vec<ReplacementFamily>,
}

impl Default for MutationOptions {
    fn default() -> Self {
        MutationOptions {
            garbage: vec![GarbageKind::Nop, GarbageKind::PushPop, GarbageKind::SelfMove],
            replacement: vec![
                ReplacementFamily::Zeroing,
                ReplacementFamily::AddSub,
                ReplacementFamily::PushPopMov,
            ],
        }
    }
}

impl MutationOptions {
    fn is_default(&self) -> bool {
        *self == MutationOptions::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSpec {
    pub technique: Technique,
    /// Fraction of eligible sites transformed, in `[0, 1]`.
    pub intensity: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "MutationOptions::is_default")]
    pub options: MutationOptions,
}

impl MutationSpec {
    pub fn new(technique: Technique, intensity: f64, seed: u64) -> Result<Self, MutateError> {
        if !(0.0..=1.0).contains(&intensity) {
            return Err(MutateError::InvalidIntensity(intensity));
        }
        Ok(MutationSpec {
            technique,
            intensity,
            seed,
            options: MutationOptions::default(),
        })
    }

    pub fn with_garbage(mut self, kinds: &[GarbageKind]) -> Self {
        self.options.garbage = kinds.to_vec();
        self
    }

    pub fn with_replacement(mut self, families: &[ReplacementFamily]) -> Self {
        self.options.replacement = families.to_vec();
        self
    }
}

/// One logged edit. `line` is the parent listing line at the edit site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub line: usize,
    pub kind: String,
    pub detail: String,
}

/// A subroutine the technique could not be applied to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipNote {
    pub subroutine: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub parent_id: String,
    pub variant_id: String,
    #[serde(flatten)]
    pub spec: MutationSpec,
    pub edits: Vec<Edit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<SkipNote>,
}

#[derive(Debug, Error)]
pub enum MutateError {
    #[error("intensity must be within [0, 1], got {0}")]
    InvalidIntensity(f64),
    #[error("unknown technique `{0}`")]
    UnknownTechnique(String),
    #[error("spec is for {found}, expected {expected}")]
    WrongTechnique {
        expected: Technique,
        found: Technique,
    },
    #[error("subroutine `{subroutine}` has {len} instructions; transposition needs at least 4")]
    BlockTooSmall { subroutine: String, len: usize },
    #[error("variant of `{parent}` does not re-parse: {source}")]
    Render {
        parent: String,
        #[source]
        source: ListingError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Applies `spec` to `program`, dispatching on the technique.
pub fn mutate(program: &Program, spec: &MutationSpec) -> Result<(Program, VariantRecord), MutateError> {
    let mut rng = SeededStream::new(spec.seed);
    let mut edits = Vec::new();
    let mut skipped = Vec::new();
    let mut subroutines = Vec::with_capacity(program.subroutines.len());
    let exchange = match spec.technique {
        Technique::RegisterExchange => select(&mut rng, program.subroutines.len(), spec.intensity),
        _ => Vec::new(),
    };

    for (index, sub) in program.subroutines.iter().enumerate() {
        let items = to_items(sub);
        let out = match spec.technique {
            Technique::GarbageInsertion => garbage_items(&items, spec, &mut rng, &mut edits),
            Technique::RegisterExchange => {
                match exchange_items(sub, &items, exchange[index], &mut rng, &mut edits) {
                    Ok(out) => out,
                    Err(reason) => {
                        skipped.push(SkipNote {
                            subroutine: sub.name.clone(),
                            reason,
                        });
                        items
                    }
                }
            }
            Technique::InstructionReplacement => replace_items(&items, spec, &mut rng, &mut edits),
            Technique::InstructionPermutation => permute_items(&items, spec, &mut rng, &mut edits),
            Technique::CodeTransposition => {
                if sub.len() < 4 {
                    let err = MutateError::BlockTooSmall {
                        subroutine: sub.name.clone(),
                        len: sub.len(),
                    };
                    skipped.push(SkipNote {
                        subroutine: sub.name.clone(),
                        reason: err.to_string(),
                    });
                    items
                } else {
                    transpose_items(sub, &items, spec, &mut rng, &mut edits)
                }
            }
        };
        subroutines.push(from_items(&sub.name, out));
    }

    let variant_id = format!("{}.{}-{}", program.id, spec.technique, spec.seed);
    let variant = Program {
        id: variant_id.clone(),
        subroutines,
    }
    .renumbered()
    .map_err(|source| MutateError::Render {
        parent: program.id.clone(),
        source,
    })?;

    Ok((
        variant,
        VariantRecord {
            parent_id: program.id.clone(),
            variant_id,
            spec: spec.clone(),
            edits,
            skipped,
        },
    ))
}

fn expect(spec: &MutationSpec, technique: Technique) -> Result<(), MutateError> {
    if spec.technique == technique {
        Ok(())
    } else {
        Err(MutateError::WrongTechnique {
            expected: technique,
            found: spec.technique,
        })
    }
}

/// Inserts dead code at a fraction of instruction boundaries. Boundaries
/// directly in front of a conditional jump are never used.
pub fn mutate_garbage(p: &Program, spec: &MutationSpec) -> Result<(Program, VariantRecord), MutateError> {
    expect(spec, Technique::GarbageInsertion)?;
    mutate(p, spec)
}

/// Permutes the registers in [`EXCHANGEABLE`] consistently inside a
/// fraction of subroutines.
pub fn mutate_register_exchange(
    p: &Program,
    spec: &MutationSpec,
) -> Result<(Program, VariantRecord), MutateError> {
    expect(spec, Technique::RegisterExchange)?;
    mutate(p, spec)
}

/// Rewrites a fraction of matching instructions with an equivalent form.
pub fn mutate_replacement(
    p: &Program,
    spec: &MutationSpec,
) -> Result<(Program, VariantRecord), MutateError> {
    expect(spec, Technique::InstructionReplacement)?;
    mutate(p, spec)
}

/// Swaps a fraction of adjacent independent two-register instructions.
pub fn mutate_permutation(
    p: &Program,
    spec: &MutationSpec,
) -> Result<(Program, VariantRecord), MutateError> {
    expect(spec, Technique::InstructionPermutation)?;
    mutate(p, spec)
}

/// Reorders blocks of each subroutine and restores execution order with
/// unconditional jumps.
pub fn mutate_transposition(
    p: &Program,
    spec: &MutationSpec,
) -> Result<(Program, VariantRecord), MutateError> {
    expect(spec, Technique::CodeTransposition)?;
    mutate(p, spec)
}

// ---------------------------------------------------------------------------
// Item stream: instructions interleaved with labels.

#[derive(Debug, Clone)]
enum Item {
    Ins(Instruction),
    Label(String),
}

fn to_items(sub: &Subroutine) -> Vec<Item> {
    let mut items = Vec::with_capacity(sub.instructions.len() + sub.labels.len());
    let mut labels = sub.labels.iter().peekable();
    for (pos, ins) in sub.instructions.iter().enumerate() {
        while let Some(l) = labels.next_if(|l| l.position <= pos) {
            items.push(Item::Label(l.name.clone()));
        }
        items.push(Item::Ins(ins.clone()));
    }
    items.extend(labels.map(|l| Item::Label(l.name.clone())));
    items
}

fn from_items(name: &str, items: Vec<Item>) -> Subroutine {
    let mut sub = Subroutine::new(name, Vec::new());
    for item in items {
        match item {
            Item::Ins(ins) => sub.instructions.push(ins),
            Item::Label(l) => sub.labels.push(Label {
                name: l,
                position: sub.instructions.len(),
            }),
        }
    }
    sub
}

fn synth(mnemonic: &str, operands: &[&str]) -> Instruction {
    Instruction::new(mnemonic, operands, 0)
}

/// Shuffles the eligible sites once and takes a prefix, so the selection
/// at a lower intensity is contained in the selection at a higher one.
fn select(rng: &mut SeededStream, eligible: usize, intensity: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..eligible).collect();
    rng.shuffle(&mut order);
    let mut chosen = vec![false; eligible];
    for &i in order.iter().take(site_count(eligible, intensity)) {
        chosen[i] = true;
    }
    chosen
}

// ---------------------------------------------------------------------------
// Operand helpers.

fn gpr(op: &str) -> Option<&'static str> {
    let op = op.trim().to_ascii_lowercase();
    GPR32.iter().copied().find(|r| *r == op)
}

fn parse_imm(op: &str) -> Option<i64> {
    let op = op.trim().to_ascii_lowercase();
    let (neg, body) = match op.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, op.as_str()),
    };
    let value = if let Some(hex) = body.strip_prefix("0x") {
        i64::from_str_radix(hex, 16).ok()?
    } else if let Some(hex) = body.strip_suffix('h') {
        if !hex.starts_with(|c: char| c.is_ascii_digit()) {
            return None;
        }
        i64::from_str_radix(hex, 16).ok()?
    } else {
        body.parse::<i64>().ok()?
    };
    Some(if neg { -value } else { value })
}

fn is_conditional_jump(m: &str) -> bool {
    m.starts_with('j') && m != "jmp"
}

fn ends_flow(m: &str) -> bool {
    matches!(m, "jmp" | "ret" | "retn" | "retf" | "iret" | "iretd")
}

/// Operand identifiers, with their byte ranges.
fn identifiers(op: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in op.char_indices() {
        let word = c.is_ascii_alphanumeric() || c == '_';
        match (start, word) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, op.len()));
    }
    out
}

// ---------------------------------------------------------------------------
// Garbage insertion.

fn garbage_items(
    items: &[Item],
    spec: &MutationSpec,
    rng: &mut SeededStream,
    edits: &mut Vec<Edit>,
) -> Vec<Item> {
    // Boundaries are "before instruction at item index".
    let sites: Vec<usize> = items
        .iter()
        .enumerate()
        .filter_map(|(i, item)| match item {
            Item::Ins(ins) if !is_conditional_jump(&ins.mnemonic) => Some(i),
            _ => None,
        })
        .collect();
    let chosen = select(rng, sites.len(), spec.intensity);
    let menu = &spec.options.garbage;
    let picks: Vec<(usize, usize)> = sites
        .iter()
        .map(|_| (rng.below(menu.len().max(1)), rng.below(EXCHANGEABLE.len())))
        .collect();

    let mut out = Vec::with_capacity(items.len());
    let mut site = 0;
    for (i, item) in items.iter().enumerate() {
        if site < sites.len() && sites[site] == i {
            if chosen[site] && !menu.is_empty() {
                let (kind, reg) = picks[site];
                let reg = EXCHANGEABLE[reg];
                let inserted: Vec<Instruction> = match menu[kind] {
                    GarbageKind::Nop => vec![synth("nop", &[])],
                    GarbageKind::PushPop => vec![synth("push", &[reg]), synth("pop", &[reg])],
                    GarbageKind::SelfMove => vec![synth("mov", &[reg, reg])],
                };
                let Item::Ins(at) = item else { unreachable!() };
                edits.push(Edit {
                    line: at.line_no,
                    kind: "insert".into(),
                    detail: inserted
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("; "),
                });
                out.extend(inserted.into_iter().map(Item::Ins));
            }
            site += 1;
        }
        out.push(item.clone());
    }
    out
}

// ---------------------------------------------------------------------------
// Register exchange.

/// Renames registers in every operand of `sub` according to `map`
/// (pairs of `from -> to`). Mnemonics are untouched.
pub fn rename_registers(sub: &Subroutine, map: &[(&str, &str)]) -> Subroutine {
    let mut out = sub.clone();
    for ins in &mut out.instructions {
        for op in &mut ins.operands {
            *op = rename_operand(op, map);
        }
    }
    out
}

fn rename_operand(op: &str, map: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(op.len());
    let mut last = 0;
    for (s, e) in identifiers(op) {
        let word = op[s..e].to_ascii_lowercase();
        if let Some((_, to)) = map.iter().find(|(from, _)| *from == word) {
            out.push_str(&op[last..s]);
            out.push_str(to);
            last = e;
        }
    }
    out.push_str(&op[last..]);
    out
}

fn exchange_blocker(sub: &Subroutine) -> Option<String> {
    for ins in &sub.instructions {
        let m = ins.mnemonic.as_str();
        if IMPLICIT_REGISTER_USE.contains(&m) || m.starts_with("rep") {
            return Some(format!("`{m}` uses registers implicitly (line {})", ins.line_no));
        }
        if m == "imul" && ins.operands.len() == 1 {
            return Some(format!("one-operand imul (line {})", ins.line_no));
        }
        for op in &ins.operands {
            for (s, e) in identifiers(op) {
                let word = op[s..e].to_ascii_lowercase();
                if SUB_REGISTERS.contains(&word.as_str()) {
                    return Some(format!("partial register `{word}` (line {})", ins.line_no));
                }
            }
        }
    }
    None
}

fn exchange_items(
    sub: &Subroutine,
    items: &[Item],
    chosen: bool,
    rng: &mut SeededStream,
    edits: &mut Vec<Edit>,
) -> Result<Vec<Item>, String> {
    // The permutation is drawn even for unchosen subroutines so the stream
    // stays aligned across intensities.
    let mut perm: Vec<&str> = EXCHANGEABLE.to_vec();
    rng.shuffle(&mut perm);
    if perm == EXCHANGEABLE {
        perm.swap(0, 1);
    }
    if !chosen {
        return Ok(items.to_vec());
    }
    if let Some(reason) = exchange_blocker(sub) {
        return Err(reason);
    }
    let map: Vec<(&str, &str)> = EXCHANGEABLE.iter().copied().zip(perm).collect();
    Ok(items
        .iter()
        .map(|item| match item {
            Item::Ins(ins) => {
                let mut new = ins.clone();
                for op in &mut new.operands {
                    *op = rename_operand(op, &map);
                }
                if new.operands != ins.operands {
                    edits.push(Edit {
                        line: ins.line_no,
                        kind: "rename".into(),
                        detail: format!("{ins} -> {new}"),
                    });
                }
                Item::Ins(new)
            }
            label => label.clone(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Instruction replacement.

#[derive(Debug, Clone, Copy)]
enum ZeroForm {
    Mov,
    Xor,
    And,
    Sub,
}

impl ZeroForm {
    fn render(self, reg: &str) -> Instruction {
        match self {
            ZeroForm::Mov => synth("mov", &[reg, "0"]),
            ZeroForm::Xor => synth("xor", &[reg, reg]),
            ZeroForm::And => synth("and", &[reg, "0"]),
            ZeroForm::Sub => synth("sub", &[reg, reg]),
        }
    }
}

fn zero_form(ins: &Instruction) -> Option<(ZeroForm, &'static str)> {
    let [dst, src] = ins.operands.as_slice() else {
        return None;
    };
    let reg = gpr(dst).filter(|r| *r != "esp")?;
    let same = gpr(src) == Some(reg);
    let zero = parse_imm(src) == Some(0);
    match ins.mnemonic.as_str() {
        "mov" if zero => Some((ZeroForm::Mov, reg)),
        "xor" if same => Some((ZeroForm::Xor, reg)),
        "and" if zero => Some((ZeroForm::And, reg)),
        "sub" if same => Some((ZeroForm::Sub, reg)),
        _ => None,
    }
}

/// A replacement site: the covered item range and the candidate rewrites.
struct Rewrite {
    start: usize,
    len: usize,
    candidates: Vec<Vec<Instruction>>,
}

fn rewrite_at(items: &[Item], i: usize, family: ReplacementFamily) -> Option<Rewrite> {
    let Item::Ins(ins) = &items[i] else {
        return None;
    };
    match family {
        ReplacementFamily::Zeroing | ReplacementFamily::ZeroingMovXor => {
            let (form, reg) = zero_form(ins)?;
            let all: &[ZeroForm] = if family == ReplacementFamily::Zeroing {
                &[ZeroForm::Mov, ZeroForm::Xor, ZeroForm::And, ZeroForm::Sub]
            } else {
                &[ZeroForm::Mov, ZeroForm::Xor]
            };
            if !all.iter().any(|f| std::mem::discriminant(f) == std::mem::discriminant(&form)) {
                return None;
            }
            let candidates = all
                .iter()
                .filter(|f| std::mem::discriminant(*f) != std::mem::discriminant(&form))
                .map(|f| vec![f.render(reg)])
                .collect();
            Some(Rewrite {
                start: i,
                len: 1,
                candidates,
            })
        }
        ReplacementFamily::AddSub => {
            let [dst, src] = ins.operands.as_slice() else {
                return None;
            };
            let reg = gpr(dst)?;
            let k = parse_imm(src)?.checked_neg()?;
            let other = match ins.mnemonic.as_str() {
                "add" => "sub",
                "sub" => "add",
                _ => return None,
            };
            Some(Rewrite {
                start: i,
                len: 1,
                candidates: vec![vec![synth(other, &[reg, &k.to_string()])]],
            })
        }
        ReplacementFamily::PushPopMov => {
            if ins.mnemonic == "mov" {
                let [dst, src] = ins.operands.as_slice() else {
                    return None;
                };
                let (d, s) = (gpr(dst)?, gpr(src)?);
                if d == s || d == "esp" || s == "esp" {
                    return None;
                }
                return Some(Rewrite {
                    start: i,
                    len: 1,
                    candidates: vec![vec![synth("push", &[s]), synth("pop", &[d])]],
                });
            }
            if ins.mnemonic != "push" {
                return None;
            }
            let Some(Item::Ins(next)) = items.get(i + 1) else {
                return None;
            };
            if next.mnemonic != "pop" {
                return None;
            }
            let (s, d) = match (ins.operands.as_slice(), next.operands.as_slice()) {
                ([s], [d]) => (gpr(s)?, gpr(d)?),
                _ => return None,
            };
            if d == s || d == "esp" || s == "esp" {
                return None;
            }
            Some(Rewrite {
                start: i,
                len: 2,
                candidates: vec![vec![synth("mov", &[d, s])]],
            })
        }
    }
}

fn replace_items(
    items: &[Item],
    spec: &MutationSpec,
    rng: &mut SeededStream,
    edits: &mut Vec<Edit>,
) -> Vec<Item> {
    let mut sites = Vec::new();
    let mut i = 0;
    while i < items.len() {
        match spec
            .options
            .replacement
            .iter()
            .find_map(|&f| rewrite_at(items, i, f))
        {
            Some(rw) => {
                i += rw.len;
                sites.push(rw);
            }
            None => i += 1,
        }
    }
    let chosen = select(rng, sites.len(), spec.intensity);
    let picks: Vec<usize> = sites.iter().map(|s| rng.below(s.candidates.len())).collect();

    let mut out = Vec::with_capacity(items.len());
    let mut next = 0;
    let mut i = 0;
    while i < items.len() {
        if next < sites.len() && sites[next].start == i {
            let site = &sites[next];
            let covered = &items[i..i + site.len];
            if chosen[next] {
                let replacement = &site.candidates[picks[next]];
                let before: Vec<String> = covered
                    .iter()
                    .filter_map(|it| match it {
                        Item::Ins(ins) => Some(ins.to_string()),
                        Item::Label(_) => None,
                    })
                    .collect();
                let Item::Ins(first) = &covered[0] else { unreachable!() };
                edits.push(Edit {
                    line: first.line_no,
                    kind: "replace".into(),
                    detail: format!(
                        "{} -> {}",
                        before.join("; "),
                        replacement
                            .iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join("; ")
                    ),
                });
                out.extend(replacement.iter().cloned().map(Item::Ins));
            } else {
                out.extend(covered.iter().cloned());
            }
            i += site.len;
            next += 1;
        } else {
            out.push(items[i].clone());
            i += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Instruction permutation.

fn two_registers(ins: &Instruction) -> Option<(&'static str, &'static str)> {
    if !SWAPPABLE.contains(&ins.mnemonic.as_str()) {
        return None;
    }
    match ins.operands.as_slice() {
        [a, b] => Some((gpr(a)?, gpr(b)?)),
        _ => None,
    }
}

/// Whether `first; second` may be reordered to `second; first`.
///
/// Both must be two-register forms `op1 Reg1, Reg2` / `op2 Reg3, Reg4`
/// with Reg1 != Reg3, Reg1 != Reg4 and Reg2 != Reg3. At most one of the
/// two may write the flags, so the flags after the pair are unchanged.
pub fn swap_is_legal(first: &Instruction, second: &Instruction) -> bool {
    let (Some((r1, r2)), Some((r3, r4))) = (two_registers(first), two_registers(second)) else {
        return false;
    };
    let flag_writers = [first, second]
        .iter()
        .filter(|i| i.mnemonic != "mov")
        .count();
    r1 != r3 && r1 != r4 && r2 != r3 && flag_writers <= 1
}

fn permute_items(
    items: &[Item],
    spec: &MutationSpec,
    rng: &mut SeededStream,
    edits: &mut Vec<Edit>,
) -> Vec<Item> {
    let mut sites = Vec::new();
    let mut i = 0;
    while i + 1 < items.len() {
        match (&items[i], &items[i + 1]) {
            (Item::Ins(a), Item::Ins(b)) if swap_is_legal(a, b) => {
                sites.push(i);
                i += 2;
            }
            _ => i += 1,
        }
    }
    let chosen = select(rng, sites.len(), spec.intensity);
    let mut out = items.to_vec();
    for (site, &i) in sites.iter().enumerate() {
        if !chosen[site] {
            continue;
        }
        let (Item::Ins(a), Item::Ins(b)) = (&items[i], &items[i + 1]) else {
            unreachable!()
        };
        edits.push(Edit {
            line: a.line_no,
            kind: "swap".into(),
            detail: format!("{a} <-> {b} (line {})", b.line_no),
        });
        out.swap(i, i + 1);
    }
    out
}

/// Checks every logged swap of a permutation variant against the parent.
/// Returns one message per swap that was not legal.
pub fn permutation_violations(parent: &Program, record: &VariantRecord) -> Vec<String> {
    let mut out = Vec::new();
    for edit in record.edits.iter().filter(|e| e.kind == "swap") {
        let pair = parent.subroutines.iter().find_map(|sub| {
            let i = sub.instructions.iter().position(|ins| ins.line_no == edit.line)?;
            let a = &sub.instructions[i];
            let b = sub.instructions.get(i + 1)?;
            let split = sub.labels.iter().any(|l| l.position == i + 1);
            Some((a, b, split))
        });
        match pair {
            Some((a, b, false)) if swap_is_legal(a, b) => {}
            Some((a, b, _)) => out.push(format!("line {}: illegal swap `{a}` / `{b}`", edit.line)),
            None => out.push(format!("line {}: no instruction pair in parent", edit.line)),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Code transposition.

fn fresh_label(taken: &mut HashSet<String>, sub: &str, n: &mut usize) -> String {
    loop {
        let name = format!("tp_{sub}_{n}");
        *n += 1;
        if taken.insert(name.clone()) {
            return name;
        }
    }
}

fn transpose_items(
    sub: &Subroutine,
    items: &[Item],
    spec: &MutationSpec,
    rng: &mut SeededStream,
    edits: &mut Vec<Edit>,
) -> Vec<Item> {
    // Instruction item positions; a cut before instruction k (1 <= k < n)
    // splits the body there, with preceding labels going to the new block.
    let ins_at: Vec<usize> = items
        .iter()
        .enumerate()
        .filter_map(|(i, it)| matches!(it, Item::Ins(_)).then_some(i))
        .collect();
    let n = ins_at.len();
    let chosen = select(rng, n - 1, spec.intensity);
    let order_seed = rng.next_u64();
    let cuts: Vec<usize> = (1..n).filter(|k| chosen[k - 1]).collect();
    if cuts.is_empty() {
        return items.to_vec();
    }

    // Item index where each block starts: just after the previous
    // instruction, so labels travel with the block they precede.
    let mut bounds = vec![0];
    bounds.extend(cuts.iter().map(|&k| ins_at[k - 1] + 1));
    let trailing_start = ins_at[n - 1] + 1;
    let blocks: Vec<&[Item]> = bounds
        .iter()
        .enumerate()
        .map(|(b, &s)| {
            let e = bounds.get(b + 1).copied().unwrap_or(trailing_start);
            &items[s..e]
        })
        .collect();
    let trailing = &items[trailing_start..];

    let count = blocks.len();
    let mut order: Vec<usize> = (0..count).collect();
    let mut order_rng = SeededStream::new(order_seed);
    order_rng.shuffle(&mut order);
    if order.iter().enumerate().all(|(i, &b)| i == b) {
        order.rotate_left(1);
    }

    let mut taken: HashSet<String> = sub.labels.iter().map(|l| l.name.clone()).collect();
    let mut next_label = 0;
    let block_labels: Vec<String> = (0..count)
        .map(|_| fresh_label(&mut taken, &sub.name, &mut next_label))
        .collect();
    let falls_through = |b: usize| match blocks[b].iter().rev().find_map(|it| match it {
        Item::Ins(ins) => Some(ins),
        Item::Label(_) => None,
    }) {
        Some(ins) => !ends_flow(&ins.mnemonic),
        None => true,
    };
    let first_line = |b: usize| {
        blocks[b]
            .iter()
            .find_map(|it| match it {
                Item::Ins(ins) => Some(ins.line_no),
                Item::Label(_) => None,
            })
            .unwrap_or(0)
    };
    let last_line = |b: usize| {
        blocks[b]
            .iter()
            .rev()
            .find_map(|it| match it {
                Item::Ins(ins) => Some(ins.line_no),
                Item::Label(_) => None,
            })
            .unwrap_or(0)
    };

    let mut targeted = vec![false; count];
    let mut exit_label: Option<String> = None;
    let mut out: Vec<Item> = Vec::new();
    let mut stitched = Vec::new();

    if order[0] != 0 {
        targeted[0] = true;
        out.push(Item::Ins(synth("jmp", &[&block_labels[0]])));
        stitched.push(Edit {
            line: first_line(0),
            kind: "stitch".into(),
            detail: format!("entry jmp to block at line {}", first_line(0)),
        });
    }
    // Labels are emitted lazily; collect body first, then splice labels in.
    let mut body: Vec<(usize, Vec<Item>)> = Vec::new();
    for (pos, &b) in order.iter().enumerate() {
        let mut chunk: Vec<Item> = blocks[b].to_vec();
        let physical_next = order.get(pos + 1).copied();
        if falls_through(b) {
            if b + 1 < count {
                if physical_next != Some(b + 1) {
                    targeted[b + 1] = true;
                    chunk.push(Item::Ins(synth("jmp", &[&block_labels[b + 1]])));
                    stitched.push(Edit {
                        line: last_line(b),
                        kind: "stitch".into(),
                        detail: format!("jmp to block at line {}", first_line(b + 1)),
                    });
                }
            } else if physical_next.is_some() {
                let label = exit_label
                    .get_or_insert_with(|| fresh_label(&mut taken, &sub.name, &mut next_label))
                    .clone();
                chunk.push(Item::Ins(synth("jmp", &[&label])));
                stitched.push(Edit {
                    line: last_line(b),
                    kind: "stitch".into(),
                    detail: "jmp to subroutine end".into(),
                });
            }
        }
        body.push((b, chunk));
    }
    for (b, chunk) in body {
        if targeted[b] {
            out.push(Item::Label(block_labels[b].clone()));
        }
        out.extend(chunk);
    }
    if let Some(label) = exit_label {
        out.push(Item::Label(label));
    }
    out.extend(trailing.iter().cloned());

    edits.push(Edit {
        line: first_line(0),
        kind: "reorder".into(),
        detail: format!(
            "{}: blocks starting at lines [{}] laid out as [{}]",
            sub.name,
            (0..count).map(|b| first_line(b).to_string()).collect::<Vec<_>>().join(", "),
            order.iter().map(|&b| first_line(b).to_string()).collect::<Vec<_>>().join(", ")
        ),
    });
    edits.extend(stitched);
    out
}

// ---------------------------------------------------------------------------
// Corpus generation.

pub type CorpusManifest = Vec<VariantRecord>;

/// Variant ids used by [`generate_corpus`].
pub fn corpus_variant_id(parent: &str, index: usize, technique: Technique) -> String {
    format!("{parent}.{index:02}.{technique}")
}

/// Applies every spec to every seed, writes each variant to
/// `<out_dir>/<variant_id>.asm` and the records to
/// `<out_dir>/manifest.json`.
pub fn generate_corpus(
    seeds: &[Program],
    specs: &[MutationSpec],
    out_dir: &Path,
) -> Result<CorpusManifest, MutateError> {
    let jobs: Vec<(&Program, usize, &MutationSpec)> = seeds
        .iter()
        .flat_map(|p| specs.iter().enumerate().map(move |(i, s)| (p, i, s)))
        .collect();
    let variants = jobs
        .par_iter()
        .map(|&(p, i, spec)| {
            let (mut program, mut record) = mutate(p, spec)?;
            let id = corpus_variant_id(&p.id, i, spec.technique);
            program.id = id.clone();
            record.variant_id = id;
            Ok((program, record))
        })
        .collect::<Result<Vec<_>, MutateError>>()?;

    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| MutateError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut manifest = Vec::with_capacity(variants.len());
    for (program, record) in variants {
        let path = out_dir.join(format!("{}.asm", program.id));
        fs::write(&path, program.to_listing()).map_err(io(&path))?;
        manifest.push(record);
    }
    let path = out_dir.join("manifest.json");
    fs::write(&path, manifest_json(&manifest)).map_err(io(&path))?;
    Ok(manifest)
}

pub fn manifest_json(manifest: &[VariantRecord]) -> String {
    let value = serde_json::to_value(manifest).expect("manifest serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

pub fn read_manifest(path: &Path) -> Result<CorpusManifest, MutateError> {
    let text = fs::read_to_string(path).map_err(|source| MutateError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| MutateError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_histogram, normalize, profile};
    use crate::listing::parse_listing;
    use crate::{manhattan, symmetric_distance, MetricConfig};

    const SEED: &str = "\
main proc
        push    ebp
        mov     ebp, esp
        mov     eax, 0
        mov     ebx, ecx
        add     esi, 8
        mov     ecx, edx
        cmp     eax, ebx
        jz      done
        xor     edi, edi
        call    helper
done:
        pop     ebp
        ret
main endp

helper proc
        mov     eax, [esp+4]
        mov     edx, 0
        sub     ecx, ecx
        push    esi
        pop     edi
        ret
helper endp
";

    fn seed() -> Program {
        parse_listing(SEED, "seed").unwrap()
    }

    fn spec(t: Technique, intensity: f64, seed: u64) -> MutationSpec {
        MutationSpec::new(t, intensity, seed).unwrap()
    }

    fn code(p: &Program) -> Vec<Vec<String>> {
        p.subroutines
            .iter()
            .map(|s| s.instructions.iter().map(ToString::to_string).collect())
            .collect()
    }

    #[test]
    fn intensity_zero_is_identity() {
        for t in Technique::ALL {
            let (v, rec) = mutate(&seed(), &spec(t, 0.0, 9)).unwrap();
            assert_eq!(code(&v), code(&seed()), "{t}");
            assert!(rec.edits.is_empty(), "{t}");
        }
    }

    #[test]
    fn intensity_out_of_range() {
        assert!(MutationSpec::new(Technique::GarbageInsertion, 1.5, 0).is_err());
        assert!(MutationSpec::new(Technique::GarbageInsertion, -0.1, 0).is_err());
    }

    #[test]
    fn technique_mismatch() {
        let s = spec(Technique::GarbageInsertion, 0.5, 1);
        assert!(matches!(
            mutate_permutation(&seed(), &s),
            Err(MutateError::WrongTechnique { .. })
        ));
    }

    #[test]
    fn garbage_never_before_conditional_jump() {
        for s in 0..20 {
            let (v, _) = mutate_garbage(&seed(), &spec(Technique::GarbageInsertion, 1.0, s)).unwrap();
            let main = &v.subroutines[0].instructions;
            let jz = main.iter().position(|i| i.mnemonic == "jz").unwrap();
            assert_eq!(main[jz - 1].mnemonic, "cmp");
        }
    }

    #[test]
    fn garbage_full_intensity_counts() {
        let s = spec(Technique::GarbageInsertion, 1.0, 4).with_garbage(&[GarbageKind::Nop]);
        let (v, rec) = mutate_garbage(&seed(), &s).unwrap();
        // 12 instructions in main minus the jz, 6 in helper
        assert_eq!(rec.edits.len(), 11 + 6);
        let nops = v
            .subroutines
            .iter()
            .flat_map(|s| &s.instructions)
            .filter(|i| i.mnemonic == "nop")
            .count();
        assert_eq!(nops, 17);
    }

    #[test]
    fn garbage_dilution_single_subroutine() {
        let body: String = (0..50).map(|i| format!(" mov eax, {i}\n")).collect();
        let p = parse_listing(&format!("f proc\n{body}f endp"), "p").unwrap();
        for g in 1..=20u32 {
            let s = spec(Technique::GarbageInsertion, g as f64 / 50.0, 11)
                .with_garbage(&[GarbageKind::Nop]);
            let (v, _) = mutate_garbage(&p, &s).unwrap();
            let a = normalize(&build_histogram("p", &p.subroutines[0]).unwrap()).unwrap();
            let b = normalize(&build_histogram("v", &v.subroutines[0]).unwrap()).unwrap();
            let expected = 2.0 * g as f64 / (50.0 + g as f64);
            assert!((manhattan(&a, &b).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn register_exchange_swaps_operands() {
        let sub = parse_listing("f proc\n mov eax, 0\n mov [eax+ebx*4], ecx\nf endp", "p")
            .unwrap()
            .subroutines
            .remove(0);
        let out = rename_registers(&sub, &[("eax", "ebx"), ("ebx", "eax")]);
        assert_eq!(out.instructions[0].to_string(), "mov ebx, 0");
        assert_eq!(out.instructions[1].to_string(), "mov [ebx+eax*4], ecx");
        let same = rename_registers(&sub, &[]);
        assert_eq!(same, sub);
    }

    #[test]
    fn register_exchange_keeps_histograms() {
        for s in 0..10 {
            let (v, rec) =
                mutate_register_exchange(&seed(), &spec(Technique::RegisterExchange, 1.0, s)).unwrap();
            assert!(!rec.edits.is_empty());
            let d = symmetric_distance(
                &profile(&seed()).unwrap(),
                &profile(&v).unwrap(),
                &MetricConfig::manhattan(),
            )
            .unwrap();
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn register_exchange_skips_implicit_users() {
        let p = parse_listing("f proc\n mov eax, 1\n mul ebx\nf endp", "p").unwrap();
        let (v, rec) = mutate(&p, &spec(Technique::RegisterExchange, 1.0, 0)).unwrap();
        assert_eq!(code(&v), code(&p));
        assert!(rec.edits.is_empty());
        assert_eq!(rec.skipped.len(), 1);
    }

    #[test]
    fn replacement_single_site() {
        let p = parse_listing("f proc\n mov eax, 0\n ret\nf endp", "p").unwrap();
        let s = spec(Technique::InstructionReplacement, 1.0, 0)
            .with_replacement(&[ReplacementFamily::ZeroingMovXor]);
        let (v, rec) = mutate_replacement(&p, &s).unwrap();
        assert_eq!(v.subroutines[0].instructions[0].to_string(), "xor eax, eax");
        assert_eq!(rec.edits.len(), 1);
        assert_eq!(rec.edits[0].line, 2);
        let before = build_histogram("p", &p.subroutines[0]).unwrap();
        let after = build_histogram("v", &v.subroutines[0]).unwrap();
        assert_eq!(before.get("mov") - after.get("mov"), 1.0);
        assert_eq!(after.get("xor") - before.get("xor"), 1.0);
    }

    #[test]
    fn replacement_families() {
        let p = parse_listing(
            "f proc\n add eax, 5\n sub ebx, 10h\n push esi\n pop edi\n mov ecx, edx\n sub eax, eax\nf endp",
            "p",
        )
        .unwrap();
        let s = spec(Technique::InstructionReplacement, 1.0, 3);
        let (v, rec) = mutate_replacement(&p, &s).unwrap();
        let got: Vec<String> = v.subroutines[0].instructions.iter().map(ToString::to_string).collect();
        assert_eq!(got[0], "sub eax, -5");
        assert_eq!(got[1], "add ebx, -16");
        assert_eq!(got[2], "mov edi, esi");
        assert_eq!(got[3..5], ["push edx", "pop ecx"]);
        assert!(["mov eax, 0", "xor eax, eax", "and eax, 0"].contains(&got[5].as_str()));
        assert_eq!(rec.edits.len(), 5);
    }

    #[test]
    fn immediates() {
        assert_eq!(parse_imm("0"), Some(0));
        assert_eq!(parse_imm("0x1F"), Some(31));
        assert_eq!(parse_imm("1Fh"), Some(31));
        assert_eq!(parse_imm("-8"), Some(-8));
        assert_eq!(parse_imm("ebx"), None);
        assert_eq!(parse_imm("bh"), None);
    }

    #[test]
    fn swap_conditions() {
        let i = |m: &str, a: &str, b: &str| synth(m, &[a, b]);
        assert!(swap_is_legal(&i("mov", "eax", "ebx"), &i("mov", "ecx", "edx")));
        // Reg1 = Reg3
        assert!(!swap_is_legal(&i("mov", "eax", "ebx"), &i("mov", "eax", "edx")));
        // Reg1 = Reg4
        assert!(!swap_is_legal(&i("mov", "eax", "ebx"), &i("mov", "ecx", "eax")));
        // Reg2 = Reg3
        assert!(!swap_is_legal(&i("mov", "eax", "ebx"), &i("mov", "ebx", "edx")));
        // Reg2 = Reg4 is a shared read
        assert!(swap_is_legal(&i("mov", "eax", "ebx"), &i("mov", "ecx", "ebx")));
        // both write flags
        assert!(!swap_is_legal(&i("add", "eax", "ebx"), &i("sub", "ecx", "edx")));
        assert!(swap_is_legal(&i("add", "eax", "ebx"), &i("mov", "ecx", "edx")));
        // memory and immediates are out of scope
        assert!(!swap_is_legal(&i("mov", "eax", "[ebx]"), &i("mov", "ecx", "edx")));
        assert!(!swap_is_legal(&i("mov", "eax", "1"), &i("mov", "ecx", "edx")));
        assert!(!swap_is_legal(&synth("jmp", &["l"]), &i("mov", "ecx", "edx")));
    }

    #[test]
    fn permutation_flips_legal_pair() {
        let p = parse_listing("f proc\n mov eax, ebx\n mov ecx, edx\n ret\nf endp", "p").unwrap();
        let (v, rec) = mutate_permutation(&p, &spec(Technique::InstructionPermutation, 1.0, 0)).unwrap();
        let got: Vec<String> = v.subroutines[0].instructions.iter().map(ToString::to_string).collect();
        assert_eq!(got, ["mov ecx, edx", "mov eax, ebx", "ret"]);
        assert!(permutation_violations(&p, &rec).is_empty());

        let p = parse_listing("f proc\n mov eax, ebx\n mov eax, edx\n ret\nf endp", "p").unwrap();
        let (v, rec) = mutate_permutation(&p, &spec(Technique::InstructionPermutation, 1.0, 0)).unwrap();
        assert_eq!(code(&v), code(&p));
        assert!(rec.edits.is_empty());
    }

    #[test]
    fn permutation_does_not_cross_labels() {
        let p = parse_listing("f proc\n mov eax, ebx\nl:\n mov ecx, edx\n ret\nf endp", "p").unwrap();
        let (_, rec) = mutate_permutation(&p, &spec(Technique::InstructionPermutation, 1.0, 0)).unwrap();
        assert!(rec.edits.is_empty());
    }

    #[test]
    fn validator_flags_forged_swaps() {
        let p = parse_listing("f proc\n mov eax, ebx\n mov eax, edx\nf endp", "p").unwrap();
        let rec = VariantRecord {
            parent_id: "p".into(),
            variant_id: "v".into(),
            spec: spec(Technique::InstructionPermutation, 1.0, 0),
            edits: vec![Edit {
                line: 2,
                kind: "swap".into(),
                detail: String::new(),
            }],
            skipped: vec![],
        };
        assert_eq!(permutation_violations(&p, &rec).len(), 1);
    }

    #[test]
    fn transposition_two_blocks() {
        let p = parse_listing(
            "f proc\n mov eax, 1\n add eax, 2\n mov ebx, eax\n push ebx\n ret\nf endp",
            "p",
        )
        .unwrap();
        // 4 cut points; intensity 0.25 selects exactly one
        let (v, rec) = mutate_transposition(&p, &spec(Technique::CodeTransposition, 0.25, 5)).unwrap();
        let sub = &v.subroutines[0];
        let jmps = sub.instructions.iter().filter(|i| i.mnemonic == "jmp").count();
        assert_eq!(jmps, 2);
        assert_eq!(sub.labels.len(), 2);
        assert_eq!(sub.len(), p.subroutines[0].len() + 2);
        assert_eq!(rec.edits.iter().filter(|e| e.kind == "stitch").count(), 2);
        assert_stitched(&p.subroutines[0], sub);
    }

    #[test]
    fn transposition_preserves_execution_order() {
        let p = seed();
        for s in 0..30 {
            for intensity in [0.3, 0.6, 1.0] {
                let (v, rec) =
                    mutate_transposition(&p, &spec(Technique::CodeTransposition, intensity, s)).unwrap();
                for (orig, sub) in p.subroutines.iter().zip(&v.subroutines) {
                    assert_stitched(orig, sub);
                }
                let added = v.instruction_count() - p.instruction_count();
                assert_eq!(added, rec.edits.iter().filter(|e| e.kind == "stitch").count());
            }
        }
    }

    #[test]
    fn transposition_skips_small_subroutines() {
        let p = parse_listing("f proc\n nop\n ret\nf endp", "p").unwrap();
        let (v, rec) = mutate_transposition(&p, &spec(Technique::CodeTransposition, 1.0, 0)).unwrap();
        assert_eq!(code(&v), code(&p));
        assert!(rec.edits.is_empty());
        assert!(rec.skipped[0].reason.contains("at least 4"));
    }

    /// Checks that the variant runs the original instructions in their
    /// original order: the entry reaches the first instruction, every
    /// fall-through edge of the parent is preserved once stitched `jmp tp_*`
    /// instructions are followed, and original labels still land on the
    /// same instruction. Instructions must be textually unique per
    /// subroutine.
    fn assert_stitched(orig: &Subroutine, var: &Subroutine) {
        let text = |s: &Subroutine, i: usize| s.instructions.get(i).map(ToString::to_string);
        let resolve = |mut pc: usize| {
            for _ in 0..1000 {
                match var.instructions.get(pc) {
                    Some(ins) if ins.mnemonic == "jmp" && ins.operands[0].starts_with("tp_") => {
                        pc = var.labels.iter().find(|l| l.name == ins.operands[0]).unwrap().position;
                    }
                    _ => return pc,
                }
            }
            panic!("stitch cycle");
        };
        let pos_of = |t: &str| {
            (0..var.len())
                .find(|&i| var.instructions[i].to_string() == t)
                .unwrap()
        };
        assert_eq!(text(var, resolve(0)), text(orig, 0));
        for i in 0..orig.len() {
            if ends_flow(&orig.instructions[i].mnemonic) {
                continue;
            }
            let at = pos_of(&orig.instructions[i].to_string());
            assert_eq!(text(var, resolve(at + 1)), text(orig, i + 1), "after {}", orig.instructions[i]);
        }
        for label in &orig.labels {
            let l = var.labels.iter().find(|l| l.name == label.name).unwrap();
            assert_eq!(text(var, resolve(l.position)), text(orig, label.position));
        }
    }

    #[test]
    fn mutation_is_deterministic() {
        for t in Technique::ALL {
            let a = mutate(&seed(), &spec(t, 0.7, 42)).unwrap();
            let b = mutate(&seed(), &spec(t, 0.7, 42)).unwrap();
            assert_eq!(a.0.to_listing(), b.0.to_listing());
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn manifest_schema() {
        let (_, rec) = mutate(&seed(), &spec(Technique::InstructionReplacement, 1.0, 1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&manifest_json(&[rec])).unwrap();
        let obj = v[0].as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        assert_eq!(keys, ["edits", "intensity", "parent_id", "seed", "technique", "variant_id"]);
        assert_eq!(obj["technique"], "instruction_replacement");
        let edit = obj["edits"][0].as_object().unwrap();
        assert_eq!(edit.keys().map(String::as_str).collect::<Vec<_>>(), ["detail", "kind", "line"]);
    }
}
