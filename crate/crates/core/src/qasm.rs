//! OpenQASM 3 subset: emission and parsing of expanded circuits.
//!
//! The grammar covers exactly what synthesized circuits need:
//!
//! ```text
//! OPENQASM 3.0;
//! qubit[n] ctrl;  qubit[1] tgt;  qubit[m] anc;  bit[k] mbit;
//! <gate> reg[i](, reg[j])?;                  gate ∈ x h s sdg t tdg cx cz
//! mbit[k] = measure anc[j];
//! reset reg[i];
//! if (mbit[k] == 0|1) { <gate> ...; }
//! ```
//!
//! Qubits are laid out ctrl first, then tgt, then anc, so `parse(emit(c)) == c`
//! holds for circuits whose roles are grouped in that order (every synthesized
//! circuit is). Line comments (`//`) are skipped.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Clbit, Gate, GateKind, Instruction, Qubit, Role};
use crate::synth::SynthesisResult;

const HEADER: &str = "OPENQASM 3.0;";
const CLBIT_REGISTER: &str = "mbit";

fn register_name(role: Role) -> &'static str {
    match role {
        Role::Control => "ctrl",
        Role::Target => "tgt",
        Role::Ancilla => "anc",
    }
}

const ROLE_ORDER: [Role; 3] = [Role::Control, Role::Target, Role::Ancilla];

/// Qubit → (register, local index) using each qubit's role.
fn locations(circuit: &Circuit) -> Vec<(&'static str, usize)> {
    let mut next = [0usize; 3];
    circuit
        .roles()
        .iter()
        .map(|&r| {
            let slot = ROLE_ORDER.iter().position(|&o| o == r).expect("known role");
            let local = next[slot];
            next[slot] += 1;
            (register_name(r), local)
        })
        .collect()
}

fn write_gate(out: &mut String, gate: &Gate, loc: &[(&str, usize)]) {
    out.push_str(gate.kind().mnemonic());
    for (i, q) in gate.qubits().iter().enumerate() {
        let (reg, idx) = loc[q.0];
        let sep = if i == 0 { " " } else { ", " };
        let _ = write!(out, "{sep}{reg}[{idx}]");
    }
    out.push(';');
}

/// Serializes `circuit`. Output is deterministic and uses LF line endings.
pub fn emit(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    write_body(&mut out, circuit);
    out
}

/// Like [`emit`], with a comment line naming the synthesized gate.
pub fn emit_result(result: &SynthesisResult) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    let _ = writeln!(
        out,
        "// C{}X, {}, {} ancilla(s)",
        result.n,
        result.strategy,
        result.ancillas.len()
    );
    write_body(&mut out, &result.circuit);
    out
}

fn write_body(out: &mut String, circuit: &Circuit) {
    for role in ROLE_ORDER {
        let size = circuit.qubits_with_role(role).len();
        if size > 0 {
            let _ = writeln!(out, "qubit[{size}] {};", register_name(role));
        }
    }
    if circuit.num_clbits() > 0 {
        let _ = writeln!(out, "bit[{}] {CLBIT_REGISTER};", circuit.num_clbits());
    }
    let loc = locations(circuit);
    for instr in circuit.instructions() {
        match instr {
            Instruction::Unitary(g) => write_gate(out, g, &loc),
            Instruction::Measure { qubit, clbit } => {
                let (reg, idx) = loc[qubit.0];
                let _ = write!(out, "{CLBIT_REGISTER}[{}] = measure {reg}[{idx}];", clbit.0);
            }
            Instruction::Reset(q) => {
                let (reg, idx) = loc[q.0];
                let _ = write!(out, "reset {reg}[{idx}];");
            }
            Instruction::Conditional { clbit, value, gate } => {
                let _ = write!(out, "if ({CLBIT_REGISTER}[{}] == {}) {{ ", clbit.0, u8::from(*value));
                write_gate(out, gate, &loc);
                out.push_str(" }");
            }
        }
        out.push('\n');
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QasmErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEof(String),
    #[error("unsupported gate '{0}'")]
    UnsupportedGate(String),
    #[error("unknown register '{0}'")]
    UnknownRegister(String),
    #[error("register '{0}' declared twice")]
    DuplicateRegister(String),
    #[error("declaration of '{0}' after the first statement")]
    LateDeclaration(String),
    #[error("index {index} out of range for {register}[{size}]")]
    IndexOutOfRange {
        register: String,
        index: usize,
        size: usize,
    },
    #[error("unsupported version {0} (expected 3.0)")]
    Version(String),
    #[error("malformed if: {0}")]
    MalformedIf(String),
    #[error("{0}")]
    Circuit(CircuitError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct QasmError {
    pub line: usize,
    pub col: usize,
    pub kind: QasmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "'{s}'"),
            Tok::Sym(s) => write!(f, "'{s}'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<(Vec<Token>, (usize, usize)), QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(1, &mut i, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i, &mut col);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i, &mut col);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance(1, &mut i, &mut col);
            }
            out.push(Token {
                tok: Tok::Number(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
        } else {
            let sym = match c {
                '=' if chars.get(i + 1) == Some(&'=') => "==",
                '=' => "=",
                '[' => "[",
                ']' => "]",
                ';' => ";",
                ',' => ",",
                '(' => "(",
                ')' => ")",
                '{' => "{",
                '}' => "}",
                other => {
                    return Err(QasmError {
                        line: tl,
                        col: tc,
                        kind: QasmErrorKind::UnexpectedChar(other),
                    })
                }
            };
            advance(sym.len(), &mut i, &mut col);
            out.push(Token {
                tok: Tok::Sym(sym),
                line: tl,
                col: tc,
            });
        }
    }
    Ok((out, (line, col)))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn err_at(&self, tok: Option<&Token>, kind: QasmErrorKind) -> QasmError {
        let (line, col) = tok.map(|t| (t.line, t.col)).unwrap_or(self.eof);
        QasmError { line, col, kind }
    }

    fn here(&self, kind: QasmErrorKind) -> QasmError {
        self.err_at(self.toks.get(self.pos), kind)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self, expected: &str) -> Result<Token, QasmError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.here(QasmErrorKind::UnexpectedEof(expected.to_string()))),
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), QasmError> {
        let t = self.next(&format!("'{sym}'"))?;
        if t.tok == Tok::Sym(sym) {
            Ok(())
        } else {
            Err(self.err_at(
                Some(&t),
                QasmErrorKind::Expected {
                    expected: format!("'{sym}'"),
                    found: t.tok.to_string(),
                },
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), QasmError> {
        let t = self.next(what)?;
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => Err(self.err_at(
                Some(&t),
                QasmErrorKind::Expected {
                    expected: what.to_string(),
                    found: other.to_string(),
                },
            )),
        }
    }

    fn integer(&mut self) -> Result<(usize, Token), QasmError> {
        let t = self.next("an integer")?;
        match &t.tok {
            Tok::Number(s) if s.chars().all(|c| c.is_ascii_digit()) => match s.parse() {
                Ok(v) => Ok((v, t.clone())),
                Err(_) => Err(self.err_at(
                    Some(&t),
                    QasmErrorKind::Expected {
                        expected: "an integer".into(),
                        found: t.tok.to_string(),
                    },
                )),
            },
            other => Err(self.err_at(
                Some(&t),
                QasmErrorKind::Expected {
                    expected: "an integer".into(),
                    found: other.to_string(),
                },
            )),
        }
    }

    /// `name[index]`, returning name, index and the name token.
    fn indexed(&mut self, what: &str) -> Result<(String, usize, Token, Token), QasmError> {
        let (name, name_tok) = self.ident(what)?;
        self.expect_sym("[")?;
        let (idx, idx_tok) = self.integer()?;
        self.expect_sym("]")?;
        Ok((name, idx, name_tok, idx_tok))
    }
}

#[derive(Default)]
struct Registers {
    qubits: [Option<usize>; 3],
    bits: Option<usize>,
}

impl Registers {
    fn offset(&self, slot: usize) -> usize {
        self.qubits[..slot].iter().map(|s| s.unwrap_or(0)).sum()
    }

    fn total(&self) -> usize {
        self.offset(3)
    }

    fn roles(&self) -> Vec<Role> {
        ROLE_ORDER
            .iter()
            .zip(self.qubits)
            .flat_map(|(&r, s)| std::iter::repeat(r).take(s.unwrap_or(0)))
            .collect()
    }
}

struct Ctx {
    parser: Parser,
    regs: Registers,
}

impl Ctx {
    fn qubit(&mut self) -> Result<Qubit, QasmError> {
        let (name, idx, name_tok, idx_tok) = self.parser.indexed("a qubit register")?;
        let Some(slot) = ROLE_ORDER.iter().position(|&r| register_name(r) == name) else {
            return Err(self.parser.err_at(Some(&name_tok), QasmErrorKind::UnknownRegister(name)));
        };
        let Some(size) = self.regs.qubits[slot] else {
            return Err(self.parser.err_at(Some(&name_tok), QasmErrorKind::UnknownRegister(name)));
        };
        if idx >= size {
            return Err(self.parser.err_at(
                Some(&idx_tok),
                QasmErrorKind::IndexOutOfRange {
                    register: name,
                    index: idx,
                    size,
                },
            ));
        }
        Ok(Qubit(self.regs.offset(slot) + idx))
    }

    fn clbit(&mut self) -> Result<Clbit, QasmError> {
        let (name, idx, name_tok, idx_tok) = self.parser.indexed("a bit register")?;
        let size = match (name.as_str(), self.regs.bits) {
            (CLBIT_REGISTER, Some(size)) => size,
            _ => return Err(self.parser.err_at(Some(&name_tok), QasmErrorKind::UnknownRegister(name))),
        };
        if idx >= size {
            return Err(self.parser.err_at(
                Some(&idx_tok),
                QasmErrorKind::IndexOutOfRange {
                    register: name,
                    index: idx,
                    size,
                },
            ));
        }
        Ok(Clbit(idx))
    }

    /// Gate statement whose mnemonic token was already consumed.
    fn gate(&mut self, name: &str, name_tok: &Token) -> Result<Gate, QasmError> {
        let Some(kind) = GateKind::from_mnemonic(name) else {
            return Err(self
                .parser
                .err_at(Some(name_tok), QasmErrorKind::UnsupportedGate(name.to_string())));
        };
        let mut ops = vec![self.qubit()?];
        for _ in 1..kind.arity() {
            self.parser.expect_sym(",")?;
            ops.push(self.qubit()?);
        }
        self.parser.expect_sym(";")?;
        Gate::new(kind, &ops).map_err(|e| self.parser.err_at(Some(name_tok), QasmErrorKind::Circuit(e)))
    }
}

/// Parses text in the subset grammar back into a circuit.
pub fn parse(text: &str) -> Result<Circuit, QasmError> {
    let (toks, eof) = lex(text)?;
    let mut ctx = Ctx {
        parser: Parser { toks, pos: 0, eof },
        regs: Registers::default(),
    };

    let (word, tok) = ctx.parser.ident("'OPENQASM'")?;
    if word != "OPENQASM" {
        return Err(ctx.parser.err_at(
            Some(&tok),
            QasmErrorKind::Expected {
                expected: "'OPENQASM'".into(),
                found: format!("'{word}'"),
            },
        ));
    }
    let v = ctx.parser.next("a version number")?;
    if v.tok != Tok::Number("3.0".into()) && v.tok != Tok::Number("3".into()) {
        return Err(ctx.parser.err_at(Some(&v), QasmErrorKind::Version(v.tok.to_string())));
    }
    ctx.parser.expect_sym(";")?;

    // Declarations.
    while let Some(Tok::Ident(kw)) = ctx.parser.peek() {
        if kw != "qubit" && kw != "bit" {
            break;
        }
        let is_qubit = kw == "qubit";
        ctx.parser.pos += 1;
        ctx.parser.expect_sym("[")?;
        let (size, _) = ctx.parser.integer()?;
        ctx.parser.expect_sym("]")?;
        let (name, name_tok) = ctx.parser.ident("a register name")?;
        ctx.parser.expect_sym(";")?;
        let slot = if is_qubit {
            match ROLE_ORDER.iter().position(|&r| register_name(r) == name) {
                Some(s) => &mut ctx.regs.qubits[s],
                None => return Err(ctx.parser.err_at(Some(&name_tok), QasmErrorKind::UnknownRegister(name))),
            }
        } else if name == CLBIT_REGISTER {
            &mut ctx.regs.bits
        } else {
            return Err(ctx.parser.err_at(Some(&name_tok), QasmErrorKind::UnknownRegister(name)));
        };
        if slot.is_some() {
            return Err(ctx.parser.err_at(Some(&name_tok), QasmErrorKind::DuplicateRegister(name)));
        }
        *slot = Some(size);
    }

    let mut circuit = Circuit::new(ctx.regs.total(), ctx.regs.bits.unwrap_or(0), ctx.regs.roles())
        .map_err(|e| ctx.parser.here(QasmErrorKind::Circuit(e)))?;

    while ctx.parser.pos < ctx.parser.toks.len() {
        let start = ctx.parser.pos;
        let (word, tok) = ctx.parser.ident("a statement")?;
        let instr = match word.as_str() {
            "qubit" | "bit" => {
                return Err(ctx.parser.err_at(Some(&tok), QasmErrorKind::LateDeclaration(word)));
            }
            "reset" => {
                let q = ctx.qubit()?;
                ctx.parser.expect_sym(";")?;
                Instruction::Reset(q)
            }
            "if" => {
                let malformed = |p: &Parser, t: Option<&Token>, msg: &str| {
                    p.err_at(t, QasmErrorKind::MalformedIf(msg.to_string()))
                };
                ctx.parser
                    .expect_sym("(")
                    .map_err(|e| malformed(&ctx.parser, Some(&tok), &e.kind.to_string()))?;
                let clbit = ctx.clbit()?;
                ctx.parser.expect_sym("==")?;
                let (value, vt) = ctx.parser.integer()?;
                if value > 1 {
                    return Err(malformed(&ctx.parser, Some(&vt), "condition value must be 0 or 1"));
                }
                ctx.parser.expect_sym(")")?;
                ctx.parser.expect_sym("{")?;
                let (name, name_tok) = ctx.parser.ident("a gate")?;
                let gate = ctx.gate(&name, &name_tok)?;
                if ctx.parser.peek() != Some(&Tok::Sym("}")) {
                    let t = ctx.parser.toks.get(ctx.parser.pos).cloned();
                    return Err(malformed(&ctx.parser, t.as_ref(), "the body must be a single gate"));
                }
                ctx.parser.pos += 1;
                Instruction::Conditional {
                    clbit,
                    value: value == 1,
                    gate,
                }
            }
            _ if ctx.parser.peek() == Some(&Tok::Sym("[")) && word == CLBIT_REGISTER => {
                ctx.parser.pos = start;
                let clbit = ctx.clbit()?;
                ctx.parser.expect_sym("=")?;
                let (kw, kw_tok) = ctx.parser.ident("'measure'")?;
                if kw != "measure" {
                    return Err(ctx.parser.err_at(
                        Some(&kw_tok),
                        QasmErrorKind::Expected {
                            expected: "'measure'".into(),
                            found: format!("'{kw}'"),
                        },
                    ));
                }
                let qubit = ctx.qubit()?;
                ctx.parser.expect_sym(";")?;
                Instruction::Measure { qubit, clbit }
            }
            _ => Instruction::Unitary(ctx.gate(&word, &tok)?),
        };
        circuit
            .push(instr)
            .map_err(|e| ctx.parser.err_at(Some(&tok), QasmErrorKind::Circuit(e)))?;
    }
    Ok(circuit)
}
