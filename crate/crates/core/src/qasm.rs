//! OpenQASM 2.0 subset: a hand-written lexer and recursive-descent parser that
//! produces a [`Circuit`], and an emitter for compiled physical circuits.
//!
//! Accepted statements are `OPENQASM 2.0;`, `include "...";` (skipped), one
//! `qreg`, at most one `creg`, gate applications, `measure`, and `barrier`
//! (dropped). `cx`/`CX` is the only two-qubit gate. Gate definitions, `opaque`,
//! `reset` and classical control are rejected as unsupported.

use std::fmt::Write as _;

use crate::allocation::{CompiledCircuit, PhysicalGate};
use crate::circuit::{Circuit, Gate, LogicalQubit};
use crate::device::DeviceModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 14] = [
    "->", "==", ";", ",", "[", "]", "(", ")", "{", "}", "+", "-", "*", "/",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, col, message: String| Error::Syntax {
        line,
        column: col,
        message,
    };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (start_line, start_col) = (line, col);
            i += 2;
            col += 2;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(start_line, start_col, "unterminated comment".into())),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        col += 2;
                        break;
                    }
                    Some('\n') => {
                        i += 1;
                        line += 1;
                        col = 1;
                    }
                    Some(_) => {
                        i += 1;
                        col += 1;
                    }
                }
            }
            continue;
        }

        let (tok_line, tok_col) = (line, col);
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e' | 'E')) {
                let mut j = i + 1;
                if matches!(chars.get(j), Some('+' | '-')) {
                    j += 1;
                }
                if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            if real {
                Tok::Real(
                    text.parse()
                        .map_err(|_| syntax(tok_line, tok_col, format!("bad number '{text}'")))?,
                )
            } else {
                Tok::Int(
                    text.parse()
                        .map_err(|_| syntax(tok_line, tok_col, format!("integer '{text}' too large")))?,
                )
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(syntax(tok_line, tok_col, "unterminated string".into()));
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(sym) => {
                    i += sym.len();
                    Tok::Sym(sym)
                }
                None => return Err(syntax(tok_line, tok_col, format!("unexpected character '{c}'"))),
            }
        };
        col += i - start;
        out.push(Token {
            tok,
            line: tok_line,
            col: tok_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// A qubit or bit argument: `name` or `name[index]`.
struct Arg {
    name: String,
    index: Option<usize>,
    line: usize,
    col: usize,
}

struct Register {
    name: String,
    size: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    qreg: Option<Register>,
    creg: Option<Register>,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: tok.line,
            column: tok.col,
            message: message.into(),
        })
    }

    fn unsupported<T>(&self, tok: &Token, feature: impl Into<String>) -> Result<T> {
        Err(Error::Unsupported {
            line: tok.line,
            column: tok.col,
            feature: feature.into(),
        })
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<Token> {
        let t = self.next();
        if t.tok == Tok::Sym(sym) {
            Ok(t)
        } else {
            self.err(&t, format!("expected '{sym}', found {}", describe(&t.tok)))
        }
    }

    fn eat_sym(&mut self, sym: &'static str) -> bool {
        if self.peek().tok == Tok::Sym(sym) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token)> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(name) => Ok((name.clone(), t.clone())),
            other => self.err(&t, format!("expected identifier, found {}", describe(other))),
        }
    }

    fn expect_int(&mut self) -> Result<usize> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => usize::try_from(v).or_else(|_| self.err(&t, "integer out of range")),
            ref other => self.err(&t, format!("expected integer, found {}", describe(other))),
        }
    }

    fn program(mut self) -> Result<(Register, Option<Register>, Vec<Gate>)> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Real(v) if (2.0..3.0).contains(&v) => {}
                Tok::Int(2) => {}
                _ => return self.unsupported(&t, "only OpenQASM 2.0 is supported"),
            }
            self.expect_sym(";")?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        let eof = self.peek().clone();
        match self.qreg.take() {
            Some(q) => Ok((q, self.creg.take(), self.gates)),
            None => self.err(&eof, "program declares no qreg"),
        }
    }

    fn statement(&mut self) -> Result<()> {
        let (word, tok) = self.expect_ident()?;
        match word.as_str() {
            "include" => {
                let t = self.next();
                if !matches!(t.tok, Tok::Str(_)) {
                    return self.err(&t, "expected file name after include");
                }
                self.expect_sym(";")?;
            }
            "qreg" | "creg" => {
                let (name, _) = self.expect_ident()?;
                self.expect_sym("[")?;
                let size = self.expect_int()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                let slot = if word == "qreg" { &mut self.qreg } else { &mut self.creg };
                if slot.is_some() {
                    return self.unsupported(&tok, format!("multiple {word} declarations"));
                }
                *slot = Some(Register { name, size });
            }
            "barrier" => {
                self.args()?;
                self.expect_sym(";")?;
            }
            "measure" => {
                let q = self.arg()?;
                self.expect_sym("->")?;
                let c = self.arg()?;
                self.expect_sym(";")?;
                self.measure(q, c)?;
            }
            "if" => return self.unsupported(&tok, "classical control ('if')"),
            "gate" | "opaque" => return self.unsupported(&tok, format!("'{word}' definitions")),
            "reset" => return self.unsupported(&tok, "'reset'"),
            _ => self.gate_call(word, tok)?,
        }
        Ok(())
    }

    fn gate_call(&mut self, name: String, tok: Token) -> Result<()> {
        let mut params = Vec::new();
        if self.eat_sym("(")
            && !self.eat_sym(")") {
                loop {
                    params.push(self.expr()?);
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
        let args = self.args()?;
        self.expect_sym(";")?;
        if params.iter().any(|p: &f64| !p.is_finite()) {
            return self.err(&tok, "gate parameter is not finite");
        }

        match args.len() {
            1 => {
                let name = match name.as_str() {
                    "U" => "u3".to_string(),
                    _ => name,
                };
                let expected = match name.as_str() {
                    "u1" => Some(1),
                    "u2" => Some(2),
                    "u3" => Some(3),
                    "id" | "h" | "x" | "y" | "z" | "s" | "t" | "sdg" | "tdg" => Some(0),
                    _ => None,
                };
                if let Some(n) = expected {
                    if params.len() != n {
                        return self.err(&tok, format!("'{name}' takes {n} parameter(s), got {}", params.len()));
                    }
                }
                for target in self.qubits(&args[0])? {
                    self.gates.push(Gate::OneQubit {
                        name: name.clone(),
                        params: params.clone(),
                        target,
                    });
                }
            }
            2 if name == "cx" || name == "CX" => {
                if !params.is_empty() {
                    return self.err(&tok, "cx takes no parameters");
                }
                let control = self.single_qubit(&args[0])?;
                let target = self.single_qubit(&args[1])?;
                if control == target {
                    return self.err(&tok, "cx control and target must differ");
                }
                self.gates.push(Gate::TwoQubit {
                    name: "cx".to_string(),
                    control,
                    target,
                });
            }
            2 => return self.unsupported(&tok, format!("two-qubit gate '{name}' (only cx is supported)")),
            n => return self.unsupported(&tok, format!("{n}-qubit gate '{name}'")),
        }
        Ok(())
    }

    fn measure(&mut self, q: Arg, c: Arg) -> Result<()> {
        let qubits = self.qubits(&q)?;
        let creg = match &self.creg {
            Some(r) if r.name == c.name => r,
            _ => {
                return Err(Error::Syntax {
                    line: c.line,
                    column: c.col,
                    message: format!("undeclared classical register '{}'", c.name),
                })
            }
        };
        let bits: Vec<usize> = match c.index {
            Some(i) if i < creg.size => vec![i],
            Some(i) => {
                return Err(Error::Syntax {
                    line: c.line,
                    column: c.col,
                    message: format!("bit index {i} out of range for '{}[{}]'", creg.name, creg.size),
                })
            }
            None => (0..creg.size).collect(),
        };
        if bits.len() != qubits.len() {
            return Err(Error::Syntax {
                line: c.line,
                column: c.col,
                message: "measure operands have different sizes".into(),
            });
        }
        for (target, clbit) in qubits.into_iter().zip(bits) {
            self.gates.push(Gate::Measure { target, clbit });
        }
        Ok(())
    }

    fn qubits(&self, arg: &Arg) -> Result<Vec<LogicalQubit>> {
        let reg = match &self.qreg {
            Some(r) if r.name == arg.name => r,
            _ => {
                return Err(Error::Syntax {
                    line: arg.line,
                    column: arg.col,
                    message: format!("undeclared quantum register '{}'", arg.name),
                })
            }
        };
        match arg.index {
            Some(i) if i < reg.size => Ok(vec![LogicalQubit(i)]),
            Some(i) => Err(Error::Syntax {
                line: arg.line,
                column: arg.col,
                message: format!("qubit index {i} out of range for '{}[{}]'", reg.name, reg.size),
            }),
            None => Ok((0..reg.size).map(LogicalQubit).collect()),
        }
    }

    fn single_qubit(&self, arg: &Arg) -> Result<LogicalQubit> {
        let qs = self.qubits(arg)?;
        if arg.index.is_none() {
            return Err(Error::Unsupported {
                line: arg.line,
                column: arg.col,
                feature: "register broadcast on a two-qubit gate".into(),
            });
        }
        Ok(qs[0])
    }

    fn arg(&mut self) -> Result<Arg> {
        let (name, tok) = self.expect_ident()?;
        let index = if self.eat_sym("[") {
            let i = self.expect_int()?;
            self.expect_sym("]")?;
            Some(i)
        } else {
            None
        };
        Ok(Arg {
            name,
            index,
            line: tok.line,
            col: tok.col,
        })
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut args = vec![self.arg()?];
        while self.eat_sym(",") {
            args.push(self.arg()?);
        }
        Ok(args)
    }

    fn expr(&mut self) -> Result<f64> {
        let mut value = self.term()?;
        loop {
            if self.eat_sym("+") {
                value += self.term()?;
            } else if self.eat_sym("-") {
                value -= self.term()?;
            } else {
                return Ok(value);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut value = self.unary()?;
        loop {
            if self.eat_sym("*") {
                value *= self.unary()?;
            } else if self.eat_sym("/") {
                value /= self.unary()?;
            } else {
                return Ok(value);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat_sym("-") {
            return Ok(-self.unary()?);
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64> {
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => Ok(*v as f64),
            Tok::Real(v) => Ok(*v),
            Tok::Sym("(") => {
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            Tok::Ident(name) if name == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return self.unsupported(&t, format!("symbolic parameter '{name}'")),
                };
                self.expect_sym("(")?;
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(f(v))
            }
            other => self.err(&t, format!("expected expression, found {}", describe(other))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Int(v) => format!("'{v}'"),
        Tok::Real(v) => format!("'{v}'"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses OpenQASM 2.0 source. Qubits are numbered by their offset in the single `qreg`.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    parse_qasm_named(text, "")
}

pub fn parse_qasm_named(text: &str, source_name: &str) -> Result<Circuit> {
    let parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        qreg: None,
        creg: None,
        gates: Vec::new(),
    };
    let (qreg, creg, gates) = parser.program()?;
    Ok(Circuit {
        num_qubits: qreg.size,
        num_clbits: creg.map_or(0, |c| c.size),
        gates,
        source_name: source_name.to_string(),
    })
}

fn write_params(out: &mut String, params: &[f64]) {
    if params.is_empty() {
        return;
    }
    out.push('(');
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // `Display` for f64 is the shortest string that parses back to the same value.
        let _ = write!(out, "{p}");
    }
    out.push(')');
}

/// Writes a logical circuit back out as OpenQASM 2.0, gates in program order.
pub fn write_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits);
    if circuit.num_clbits > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits);
    }
    for gate in &circuit.gates {
        match gate {
            Gate::OneQubit { name, params, target } => {
                out.push_str(name);
                write_params(&mut out, params);
                let _ = writeln!(out, " q[{}];", target.0);
            }
            Gate::TwoQubit { name, control, target } => {
                let _ = writeln!(out, "{name} q[{}],q[{}];", control.0, target.0);
            }
            Gate::Measure { target, clbit } => {
                let _ = writeln!(out, "measure q[{}] -> c[{clbit}];", target.0);
            }
        }
    }
    out
}

/// Emits a compiled circuit as OpenQASM 2.0 over a register sized to the device.
/// SWAPs become three `cx` gates and measurements are written last.
pub fn emit_qasm(compiled: &CompiledCircuit, device: &DeviceModel) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", device.num_qubits());
    let num_clbits = compiled
        .measures
        .iter()
        .map(|&(_, c)| c + 1)
        .max()
        .unwrap_or(0)
        .max(compiled.num_clbits);
    if num_clbits > 0 {
        let _ = writeln!(out, "creg c[{num_clbits}];");
    }
    for gate in compiled.expanded_gates() {
        match gate {
            PhysicalGate::OneQubit { name, params, qubit } => {
                out.push_str(&name);
                write_params(&mut out, &params);
                let _ = writeln!(out, " q[{qubit}];");
            }
            PhysicalGate::TwoQubit { name, control, target } => {
                let _ = writeln!(out, "{name} q[{control}],q[{target}];");
            }
            PhysicalGate::Swap { .. } => unreachable!("expanded_gates removes swaps"),
        }
    }
    for &(qubit, clbit) in &compiled.measures {
        let _ = writeln!(out, "measure q[{qubit}] -> c[{clbit}];");
    }
    out
}
