//! The line-oriented `.bn` text format.
//!
//! ```text
//! name: chain
//! # comments run to end of line
//! u1 : input
//! x1 = u1
//! x2 = !x1 & (u1 | x2)
//! ```
//!
//! Probabilistic networks wrap update lines in `mode p=<float> { … }` blocks.
//! Updates written outside any block are shared by every mode unless a mode
//! redefines them. Operator precedence, tightest first: `!`, `&`, `^`, `|`.

use crate::error::{Error, Result};
use crate::logic::{bits_of, BooleanFunction};
use crate::network::{BooleanNetwork, NodeId, NodeKind, ProbabilisticBooleanNetwork, Update, DEFAULT_ARITY_CAP};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedNetwork {
    Bn(BooleanNetwork),
    Pbn(ProbabilisticBooleanNetwork),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub network: ParsedNetwork,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Const(bool),
    Var(NodeId),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn vars(&self, out: &mut Vec<NodeId>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Not(a) => a.vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn eval(&self, env: &dyn Fn(NodeId) -> bool) -> bool {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => env(*v),
            Expr::Not(a) => !a.eval(env),
            Expr::And(a, b) => a.eval(env) && b.eval(env),
            Expr::Or(a, b) => a.eval(env) || b.eval(env),
            Expr::Xor(a, b) => a.eval(env) ^ b.eval(env),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    LParen,
    RParen,
}

struct ExprParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    _src: &'a str,
}

fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = vec![];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        match c {
            ' ' | '\t' | '\r' => {}
            '!' => toks.push((Tok::Not, col)),
            '&' => toks.push((Tok::And, col)),
            '|' => toks.push((Tok::Or, col)),
            '^' => toks.push((Tok::Xor, col)),
            '(' => toks.push((Tok::LParen, col)),
            ')' => toks.push((Tok::RParen, col)),
            '0' | '1' if !chars.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric()) => {
                toks.push((Tok::Const(c == '1'), col))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + 1 < chars.len() && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..=i].iter().collect()), col));
            }
            _ => return Err(Error::Syntax { line, column: col, message: format!("unexpected character `{c}`") }),
        }
        i += 1;
    }
    Ok(toks)
}

fn node_of(name: &str) -> Option<NodeId> {
    let (kind, rest) = match name.as_bytes().first()? {
        b'x' => (NodeKind::State, &name[1..]),
        b'u' => (NodeKind::Generator, &name[1..]),
        _ => return None,
    };
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    Some(NodeId { kind, index: rest.parse().ok()? })
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn err(&self, message: &str) -> Error {
        Error::Syntax { line: self.line, column: self.col(), message: message.to_string() }
    }

    fn parse(mut self) -> Result<Expr> {
        let e = self.or()?;
        if self.pos != self.toks.len() {
            return Err(self.err("unexpected token after expression"));
        }
        Ok(e)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.xor()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Expr::Or(Box::new(lhs), Box::new(self.xor()?));
        }
        Ok(lhs)
    }

    fn xor(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Xor) {
            self.pos += 1;
            lhs = Expr::Xor(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Expr::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Const(c)) => {
                self.pos += 1;
                Ok(Expr::Const(c))
            }
            Some(Tok::Ident(name)) => {
                let node = node_of(&name).ok_or_else(|| self.err(&format!("`{name}` is not a node name (x<k> or u<k>)")))?;
                self.pos += 1;
                Ok(Expr::Var(node))
            }
            _ => Err(self.err("expected an operand")),
        }
    }
}

struct Definition {
    expr: Expr,
    line: usize,
}

/// Parses with the default arity cap.
pub fn parse_network(text: &str) -> Result<Parsed> {
    parse_network_with_cap(text, DEFAULT_ARITY_CAP)
}

pub fn parse_network_with_cap(text: &str, arity_cap: usize) -> Result<Parsed> {
    let mut name = String::new();
    let mut inputs: BTreeMap<usize, usize> = BTreeMap::new();
    let mut shared: BTreeMap<usize, Definition> = BTreeMap::new();
    let mut modes: Vec<(f64, BTreeMap<usize, Definition>, usize)> = vec![];
    let mut open_mode = false;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len() + 1;
        if trimmed == "}" {
            if !open_mode {
                return Err(Error::Syntax { line: line_no, column: indent, message: "unmatched `}`".into() });
            }
            open_mode = false;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("mode") {
            if open_mode {
                return Err(Error::Syntax { line: line_no, column: indent, message: "nested mode block".into() });
            }
            let rest = rest.trim();
            let body = rest
                .strip_prefix("p")
                .map(str::trim_start)
                .and_then(|r| r.strip_prefix('='))
                .and_then(|r| r.trim_end().strip_suffix('{'))
                .ok_or_else(|| Error::Syntax {
                    line: line_no,
                    column: indent,
                    message: "expected `mode p=<probability> {`".into(),
                })?;
            let p: f64 = body.trim().parse().map_err(|_| Error::Syntax {
                line: line_no,
                column: indent,
                message: format!("invalid probability `{}`", body.trim()),
            })?;
            modes.push((p, BTreeMap::new(), line_no));
            open_mode = true;
            continue;
        }
        if let Some((lhs, rhs)) = trimmed.split_once('=') {
            let lhs = lhs.trim();
            let target = node_of(lhs).filter(|n| n.kind == NodeKind::State).ok_or_else(|| Error::Syntax {
                line: line_no,
                column: indent,
                message: format!("`{lhs}` is not a state node name (x<k>)"),
            })?;
            let rhs_col = line.find('=').map_or(1, |p| p + 2);
            let toks = tokenize(rhs, line_no, rhs_col)?;
            let expr = ExprParser { toks, pos: 0, line: line_no, end_col: line.len() + 1, _src: rhs }.parse()?;
            let scope = if open_mode { &mut modes.last_mut().expect("open mode").1 } else { &mut shared };
            if scope.contains_key(&target.index) {
                return Err(Error::DuplicateDefinition { line: line_no, name: lhs.to_string() });
            }
            scope.insert(target.index, Definition { expr, line: line_no });
            continue;
        }
        if let Some((lhs, rhs)) = trimmed.split_once(':') {
            let lhs = lhs.trim();
            if lhs == "name" && !open_mode {
                name = rhs.trim().to_string();
                continue;
            }
            if rhs.trim() == "input" {
                let node = node_of(lhs).filter(|n| n.kind == NodeKind::Generator).ok_or_else(|| Error::Syntax {
                    line: line_no,
                    column: indent,
                    message: format!("`{lhs}` is not an input name (u<k>)"),
                })?;
                if inputs.insert(node.index, line_no).is_some() {
                    return Err(Error::DuplicateDefinition { line: line_no, name: lhs.to_string() });
                }
                continue;
            }
        }
        return Err(Error::Syntax { line: line_no, column: indent, message: "unrecognized line".into() });
    }
    if open_mode {
        let line = text.lines().count();
        return Err(Error::Syntax { line, column: 1, message: "unterminated mode block".into() });
    }

    let mut states: Vec<usize> = shared.keys().copied().collect();
    for (_, defs, _) in &modes {
        states.extend(defs.keys().copied());
    }
    states.sort_unstable();
    states.dedup();
    let generators: Vec<usize> = inputs.keys().copied().collect();
    let mut warnings = vec![];

    let compile = |defs: &BTreeMap<usize, Definition>, warnings: &mut Vec<String>| -> Result<BooleanNetwork> {
        let mut updates = Vec::with_capacity(states.len());
        for &k in &states {
            let def = defs.get(&k).or_else(|| shared.get(&k)).ok_or_else(|| {
                Error::invalid(format!("x{k} is not defined in every mode"))
            })?;
            updates.push(compile_update(k, def, &states, &inputs, arity_cap)?);
        }
        let (net, w) = BooleanNetwork::build(&name, states.clone(), generators.clone(), updates)?;
        warnings.extend(w);
        Ok(net)
    };

    let network = if modes.is_empty() {
        ParsedNetwork::Bn(compile(&shared, &mut warnings)?)
    } else {
        let mut nets = vec![];
        let mut probs = vec![];
        for (p, defs, _) in &modes {
            nets.push(compile(defs, &mut warnings)?);
            probs.push(*p);
        }
        ParsedNetwork::Pbn(ProbabilisticBooleanNetwork::new(&name, nets, probs)?)
    };
    warnings.sort();
    warnings.dedup();
    Ok(Parsed { network, warnings })
}

fn compile_update(
    target: usize,
    def: &Definition,
    states: &[usize],
    inputs: &BTreeMap<usize, usize>,
    arity_cap: usize,
) -> Result<Update> {
    let mut args = vec![];
    def.expr.vars(&mut args);
    args.sort_unstable();
    args.dedup();
    for a in &args {
        let known = match a.kind {
            NodeKind::Generator => inputs.contains_key(&a.index),
            NodeKind::State => states.binary_search(&a.index).is_ok(),
        };
        if !known {
            return Err(Error::UndefinedVariable { line: def.line, name: a.to_string() });
        }
    }
    if args.len() > arity_cap {
        return Err(Error::ArityCap { node: format!("x{target}"), arity: args.len(), cap: arity_cap });
    }
    let d = args.len();
    let table = (0..1usize << d)
        .map(|s| {
            let bits = bits_of(d, s);
            def.expr.eval(&|v| bits[args.binary_search(&v).expect("collected variable")])
        })
        .collect();
    Ok(Update::new(args, BooleanFunction::new(d, table)?))
}

fn expr_text(up: &Update) -> String {
    let names: Vec<String> = up.args.iter().map(NodeId::name).collect();
    up.function.to_dnf(&names)
}

fn header(out: &mut String, name: &str, generators: &[usize]) {
    if !name.is_empty() {
        out.push_str(&format!("name: {name}\n"));
    }
    for g in generators {
        out.push_str(&format!("u{g} : input\n"));
    }
}

pub fn serialize_network(net: &BooleanNetwork) -> String {
    let mut out = String::new();
    header(&mut out, &net.name, net.generator_indices());
    for (k, up) in net.state_indices().iter().zip(net.updates()) {
        out.push_str(&format!("x{k} = {}\n", expr_text(up)));
    }
    out
}

pub fn serialize_pbn(pbn: &ProbabilisticBooleanNetwork) -> String {
    let mut out = String::new();
    header(&mut out, &pbn.name, pbn.modes()[0].generator_indices());
    for (mode, p) in pbn.modes().iter().zip(pbn.probabilities()) {
        out.push_str(&format!("mode p={p} {{\n"));
        for (k, up) in mode.state_indices().iter().zip(mode.updates()) {
            out.push_str(&format!("  x{k} = {}\n", expr_text(up)));
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bn(text: &str) -> (BooleanNetwork, Vec<String>) {
        let parsed = parse_network(text).unwrap();
        match parsed.network {
            ParsedNetwork::Bn(net) => (net, parsed.warnings),
            ParsedNetwork::Pbn(_) => panic!("expected a BN"),
        }
    }

    #[test]
    fn minimal_chain() {
        let (net, _) = bn("u1:input\nx1 = u1\nx2 = x1");
        assert_eq!((net.n(), net.m()), (2, 1));
        assert_eq!(net.wiring_graph().num_edges(), 2);
    }

    #[test]
    fn contradiction_becomes_constant() {
        let (net, warnings) = bn("x1 = x1 & !x1");
        assert!(net.updates()[0].args.is_empty());
        assert_eq!(net.updates()[0].function.is_constant(), Some(false));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn absorbed_argument_has_no_edge() {
        let (net, _) = bn("x1 = x2 | (x2 & x3)\nx2 = x2\nx3 = x3");
        assert_eq!(net.updates()[0].args, vec![NodeId::state(2)]);
    }

    #[test]
    fn precedence() {
        let (net, _) = bn("x1 = x1 | x2 & !x3 ^ x3\nx2 = x2\nx3 = x3");
        let f = &net.updates()[0].function;
        for s in 0..8 {
            let b = bits_of(3, s);
            assert_eq!(f.eval(&b), b[0] | ((b[1] & !b[2]) ^ b[2]));
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_network("x1 = x2 &"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_network("x1 = x9"), Err(Error::UndefinedVariable { .. })));
        assert!(matches!(parse_network("x1 = 1\nx1 = 0"), Err(Error::DuplicateDefinition { line: 2, .. })));
        assert!(matches!(parse_network("x1 = u1"), Err(Error::UndefinedVariable { .. })));
        let p = "mode p=0.5 {\nx1 = 1\n}\nmode p=0.4 {\nx1 = 0\n}";
        assert!(matches!(parse_network(p), Err(Error::Probability { .. })));
        assert!(parse_network("x1 = x1 & x2\nx2 = 1").is_ok());
        assert!(matches!(
            parse_network_with_cap("x1 = x1 & x2\nx2 = 1", 1),
            Err(Error::ArityCap { .. })
        ));
    }

    #[test]
    fn pbn_with_shared_updates() {
        let text = "x2 = x1\nmode p=0.5 {\n  x1 = x1\n}\nmode p=0.5 {\n  x1 = !x1\n}\n";
        let parsed = parse_network(text).unwrap();
        let ParsedNetwork::Pbn(pbn) = parsed.network else { panic!() };
        assert_eq!(pbn.modes().len(), 2);
        assert_eq!(pbn.modes()[1].updates()[1], pbn.modes()[0].updates()[1]);
        let again = parse_network(&pbn.to_bn_string()).unwrap();
        assert_eq!(again.network, ParsedNetwork::Pbn(pbn));
    }

    #[test]
    fn serialize_roundtrip() {
        let (net, _) = bn("name: t\nu1 : input\nu2 : input\nx1 = (u1 ^ x2) | !x1\nx2 = x1 & u2\nx3 = 1");
        let (again, _) = bn(&net.to_bn_string());
        assert_eq!(again, net);
    }
}
