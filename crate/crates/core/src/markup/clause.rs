//! A reader for the operator-free subset of ISO Prolog needed to find clause
//! heads and body goals.
//!
//! The standard operator table (plus the usual CLP(FD) constraint
//! operators) is fixed; `op/3` declarations are not honoured, and an unknown
//! operator in infix position is reported as `UNSUPPORTED_SYNTAX`.
//! A `^REL_ID` suffix after a body goal is that goal's definition reference.

use std::ops::Range;

use super::lexer::{tokenize, Tok, Token};
use crate::diag::{Code, Diagnostic};
use crate::model::{Clause, Goal, PredicateIndicator, RelId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Assoc {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
}

fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    use Assoc::*;
    Some(match name {
        ":-" | "-->" => (1200, Xfx),
        ";" | "|" => (1100, Xfy),
        "->" | "*->" => (1050, Xfy),
        "," => (1000, Xfy),
        "#<==>" => (760, Yfx),
        "#==>" | "#<==" => (750, Xfy),
        "#\\/" => (740, Yfx),
        "#\\" => (730, Yfx),
        "#/\\" => (720, Yfx),
        "=" | "\\=" | "==" | "\\==" | "@<" | "@>" | "@=<" | "@>=" | "=.." | "is" | "=:=" | "=\\="
        | "<" | ">" | "=<" | ">=" | "as" | ">:<" | ":<" | "#=" | "#\\=" | "#<" | "#>" | "#=<"
        | "#>=" | "in" | "ins" => (700, Xfx),
        ":" => (200, Xfy),
        "+" | "-" | "/\\" | "\\/" | "xor" => (500, Yfx),
        ".." => (500, Xfx),
        "*" | "/" | "//" | "rem" | "mod" | "div" | "<<" | ">>" | "divmod" | "rdiv" => (400, Yfx),
        "**" => (200, Xfx),
        "^" => (200, Xfy),
        _ => return None,
    })
}

fn prefix_op(name: &str) -> Option<(u32, Assoc)> {
    use Assoc::*;
    Some(match name {
        ":-" | "?-" => (1200, Fx),
        "dynamic" | "discontiguous" | "initialization" | "multifile" | "module_transparent"
        | "meta_predicate" | "table" => (1150, Fx),
        "\\+" => (900, Fy),
        "#\\" => (710, Fy),
        "-" | "+" | "\\" => (200, Fy),
        _ => return None,
    })
}

#[derive(Debug, Clone)]
enum Kind {
    Var,
    Atom(String),
    Number,
    Str,
    Compound(String, Vec<Term>),
    List(Vec<Term>),
    Curly(Box<Term>),
    /// A term followed by a `^REL_ID` suffix.
    Annotated(Box<Term>, String, Range<usize>),
}

#[derive(Debug, Clone)]
struct Term {
    kind: Kind,
    span: Range<usize>,
}

#[derive(Debug)]
struct ParseError {
    offset: usize,
    code: Code,
    message: String,
}

fn perr(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        offset,
        code: Code::Syntax,
        message: message.into(),
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    /// Offset reported when the clause ends unexpectedly.
    eof: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<&'t Token, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .ok_or_else(|| perr(self.eof, "unexpected end of clause"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_punct(&mut self, c: char, what: &str) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Punct(p),
                span,
                ..
            }) if *p == c => {
                self.pos += 1;
                Ok(span.end)
            }
            Some(t) => Err(perr(t.span.start, format!("expected `{c}` {what}"))),
            None => Err(perr(self.eof, format!("expected `{c}` {what}"))),
        }
    }

    /// Whether the next token can begin a term (used to tell a prefix
    /// operator from an atom).
    fn starts_term(&self) -> bool {
        match self.peek().map(|t| &t.tok) {
            None | Some(Tok::End) | Some(Tok::DefRef(_)) => false,
            Some(Tok::Punct(c)) => matches!(c, '(' | '[' | '{'),
            Some(Tok::Name(n)) => infix_op(n).is_none() || prefix_op(n).is_some(),
            _ => true,
        }
    }

    fn arglist(&mut self) -> Result<(Vec<Term>, usize), ParseError> {
        let mut args = vec![self.parse(999)?.0];
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Punct(',')) => {
                    self.pos += 1;
                    args.push(self.parse(999)?.0);
                }
                _ => {
                    let end = self.expect_punct(')', "to close the argument list")?;
                    return Ok((args, end));
                }
            }
        }
    }

    fn primary(&mut self, max: u32) -> Result<(Term, u32), ParseError> {
        let t = self.next()?;
        let start = t.span.start;
        let leaf = |kind| Ok((Term { kind, span: t.span.clone() }, 0));
        match &t.tok {
            Tok::Var(_) => leaf(Kind::Var),
            Tok::Number => leaf(Kind::Number),
            Tok::Str => leaf(Kind::Str),
            Tok::Punct('(') => {
                let (inner, _) = self.parse(1200)?;
                let end = self.expect_punct(')', "to close the parenthesis")?;
                Ok((Term { kind: inner.kind, span: start..end }, 0))
            }
            Tok::Punct('[') => {
                if let Some(Token { tok: Tok::Punct(']'), span, .. }) = self.peek() {
                    self.pos += 1;
                    return Ok((Term { kind: Kind::Atom("[]".into()), span: start..span.end }, 0));
                }
                let mut items = vec![self.parse(999)?.0];
                loop {
                    match self.peek().map(|t| &t.tok) {
                        Some(Tok::Punct(',')) => {
                            self.pos += 1;
                            items.push(self.parse(999)?.0);
                        }
                        Some(Tok::Punct('|')) => {
                            self.pos += 1;
                            items.push(self.parse(999)?.0);
                            break;
                        }
                        _ => break,
                    }
                }
                let end = self.expect_punct(']', "to close the list")?;
                Ok((Term { kind: Kind::List(items), span: start..end }, 0))
            }
            Tok::Punct('{') => {
                if let Some(Token { tok: Tok::Punct('}'), span, .. }) = self.peek() {
                    self.pos += 1;
                    return Ok((Term { kind: Kind::Atom("{}".into()), span: start..span.end }, 0));
                }
                let (inner, _) = self.parse(1200)?;
                let end = self.expect_punct('}', "to close the braces")?;
                Ok((Term { kind: Kind::Curly(Box::new(inner)), span: start..end }, 0))
            }
            Tok::Punct(c) => Err(perr(start, format!("unexpected `{c}`"))),
            Tok::DefRef(id) => Err(perr(
                start,
                format!("definition reference `^{id}` must follow a goal"),
            )),
            Tok::End => Err(perr(start, "unexpected end of clause")),
            Tok::Name(name) => {
                if let Some(Token { tok: Tok::Punct('('), layout_before: false, .. }) = self.peek() {
                    self.pos += 1;
                    let (args, end) = self.arglist()?;
                    return Ok((
                        Term { kind: Kind::Compound(name.clone(), args), span: start..end },
                        0,
                    ));
                }
                if name == "-" || name == "+" {
                    if let Some(Token { tok: Tok::Number, layout_before: false, span }) = self.peek() {
                        let end = span.end;
                        self.pos += 1;
                        return Ok((Term { kind: Kind::Number, span: start..end }, 0));
                    }
                }
                if let Some((p, assoc)) = prefix_op(name) {
                    if self.starts_term() && p <= max {
                        let arg_max = if assoc == Assoc::Fy { p } else { p - 1 };
                        let (arg, _) = self.parse(arg_max)?;
                        let span = start..arg.span.end;
                        return Ok((Term { kind: Kind::Compound(name.clone(), vec![arg]), span }, p));
                    }
                }
                leaf(Kind::Atom(name.clone()))
            }
        }
    }

    fn parse(&mut self, max: u32) -> Result<(Term, u32), ParseError> {
        let (mut left, mut left_prec) = self.primary(max)?;
        loop {
            let Some(t) = self.peek() else { break };
            let name = match &t.tok {
                Tok::Punct(',') => ",".to_owned(),
                Tok::Punct('|') => "|".to_owned(),
                Tok::Name(n) => n.clone(),
                Tok::DefRef(id) => {
                    if max >= 999 && left_prec <= 999 {
                        self.pos += 1;
                        let span = left.span.start..t.span.end;
                        left = Term {
                            kind: Kind::Annotated(Box::new(left), id.clone(), t.span.clone()),
                            span,
                        };
                        left_prec = 999;
                        continue;
                    }
                    break;
                }
                Tok::Var(_) | Tok::Number | Tok::Str => {
                    return Err(perr(t.span.start, "expected an operator or the end of the clause"))
                }
                _ => break,
            };
            let Some((p, assoc)) = infix_op(&name) else {
                if matches!(t.tok, Tok::Name(_)) {
                    return Err(ParseError {
                        offset: t.span.start,
                        code: Code::UnsupportedSyntax,
                        message: format!("unknown operator `{name}`"),
                    });
                }
                break;
            };
            let (left_max, right_max) = match assoc {
                Assoc::Xfx => (p - 1, p - 1),
                Assoc::Xfy => (p - 1, p),
                _ => (p, p - 1),
            };
            if p > max || left_prec > left_max {
                break;
            }
            self.pos += 1;
            let (right, _) = self.parse(right_max)?;
            let span = left.span.start..right.span.end;
            let functor = if name == "|" { ";".to_owned() } else { name };
            left = Term { kind: Kind::Compound(functor, vec![left, right]), span };
            left_prec = p;
        }
        Ok((left, left_prec))
    }
}

fn is_control(t: &Term) -> bool {
    matches!(&t.kind, Kind::Compound(n, a) if a.len() == 2 && matches!(n.as_str(), "," | ";" | "->" | "*->"))
}

fn negated(t: &Term) -> Option<&Term> {
    match &t.kind {
        Kind::Compound(n, a) if n == "\\+" && a.len() == 1 => Some(&a[0]),
        _ => None,
    }
}

/// Reports any definition reference buried inside a data term.
fn no_defrefs(t: &Term, errs: &mut Vec<ParseError>) {
    match &t.kind {
        Kind::Annotated(_, id, span) => errs.push(perr(
            span.start,
            format!("definition reference `^{id}` is only allowed after a body goal"),
        )),
        Kind::Compound(_, args) | Kind::List(args) => args.iter().for_each(|a| no_defrefs(a, errs)),
        Kind::Curly(inner) => no_defrefs(inner, errs),
        _ => {}
    }
}

fn goal_of(t: &Term, def: Option<(&str, &Range<usize>)>, out: &mut Vec<Goal>, errs: &mut Vec<ParseError>) {
    let indicator = match &t.kind {
        Kind::Atom(n) => PredicateIndicator::new(n.clone(), 0),
        Kind::Compound(n, args) => {
            args.iter().for_each(|a| no_defrefs(a, errs));
            PredicateIndicator::new(n.clone(), args.len() as u32)
        }
        Kind::Var | Kind::List(_) | Kind::Curly(_) if def.is_none() => return,
        _ => {
            errs.push(perr(t.span.start, "goal is not callable"));
            return;
        }
    };
    out.push(Goal {
        indicator,
        def_ref: def.map(|(id, _)| RelId::from(id)),
        span: t.span.clone(),
        def_ref_span: def.map(|(_, s)| s.clone()),
    });
}

fn collect_goals(t: &Term, out: &mut Vec<Goal>, errs: &mut Vec<ParseError>) {
    if is_control(t) {
        if let Kind::Compound(_, args) = &t.kind {
            collect_goals(&args[0], out, errs);
            collect_goals(&args[1], out, errs);
        }
        return;
    }
    if let Some(inner) = negated(t) {
        collect_goals(inner, out, errs);
        return;
    }
    match &t.kind {
        Kind::Annotated(inner, id, span) => {
            let mut target: &Term = inner;
            while let Some(g) = negated(target) {
                target = g;
            }
            if is_control(target) || matches!(target.kind, Kind::Annotated(..)) {
                errs.push(perr(
                    span.start,
                    format!("definition reference `^{id}` must follow a single goal"),
                ));
                return;
            }
            goal_of(target, Some((id, span)), out, errs);
        }
        Kind::Atom(n) if n == "!" => {}
        _ => goal_of(t, None, out, errs),
    }
}

fn head_of(t: &Term, errs: &mut Vec<ParseError>) -> Option<PredicateIndicator> {
    match &t.kind {
        Kind::Atom(n) => Some(PredicateIndicator::new(n.clone(), 0)),
        Kind::Compound(n, args) => {
            args.iter().for_each(|a| no_defrefs(a, errs));
            Some(PredicateIndicator::new(n.clone(), args.len() as u32))
        }
        Kind::Annotated(_, _, span) => {
            errs.push(perr(span.start, "a clause head cannot carry a definition reference"));
            None
        }
        _ => {
            errs.push(perr(t.span.start, "clause head is not callable"));
            None
        }
    }
}

fn clause_of(term: Term, src: &str, span: Range<usize>, errs: &mut Vec<ParseError>) -> Option<Clause> {
    let before = errs.len();
    let mut body = Vec::new();
    let head = match &term.kind {
        Kind::Compound(n, a) if n == ":-" && a.len() == 2 => {
            let h = head_of(&a[0], errs);
            collect_goals(&a[1], &mut body, errs);
            Some(h)
        }
        Kind::Compound(n, a) if (n == ":-" || n == "?-") && a.len() == 1 => {
            collect_goals(&a[0], &mut body, errs);
            if body.is_empty() && errs.len() == before {
                errs.push(perr(term.span.start, "directive has no goal"));
            }
            None
        }
        Kind::Compound(n, a) if n == "-->" && a.len() == 2 => {
            errs.push(ParseError {
                offset: term.span.start,
                code: Code::UnsupportedSyntax,
                message: "grammar rules (`-->`) are not supported".into(),
            });
            None
        }
        _ => Some(head_of(&term, errs)),
    };
    if errs.len() > before {
        return None;
    }
    Some(Clause {
        head: head.flatten(),
        body,
        raw_text: src[span.clone()].to_owned(),
        span,
    })
}

/// 1-based line and column (in characters) of byte `offset` in `src`.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    (line, before[line_start..].chars().count() + 1)
}

fn to_diag(src: &str, e: ParseError) -> Diagnostic {
    let (line, col) = line_col(src, e.offset);
    Diagnostic::new(e.code, e.message).offset(e.offset).at(line, col)
}

/// Reads the clauses of a packet.
///
/// Conjunctions, disjunctions, if-then(-else) and negation are flattened
/// into each clause's goal list in textual order. Diagnostic positions are
/// relative to `text`.
pub fn parse_clauses(text: &str) -> Result<Vec<Clause>, Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|e| {
        let code = if e.unsupported { Code::UnsupportedSyntax } else { Code::Syntax };
        let (line, col) = line_col(text, e.offset);
        vec![Diagnostic::new(code, e.message).offset(e.offset).at(line, col)]
    })?;
    let mut clauses = Vec::new();
    let mut errs = Vec::new();
    let mut start = 0;
    while start < toks.len() {
        let end = toks[start..].iter().position(|t| t.tok == Tok::End).map(|i| start + i);
        let Some(end) = end else {
            let last = toks.last().map_or(text.len(), |t| t.span.end);
            errs.push(perr(last, "missing terminating period"));
            break;
        };
        let slice = &toks[start..end];
        let span = toks[start].span.start..toks[end].span.end;
        let mut p = Parser {
            toks: slice,
            pos: 0,
            eof: toks[end].span.start,
        };
        match p.parse(1200) {
            Ok((term, _)) => {
                if let Some(t) = p.peek() {
                    errs.push(perr(t.span.start, "unexpected text before the end of the clause"));
                } else if let Some(c) = clause_of(term, text, span, &mut errs) {
                    clauses.push(c);
                }
            }
            Err(e) => errs.push(e),
        }
        start = end + 1;
    }
    if errs.is_empty() {
        Ok(clauses)
    } else {
        Err(errs.into_iter().map(|e| to_diag(text, e)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goals(src: &str) -> Vec<(String, Option<String>)> {
        parse_clauses(src).unwrap()[0]
            .body
            .iter()
            .map(|g| (g.indicator.to_string(), g.def_ref.as_ref().map(ToString::to_string)))
            .collect()
    }

    #[test]
    fn linked_body_goals() {
        let cs = parse_clauses("a(X) :- b(X,Y)^Rb, c(Y)^Rc.").unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].head, Some(PredicateIndicator::new("a", 1)));
        assert_eq!(
            goals("a(X) :- b(X,Y)^Rb, c(Y)^Rc."),
            [("b/2".into(), Some("Rb".into())), ("c/1".into(), Some("Rc".into()))]
        );
    }

    #[test]
    fn fact() {
        let cs = parse_clauses("p.").unwrap();
        assert_eq!(cs[0].head, Some(PredicateIndicator::new("p", 0)));
        assert!(cs[0].body.is_empty());
    }

    #[test]
    fn direct_recursion_has_no_def_ref() {
        assert_eq!(goals("a(s(X)) :- a(X)."), [("a/1".into(), None)]);
    }

    #[test]
    fn control_constructs_flatten_in_order() {
        let g = goals("p(X) :- ( q(X)^Q -> r ; \\+ s(X)^S ), !, X > 1, t(X) | u.");
        let names: Vec<&str> = g.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["q/1", "r/0", "s/1", ">/2", "t/1", "u/0"]);
        assert_eq!(g[2].1.as_deref(), Some("S"));
    }

    #[test]
    fn negation_before_annotation() {
        let cs = parse_clauses("p :- \\+ q^Q.").unwrap();
        let g = &cs[0].body[0];
        assert_eq!(g.indicator.to_string(), "q/0");
        assert_eq!(g.def_ref.as_ref().unwrap(), "Q");
        assert_eq!(&cs[0].raw_text[g.def_ref_span.clone().unwrap()], "^Q");
    }

    #[test]
    fn operators_and_data_terms() {
        let g = goals("p(X, L) :- X is 2 ** 3 + -1, L = [a, b | T], length(T, N), N #= X * 2, {x}.");
        let names: Vec<&str> = g.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["is/2", "=/2", "length/2", "#=/2"]);
    }

    #[test]
    fn directives() {
        let cs = parse_clauses(":- dynamic counter/1.\n:- initialization(main)^Rm.").unwrap();
        assert!(cs.iter().all(Clause::is_directive));
        assert_eq!(cs[0].body[0].indicator.to_string(), "dynamic/1");
        assert_eq!(cs[1].body[0].def_ref.as_ref().unwrap(), "Rm");
    }

    #[test]
    fn raw_text_spans_cover_clauses() {
        let src = "% lead\na.  \n b :- a^A. /* gap */ c.";
        let cs = parse_clauses(src).unwrap();
        assert_eq!(cs.len(), 3);
        for c in &cs {
            assert_eq!(&src[c.span.clone()], c.raw_text);
        }
        assert_eq!(cs[1].raw_text, "b :- a^A.");
    }

    #[test]
    fn missing_period() {
        let d = parse_clauses("a :- b").unwrap_err();
        assert_eq!(d[0].code, Code::Syntax);
        assert!(d[0].message.contains("period"));
    }

    #[test]
    fn unbalanced() {
        let d = parse_clauses("a :- b(c.").unwrap_err();
        assert_eq!(d[0].code, Code::Syntax);
        let d = parse_clauses("a :- b).").unwrap_err();
        assert_eq!(d[0].code, Code::Syntax);
    }

    #[test]
    fn user_operators_are_unsupported() {
        let d = parse_clauses("a :- x ===> y.").unwrap_err();
        assert_eq!(d[0].code, Code::UnsupportedSyntax);
        let d = parse_clauses("s --> [a].").unwrap_err();
        assert_eq!(d[0].code, Code::UnsupportedSyntax);
    }

    #[test]
    fn misplaced_def_refs() {
        assert!(parse_clauses("a :- f(b^R).").is_err());
        assert!(parse_clauses("a^R :- b.").is_err());
        assert!(parse_clauses("a :- (b, c)^R.").is_err());
    }

    #[test]
    fn errors_recover_at_next_clause() {
        let d = parse_clauses("a :- (.\nb.\nc :- ].").unwrap_err();
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].position.unwrap().line, 3);
    }

    #[test]
    fn line_col_counts_chars() {
        assert_eq!(line_col("ab\ncé d", 7), (2, 4));
        assert_eq!(line_col("", 0), (1, 1));
    }
}
