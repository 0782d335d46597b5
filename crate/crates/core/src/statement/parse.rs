use super::ast::{unparen, Binder, BinderKind, Conn, DeclKeyword, Expr, OpaqueTok, Quant, Rel, StatementFile, ABSORBING};
use super::lexer::{closer_for, tokenize, TokKind, Token};
use super::ParseError;

const BOUNDARIES: &[&str] = &["<->", "->", "\\/", "/\\", "=", "!=", "<", "<=", ">", ">=", ",", ":="];

/// Parses a statement file: header lines followed by exactly one `theorem`/`lemma`.
pub fn parse_file(text: &str) -> Result<StatementFile, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = tokenize(text)?;
    let decls: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_ident("theorem") || t.is_ident("lemma"))
        .map(|(i, _)| i)
        .collect();
    match decls.len() {
        0 => return Err(ParseError::NoDeclaration),
        1 => {}
        n => return Err(ParseError::MultipleDeclarations { count: n }),
    }
    let kw_idx = decls[0];
    let kw = &toks[kw_idx];
    let line_start = text[..kw.start].rfind('\n').map(|p| p + 1).unwrap_or(0);
    if !text[line_start..kw.start].trim().is_empty() {
        return Err(ParseError::at(line_start, "declaration keyword at the start of a line"));
    }
    let preamble: Vec<String> = text[..line_start]
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    let keyword = if kw.text == "theorem" { DeclKeyword::Theorem } else { DeclKeyword::Lemma };

    let rest = &toks[kw_idx + 1..];
    let name_tok = rest.first().ok_or(ParseError::at(kw.end, "declaration name"))?;
    if name_tok.kind != TokKind::Ident {
        return Err(ParseError::at(name_tok.start, "declaration name"));
    }
    let mut pos = 1;
    let mut binders = Vec::new();
    while let Some(t) = rest.get(pos) {
        if t.kind != TokKind::Open {
            break;
        }
        let close = matching_close(rest, pos)?;
        binders.push(parse_binder(t, &rest[pos + 1..close], &rest[close])?);
        pos = close + 1;
    }
    match rest.get(pos) {
        Some(t) if t.is_sym(":") => pos += 1,
        Some(t) => return Err(ParseError::at(t.start, "':' or binder")),
        None => return Err(ParseError::at(text.len(), "':'")),
    }
    let goal_start = pos;
    let mut assign = None;
    while pos < rest.len() {
        let t = &rest[pos];
        if t.kind == TokKind::Open {
            pos = matching_close(rest, pos)? + 1;
            continue;
        }
        if t.kind == TokKind::Close {
            return Err(ParseError::at(t.start, "':='"));
        }
        if t.is_sym(":=") {
            assign = Some(pos);
            break;
        }
        pos += 1;
    }
    let assign = assign.ok_or(ParseError::at(text.len(), "':=' followed by a proof"))?;
    if assign == goal_start {
        return Err(ParseError::at(rest[assign].start, "goal expression"));
    }
    let goal = parse_expr(&rest[goal_start..assign])?;
    let proof_body = text[rest[assign].end..].trim().to_string();
    if proof_body.is_empty() {
        return Err(ParseError::at(text.len(), "proof body"));
    }
    Ok(StatementFile {
        preamble,
        keyword,
        decl_name: name_tok.text.clone(),
        binders,
        goal,
        proof_body,
    })
}

/// Parses a standalone expression (a goal or a binder type).
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::at(0, "expression"));
    }
    parse_expr(&toks)
}

fn parse_binder(open: &Token, inner: &[Token], close: &Token) -> Result<Binder, ParseError> {
    let kind = match open.text.as_str() {
        "(" => BinderKind::Explicit,
        "{" => BinderKind::Implicit,
        "[" => BinderKind::Instance,
        _ => return Err(ParseError::at(open.start, "'(', '{' or '['")),
    };
    let colon = inner.iter().position(|t| t.is_sym(":"));
    let (names, ty) = match colon {
        Some(c) if inner[..c].iter().all(|t| t.kind == TokKind::Ident) && c > 0 => {
            (inner[..c].iter().map(|t| t.text.clone()).collect::<Vec<_>>(), &inner[c + 1..])
        }
        _ if kind == BinderKind::Instance => (Vec::new(), inner),
        Some(c) => return Err(ParseError::at(inner[c].start, "binder names before ':'")),
        None => return Err(ParseError::at(close.start, "':' in binder")),
    };
    if ty.is_empty() {
        return Err(ParseError::at(close.start, "binder type"));
    }
    Ok(Binder { kind, names, type_expr: parse_expr(ty)? })
}

pub(crate) fn matching_close(toks: &[Token], open: usize) -> Result<usize, ParseError> {
    let mut stack: Vec<&str> = Vec::new();
    for (i, t) in toks.iter().enumerate().skip(open) {
        match t.kind {
            TokKind::Open => stack.push(closer_for(&t.text)),
            TokKind::Close => {
                let want = stack.pop().ok_or(ParseError::at(t.start, "matching open bracket"))?;
                if t.text != want {
                    return Err(ParseError::at(t.start, want));
                }
                if stack.is_empty() {
                    return Ok(i);
                }
            }
            _ => {}
        }
    }
    let last = toks.last().map(|t| t.end).unwrap_or(0);
    Err(ParseError::at(last, "closing bracket"))
}

pub(crate) fn parse_expr(toks: &[Token]) -> Result<Expr, ParseError> {
    let mut p = ExprParser { toks, pos: 0 };
    let e = p.iff()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(ParseError::at(t.start, "end of expression"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek_sym(&self, s: &str) -> bool {
        self.toks.get(self.pos).is_some_and(|t| t.is_sym(s))
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.start)
            .or_else(|| self.toks.last().map(|t| t.end))
            .unwrap_or(0)
    }

    fn iff(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.arrow()?;
        if self.peek_sym("<->") {
            self.pos += 1;
            let rhs = self.arrow()?;
            if self.peek_sym("<->") {
                return Err(ParseError::at(self.here(), "parenthesized '<->' chain"));
            }
            return Ok(Expr::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn arrow(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.peek_sym("->") {
            self.pos += 1;
            let rhs = self.arrow()?;
            return Ok(Expr::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.and()?;
        if self.peek_sym("\\/") {
            self.pos += 1;
            let rhs = self.or()?;
            return Ok(Expr::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.not()?;
        if self.peek_sym("/\\") {
            self.pos += 1;
            let rhs = self.and()?;
            return Ok(Expr::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, ParseError> {
        if self.peek_sym("¬") {
            self.pos += 1;
            let inner = self.not()?;
            return Ok(Expr::not(unparen(inner)));
        }
        self.rel()
    }

    fn rel(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.term()?;
        let op = match self.toks.get(self.pos) {
            Some(t) if t.kind == TokKind::Sym => Rel::from_ascii(&t.text),
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        self.pos += 1;
        let rhs = self.term()?;
        if let Some(t) = self.toks.get(self.pos) {
            if t.kind == TokKind::Sym && Rel::from_ascii(&t.text).is_some() {
                return Err(ParseError::at(t.start, "a single relation (chains are not supported)"));
            }
        }
        Ok(Expr::rel(op, lhs, rhs))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        if self.peek_sym("forall") || self.peek_sym("exists") {
            return self.quantifier();
        }
        let mut end = start;
        while end < self.toks.len() {
            let t = &self.toks[end];
            match t.kind {
                TokKind::Open => {
                    end = matching_close(self.toks, end)? + 1;
                    continue;
                }
                TokKind::Close => return Err(ParseError::at(t.start, "expression")),
                _ => {}
            }
            if ABSORBING.contains(&t.text.as_str()) {
                end = self.toks.len();
                break;
            }
            if t.kind == TokKind::Sym && BOUNDARIES.contains(&t.text.as_str()) {
                break;
            }
            end += 1;
        }
        if end == start {
            return Err(ParseError::at(self.here(), "term"));
        }
        self.pos = end;
        classify_run(&self.toks[start..end])
    }

    fn quantifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let kind = if self.toks[start].text == "forall" { Quant::Forall } else { Quant::Exists };
        let mut i = start + 1;
        let mut comma = None;
        while i < self.toks.len() {
            let t = &self.toks[i];
            if t.kind == TokKind::Open {
                i = matching_close(self.toks, i)? + 1;
                continue;
            }
            if t.is_sym(",") {
                comma = Some(i);
                break;
            }
            i += 1;
        }
        let comma = comma.ok_or(ParseError::at(self.here(), "',' after quantifier binders"))?;
        let groups = match quantifier_binders(&self.toks[start + 1..comma]) {
            Some(g) if !g.is_empty() => g,
            _ => {
                // binder predicates and other forms stay opaque to the end of scope
                let span = &self.toks[start..];
                self.pos = self.toks.len();
                return Ok(opaque(span));
            }
        };
        let body = parse_expr(&self.toks[comma + 1..])?;
        self.pos = self.toks.len();
        let mut out = body;
        for (names, ty) in groups.into_iter().rev() {
            out = Expr::Quantifier { kind, names, ty: ty.map(Box::new), body: Box::new(out) };
        }
        Ok(out)
    }
}

type QuantGroup = (Vec<String>, Option<Expr>);

fn quantifier_binders(toks: &[Token]) -> Option<Vec<QuantGroup>> {
    if toks.is_empty() {
        return None;
    }
    if toks[0].is_sym("(") || toks[0].text == "(" {
        let mut groups = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            if toks[i].text != "(" {
                return None;
            }
            let close = matching_close(toks, i).ok()?;
            let inner = &toks[i + 1..close];
            groups.push(simple_group(inner)?);
            i = close + 1;
        }
        return Some(groups);
    }
    Some(vec![simple_group(toks)?])
}

fn simple_group(toks: &[Token]) -> Option<QuantGroup> {
    let colon = toks.iter().position(|t| t.is_sym(":"));
    let names_part = &toks[..colon.unwrap_or(toks.len())];
    if names_part.is_empty() || !names_part.iter().all(|t| t.kind == TokKind::Ident) {
        return None;
    }
    let names = names_part.iter().map(|t| t.text.clone()).collect();
    let ty = match colon {
        Some(c) if c + 1 < toks.len() => Some(parse_expr(&toks[c + 1..]).ok()?),
        Some(_) => return None,
        None => None,
    };
    Some((names, ty))
}

fn opaque(toks: &[Token]) -> Expr {
    Expr::Opaque(
        toks.iter()
            .enumerate()
            .map(|(i, t)| OpaqueTok {
                text: t.text.clone(),
                space_before: i > 0 && t.space_before,
                is_ident: t.kind == TokKind::Ident,
            })
            .collect(),
    )
}

/// Turns a maximal run of term tokens into an atom, application, stripped group or
/// opaque span.
fn classify_run(run: &[Token]) -> Result<Expr, ParseError> {
    if run.len() == 1 && run[0].kind == TokKind::Ident && !is_reserved(&run[0].text) {
        return Ok(Expr::Atom(run[0].text.clone()));
    }
    if run[0].text == "(" && matching_close(run, 0)? == run.len() - 1 {
        return Ok(match parse_expr(&run[1..run.len() - 1]) {
            Ok(inner) => unparen(inner),
            Err(_) => opaque(run),
        });
    }
    if run[0].kind == TokKind::Ident && !is_reserved(&run[0].text) {
        if let Some(args) = app_args(&run[1..])? {
            let head = run[0].text.clone();
            return Ok(match (head.as_str(), args.len()) {
                ("Not", 1) => Expr::not(unparen(args.into_iter().next().unwrap_or(Expr::atom("_")))),
                ("And" | "Or" | "Iff", 2) => {
                    let op = match head.as_str() {
                        "And" => Conn::And,
                        "Or" => Conn::Or,
                        _ => Conn::Iff,
                    };
                    Expr::Connective { op, operands: args.into_iter().map(unparen).collect() }
                }
                _ => Expr::App { head, args },
            });
        }
    }
    Ok(opaque(run))
}

fn is_reserved(s: &str) -> bool {
    matches!(s, "fun" | "by" | "theorem" | "lemma" | "let" | "have" | "show" | "from" | "at" | "in" | "if" | "then" | "else" | "match" | "with")
}

/// Splits application arguments; `None` when the run is not a plain application.
fn app_args(toks: &[Token]) -> Result<Option<Vec<Expr>>, ParseError> {
    if toks.is_empty() {
        return Ok(None);
    }
    let mut args = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        match t.kind {
            TokKind::Ident if !is_reserved(&t.text) => {
                args.push(Expr::Atom(t.text.clone()));
                i += 1;
            }
            TokKind::Number => {
                args.push(opaque(&toks[i..i + 1]));
                i += 1;
            }
            TokKind::Open => {
                let close = matching_close(toks, i)?;
                let group = &toks[i..=close];
                if t.text == "(" {
                    match parse_expr(&toks[i + 1..close]) {
                        Ok(inner) => args.push(Expr::Paren(Box::new(unparen(inner)))),
                        Err(_) => args.push(opaque(group)),
                    }
                } else {
                    args.push(opaque(group));
                }
                i = close + 1;
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(args))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugacy_statement() {
        let f = parse_file("import Mathlib\ntheorem t (a b : G) : a*b = g*(b*a)*g^(-1) := by sorry").unwrap();
        assert_eq!(f.preamble, ["import Mathlib"]);
        assert_eq!(f.binders.len(), 1);
        assert_eq!(f.binders[0].kind, BinderKind::Explicit);
        assert_eq!(f.binders[0].names, ["a", "b"]);
        assert!(matches!(f.goal, Expr::Relation { op: Rel::Eq, .. }));
        assert_eq!(f.proof_body, "by sorry");
    }

    #[test]
    fn minimal_file() {
        let f = parse_file("import Mathlib\ntheorem t : True := by sorry").unwrap();
        assert!(f.binders.is_empty());
        assert_eq!(f.goal, Expr::atom("True"));
    }

    #[test]
    fn declaration_count_errors() {
        assert_eq!(
            parse_file("theorem a : True := by sorry\ntheorem b : True := by sorry"),
            Err(ParseError::MultipleDeclarations { count: 2 })
        );
        assert_eq!(parse_file("import Mathlib\ndef f := 1"), Err(ParseError::NoDeclaration));
        assert_eq!(parse_file("   \n"), Err(ParseError::Empty));
    }

    #[test]
    fn malformed_inputs_report_positions() {
        assert!(matches!(parse_file("theorem t (a : G : True := by sorry"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_file("theorem t : True"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_file("theorem t : a < b < c := by sorry"), Err(ParseError::Syntax { .. })));
        let err = parse_file("theorem t : := by sorry").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { position: 12, .. }), "{err:?}");
    }

    #[test]
    fn precedence_follows_lean() {
        let e = parse_expression("P ∧ Q ∨ R → S ↔ T").unwrap();
        let expected = Expr::iff(
            Expr::arrow(Expr::or(Expr::and(Expr::atom("P"), Expr::atom("Q")), Expr::atom("R")), Expr::atom("S")),
            Expr::atom("T"),
        );
        assert_eq!(e, expected);
        let e = parse_expression("¬ a = b ∧ c").unwrap();
        assert_eq!(
            e,
            Expr::and(Expr::not(Expr::rel(Rel::Eq, Expr::atom("a"), Expr::atom("b"))), Expr::atom("c"))
        );
    }

    #[test]
    fn quantifiers_extend_to_scope_end() {
        let e = parse_expression("P ∧ ∀ x : ℕ, Q x ∨ R").unwrap();
        let Expr::Connective { operands, .. } = &e else { panic!() };
        let Expr::Quantifier { names, body, ty, .. } = &operands[1] else { panic!("{e:?}") };
        assert_eq!(names, &["x"]);
        assert_eq!(ty.as_deref(), Some(&Expr::atom("ℕ")));
        assert!(matches!(**body, Expr::Connective { op: Conn::Or, .. }));
    }

    #[test]
    fn bracketed_quantifier_binders_nest() {
        let e = parse_expression("forall (G : Type*) (_ : Group G), True").unwrap();
        let Expr::Quantifier { names, body, .. } = e else { panic!() };
        assert_eq!(names, ["G"]);
        assert!(matches!(*body, Expr::Quantifier { .. }));
    }

    #[test]
    fn constructor_forms_become_connectives() {
        assert_eq!(parse_expression("Not (IsSimpleGroup G)").unwrap(), parse_expression("¬ IsSimpleGroup G").unwrap());
        assert_eq!(parse_expression("And (x = 0) (P)").unwrap(), parse_expression("x = 0 ∧ P").unwrap());
    }

    #[test]
    fn unsupported_syntax_stays_opaque() {
        let e = parse_expression("∀ x ∈ S, f x = 0").unwrap();
        assert!(e.is_absorbing_opaque());
        let e = parse_expression("a = ∑ i in Finset.range n, f i").unwrap();
        let Expr::Relation { rhs, .. } = e else { panic!() };
        assert!(rhs.is_absorbing_opaque());
        let e = parse_expression("|f s - f t| ≤ μ (|s - t|)").unwrap();
        assert!(matches!(e, Expr::Relation { op: Rel::Le, .. }));
    }

    #[test]
    fn instance_binders_may_be_anonymous() {
        let f = parse_file("theorem t {G : Type*} [Group G] [inst : Fintype G] (a : G) : a = a := by sorry").unwrap();
        let kinds: Vec<_> = f.binders.iter().map(|b| (b.kind, b.names.len())).collect();
        assert_eq!(
            kinds,
            [(BinderKind::Implicit, 1), (BinderKind::Instance, 0), (BinderKind::Instance, 1), (BinderKind::Explicit, 1)]
        );
    }
}
