use super::ast::{Binder, Conn, Expr, OpaqueTok, Quant, Rel, StatementFile};

/// Output spelling for logical operators. Parsing accepts both; ASCII is the
/// internal normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolStyle {
    #[default]
    Ascii,
    Unicode,
}

impl SymbolStyle {
    fn op<'a>(self, ascii: &'a str) -> &'a str {
        if self == SymbolStyle::Ascii {
            return ascii;
        }
        match ascii {
            "forall" => "∀",
            "exists" => "∃",
            "exists!" => "∃!",
            "->" => "→",
            "<->" => "↔",
            "/\\" => "∧",
            "\\/" => "∨",
            "!=" => "≠",
            "<=" => "≤",
            ">=" => "≥",
            other => other,
        }
    }
}

pub fn print_file(f: &StatementFile) -> String {
    print_file_with(f, SymbolStyle::Ascii)
}

/// Renders the file: preamble verbatim, a blank line, then the declaration on one line.
pub fn print_file_with(f: &StatementFile, style: SymbolStyle) -> String {
    let mut out = String::new();
    for line in &f.preamble {
        out.push_str(line);
        out.push('\n');
    }
    if !f.preamble.is_empty() {
        out.push('\n');
    }
    out.push_str(&print_declaration(f, style));
    out.push('\n');
    out
}

pub fn print_declaration(f: &StatementFile, style: SymbolStyle) -> String {
    let mut out = format!("{} {}", f.keyword.as_str(), f.decl_name);
    for b in &f.binders {
        out.push(' ');
        out.push_str(&print_binder(b, style));
    }
    out.push_str(" : ");
    out.push_str(&print_expr(&f.goal, style));
    out.push_str(" := ");
    out.push_str(&f.proof_body);
    out
}

pub fn print_binder(b: &Binder, style: SymbolStyle) -> String {
    let (open, close) = b.kind.delimiters();
    let ty = print_expr(&b.type_expr, style);
    if b.names.is_empty() {
        format!("{open}{ty}{close}")
    } else {
        format!("{open}{} : {ty}{close}", b.names.join(" "))
    }
}

pub fn print_expr(e: &Expr, style: SymbolStyle) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, style);
    out
}

fn write_expr(out: &mut String, e: &Expr, style: SymbolStyle) {
    match e {
        Expr::Atom(a) => out.push_str(a),
        Expr::App { head, args } => {
            out.push_str(head);
            for a in args {
                out.push(' ');
                if matches!(a, Expr::Atom(_) | Expr::Paren(_)) || (matches!(a, Expr::Opaque(_)) && !a.is_absorbing_opaque()) {
                    write_expr(out, a, style);
                } else {
                    wrapped(out, a, style);
                }
            }
        }
        Expr::Quantifier { kind, names, ty, body } => {
            out.push_str(style.op(match kind {
                Quant::Forall => "forall",
                Quant::Exists => "exists",
            }));
            out.push(' ');
            out.push_str(&names.join(" "));
            if let Some(t) = ty {
                out.push_str(" : ");
                write_expr(out, t, style);
            }
            out.push_str(", ");
            write_expr(out, body, style);
        }
        Expr::Arrow(a, b) => binary(out, a, style.op("->"), b, style),
        Expr::Connective { op: Conn::Not, operands } => {
            let inner = &operands[0];
            match style {
                SymbolStyle::Ascii => out.push_str("Not "),
                SymbolStyle::Unicode => out.push('¬'),
            }
            if matches!(inner, Expr::Atom(_)) {
                write_expr(out, inner, style);
            } else {
                wrapped(out, inner, style);
            }
        }
        Expr::Connective { op, operands } => {
            let sym = match op {
                Conn::And => "/\\",
                Conn::Or => "\\/",
                _ => "<->",
            };
            binary(out, &operands[0], style.op(sym), &operands[1], style);
        }
        Expr::Relation { op, lhs, rhs } => binary(out, lhs, style.op(rel_ascii(*op)), rhs, style),
        Expr::Paren(inner) => wrapped(out, inner, style),
        Expr::Opaque(toks) => write_opaque(out, toks, style),
    }
}

fn rel_ascii(op: Rel) -> &'static str {
    op.ascii()
}

fn binary(out: &mut String, a: &Expr, sym: &str, b: &Expr, style: SymbolStyle) {
    operand(out, a, style);
    out.push(' ');
    out.push_str(sym);
    out.push(' ');
    operand(out, b, style);
}

fn operand(out: &mut String, e: &Expr, style: SymbolStyle) {
    if e.is_skeleton() || e.is_absorbing_opaque() {
        wrapped(out, e, style);
    } else {
        write_expr(out, e, style);
    }
}

fn wrapped(out: &mut String, e: &Expr, style: SymbolStyle) {
    out.push('(');
    write_expr(out, e, style);
    out.push(')');
}

fn write_opaque(out: &mut String, toks: &[OpaqueTok], style: SymbolStyle) {
    for (i, t) in toks.iter().enumerate() {
        if i > 0 && t.space_before {
            out.push(' ');
        }
        out.push_str(style.op(&t.text));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statement::{parse_expression, parse_file};

    #[test]
    fn empty_preamble_prints_declaration_only() {
        let f = parse_file("theorem t : True := by sorry").unwrap();
        assert_eq!(print_file(&f), "theorem t : True := by sorry\n");
    }

    #[test]
    fn unicode_input_prints_ascii() {
        let f = parse_file("import Mathlib\n\ntheorem t (x : ℕ) : ∀ y : ℕ, x ≤ y → y ≥ x ∧ x ≠ y + 1 := by sorry").unwrap();
        assert_eq!(
            print_file(&f),
            "import Mathlib\n\ntheorem t (x : ℕ) : forall y : ℕ, (x <= y) -> ((y >= x) /\\ (x != y + 1)) := by sorry\n"
        );
    }

    #[test]
    fn unicode_style_round_trips_operators() {
        let e = parse_expression("(b > a) ∧ ((P ∧ Q) ∨ R)").unwrap();
        assert_eq!(print_expr(&e, SymbolStyle::Unicode), "(b > a) ∧ ((P ∧ Q) ∨ R)");
        let e = parse_expression("Not (IsSimpleGroup G)").unwrap();
        assert_eq!(print_expr(&e, SymbolStyle::Ascii), "Not (IsSimpleGroup G)");
        assert_eq!(print_expr(&e, SymbolStyle::Unicode), "¬(IsSimpleGroup G)");
    }

    #[test]
    fn whitespace_runs_collapse() {
        let f = parse_file("theorem   t\n  (a   b : G) :\n    a *   b = b  * a := by sorry").unwrap();
        assert_eq!(print_file(&f), "theorem t (a b : G) : a * b = b * a := by sorry\n");
    }
}
