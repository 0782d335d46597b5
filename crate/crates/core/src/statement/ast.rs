use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinderKind {
    Implicit,
    Explicit,
    Instance,
}

impl BinderKind {
    pub fn delimiters(self) -> (&'static str, &'static str) {
        match self {
            BinderKind::Implicit => ("{", "}"),
            BinderKind::Explicit => ("(", ")"),
            BinderKind::Instance => ("[", "]"),
        }
    }
}

/// One binder group of the declaration header, e.g. `(a b : G)` or `[Group G]`.
///
/// `names` is empty only for anonymous instance binders.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binder {
    pub kind: BinderKind,
    pub names: Vec<String>,
    pub type_expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quant {
    Forall,
    Exists,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conn {
    And,
    Or,
    Iff,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Rel {
    pub fn ascii(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Gt => ">",
            Rel::Ge => ">=",
        }
    }

    pub fn from_ascii(s: &str) -> Option<Rel> {
        Some(match s {
            "=" => Rel::Eq,
            "!=" => Rel::Ne,
            "<" => Rel::Lt,
            "<=" => Rel::Le,
            ">" => Rel::Gt,
            ">=" => Rel::Ge,
            _ => return None,
        })
    }
}

/// A token inside an opaque span. Spacing is kept so the span prints back as written
/// (modulo collapsing whitespace runs).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpaqueTok {
    pub text: String,
    pub space_before: bool,
    pub is_ident: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(String),
    App {
        head: String,
        args: Vec<Expr>,
    },
    Quantifier {
        kind: Quant,
        names: Vec<String>,
        ty: Option<Box<Expr>>,
        body: Box<Expr>,
    },
    Arrow(Box<Expr>, Box<Expr>),
    /// `Not` carries one operand; the other connectives carry two.
    Connective {
        op: Conn,
        operands: Vec<Expr>,
    },
    Relation {
        op: Rel,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Explicit parentheses around an application argument.
    Paren(Box<Expr>),
    Opaque(Vec<OpaqueTok>),
}

/// Tokens that open a binding construct running to the end of the enclosing scope.
pub(crate) const ABSORBING: &[&str] = &["fun", "∑", "∏", "⋃", "⋂", "⨆", "⨅", "∫", "exists!", "forall", "exists"];

impl Expr {
    pub fn atom(name: impl Into<String>) -> Expr {
        Expr::Atom(name.into())
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::Connective { op: Conn::And, operands: vec![a, b] }
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Connective { op: Conn::Or, operands: vec![a, b] }
    }

    pub fn iff(a: Expr, b: Expr) -> Expr {
        Expr::Connective { op: Conn::Iff, operands: vec![a, b] }
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Connective { op: Conn::Not, operands: vec![a] }
    }

    pub fn rel(op: Rel, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Relation { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn arrow(a: Expr, b: Expr) -> Expr {
        Expr::Arrow(Box::new(a), Box::new(b))
    }

    /// True for the logical skeleton nodes (everything the rewrite engine can look into).
    pub fn is_skeleton(&self) -> bool {
        matches!(
            self,
            Expr::Quantifier { .. } | Expr::Arrow(..) | Expr::Connective { .. } | Expr::Relation { .. }
        )
    }

    /// An opaque span that would swallow following tokens if printed bare.
    pub fn is_absorbing_opaque(&self) -> bool {
        match self {
            Expr::Opaque(toks) => {
                let mut depth = 0i32;
                for t in toks {
                    match t.text.as_str() {
                        "(" | "[" | "{" | "⟨" | "⦃" => depth += 1,
                        ")" | "]" | "}" | "⟩" | "⦄" => depth -= 1,
                        s if depth == 0 && ABSORBING.contains(&s) => return true,
                        _ => {}
                    }
                }
                false
            }
            _ => false,
        }
    }

    /// Immediate children, in print order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Atom(_) | Expr::Opaque(_) => vec![],
            Expr::App { args, .. } => args.iter().collect(),
            Expr::Quantifier { ty, body, .. } => ty.iter().map(|t| t.as_ref()).chain([body.as_ref()]).collect(),
            Expr::Arrow(a, b) => vec![a, b],
            Expr::Connective { operands, .. } => operands.iter().collect(),
            Expr::Relation { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Paren(e) => vec![e],
        }
    }

    /// Every identifier occurrence in the expression (atoms, application heads,
    /// identifier tokens of opaque spans), including bound ones.
    pub fn identifiers(&self, out: &mut Vec<String>) {
        match self {
            Expr::Atom(a) => out.push(a.clone()),
            Expr::App { head, args } => {
                out.push(head.clone());
                args.iter().for_each(|a| a.identifiers(out));
            }
            Expr::Opaque(toks) => out.extend(toks.iter().filter(|t| t.is_ident).map(|t| t.text.clone())),
            Expr::Quantifier { names, ty, body, .. } => {
                out.extend(names.iter().cloned());
                if let Some(t) = ty {
                    t.identifiers(out);
                }
                body.identifiers(out);
            }
            other => other.children().into_iter().for_each(|c| c.identifiers(out)),
        }
    }

    /// Names bound by quantifiers inside this expression, in pre-order.
    pub fn bound_names(&self, out: &mut Vec<String>) {
        if let Expr::Quantifier { names, .. } = self {
            out.extend(names.iter().cloned());
        }
        for c in self.children() {
            c.bound_names(out);
        }
    }

    /// Applies `f` to every identifier (atoms, heads, opaque identifier tokens and
    /// quantifier binder names).
    pub fn map_identifiers(&mut self, f: &mut dyn FnMut(&str) -> String) {
        match self {
            Expr::Atom(a) => *a = f(a),
            Expr::App { head, args } => {
                *head = f(head);
                args.iter_mut().for_each(|a| a.map_identifiers(f));
            }
            Expr::Opaque(toks) => {
                for t in toks.iter_mut().filter(|t| t.is_ident) {
                    t.text = f(&t.text);
                }
            }
            Expr::Quantifier { names, ty, body, .. } => {
                for n in names.iter_mut() {
                    *n = f(n);
                }
                if let Some(t) = ty {
                    t.map_identifiers(f);
                }
                body.map_identifiers(f);
            }
            Expr::Arrow(a, b) => {
                a.map_identifiers(f);
                b.map_identifiers(f);
            }
            Expr::Connective { operands, .. } => operands.iter_mut().for_each(|o| o.map_identifiers(f)),
            Expr::Relation { lhs, rhs, .. } => {
                lhs.map_identifiers(f);
                rhs.map_identifiers(f);
            }
            Expr::Paren(e) => e.map_identifiers(f),
        }
    }

    /// Node count, used by tests and generators to bound sizes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }
}

/// Strips every layer of explicit parentheses.
pub(crate) fn unparen(e: Expr) -> Expr {
    match e {
        Expr::Paren(inner) => unparen(*inner),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKeyword {
    Theorem,
    Lemma,
}

impl DeclKeyword {
    pub fn as_str(self) -> &'static str {
        match self {
            DeclKeyword::Theorem => "theorem",
            DeclKeyword::Lemma => "lemma",
        }
    }
}

/// A statement file: header lines plus exactly one declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StatementFile {
    pub preamble: Vec<String>,
    pub keyword: DeclKeyword,
    pub decl_name: String,
    pub binders: Vec<Binder>,
    pub goal: Expr,
    pub proof_body: String,
}

impl StatementFile {
    /// Names introduced by the header binders, left to right.
    pub fn binder_names(&self) -> Vec<String> {
        self.binders.iter().flat_map(|b| b.names.iter().cloned()).collect()
    }

    /// Every bound name: header binders followed by goal quantifier binders.
    pub fn all_bound_names(&self) -> Vec<String> {
        let mut names = self.binder_names();
        for b in &self.binders {
            b.type_expr.bound_names(&mut names);
        }
        self.goal.bound_names(&mut names);
        names
    }
}
