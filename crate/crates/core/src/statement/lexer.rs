//! Tokenizer for the Lean statement subset.
//!
//! Comments are dropped, string literals become a single token, and the
//! ASCII/Unicode spellings of the logical operators collapse onto one ASCII
//! spelling so that later stages never see both forms.

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Number,
    Str,
    Sym,
    Open,
    Close,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    /// Normalized text: operators are stored in their ASCII spelling.
    pub text: String,
    /// Byte offset of the token in the source.
    pub start: usize,
    pub end: usize,
    /// Whether whitespace (or a comment) separated this token from the previous one.
    pub space_before: bool,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        self.kind == TokKind::Sym && self.text == s
    }

    pub fn is_ident(&self, s: &str) -> bool {
        self.kind == TokKind::Ident && self.text == s
    }
}

/// Multi-character symbols, longest first. Each entry maps a source spelling to
/// the normalized text.
const SYMBOLS: &[(&str, &str)] = &[
    ("<->", "<->"),
    (":=", ":="),
    ("->", "->"),
    ("/\\", "/\\"),
    ("\\/", "\\/"),
    ("!=", "!="),
    ("<=", "<="),
    (">=", ">="),
    ("=>", "=>"),
    ("==", "=="),
    ("<;>", "<;>"),
    ("<|", "<|"),
    ("|>", "|>"),
    ("::", "::"),
    ("++", "++"),
    ("↔", "<->"),
    ("→", "->"),
    ("∧", "/\\"),
    ("∨", "\\/"),
    ("≠", "!="),
    ("≤", "<="),
    ("≥", ">="),
    ("∀", "forall"),
    ("∃!", "exists!"),
    ("∃", "exists"),
];

pub(crate) fn is_open(c: char) -> bool {
    matches!(c, '(' | '[' | '{' | '⟨' | '⦃')
}

pub(crate) fn is_close(c: char) -> bool {
    matches!(c, ')' | ']' | '}' | '⟩' | '⦄')
}

pub(crate) fn closer_for(open: &str) -> &'static str {
    match open {
        "(" => ")",
        "[" => "]",
        "{" => "}",
        "⟨" => "⟩",
        _ => "⦄",
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    if matches!(c, 'λ' | 'Π' | 'Σ') {
        return false;
    }
    c == '_' || c.is_alphabetic()
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    is_ident_start(c)
        || c.is_ascii_digit()
        || matches!(c, '\'' | '!' | '?')
        || ('₀'..='₉').contains(&c)
        || c.is_numeric()
}

/// Tokenizes `src`, skipping `--` line comments and nested `/- -/` block comments.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = src;
    let mut i = 0usize;
    let mut space = false;
    while i < bytes.len() {
        let rest = &bytes[i..];
        let c = rest.chars().next().unwrap_or(' ');
        if c.is_whitespace() {
            space = true;
            i += c.len_utf8();
            continue;
        }
        if rest.starts_with("--") {
            let end = rest.find('\n').map(|p| i + p).unwrap_or(bytes.len());
            i = end;
            space = true;
            continue;
        }
        if rest.starts_with("/-") {
            i = skip_block_comment(src, i)?;
            space = true;
            continue;
        }
        let start = i;
        if c == '"' {
            let mut j = i + 1;
            let mut closed = false;
            let mut escaped = false;
            for ch in src[j..].chars() {
                j += ch.len_utf8();
                if escaped {
                    escaped = false;
                } else if ch == '\\' {
                    escaped = true;
                } else if ch == '"' {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(ParseError::at(start, "closing '\"'"));
            }
            out.push(tok(TokKind::Str, &src[start..j], start, j, space));
            i = j;
            space = false;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            let mut prev_dot = false;
            for (off, ch) in src[i..].char_indices() {
                if off == 0 || is_ident_continue(ch) {
                    prev_dot = false;
                    j = i + off + ch.len_utf8();
                    continue;
                }
                if ch == '.' && !prev_dot {
                    // field access / namespacing: `h.1`, `Nat.card`
                    let after = src[i + off + 1..].chars().next();
                    if after.is_some_and(|a| is_ident_start(a) || a.is_ascii_digit()) {
                        prev_dot = true;
                        j = i + off + 1;
                        continue;
                    }
                }
                break;
            }
            out.push(tok(TokKind::Ident, &src[start..j], start, j, space));
            i = j;
            space = false;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            let mut seen_dot = false;
            for (off, ch) in src[i..].char_indices() {
                if ch.is_ascii_digit() {
                    j = i + off + 1;
                } else if ch == '.' && !seen_dot {
                    let after = src[i + off + 1..].chars().next();
                    if after.is_some_and(|a| a.is_ascii_digit()) {
                        seen_dot = true;
                        j = i + off + 1;
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            out.push(tok(TokKind::Number, &src[start..j], start, j, space));
            i = j;
            space = false;
            continue;
        }
        if is_open(c) || is_close(c) {
            let kind = if is_open(c) { TokKind::Open } else { TokKind::Close };
            let j = i + c.len_utf8();
            out.push(tok(kind, &src[start..j], start, j, space));
            i = j;
            space = false;
            continue;
        }
        let mut matched = false;
        for (spelling, norm) in SYMBOLS {
            if rest.starts_with(spelling) {
                let j = i + spelling.len();
                out.push(Token {
                    kind: TokKind::Sym,
                    text: (*norm).to_string(),
                    start,
                    end: j,
                    space_before: space,
                });
                i = j;
                matched = true;
                break;
            }
        }
        if !matched {
            let j = i + c.len_utf8();
            out.push(tok(TokKind::Sym, &src[start..j], start, j, space));
            i = j;
        }
        space = false;
    }
    Ok(out)
}

fn tok(kind: TokKind, text: &str, start: usize, end: usize, space_before: bool) -> Token {
    let (kind, text) = match (kind, text) {
        (TokKind::Sym, "λ") => (TokKind::Ident, "fun".to_string()),
        (TokKind::Ident, "forall" | "exists" | "exists!") => (TokKind::Sym, text.to_string()),
        _ => (kind, text.to_string()),
    };
    Token { kind, text, start, end, space_before }
}

/// Returns the byte offset just past the block comment starting at `start`.
pub(crate) fn skip_block_comment(src: &str, start: usize) -> Result<usize, ParseError> {
    let mut depth = 0usize;
    let mut i = start;
    while i < src.len() {
        let rest = &src[i..];
        if rest.starts_with("/-") {
            depth += 1;
            i += 2;
        } else if rest.starts_with("-/") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Ok(i);
            }
        } else {
            i += rest.chars().next().map(char::len_utf8).unwrap_or(1);
        }
    }
    Err(ParseError::at(start, "end of block comment '-/'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn unicode_operators_normalize_to_ascii() {
        assert_eq!(texts("∀ x, P x → Q ∧ R"), ["forall", "x", ",", "P", "x", "->", "Q", "/\\", "R"]);
        assert_eq!(texts("a ≤ b ↔ b ≥ a"), ["a", "<=", "b", "<->", "b", ">=", "a"]);
        assert_eq!(texts("a ≠ b"), texts("a != b"));
    }

    #[test]
    fn dotted_identifiers_stay_whole() {
        assert_eq!(texts("p.Prime Nat.card h.1"), ["p.Prime", "Nat.card", "h.1"]);
        assert_eq!(texts("f x."), ["f", "x", "."]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(texts("a -- sorry\n/- sorry /- nested -/ -/ b"), ["a", "b"]);
        assert!(tokenize("/- open").is_err());
    }

    #[test]
    fn spacing_is_recorded() {
        let toks = tokenize("g^(-1) a * b").unwrap();
        let flags: Vec<bool> = toks.iter().map(|t| t.space_before).collect();
        assert_eq!(flags, [false, false, false, false, false, false, true, true, true]);
    }
}
