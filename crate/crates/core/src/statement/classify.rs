use serde::{Deserialize, Serialize};

use super::lexer::{is_ident_continue, is_ident_start};

/// Textual properties of a prover response. Whether the proof is accepted by a
/// verifier is not decided here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofClassification {
    pub sorry_count: usize,
    pub complete: bool,
    pub theorem_complete: bool,
}

/// Counts `sorry` tokens outside comments and string literals and checks for an
/// explicit `theorem`/`lemma` declaration. Never fails: unterminated comments and
/// strings simply run to the end of the text.
pub fn classify_proof_output(text: &str) -> ProofClassification {
    let mut sorry_count = 0;
    let mut has_decl = false;
    for word in code_words(text) {
        match word {
            "sorry" => sorry_count += 1,
            "theorem" | "lemma" => has_decl = true,
            _ => {}
        }
    }
    let complete = sorry_count == 0;
    ProofClassification { sorry_count, complete, theorem_complete: complete && has_decl }
}

/// Identifier-shaped words of `text` that are not inside comments or strings.
fn code_words(text: &str) -> Vec<&str> {
    let mut words = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().unwrap_or(' ');
        if rest.starts_with("--") {
            i = rest.find('\n').map(|p| i + p).unwrap_or(text.len());
        } else if rest.starts_with("/-") {
            i = skip_block(text, i);
        } else if c == '"' {
            i = skip_string(text, i);
        } else if is_ident_start(c) {
            let len: usize = rest.chars().take_while(|&ch| is_ident_continue(ch)).map(char::len_utf8).sum();
            words.push(&rest[..len]);
            i += len;
        } else if c.is_ascii_digit() {
            // keep `1sorry`-style runs from yielding a word
            let len: usize = rest.chars().take_while(|&ch| is_ident_continue(ch)).map(char::len_utf8).sum();
            i += len.max(1);
        } else {
            i += c.len_utf8();
        }
    }
    words
}

fn skip_block(text: &str, start: usize) -> usize {
    let mut depth = 0usize;
    let mut i = start;
    while i < text.len() {
        let rest = &text[i..];
        if rest.starts_with("/-") {
            depth += 1;
            i += 2;
        } else if rest.starts_with("-/") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return i;
            }
        } else {
            i += rest.chars().next().map(char::len_utf8).unwrap_or(1);
        }
    }
    text.len()
}

fn skip_string(text: &str, start: usize) -> usize {
    let mut escaped = false;
    for (off, ch) in text[start + 1..].char_indices() {
        if escaped {
            escaped = false;
        } else if ch == '\\' {
            escaped = true;
        } else if ch == '"' {
            return start + 1 + off + 1;
        }
    }
    text.len()
}
