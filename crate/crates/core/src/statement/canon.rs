use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ast::StatementFile;
use super::print::{print_file_with, SymbolStyle};

/// Duplicate identity of a statement file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(pub String);

impl CanonicalKey {
    /// Key for text that could not be parsed: a digest of its whitespace-collapsed form.
    pub fn of_raw_text(text: &str) -> CanonicalKey {
        CanonicalKey(digest(&format!("raw\n{}", collapse_ws(text))))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn canonicalize(f: &StatementFile) -> CanonicalKey {
    CanonicalKey(digest(&canonical_text(f)))
}

/// The normalized rendering hashed by [`canonicalize`]: declaration name erased,
/// bound names renamed `v0, v1, …` in binding order, whitespace runs collapsed.
pub fn canonical_text(f: &StatementFile) -> String {
    let mut g = alpha_normalize(f);
    g.decl_name = "_".to_string();
    g.preamble = g.preamble.iter().map(|l| collapse_ws(l)).collect();
    g.proof_body = collapse_ws(&g.proof_body);
    print_file_with(&g, SymbolStyle::Ascii)
}

/// Renames bound names to `v0, v1, …` (header binders left to right, then goal
/// quantifier binders in pre-order). Free identifiers that already look like
/// `v<digits>` get a trailing `'` so the renaming stays injective.
pub fn alpha_normalize(f: &StatementFile) -> StatementFile {
    let mut map: HashMap<String, String> = HashMap::new();
    for name in f.all_bound_names() {
        if name == "_" || map.contains_key(&name) {
            continue;
        }
        let fresh = format!("v{}", map.len());
        map.insert(name, fresh);
    }
    let mut rename = |id: &str| -> String {
        let (first, rest) = match id.find('.') {
            Some(p) => (&id[..p], &id[p..]),
            None => (id, ""),
        };
        match map.get(first) {
            Some(v) => format!("{v}{rest}"),
            None if is_reserved_shape(first) => format!("{first}'{rest}"),
            None => id.to_string(),
        }
    };
    let mut g = f.clone();
    for b in &mut g.binders {
        for n in &mut b.names {
            *n = rename(n);
        }
        b.type_expr.map_identifiers(&mut rename);
    }
    g.goal.map_identifiers(&mut rename);
    g
}

fn is_reserved_shape(s: &str) -> bool {
    let base = s.trim_end_matches('\'');
    base.len() > 1 && base.starts_with('v') && base[1..].chars().all(|c| c.is_ascii_digit())
}

pub(crate) fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statement::parse_file;

    fn key(s: &str) -> CanonicalKey {
        canonicalize(&parse_file(s).unwrap())
    }

    #[test]
    fn name_and_whitespace_insensitive() {
        assert_eq!(
            key("import Mathlib\ntheorem foo : True := by sorry"),
            key("import   Mathlib\n\n\ntheorem   bar :\n True :=  by   sorry")
        );
    }

    #[test]
    fn alpha_equivalent_binders() {
        assert_eq!(
            key("theorem t (a b : G) : a * b = b * a := by sorry"),
            key("theorem t (x y : G) : x * y = y * x := by sorry")
        );
        assert_ne!(
            key("theorem t (a b : G) : a * b = b * a := by sorry"),
            key("theorem t (x y : G) : y * x = y * x := by sorry")
        );
    }

    #[test]
    fn logical_rewrites_change_the_key() {
        assert_ne!(key("theorem t : P ∧ Q := by sorry"), key("theorem t : Q ∧ P := by sorry"));
    }

    #[test]
    fn sensitive_to_preamble_and_binder_kind() {
        assert_ne!(key("import Mathlib\ntheorem t : True := by sorry"), key("theorem t : True := by sorry"));
        assert_ne!(key("theorem t {a : G} : a = a := by sorry"), key("theorem t (a : G) : a = a := by sorry"));
    }

    #[test]
    fn renaming_stays_injective_against_free_v_names() {
        assert_ne!(
            key("theorem t (a : G) : a = v0 := by sorry"),
            key("theorem t (v0 : G) : v0 = v0 := by sorry")
        );
    }

    #[test]
    fn quantifier_binders_are_renamed() {
        assert_eq!(
            key("theorem t : ∃ g : G, g = g := by sorry"),
            key("theorem t : exists h : G, h = h := by sorry")
        );
        assert_eq!(
            key("theorem t (p : Nat) (hp : p.Prime) : p > 1 := by sorry"),
            key("theorem t (q : Nat) (hq : q.Prime) : q > 1 := by sorry")
        );
    }
}
