//! Fresh operator symbols and propositional atoms, keyed by alpha-canonical
//! expressions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::leibniz::Epsilon;
use crate::syntax::print::raw;
use crate::syntax::subst::fresh_name;
use crate::syntax::Expr;

/// What a fresh first-order symbol stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoalesceKey {
    /// Canonical rendering of `lambda z: nabla e` (or `prime e`).
    Modal(Expr),
    /// A defined operator with its epsilon vector. Concrete entries are
    /// canonical with the captured binders as lambda parameters `@0..`.
    Def {
        name: String,
        eps: Vec<Epsilon>,
        captured: usize,
    },
}

impl CoalesceKey {
    fn digest_text(&self) -> String {
        match self {
            CoalesceKey::Modal(e) => format!("modal {}", raw(e)),
            CoalesceKey::Def { name, eps, captured } => {
                let mut s = format!("def {name} {captured}");
                for e in eps {
                    match e {
                        Epsilon::Star => s.push_str(" *"),
                        Epsilon::Arg(a) => {
                            s.push(' ');
                            s.push_str(&raw(a));
                        }
                    }
                }
                s
            }
        }
    }
}

impl fmt::Display for CoalesceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoalesceKey::Modal(e) => write!(f, "{}", raw(e)),
            CoalesceKey::Def { name, eps, .. } => {
                write!(f, "[{name}")?;
                for e in eps {
                    write!(f, ", {e}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// First eight hex digits of the SHA-256 of `text`.
pub(crate) fn short_digest(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d[..4].iter().map(|b| format!("{b:02x}")).collect()
}

/// One fresh symbol. `params` and `body` are a representative of the key
/// class: the symbol denotes `lambda params: body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolEntry {
    pub name: String,
    pub key: CoalesceKey,
    pub params: Vec<String>,
    pub body: Expr,
    /// Rendered as a flexible variable instead of a 0-ary operator.
    pub flexible: bool,
}

impl SymbolEntry {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// The symbol applied to `args`.
    pub fn apply(&self, args: Vec<Expr>) -> Expr {
        if self.flexible {
            Expr::flex(self.name.clone())
        } else {
            Expr::op(self.name.clone(), args)
        }
    }
}

/// Bijection between coalescing keys and fresh symbols, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    entries: Vec<SymbolEntry>,
    index: BTreeMap<CoalesceKey, usize>,
    avoid: BTreeSet<String>,
}

impl SymbolTable {
    /// A table whose fresh names avoid `avoid`.
    pub fn new(avoid: BTreeSet<String>) -> SymbolTable {
        SymbolTable {
            avoid,
            ..SymbolTable::default()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SymbolEntry] {
        &self.entries
    }

    pub fn get(&self, key: &CoalesceKey) -> Option<&SymbolEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn by_name(&self, name: &str) -> Option<&SymbolEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// The symbol for `key`, created with `c<k>__<digest>` if new.
    pub fn intern(&mut self, key: CoalesceKey, params: Vec<String>, body: Expr) -> &SymbolEntry {
        if let Some(&i) = self.index.get(&key) {
            return &self.entries[i];
        }
        let base = format!("c{}__{}", self.entries.len(), short_digest(&key.digest_text()));
        let name = fresh_name(&base, &self.avoid);
        self.push(name, key, params, body, false)
    }

    /// A 0-ary symbol rendered as a flexible variable named after `base`.
    pub fn intern_flexible(&mut self, key: CoalesceKey, base: &str, body: Expr) -> &SymbolEntry {
        if let Some(&i) = self.index.get(&key) {
            return &self.entries[i];
        }
        let name = fresh_name(base, &self.avoid);
        self.push(name, key, Vec::new(), body, true)
    }

    fn push(&mut self, name: String, key: CoalesceKey, params: Vec<String>, body: Expr, flexible: bool) -> &SymbolEntry {
        self.avoid.insert(name.clone());
        self.index.insert(key.clone(), self.entries.len());
        self.entries.push(SymbolEntry {
            name,
            key,
            params,
            body,
            flexible,
        });
        self.entries.last().unwrap()
    }
}

/// One propositional atom standing for a first-order subexpression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomEntry {
    pub name: String,
    /// Canonical form of the source, the table key.
    pub key: Expr,
    /// The first source expression that produced this atom.
    pub source: Expr,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomTable {
    entries: Vec<AtomEntry>,
    index: BTreeMap<Expr, usize>,
    avoid: BTreeSet<String>,
}

impl AtomTable {
    pub fn new(avoid: BTreeSet<String>) -> AtomTable {
        AtomTable {
            avoid,
            ..AtomTable::default()
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AtomEntry] {
        &self.entries
    }

    pub fn by_name(&self, name: &str) -> Option<&AtomEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// The atom for `source`, created with `a<k>__<digest>` if new.
    pub fn intern(&mut self, source: &Expr) -> &AtomEntry {
        let key = crate::syntax::canonical(source);
        if let Some(&i) = self.index.get(&key) {
            return &self.entries[i];
        }
        let base = format!("a{}__{}", self.entries.len(), short_digest(&raw(&key)));
        let name = fresh_name(&base, &self.avoid);
        self.avoid.insert(name.clone());
        self.index.insert(key.clone(), self.entries.len());
        self.entries.push(AtomEntry {
            name,
            key,
            source: source.clone(),
        });
        self.entries.last().unwrap()
    }
}
