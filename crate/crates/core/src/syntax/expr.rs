//! The expression language: one grammar for terms and formulas.

use std::fmt;

/// A FOML expression in core form.
///
/// Surface connectives (`true`, `not`, `and`, `or`, `iff`, `exists`, `delta`)
/// are desugared by the parser, so every later pass only ever sees these
/// variants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Rigid(String),
    Flex(String),
    Op(String, Vec<Expr>),
    Def(String, Vec<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    False,
    Implies(Box<Expr>, Box<Expr>),
    Forall(String, Box<Expr>),
    Nabla(Box<Expr>),
    Prime(Box<Expr>),
}

/// The two modalities of the language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Nabla,
    Prime,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Nabla => f.write_str("nabla"),
            Modality::Prime => f.write_str("prime"),
        }
    }
}

impl Expr {
    pub fn rigid(name: impl Into<String>) -> Expr {
        Expr::Rigid(name.into())
    }

    pub fn flex(name: impl Into<String>) -> Expr {
        Expr::Flex(name.into())
    }

    pub fn op(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Op(name.into(), args)
    }

    pub fn constant(name: impl Into<String>) -> Expr {
        Expr::Op(name.into(), Vec::new())
    }

    pub fn def(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Def(name.into(), args)
    }

    pub fn eq(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Eq(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn forall(var: impl Into<String>, body: Expr) -> Expr {
        Expr::Forall(var.into(), Box::new(body))
    }

    pub fn nabla(body: Expr) -> Expr {
        Expr::Nabla(Box::new(body))
    }

    pub fn prime(body: Expr) -> Expr {
        Expr::Prime(Box::new(body))
    }

    pub fn modal(modality: Modality, body: Expr) -> Expr {
        match modality {
            Modality::Nabla => Expr::nabla(body),
            Modality::Prime => Expr::prime(body),
        }
    }

    pub fn truth() -> Expr {
        Expr::implies(Expr::False, Expr::False)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::implies(e, Expr::False)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::not(Expr::implies(a, Expr::not(b)))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::implies(Expr::not(a), b)
    }

    pub fn iff(a: Expr, b: Expr) -> Expr {
        Expr::and(Expr::implies(a.clone(), b.clone()), Expr::implies(b, a))
    }

    pub fn exists(var: impl Into<String>, body: Expr) -> Expr {
        Expr::not(Expr::forall(var, Expr::not(body)))
    }

    pub fn delta(body: Expr) -> Expr {
        Expr::not(Expr::nabla(Expr::not(body)))
    }

    /// Conjunction of a list; the empty conjunction is `true`.
    pub fn and_all(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut items: Vec<Expr> = items.into_iter().collect();
        match items.len() {
            0 => Expr::truth(),
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(prev) = items.pop() {
                    acc = Expr::and(prev, acc);
                }
                acc
            }
        }
    }

    /// Disjunction of a list; the empty disjunction is `false`.
    pub fn or_all(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut items: Vec<Expr> = items.into_iter().collect();
        match items.len() {
            0 => Expr::False,
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(prev) = items.pop() {
                    acc = Expr::or(prev, acc);
                }
                acc
            }
        }
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Rigid(_) | Expr::Flex(_) | Expr::False => Vec::new(),
            Expr::Op(_, args) | Expr::Def(_, args) => args.iter().collect(),
            Expr::Eq(a, b) | Expr::Implies(a, b) => vec![a, b],
            Expr::Forall(_, body) | Expr::Nabla(body) | Expr::Prime(body) => vec![body],
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn any(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    /// Maximum nesting of modal operators.
    pub fn modal_depth(&self) -> usize {
        let inner = self
            .children()
            .into_iter()
            .map(Expr::modal_depth)
            .max()
            .unwrap_or(0);
        match self {
            Expr::Nabla(_) | Expr::Prime(_) => inner + 1,
            _ => inner,
        }
    }

    pub fn contains_modal(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Nabla(_) | Expr::Prime(_)))
    }

    pub fn contains_prime(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Prime(_)))
    }

    pub fn contains_def(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Def(..)))
    }

    /// True when some `Prime` node has another `Prime` below it.
    pub fn has_nested_prime(&self) -> bool {
        match self {
            Expr::Prime(body) => body.contains_prime(),
            _ => self.children().into_iter().any(Expr::has_nested_prime),
        }
    }

    /// Every name mentioned anywhere, including binders and operator symbols.
    pub fn names(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Rigid(n) | Expr::Flex(n) => {
                out.insert(n.clone());
            }
            Expr::Op(n, _) | Expr::Def(n, _) | Expr::Forall(n, _) => {
                out.insert(n.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.names(out);
        }
    }

    /// Rebuild the node with the given children, keeping its head.
    pub(crate) fn with_children(&self, mut kids: Vec<Expr>) -> Expr {
        match self {
            Expr::Rigid(_) | Expr::Flex(_) | Expr::False => self.clone(),
            Expr::Op(n, _) => Expr::Op(n.clone(), kids),
            Expr::Def(n, _) => Expr::Def(n.clone(), kids),
            Expr::Eq(..) => {
                let b = kids.pop().unwrap();
                let a = kids.pop().unwrap();
                Expr::eq(a, b)
            }
            Expr::Implies(..) => {
                let b = kids.pop().unwrap();
                let a = kids.pop().unwrap();
                Expr::implies(a, b)
            }
            Expr::Forall(x, _) => Expr::forall(x.clone(), kids.pop().unwrap()),
            Expr::Nabla(_) => Expr::nabla(kids.pop().unwrap()),
            Expr::Prime(_) => Expr::prime(kids.pop().unwrap()),
        }
    }
}
