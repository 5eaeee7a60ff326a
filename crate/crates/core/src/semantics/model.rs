//! Finite Kripke models, first-order structures and propositional Kripke
//! models.

use std::collections::BTreeMap;

use thiserror::Error;

/// An element of a finite universe, as an index into its name list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Val(pub u16);

impl Val {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Total lookup table `U^n -> U`. Rows are ordered lexicographically with
/// the first argument most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpTable {
    pub arity: usize,
    pub values: Vec<Val>,
}

impl OpTable {
    pub fn constant(arity: usize, universe: usize, v: Val) -> OpTable {
        OpTable {
            arity,
            values: vec![v; universe.pow(arity as u32)],
        }
    }

    /// Build a table by evaluating `f` on every argument tuple.
    pub fn tabulate<E>(
        arity: usize,
        universe: usize,
        mut f: impl FnMut(&[Val]) -> Result<Val, E>,
    ) -> Result<OpTable, E> {
        let rows = universe.pow(arity as u32);
        let mut values = Vec::with_capacity(rows);
        let mut args = vec![Val(0); arity];
        for row in 0..rows {
            decode_row(row, universe, &mut args);
            values.push(f(&args)?);
        }
        Ok(OpTable { arity, values })
    }

    pub fn row_index(&self, args: &[Val], universe: usize) -> usize {
        args.iter().fold(0, |acc, a| acc * universe + a.index())
    }

    pub fn apply(&self, args: &[Val], universe: usize) -> Val {
        self.values[self.row_index(args, universe)]
    }
}

pub(crate) fn decode_row(mut row: usize, universe: usize, args: &mut [Val]) {
    for slot in args.iter_mut().rev() {
        *slot = Val((row % universe) as u16);
        row /= universe;
    }
}

/// Accessibility relation as sorted successor lists.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Relation {
    succ: Vec<Vec<usize>>,
}

impl Relation {
    pub fn empty(states: usize) -> Relation {
        Relation {
            succ: vec![Vec::new(); states],
        }
    }

    pub fn from_pairs(states: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Relation {
        let mut r = Relation::empty(states);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    /// Bit `i * states + j` of `bits` says whether `(i, j)` is in the relation.
    pub fn from_bits(states: usize, bits: u64) -> Relation {
        Relation::from_pairs(
            states,
            (0..states * states)
                .filter(|k| bits >> k & 1 == 1)
                .map(|k| (k / states, k % states)),
        )
    }

    /// The relation of a total function given as successor per state.
    pub fn from_function(succ: &[usize]) -> Relation {
        Relation::from_pairs(succ.len(), succ.iter().copied().enumerate())
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        let row = &mut self.succ[a];
        if let Err(pos) = row.binary_search(&b) {
            row.insert(pos, b);
        }
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.succ.get(a).is_some_and(|row| row.binary_search(&b).is_ok())
    }

    pub fn states(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.succ[w]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().map(move |&b| (a, b)))
    }

    pub fn is_functional(&self) -> bool {
        self.succ.iter().all(|row| row.len() == 1)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.states()).all(|w| self.contains(w, w))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs()
            .all(|(a, b)| self.succ[b].iter().all(|&c| self.contains(a, c)))
    }

    pub fn reflexive_closure(&mut self) {
        for w in 0..self.states() {
            self.insert(w, w);
        }
    }

    pub fn transitive_closure(&mut self) {
        let n = self.states();
        for k in 0..n {
            for i in 0..n {
                if self.contains(i, k) {
                    let row: Vec<usize> = self.succ[k].clone();
                    for j in row {
                        self.insert(i, j);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("tt and ff must be distinct elements of the universe")]
    BadTruthValues,
    #[error("the universe must have at most 65536 elements")]
    UniverseTooLarge,
    #[error("a model needs at least one state")]
    NoStates,
    #[error("table for `{0}` is not total")]
    PartialTable(String),
    #[error("valuation of `{0}` does not cover every state")]
    PartialValuation(String),
    #[error("value out of range in `{0}`")]
    OutOfRange(String),
    #[error("relation `{0}` mentions a state outside the model")]
    BadRelation(String),
}

/// A finite Kripke model with constant domain. The interpretation of the
/// box operator is fixed by its defining condition: it yields tt exactly
/// when every successor value is tt, and ff otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub universe: Vec<String>,
    pub tt: Val,
    pub ff: Val,
    pub ops: BTreeMap<String, OpTable>,
    pub xi: BTreeMap<String, Val>,
    pub states: Vec<String>,
    pub r: Relation,
    /// Flexible variable valuation, one value per state.
    pub zeta: BTreeMap<String, Vec<Val>>,
    /// Accessibility for the prime modality, when the model has one.
    pub prime_r: Option<Relation>,
}

impl KripkeModel {
    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let u = self.universe.len();
        if u > u16::MAX as usize + 1 {
            return Err(ModelError::UniverseTooLarge);
        }
        if self.tt == self.ff || self.tt.index() >= u || self.ff.index() >= u {
            return Err(ModelError::BadTruthValues);
        }
        if self.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        let n = self.states.len();
        for (name, t) in &self.ops {
            if t.values.len() != u.pow(t.arity as u32) {
                return Err(ModelError::PartialTable(name.clone()));
            }
            if t.values.iter().any(|v| v.index() >= u) {
                return Err(ModelError::OutOfRange(name.clone()));
            }
        }
        for (name, v) in &self.xi {
            if v.index() >= u {
                return Err(ModelError::OutOfRange(name.clone()));
            }
        }
        for (name, vals) in &self.zeta {
            if vals.len() != n {
                return Err(ModelError::PartialValuation(name.clone()));
            }
            if vals.iter().any(|v| v.index() >= u) {
                return Err(ModelError::OutOfRange(name.clone()));
            }
        }
        if self.r.states() != n {
            return Err(ModelError::BadRelation("R".into()));
        }
        if let Some(p) = &self.prime_r {
            if p.states() != n {
                return Err(ModelError::BadRelation("primeR".into()));
            }
        }
        Ok(())
    }

    pub fn relation(&self, m: crate::syntax::Modality) -> Option<&Relation> {
        match m {
            crate::syntax::Modality::Nabla => Some(&self.r),
            crate::syntax::Modality::Prime => self.prime_r.as_ref(),
        }
    }
}

/// A first-order structure over the variables of both sorts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolStructure {
    pub universe: Vec<String>,
    pub tt: Val,
    pub ff: Val,
    pub ops: BTreeMap<String, OpTable>,
    /// Values of rigid and flexible variables alike.
    pub xi: BTreeMap<String, Val>,
}

impl FolStructure {
    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }
}

/// A propositional Kripke model; atoms are flexible variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropModel {
    pub r: Relation,
    pub prime_r: Option<Relation>,
    pub zeta: BTreeMap<String, Vec<bool>>,
}

impl PropModel {
    pub fn state_count(&self) -> usize {
        self.r.states()
    }

    pub fn relation(&self, m: crate::syntax::Modality) -> Option<&Relation> {
        match m {
            crate::syntax::Modality::Nabla => Some(&self.r),
            crate::syntax::Modality::Prime => self.prime_r.as_ref(),
        }
    }

    /// The same model as a two-valued Kripke model, for the model file format.
    pub fn to_kripke(&self) -> KripkeModel {
        let (tt, ff) = (Val(0), Val(1));
        KripkeModel {
            universe: vec!["tt".into(), "ff".into()],
            tt,
            ff,
            ops: BTreeMap::new(),
            xi: BTreeMap::new(),
            states: (0..self.state_count()).map(|i| format!("s{i}")).collect(),
            r: self.r.clone(),
            zeta: self
                .zeta
                .iter()
                .map(|(a, vals)| (a.clone(), vals.iter().map(|&b| if b { tt } else { ff }).collect()))
                .collect(),
            prime_r: self.prime_r.clone(),
        }
    }
}

/// `["tt", "ff", "a", "b", ...]` with tt = 0 and ff = 1.
pub fn standard_universe(size: usize) -> Vec<String> {
    assert!(size >= 2, "a universe needs tt and ff");
    let mut out = vec!["tt".to_string(), "ff".to_string()];
    for i in 2..size {
        let i = i - 2;
        out.push(if i < 26 {
            ((b'a' + i as u8) as char).to_string()
        } else {
            format!("e{i}")
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_are_lexicographic() {
        let t = OpTable::tabulate(2, 3, |args| Ok::<_, ()>(Val(args[0].0 * 10 + args[1].0))).unwrap();
        assert_eq!(t.values.len(), 9);
        assert_eq!(t.apply(&[Val(2), Val(1)], 3), Val(21));
        assert_eq!(t.values[5], Val(12));
    }

    #[test]
    fn relation_closures() {
        let mut r = Relation::from_pairs(3, [(0, 1), (1, 2)]);
        assert!(!r.is_transitive());
        r.transitive_closure();
        assert!(r.contains(0, 2));
        assert!(r.is_transitive());
        r.reflexive_closure();
        assert!(r.is_reflexive());
        assert!(Relation::from_function(&[1, 0]).is_functional());
        assert_eq!(Relation::from_bits(2, 0b1001).pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 1)]);
    }
}
