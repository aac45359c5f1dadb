//! Sequents: finite formula sets with canonical order and set semantics.

use std::fmt;

use crate::formula::Formula;

/// A finite set of formulas, kept sorted in the canonical formula order and
/// deduplicated, so equality and hashing behave as set equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Default)]
pub struct Sequent(Vec<Formula>);

impl Sequent {
    pub fn new(mut formulas: Vec<Formula>) -> Sequent {
        formulas.sort();
        formulas.dedup();
        Sequent(formulas)
    }

    pub fn singleton(f: Formula) -> Sequent {
        Sequent(vec![f])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.0.binary_search(f).is_ok()
    }

    pub fn with(&self, f: Formula) -> Sequent {
        match self.0.binary_search(&f) {
            Ok(_) => self.clone(),
            Err(i) => {
                let mut v = self.0.clone();
                v.insert(i, f);
                Sequent(v)
            }
        }
    }

    pub fn without(&self, f: &Formula) -> Sequent {
        match self.0.binary_search(f) {
            Ok(i) => {
                let mut v = self.0.clone();
                v.remove(i);
                Sequent(v)
            }
            Err(_) => self.clone(),
        }
    }

    pub fn union(&self, other: &Sequent) -> Sequent {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Sequent::new(v)
    }

    /// Total size: sum of the member sizes.
    pub fn size(&self) -> u64 {
        self.0.iter().map(|f| f.size()).sum()
    }

    pub fn as_slice(&self) -> &[Formula] {
        &self.0
    }
}

impl FromIterator<Formula> for Sequent {
    fn from_iter<T: IntoIterator<Item = Formula>>(iter: T) -> Self {
        Sequent::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.0 {
            if !first {
                write!(f, "; ")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_semantics() {
        let p = Formula::var("p");
        let q = Formula::var("q");
        let a = Sequent::new(vec![p.clone(), q.clone(), p.clone()]);
        let b = Sequent::new(vec![q.clone(), p.clone()]);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.contains(&p));
        assert!(!a.without(&p).contains(&p));
    }
}
