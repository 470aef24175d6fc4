//! C3 linearization over an arbitrary base-class relation.

use std::collections::HashMap;

use log::warn;
use thiserror::Error;

use crate::facts::ident::Ident;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MroError {
    #[error("inheritance cycle through {0}")]
    Cycle(Ident),
}

/// Linearizes `cls`. Falls back to depth-first, left-to-right order without
/// duplicates when C3 has no consistent solution.
pub fn linearize(cls: &Ident, bases_of: &dyn Fn(&Ident) -> Vec<Ident>) -> Result<Vec<Ident>, MroError> {
    let mut memo = HashMap::new();
    let mut active = Vec::new();
    c3(cls, bases_of, &mut memo, &mut active)
}

fn c3(
    cls: &Ident,
    bases_of: &dyn Fn(&Ident) -> Vec<Ident>,
    memo: &mut HashMap<Ident, Vec<Ident>>,
    active: &mut Vec<Ident>,
) -> Result<Vec<Ident>, MroError> {
    if let Some(done) = memo.get(cls) {
        return Ok(done.clone());
    }
    if active.contains(cls) {
        return Err(MroError::Cycle(cls.clone()));
    }
    active.push(cls.clone());
    let bases = bases_of(cls);
    let mut seqs = Vec::with_capacity(bases.len() + 1);
    for b in &bases {
        seqs.push(c3(b, bases_of, memo, active)?);
    }
    active.pop();
    seqs.push(bases.clone());

    let mut out = vec![cls.clone()];
    match merge(seqs.clone()) {
        Some(rest) => out.extend(rest),
        None => {
            warn!("{cls}: inconsistent method resolution order, using depth-first order");
            for seq in seqs {
                for c in seq {
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
    }
    memo.insert(cls.clone(), out.clone());
    Ok(out)
}

fn merge(mut seqs: Vec<Vec<Ident>>) -> Option<Vec<Ident>> {
    let mut out = Vec::new();
    loop {
        seqs.retain(|s| !s.is_empty());
        if seqs.is_empty() {
            return Some(out);
        }
        let head = seqs
            .iter()
            .map(|s| &s[0])
            .find(|h| seqs.iter().all(|s| !s[1..].contains(h)))?
            .clone();
        for s in seqs.iter_mut() {
            if s[0] == head {
                s.remove(0);
            }
        }
        out.push(head);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::ident::Kind;

    fn cls(n: &str) -> Ident {
        Ident::module("m").child(Kind::Cls, n)
    }

    fn hier(pairs: &'static [(&'static str, &'static [&'static str])]) -> impl Fn(&Ident) -> Vec<Ident> {
        move |c: &Ident| {
            pairs
                .iter()
                .find(|(n, _)| *n == c.name())
                .map(|(_, bs)| bs.iter().map(|b| cls(b)).collect())
                .unwrap_or_default()
        }
    }

    fn names(v: Vec<Ident>) -> Vec<String> {
        v.into_iter().map(|c| c.name().to_string()).collect()
    }

    #[test]
    fn diamond_matches_interpreter_order() {
        // `class D(B, C)` with B(A), C(A): the interpreter reports D, B, C, A.
        let h = hier(&[("D", &["B", "C"]), ("B", &["A"]), ("C", &["A"])]);
        assert_eq!(names(linearize(&cls("D"), &h).unwrap()), ["D", "B", "C", "A"]);
    }

    #[test]
    fn lone_class() {
        assert_eq!(names(linearize(&cls("K"), &hier(&[])).unwrap()), ["K"]);
    }

    #[test]
    fn single_base() {
        let h = hier(&[("Proc", &["Base"])]);
        assert_eq!(names(linearize(&cls("Proc"), &h).unwrap()), ["Proc", "Base"]);
    }

    #[test]
    fn inconsistent_order_falls_back() {
        // X(A, B), Y(B, A), Z(X, Y) has no C3 solution.
        let h = hier(&[("X", &["A", "B"]), ("Y", &["B", "A"]), ("Z", &["X", "Y"])]);
        assert_eq!(names(linearize(&cls("Z"), &h).unwrap()), ["Z", "X", "A", "B", "Y"]);
    }

    #[test]
    fn cycles_are_errors() {
        let h = hier(&[("P", &["Q"]), ("Q", &["P"])]);
        assert!(matches!(linearize(&cls("P"), &h), Err(MroError::Cycle(_))));
    }
}
