//! The architecture graph G = ⟨S, L⟩: declared locations, declared one-way
//! communication links, constraint compatibility and the naive deterministic
//! constraint resolver.

use indexmap::IndexSet;
use thiserror::Error;

use crate::ast::{ArchDecl, Location};

/// A location constraint `lhs ~> rhs`: satisfied when lhs = rhs or a link
/// from lhs to rhs exists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: Location,
    pub rhs: Location,
}

impl Constraint {
    pub fn new(lhs: Location, rhs: Location) -> Self {
        Constraint { lhs, rhs }
    }
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ~> {}", self.lhs, self.rhs)
    }
}

/// An ordered, duplicate-free set of constraints. Insertion order is kept so
/// that resolution is deterministic.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    items: IndexSet<(Location, Location)>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: Constraint) {
        self.items.insert((c.lhs, c.rhs));
    }

    pub fn iter(&self) -> impl Iterator<Item = Constraint> + '_ {
        self.items
            .iter()
            .map(|(l, r)| Constraint::new(l.clone(), r.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }
}

impl FromIterator<Constraint> for ConstraintSet {
    fn from_iter<T: IntoIterator<Item = Constraint>>(iter: T) -> Self {
        let mut s = ConstraintSet::new();
        for c in iter {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ArchError {
    /// ARCH001: a link endpoint was not declared before the link.
    #[error("ARCH001: link endpoint `{0}` is not a declared location")]
    UndeclaredLocation(String),
    /// ARCH002: a constraint still mentions an unresolved location variable.
    #[error("ARCH002: constraint `{0}` mentions an unresolved location variable")]
    UnresolvedVariable(String),
    /// ARCH003: the constraint set cannot be satisfied; carries a witness.
    #[error("ARCH003: unsatisfiable location constraint `{0}`")]
    Unsatisfiable(String),
}

/// The architecture graph: declared locations S (in declaration order) and
/// links L ⊆ S×S. Immutable after [`build_arch`]; all queries are pure.
#[derive(Debug, Clone, Default)]
pub struct ArchGraph {
    locations: IndexSet<String>,
    links: IndexSet<(String, String)>,
}

impl ArchGraph {
    pub fn locations(&self) -> impl Iterator<Item = &str> {
        self.locations.iter().map(|s| s.as_str())
    }

    pub fn links(&self) -> impl Iterator<Item = (&str, &str)> {
        self.links.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn is_location(&self, name: &str) -> bool {
        self.locations.contains(name)
    }

    pub fn has_link(&self, from: &str, to: &str) -> bool {
        self.links.contains(&(from.to_string(), to.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    /// `s ~> s'` against this graph; both sides must be constants.
    fn satisfied(&self, c: &Constraint) -> Result<bool, ArchError> {
        let lhs = const_name(&c.lhs).ok_or_else(|| ArchError::UnresolvedVariable(c.to_string()))?;
        let rhs = const_name(&c.rhs).ok_or_else(|| ArchError::UnresolvedVariable(c.to_string()))?;
        Ok(lhs == rhs || self.has_link(lhs, rhs))
    }
}

fn const_name(l: &Location) -> Option<&str> {
    match l {
        Location::Const(s) => Some(s.as_str()),
        Location::Var(_) => None,
    }
}

/// Left-to-right fold of the architecture declarations starting from ⟨∅,∅⟩.
/// A link may only mention locations already in S.
pub fn build_arch(decls: &[ArchDecl]) -> Result<ArchGraph, ArchError> {
    let mut g = ArchGraph::default();
    for d in decls {
        match d {
            ArchDecl::Loc(name) => {
                g.locations.insert(name.clone());
            }
            ArchDecl::Link(from, to) => {
                for end in [from, to] {
                    if !g.locations.contains(end) {
                        return Err(ArchError::UndeclaredLocation(end.clone()));
                    }
                }
                g.links.insert((from.clone(), to.clone()));
            }
        }
    }
    Ok(g)
}

/// True iff every constraint `s ~> s'` with s ≠ s' has a link (s, s') in g.
/// Constraints must be fully constant (ARCH002 otherwise).
pub fn models(g: &ArchGraph, c: &ConstraintSet) -> Result<bool, ArchError> {
    for item in c.iter() {
        if !g.satisfied(&item)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Extend `hints` to a total assignment of the location variables occurring
/// in `c` such that the substituted set models g.
///
/// Deterministic resolution: variables in first-occurrence order; for each,
/// first try the values of already-resolved constraint partners (equality
/// resolves a constraint for free), then the declared locations in
/// declaration order. The first value under which every fully-assigned
/// constraint holds wins. Unconstrained variables default to the first
/// declared location.
pub fn resolve(
    c: &ConstraintSet,
    g: &ArchGraph,
    hints: &[(String, String)],
) -> Result<Vec<(String, String)>, ArchError> {
    let mut assign: Vec<(String, String)> = hints.to_vec();
    let mut vars: Vec<String> = Vec::new();
    for item in c.iter() {
        for side in [&item.lhs, &item.rhs] {
            if let Location::Var(v) = side {
                if !vars.contains(v) && !assign.iter().any(|(a, _)| a == v) {
                    vars.push(v.clone());
                }
            }
        }
    }

    let lookup = |assign: &[(String, String)], l: &Location| -> Option<String> {
        match l {
            Location::Const(s) => Some(s.clone()),
            Location::Var(v) => assign
                .iter()
                .find(|(a, _)| a == v)
                .map(|(_, val)| val.clone()),
        }
    };

    // all fully-assigned constraints must hold under the partial assignment
    let consistent = |assign: &[(String, String)]| -> Result<Option<Constraint>, ArchError> {
        for item in c.iter() {
            let (lhs, rhs) = (lookup(assign, &item.lhs), lookup(assign, &item.rhs));
            if let (Some(l), Some(r)) = (lhs, rhs) {
                let cc = Constraint::new(Location::Const(l), Location::Const(r));
                if !g.satisfied(&cc)? {
                    return Ok(Some(item));
                }
            }
        }
        Ok(None)
    };

    if let Some(witness) = consistent(&assign)? {
        return Err(ArchError::Unsatisfiable(witness.to_string()));
    }

    for v in vars {
        let mut candidates: Vec<String> = Vec::new();
        // partners first: values already assigned to the other side of a
        // constraint mentioning v
        for item in c.iter() {
            let partner = match (&item.lhs, &item.rhs) {
                (Location::Var(x), other) if *x == v => Some(other),
                (other, Location::Var(x)) if *x == v => Some(other),
                _ => None,
            };
            if let Some(p) = partner {
                if let Some(val) = lookup(&assign, p) {
                    if !candidates.contains(&val) {
                        candidates.push(val);
                    }
                }
            }
        }
        for loc in g.locations() {
            if !candidates.contains(&loc.to_string()) {
                candidates.push(loc.to_string());
            }
        }
        let mut chosen = None;
        let mut witness = None;
        for cand in candidates {
            assign.push((v.clone(), cand.clone()));
            match consistent(&assign)? {
                None => {
                    chosen = Some(cand);
                    assign.pop();
                    break;
                }
                Some(w) => {
                    witness = Some(w);
                    assign.pop();
                }
            }
        }
        match chosen {
            Some(val) => assign.push((v.clone(), val)),
            None => {
                let w = witness
                    .map(|w| w.to_string())
                    .unwrap_or_else(|| format!("{v} has no admissible location"));
                return Err(ArchError::Unsatisfiable(w));
            }
        }
    }
    Ok(assign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab_graph() -> ArchGraph {
        build_arch(&[
            ArchDecl::Loc("A".into()),
            ArchDecl::Loc("B".into()),
            ArchDecl::Link("A".into(), "B".into()),
        ])
        .unwrap()
    }

    fn con(l: Location, r: Location) -> Constraint {
        Constraint::new(l, r)
    }

    fn c(s: &str) -> Location {
        Location::Const(s.into())
    }

    fn v(s: &str) -> Location {
        Location::Var(s.into())
    }

    #[test]
    fn build_fold() {
        let g = ab_graph();
        assert_eq!(g.locations().collect::<Vec<_>>(), vec!["A", "B"]);
        assert_eq!(g.links().collect::<Vec<_>>(), vec![("A", "B")]);

        let empty = build_arch(&[]).unwrap();
        assert!(empty.is_empty());

        let err = build_arch(&[ArchDecl::Link("A".into(), "B".into())]);
        assert_eq!(err, Err(ArchError::UndeclaredLocation("A".into())));
    }

    #[test]
    fn models_examples() {
        let g = ab_graph();
        let ab: ConstraintSet = [con(c("A"), c("B"))].into_iter().collect();
        assert!(models(&g, &ab).unwrap());
        let ba: ConstraintSet = [con(c("B"), c("A"))].into_iter().collect();
        assert!(!models(&g, &ba).unwrap());
        let aa: ConstraintSet = [con(c("A"), c("A"))].into_iter().collect();
        assert!(models(&g, &aa).unwrap());
        let with_var: ConstraintSet = [con(v("d"), c("A"))].into_iter().collect();
        assert!(matches!(
            models(&g, &with_var),
            Err(ArchError::UnresolvedVariable(_))
        ));
    }

    #[test]
    fn models_monotone_in_links() {
        // adding links never turns true into false
        let g1 = ab_graph();
        let g2 = build_arch(&[
            ArchDecl::Loc("A".into()),
            ArchDecl::Loc("B".into()),
            ArchDecl::Link("A".into(), "B".into()),
            ArchDecl::Link("B".into(), "A".into()),
        ])
        .unwrap();
        let sets = [
            [con(c("A"), c("B"))],
            [con(c("B"), c("A"))],
            [con(c("A"), c("A"))],
        ];
        for s in sets {
            let cs: ConstraintSet = s.into_iter().collect();
            if models(&g1, &cs).unwrap() {
                assert!(models(&g2, &cs).unwrap());
            }
        }
    }

    #[test]
    fn resolve_with_hints() {
        let g = ab_graph();
        let cs: ConstraintSet = [con(v("d1"), v("d2"))].into_iter().collect();
        let ok = resolve(
            &cs,
            &g,
            &[("d1".into(), "A".into()), ("d2".into(), "B".into())],
        )
        .unwrap();
        assert!(ok.contains(&("d1".into(), "A".into())));

        let bad = resolve(
            &cs,
            &g,
            &[("d1".into(), "B".into()), ("d2".into(), "A".into())],
        );
        assert!(matches!(bad, Err(ArchError::Unsatisfiable(_))));

        // exhaustive oracle over the 2-location graph: B~>A has no model
        let mut any = false;
        for l in ["A", "B"] {
            for r in ["A", "B"] {
                let cc: ConstraintSet =
                    [con(c(l), c(r))].into_iter().collect();
                if l == "B" && r == "A" {
                    any |= models(&g, &cc).unwrap();
                }
            }
        }
        assert!(!any);
    }

    #[test]
    fn resolve_defaults_and_postcondition() {
        let g = ab_graph();
        // unconstrained variable defaults to the first declared location
        let cs = ConstraintSet::new();
        let out = resolve(&cs, &g, &[]).unwrap();
        assert!(out.is_empty());

        let cs2: ConstraintSet = [con(v("d1"), v("d2"))].into_iter().collect();
        let out2 = resolve(&cs2, &g, &[]).unwrap();
        // substituted back, the set must model g
        let subst: ConstraintSet = cs2
            .iter()
            .map(|cc| {
                let f = |l: &Location| match l {
                    Location::Var(v) => Location::Const(
                        out2.iter().find(|(a, _)| a == v).unwrap().1.clone(),
                    ),
                    other => other.clone(),
                };
                con(f(&cc.lhs), f(&cc.rhs))
            })
            .collect();
        assert!(models(&g, &subst).unwrap());
        // deterministic: equality tie-break puts both on A
        assert_eq!(out2, vec![("d1".into(), "A".into()), ("d2".into(), "A".into())]);
    }
}
