//! Formulae of linear equality logic and the raw material they are built
//! from: variables, terms, relation symbols, renamings.
//!
//! A formula is either the empty conjunction `T`, an atom `t1 <= t2` or
//! `t1 == t2`, or a conjunction of two formulae. Every side of every atom
//! is one *occurrence region*; the variables inside it, read left to right,
//! are the *occurrences* of the formula. Occurrences are what the diagram
//! layer draws its rows from, so most of the bookkeeping here is about
//! flattening formulae into occurrence order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// An object variable. Cheap to clone; equality is by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Self {
        Variable(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Variable({})", self.0)
    }
}

impl From<&str> for Variable {
    fn from(name: &str) -> Self {
        Variable::new(name)
    }
}

/// An object term: a variable, or a binary product of terms. Products are
/// only admitted by the dotted theories; the typing layer enforces that.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Variable),
    Prod(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Variable::new(name))
    }

    pub fn prod(lhs: Term, rhs: Term) -> Self {
        Term::Prod(Box::new(lhs), Box::new(rhs))
    }

    /// Variable occurrences in left-to-right order.
    pub fn vars(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Variable>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::Prod(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// Number of variable occurrences.
    pub fn len(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Prod(l, r) => l.len() + r.len(),
        }
    }

    pub fn has_product(&self) -> bool {
        matches!(self, Term::Prod(..))
    }

    pub fn rename(&self, renaming: &Renaming) -> Term {
        match self {
            Term::Var(v) => Term::Var(renaming.apply(v)),
            Term::Prod(l, r) => Term::prod(l.rename(renaming), r.rename(renaming)),
        }
    }

    /// Rebuilds this term with its variable occurrences replaced, in order,
    /// by the names drawn from `feed`. Used when relabelling a diagram back
    /// into syntax.
    pub fn relabel(&self, feed: &mut impl Iterator<Item = Variable>) -> Term {
        match self {
            Term::Var(_) => Term::Var(feed.next().expect("relabel feed exhausted")),
            Term::Prod(l, r) => Term::prod(l.relabel(feed), r.relabel(feed)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Prod(l, r) => write!(f, "({l} . {r})"),
        }
    }
}

/// The relation symbol of an atom.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Leq,
    Equiv,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Leq => "<=",
            Rel::Equiv => "==",
        })
    }
}

/// A formula: `T`, an atom, or a conjunction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    Top,
    Atom(Rel, Term, Term),
    Conj(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: Rel, lhs: Term, rhs: Term) -> Self {
        Formula::Atom(rel, lhs, rhs)
    }

    pub fn conj(lhs: Formula, rhs: Formula) -> Self {
        Formula::Conj(Box::new(lhs), Box::new(rhs))
    }

    /// Variable occurrences in left-to-right order: for each atom, the
    /// variables of its left side then of its right side. `T` contributes
    /// nothing.
    pub fn occurrences(&self) -> Vec<Variable> {
        let mut out = Vec::new();
        self.collect_occurrences(&mut out);
        out
    }

    fn collect_occurrences(&self, out: &mut Vec<Variable>) {
        match self {
            Formula::Top => {}
            Formula::Atom(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Formula::Conj(l, r) => {
                l.collect_occurrences(out);
                r.collect_occurrences(out);
            }
        }
    }

    /// Number of variable occurrences.
    pub fn occ_len(&self) -> usize {
        match self {
            Formula::Top => 0,
            Formula::Atom(_, l, r) => l.len() + r.len(),
            Formula::Conj(l, r) => l.occ_len() + r.occ_len(),
        }
    }

    /// The atoms of the formula, left to right, each with the index of its
    /// first occurrence in the flattened occurrence row.
    pub fn atom_spans(&self) -> Vec<AtomSpan<'_>> {
        let mut out = Vec::new();
        self.collect_atom_spans(0, &mut out);
        out
    }

    fn collect_atom_spans<'a>(&'a self, start: usize, out: &mut Vec<AtomSpan<'a>>) -> usize {
        match self {
            Formula::Top => start,
            Formula::Atom(rel, l, r) => {
                out.push(AtomSpan {
                    rel: *rel,
                    lhs: l,
                    rhs: r,
                    start,
                });
                start + l.len() + r.len()
            }
            Formula::Conj(l, r) => {
                let mid = l.collect_atom_spans(start, out);
                r.collect_atom_spans(mid, out)
            }
        }
    }

    pub fn has_top(&self) -> bool {
        match self {
            Formula::Top => true,
            Formula::Atom(..) => false,
            Formula::Conj(l, r) => l.has_top() || r.has_top(),
        }
    }

    pub fn has_product(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::Atom(_, l, r) => l.has_product() || r.has_product(),
            Formula::Conj(l, r) => l.has_product() || r.has_product(),
        }
    }

    pub fn contains_var(&self, v: &Variable) -> bool {
        match self {
            Formula::Top => false,
            Formula::Atom(_, l, r) => l.vars().contains(v) || r.vars().contains(v),
            Formula::Conj(l, r) => l.contains_var(v) || r.contains_var(v),
        }
    }

    pub fn rename(&self, renaming: &Renaming) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom(rel, l, r) => {
                Formula::Atom(*rel, l.rename(renaming), r.rename(renaming))
            }
            Formula::Conj(l, r) => Formula::conj(l.rename(renaming), r.rename(renaming)),
        }
    }

    /// Rebuilds the formula with occurrences replaced, in order, from `feed`.
    pub fn relabel(&self, feed: &mut impl Iterator<Item = Variable>) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom(rel, l, r) => {
                Formula::Atom(*rel, l.relabel(feed), r.relabel(feed))
            }
            Formula::Conj(l, r) => Formula::conj(l.relabel(feed), r.relabel(feed)),
        }
    }

    /// The formula with every `T` conjunct removed. If nothing but `T`
    /// remains the result is `T` itself.
    pub fn strip_top(&self) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Atom(..) => self.clone(),
            Formula::Conj(l, r) => match (l.strip_top(), r.strip_top()) {
                (Formula::Top, r2) => r2,
                (l2, Formula::Top) => l2,
                (l2, r2) => Formula::conj(l2, r2),
            },
        }
    }

    /// The subformula at `path`, if the path exists.
    pub fn subformula(&self, path: &FormulaPath) -> Option<&Formula> {
        let mut cur = self;
        for step in &path.0 {
            match (cur, step) {
                (Formula::Conj(l, _), Branch::L) => cur = l,
                (Formula::Conj(_, r), Branch::R) => cur = r,
                _ => return None,
            }
        }
        Some(cur)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("T"),
            Formula::Atom(rel, l, r) => write!(f, "{l}{rel}{r}"),
            Formula::Conj(l, r) => {
                // Conjunction reads right-associated; only a conjunction on
                // the left needs parentheses.
                match **l {
                    Formula::Conj(..) => write!(f, "({l}) /\\ {r}"),
                    _ => write!(f, "{l} /\\ {r}"),
                }
            }
        }
    }
}

/// One atom of a formula together with the index of its first occurrence
/// in the formula's occurrence row.
#[derive(Clone, Copy, Debug)]
pub struct AtomSpan<'a> {
    pub rel: Rel,
    pub lhs: &'a Term,
    pub rhs: &'a Term,
    pub start: usize,
}

impl AtomSpan<'_> {
    pub fn lhs_len(&self) -> usize {
        self.lhs.len()
    }

    pub fn rhs_len(&self) -> usize {
        self.rhs.len()
    }

    /// Total number of occurrences in the atom.
    pub fn len(&self) -> usize {
        self.lhs.len() + self.rhs.len()
    }

    /// One past the last occurrence index of the atom.
    pub fn end(&self) -> usize {
        self.start + self.len()
    }
}

/// A branch choice inside a formula tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Branch {
    L,
    R,
}

/// A position in a formula tree: the sequence of branches from the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct FormulaPath(pub Vec<Branch>);

impl FormulaPath {
    pub fn root() -> Self {
        FormulaPath(Vec::new())
    }

    pub fn child(&self, b: Branch) -> Self {
        let mut steps = self.0.clone();
        steps.push(b);
        FormulaPath(steps)
    }
}

impl fmt::Display for FormulaPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for b in &self.0 {
            f.write_str(match b {
                Branch::L => "l",
                Branch::R => "r",
            })?;
        }
        Ok(())
    }
}

/// A finite map from variables to variables, read as the identity outside
/// its domain.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Renaming(BTreeMap<Variable, Variable>);

impl Renaming {
    pub fn new() -> Self {
        Renaming(BTreeMap::new())
    }

    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Variable, Variable)>,
    {
        Renaming(pairs.into_iter().collect())
    }

    pub fn insert(&mut self, from: Variable, to: Variable) {
        self.0.insert(from, to);
    }

    pub fn apply(&self, v: &Variable) -> Variable {
        self.0.get(v).cloned().unwrap_or_else(|| v.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Variable)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Variable {
        Variable::new(name)
    }

    fn leq(a: &str, b: &str) -> Formula {
        Formula::atom(Rel::Leq, Term::var(a), Term::var(b))
    }

    #[test]
    fn occurrences_flatten_atoms_left_to_right() {
        let f = Formula::conj(leq("x", "y"), leq("y", "z"));
        assert_eq!(f.occurrences(), vec![v("x"), v("y"), v("y"), v("z")]);
        assert_eq!(f.occ_len(), 4);
    }

    #[test]
    fn top_contributes_no_occurrences() {
        let f = Formula::conj(Formula::Top, Formula::conj(leq("x", "x"), Formula::Top));
        assert_eq!(f.occurrences(), vec![v("x"), v("x")]);
    }

    #[test]
    fn product_occurrences_are_variable_level() {
        let t = Term::prod(Term::var("x"), Term::var("y"));
        let f = Formula::atom(Rel::Equiv, t, Term::var("z"));
        assert_eq!(f.occurrences(), vec![v("x"), v("y"), v("z")]);
        assert_eq!(f.occ_len(), 3);
    }

    #[test]
    fn atom_spans_report_start_indices() {
        let f = Formula::conj(
            Formula::conj(leq("x", "y"), Formula::Top),
            Formula::atom(
                Rel::Leq,
                Term::prod(Term::var("u"), Term::var("v")),
                Term::var("w"),
            ),
        );
        let spans = f.atom_spans();
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].start, 0);
        assert_eq!(spans[0].len(), 2);
        assert_eq!(spans[1].start, 2);
        assert_eq!(spans[1].lhs_len(), 2);
        assert_eq!(spans[1].end(), 5);
    }

    #[test]
    fn strip_top_removes_units() {
        let f = Formula::conj(leq("x", "y"), Formula::Top);
        assert_eq!(f.strip_top(), leq("x", "y"));

        let all_top = Formula::conj(Formula::Top, Formula::conj(Formula::Top, Formula::Top));
        assert_eq!(all_top.strip_top(), Formula::Top);

        let mixed = Formula::conj(
            Formula::conj(Formula::Top, leq("x", "y")),
            Formula::conj(leq("y", "z"), Formula::Top),
        );
        assert_eq!(
            mixed.strip_top(),
            Formula::conj(leq("x", "y"), leq("y", "z"))
        );
    }

    #[test]
    fn rename_is_identity_outside_domain() {
        let ren = Renaming::from_pairs([(v("x"), v("q"))]);
        let f = Formula::conj(leq("x", "y"), leq("y", "x"));
        let expected = Formula::conj(leq("q", "y"), leq("y", "q"));
        assert_eq!(f.rename(&ren), expected);
    }

    #[test]
    fn relabel_consumes_occurrences_in_order() {
        let f = Formula::conj(leq("x", "x"), leq("x", "x"));
        let fresh = ["v1", "v2", "v3", "v4"];
        let mut feed = fresh.iter().map(|n| v(n));
        let relabelled = f.relabel(&mut feed);
        assert_eq!(
            relabelled,
            Formula::conj(leq("v1", "v2"), leq("v3", "v4"))
        );
        assert!(feed.next().is_none());
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let f = Formula::conj(
            Formula::conj(leq("x", "y"), leq("y", "z")),
            Formula::conj(leq("z", "u"), Formula::Top),
        );
        assert_eq!(f.to_string(), "(x<=y /\\ y<=z) /\\ z<=u /\\ T");

        let t = Term::prod(Term::prod(Term::var("x"), Term::var("y")), Term::var("z"));
        let a = Formula::atom(Rel::Equiv, t, Term::var("w"));
        assert_eq!(a.to_string(), "((x . y) . z)==w");
    }

    #[test]
    fn formula_path_lookup() {
        let f = Formula::conj(leq("x", "y"), Formula::conj(leq("y", "z"), Formula::Top));
        let path = FormulaPath(vec![Branch::R, Branch::L]);
        assert_eq!(f.subformula(&path), Some(&leq("y", "z")));
        assert_eq!(f.subformula(&FormulaPath(vec![Branch::L, Branch::L])), None);
        assert_eq!(path.to_string(), "rl");
        assert_eq!(FormulaPath::root().to_string(), "-");
    }
}
