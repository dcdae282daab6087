//! Shape analysis and normal-form passes over arrow terms.
//!
//! A term is treated as a chain of factors `f_n o ... o f_1` read from the
//! outside in, with `f_1` innermost.  The passes below restructure such
//! chains while recording every equation they apply:
//!
//! * [`develop`] factorizes a term so that every factor carries exactly one
//!   generator padded with identities, with a single identity factor at the
//!   innermost position;
//! * [`r_normal`] floats every reflexivity factor to the outside and returns
//!   the split `(f_r, f')` with `f_r` carrying all the reflexivities;
//! * [`delta_sigma_purge`] removes every unit introduction and elimination
//!   from a reflexivity-free term whose endpoints do not mention the unit;
//! * [`s_normal`] cancels paired inversions until no two inversion factors
//!   share a pair of terms.
//!
//! Every pass move is charged against a budget of ten times the squared
//! term size unless the caller overrides it; exceeding the budget is
//! reported as a structured error rather than a panic.  A move is one
//! equation application, or one splice of a canned derivation whose recorded
//! length does not depend on the input.

use std::collections::BTreeMap;
use std::fmt;

use crate::proofterm::{ArrowTerm, ArrowType, Path, PathStep, Theory, TypeError};
use crate::syntax::{Formula, Term, Variable};

use super::derive::Derivation;
use super::macros;
use super::schema::Direction;

use Direction::{L2R, R2L};
use PathStep::{ComposeF as CF, ComposeG as CG, TensorL as TL, TensorR as TR};

/// The factors of a composition chain, outermost first.  A term that is not
/// a composition is its own single factor.
pub fn factors(t: &ArrowTerm) -> Vec<&ArrowTerm> {
    fn go<'a>(t: &'a ArrowTerm, out: &mut Vec<&'a ArrowTerm>) {
        if let ArrowTerm::Compose(g, f) = t {
            go(g, out);
            go(f, out);
        } else {
            out.push(t);
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}

/// An identity map assembled from identities alone: an identity node, or a
/// conjunction of a bare identity with another such map.
pub fn is_one_term(t: &ArrowTerm) -> bool {
    match t {
        ArrowTerm::Id(_) => true,
        ArrowTerm::Tensor(l, r) => {
            (matches!(l.as_ref(), ArrowTerm::Id(_)) && is_one_term(r))
                || (matches!(r.as_ref(), ArrowTerm::Id(_)) && is_one_term(l))
        }
        _ => false,
    }
}

/// The single generator inside a factor built as a generator padded with
/// bare identities, or `None` when the factor has no such shape.
pub fn beta_head(t: &ArrowTerm) -> Option<&ArrowTerm> {
    match t {
        ArrowTerm::Id(_) | ArrowTerm::Compose(..) => None,
        ArrowTerm::Tensor(l, r) => match (l.as_ref(), r.as_ref()) {
            (ArrowTerm::Id(_), inner) if !matches!(inner, ArrowTerm::Id(_)) => beta_head(inner),
            (inner, ArrowTerm::Id(_)) => beta_head(inner),
            _ => None,
        },
        head => Some(head),
    }
}

/// Whether `t` is `head` padded with bare identities.
pub fn is_beta_term(t: &ArrowTerm, head: &ArrowTerm) -> bool {
    beta_head(t) == Some(head)
}

/// Whether `t` carries exactly one generator padded with bare identities.
pub fn is_headed_factor(t: &ArrowTerm) -> bool {
    beta_head(t).is_some()
}

/// Whether every factor of `t` is free of further compositions.
pub fn is_factorized(t: &ArrowTerm) -> bool {
    factors(t)
        .iter()
        .all(|f| !any_node(f, &|n| matches!(n, ArrowTerm::Compose(..))))
}

/// Whether `t` is factorized with an identity map innermost and a single
/// generator in every other factor.
pub fn is_developed(t: &ArrowTerm) -> bool {
    if !is_factorized(t) {
        return false;
    }
    let fs = factors(t);
    let (last, rest) = fs.split_last().expect("a term has at least one factor");
    is_one_term(last) && rest.iter().all(|f| is_headed_factor(f))
}

/// Whether `t` contains no reflexivity node.
pub fn is_r_less(t: &ArrowTerm) -> bool {
    !any_node(t, &|n| matches!(n, ArrowTerm::Refl(_)))
}

/// Whether `t` contains no unit introduction or elimination.
pub fn is_delta_sigma_less(t: &ArrowTerm) -> bool {
    !any_node(t, &|n| {
        matches!(
            n,
            ArrowTerm::DeltaFwd(_)
                | ArrowTerm::DeltaBwd(_)
                | ArrowTerm::SigmaFwd(_)
                | ArrowTerm::SigmaBwd(_)
        )
    })
}

/// Whether `t` is factorized with every factor either an identity map or a
/// reflexivity padded with identities.
pub fn is_r_factorized(t: &ArrowTerm) -> bool {
    is_factorized(t)
        && factors(t)
            .iter()
            .all(|f| is_one_term(f) || matches!(beta_head(f), Some(ArrowTerm::Refl(_))))
}

/// Whether no unordered pair of terms is inverted more than once in `t`.
pub fn is_s_normal(t: &ArrowTerm) -> bool {
    let mut counts: BTreeMap<(Term, Term), usize> = BTreeMap::new();
    fn walk(t: &ArrowTerm, counts: &mut BTreeMap<(Term, Term), usize>) {
        match t {
            ArrowTerm::Inv(a, b) => *counts.entry(inv_key(a, b)).or_insert(0) += 1,
            ArrowTerm::Compose(g, f) => {
                walk(g, counts);
                walk(f, counts);
            }
            ArrowTerm::Tensor(l, r) => {
                walk(l, counts);
                walk(r, counts);
            }
            _ => {}
        }
    }
    walk(t, &mut counts);
    counts.values().all(|&c| c <= 1)
}

/// The first variable whose occurrence count across both endpoint formulae
/// differs from two, if any.
pub fn diversification_failure(ty: &ArrowType) -> Option<(Variable, usize)> {
    let mut counts: BTreeMap<Variable, usize> = BTreeMap::new();
    for v in ty
        .source
        .occurrences()
        .into_iter()
        .chain(ty.target.occurrences())
    {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts.into_iter().find(|&(_, c)| c != 2)
}

/// Whether every variable occurs exactly twice across the two endpoints.
pub fn is_diversified_type(ty: &ArrowType) -> bool {
    diversification_failure(ty).is_none()
}

/// A pass that could not complete, with enough context to act on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PassError {
    /// The input term does not typecheck in the requested theory.
    Type(TypeError),
    /// The unit purge needs unit-free endpoints (or a map between bare
    /// units); this endpoint mentions the unit.
    PreconditionTopInType { formula: Formula },
    /// The unit purge runs after reflexivity extraction only.
    PreconditionNotRLess,
    /// Inversion cancellation needs every variable exactly twice across the
    /// endpoints.
    PreconditionNotDiversified { variable: Variable, count: usize },
    /// The step budget ran out before the pass finished.
    BudgetExceeded { budget: u64, used: u64 },
    /// No equation applies to the configuration the pass reached.
    Blocked { term: ArrowTerm, detail: String },
}

impl fmt::Display for PassError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PassError::Type(e) => write!(f, "{e}"),
            PassError::PreconditionTopInType { formula } => {
                write!(f, "unit purge needs unit-free endpoints, but `{formula}` mentions T")
            }
            PassError::PreconditionNotRLess => {
                write!(f, "unit purge runs on reflexivity-free terms only")
            }
            PassError::PreconditionNotDiversified { variable, count } => write!(
                f,
                "inversion cancellation needs every variable exactly twice across the endpoints, but `{variable}` occurs {count} times"
            ),
            PassError::BudgetExceeded { budget, used } => {
                write!(f, "step budget exhausted: {used} steps charged against {budget}")
            }
            PassError::Blocked { detail, .. } => write!(f, "pass blocked: {detail}"),
        }
    }
}

impl std::error::Error for PassError {}

impl From<TypeError> for PassError {
    fn from(e: TypeError) -> PassError {
        PassError::Type(e)
    }
}

/// Step accounting shared by the passes.  The default allowance is ten times
/// the squared size of the input term.
struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn new(term: &ArrowTerm, requested: Option<u64>) -> Budget {
        let n = term.ast_size() as u64;
        Budget {
            limit: requested.unwrap_or(10 * n * n),
            used: 0,
        }
    }

    /// No limit; used for scratch derivations that count as one move of the
    /// real budget once they are spliced in.
    fn unlimited() -> Budget {
        Budget {
            limit: u64::MAX,
            used: 0,
        }
    }

    fn charge(&mut self, steps: u64) -> Result<(), PassError> {
        self.used = self.used.saturating_add(steps);
        if self.used > self.limit {
            Err(PassError::BudgetExceeded {
                budget: self.limit,
                used: self.used,
            })
        } else {
            Ok(())
        }
    }
}

fn blocked(d: &Derivation, detail: &str) -> PassError {
    PassError::Blocked {
        term: d.end().clone(),
        detail: detail.to_string(),
    }
}

fn sub(d: &Derivation, path: &Path) -> ArrowTerm {
    d.end()
        .subterm(path)
        .unwrap_or_else(|| panic!("derivation end has no subterm at {path}"))
        .clone()
}

fn extended(path: &Path, step: PathStep) -> Path {
    let mut out = path.clone();
    out.0.push(step);
    out
}

fn find_node(t: &ArrowTerm, pred: &dyn Fn(&ArrowTerm) -> bool) -> Option<Path> {
    fn go(t: &ArrowTerm, pred: &dyn Fn(&ArrowTerm) -> bool, acc: &mut Vec<PathStep>) -> bool {
        if pred(t) {
            return true;
        }
        match t {
            ArrowTerm::Compose(g, f) => {
                acc.push(CG);
                if go(g, pred, acc) {
                    return true;
                }
                acc.pop();
                acc.push(CF);
                if go(f, pred, acc) {
                    return true;
                }
                acc.pop();
                false
            }
            ArrowTerm::Tensor(l, r) => {
                acc.push(TL);
                if go(l, pred, acc) {
                    return true;
                }
                acc.pop();
                acc.push(TR);
                if go(r, pred, acc) {
                    return true;
                }
                acc.pop();
                false
            }
            _ => false,
        }
    }
    let mut acc = Vec::new();
    if go(t, pred, &mut acc) {
        Some(Path(acc))
    } else {
        None
    }
}

fn any_node(t: &ArrowTerm, pred: &dyn Fn(&ArrowTerm) -> bool) -> bool {
    find_node(t, pred).is_some()
}

/// Whether no composition hangs off the later side of another composition.
fn right_nested(t: &ArrowTerm) -> bool {
    !any_node(t, &|n| {
        matches!(n, ArrowTerm::Compose(g, _) if matches!(g.as_ref(), ArrowTerm::Compose(..)))
    })
}

/// Paths to the factors of a right-nested chain, outermost first.
fn chain_paths(t: &ArrowTerm) -> Vec<Path> {
    let mut out = Vec::new();
    let mut prefix: Vec<PathStep> = Vec::new();
    let mut cur = t;
    while let ArrowTerm::Compose(g, f) = cur {
        debug_assert!(
            !matches!(g.as_ref(), ArrowTerm::Compose(..)),
            "chain paths need a right-nested term"
        );
        let mut p = prefix.clone();
        p.push(CG);
        out.push(Path(p));
        prefix.push(CF);
        cur = f.as_ref();
    }
    out.push(Path(prefix));
    out
}

/// Conjunction-tree positions of every generator leaf inside a
/// composition-free factor.
fn head_leaf_paths(t: &ArrowTerm) -> Vec<Path> {
    fn go(t: &ArrowTerm, acc: &mut Vec<PathStep>, out: &mut Vec<Path>) {
        match t {
            ArrowTerm::Id(_) => {}
            ArrowTerm::Tensor(l, r) => {
                acc.push(TL);
                go(l, acc, out);
                acc.pop();
                acc.push(TR);
                go(r, acc, out);
                acc.pop();
            }
            ArrowTerm::Compose(..) => {}
            _ => out.push(Path(acc.clone())),
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Position of the single generator in a headed factor.
fn head_path(t: &ArrowTerm) -> Option<Path> {
    let mut leaves = head_leaf_paths(t);
    if leaves.len() == 1 {
        Some(leaves.remove(0))
    } else {
        None
    }
}

fn is_refl_factor(t: &ArrowTerm) -> bool {
    matches!(beta_head(t), Some(ArrowTerm::Refl(_)))
}

fn contains_refl(t: &ArrowTerm) -> bool {
    any_node(t, &|n| matches!(n, ArrowTerm::Refl(_)))
}

fn is_destroyer_factor(t: &ArrowTerm) -> bool {
    matches!(
        beta_head(t),
        Some(ArrowTerm::DeltaFwd(_) | ArrowTerm::SigmaFwd(_))
    )
}

fn inv_key(a: &Term, b: &Term) -> (Term, Term) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

fn key_count(t: &ArrowTerm, key: &(Term, Term)) -> usize {
    fn walk(t: &ArrowTerm, key: &(Term, Term), n: &mut usize) {
        match t {
            ArrowTerm::Inv(a, b) if inv_key(a, b) == *key => *n += 1,
            ArrowTerm::Compose(g, f) => {
                walk(g, key, n);
                walk(f, key, n);
            }
            ArrowTerm::Tensor(l, r) => {
                walk(l, key, n);
                walk(r, key, n);
            }
            _ => {}
        }
    }
    let mut n = 0;
    walk(t, key, &mut n);
    n
}

/// One budgeted, error-mapped equation application.
fn pstep(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    equation: &str,
    path: Path,
    direction: Direction,
) -> Result<(), PassError> {
    budget.charge(1)?;
    d.push(theory, equation, &path, direction)
        .map_err(|e| PassError::Blocked {
            term: d.end().clone(),
            detail: format!("`{equation}` did not apply at {path}: {e}"),
        })
}

/// Splice a finished derivation in at `prefix` as a single pass move; the
/// spliced trace keeps its full length, but canned derivations have fixed
/// costs unrelated to the input, so they count once against the budget.
fn psplice(
    d: &mut Derivation,
    budget: &mut Budget,
    part: &Derivation,
    prefix: &Path,
) -> Result<(), PassError> {
    budget.charge(1)?;
    match d.end().subterm(prefix) {
        Some(t) if *t == part.start => {}
        _ => {
            return Err(PassError::Blocked {
                term: d.end().clone(),
                detail: format!("a canned derivation does not start at {prefix}"),
            })
        }
    }
    let lifted = part.at_path(d.end(), prefix);
    d.extend(&lifted);
    Ok(())
}

/// Merge the composition at `path` into a single conjunction tree as far as
/// the categorial and bifunctoriality equations allow.  Where two generators
/// meet head-on the merge stops; the returned paths mark those meeting
/// points in the rewritten term.
fn fuse(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    path: &Path,
) -> Result<Vec<Path>, PassError> {
    let node = sub(d, path);
    let ArrowTerm::Compose(g, f) = &node else {
        return Ok(Vec::new());
    };
    match (g.as_ref(), f.as_ref()) {
        (ArrowTerm::Id(_), _) => {
            pstep(d, theory, budget, "cat1L", path.clone(), L2R)?;
            Ok(Vec::new())
        }
        (_, ArrowTerm::Id(_)) => {
            pstep(d, theory, budget, "cat1R", path.clone(), L2R)?;
            Ok(Vec::new())
        }
        (ArrowTerm::Tensor(..), ArrowTerm::Tensor(..)) => {
            pstep(d, theory, budget, "and2", path.clone(), R2L)?;
            let mut stops = fuse(d, theory, budget, &extended(path, TL))?;
            stops.extend(fuse(d, theory, budget, &extended(path, TR))?);
            Ok(stops)
        }
        _ => Ok(vec![path.clone()]),
    }
}

/// Split a fused two-generator conjunction tree at `pair` back into a
/// composition, sending the generator at `upper` into the outer factor and
/// the one at `lower` into the inner factor.
fn split_fused(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    pair: &Path,
    upper: &Path,
    lower: &Path,
) -> Result<(), PassError> {
    let tree = sub(d, pair);
    let up_head = tree
        .subterm(upper)
        .expect("upper generator position")
        .clone();
    let low_head = tree
        .subterm(lower)
        .expect("lower generator position")
        .clone();
    let up_source = up_head.infer_type(theory)?.source;
    let low_target = low_head.infer_type(theory)?.target;
    let outer = tree
        .replace_at(lower, ArrowTerm::Id(low_target))
        .expect("lower position is inside the tree");
    let inner = tree
        .replace_at(upper, ArrowTerm::Id(up_source))
        .expect("upper position is inside the tree");
    let mut e = Derivation::empty(ArrowTerm::compose(outer, inner));
    let mut free = Budget::unlimited();
    let stops = fuse(&mut e, theory, &mut free, &Path::default())?;
    if !stops.is_empty() || e.end() != &tree {
        return Err(blocked(d, "a fused pair did not split back into a composition"));
    }
    psplice(d, budget, &e.reversed(), pair)
}

/// Resolve one meeting point left by [`fuse`]: slide, cancel, or absorb the
/// two generators that met there.
fn resolve_stop(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    p: &Path,
) -> Result<(), PassError> {
    use ArrowTerm as A;
    let node = sub(d, p);
    let A::Compose(g, f) = &node else {
        return Err(blocked(d, "a meeting point is not a composition"));
    };
    match (g.as_ref(), f.as_ref()) {
        // unit eliminations meeting their own or the twisted introduction
        (A::DeltaFwd(_), A::DeltaBwd(_)) => {
            pstep(d, theory, budget, "deltadelta2", p.clone(), L2R)
        }
        (A::SigmaFwd(_), A::SigmaBwd(_)) => {
            pstep(d, theory, budget, "sigmasigma2", p.clone(), L2R)
        }
        (A::DeltaFwd(_), A::SigmaBwd(_)) => psplice(d, budget, &macros::scalar_ds(theory), p),
        (A::SigmaFwd(_), A::DeltaBwd(_)) => psplice(d, budget, &macros::scalar_sd(theory), p),
        (A::DeltaFwd(a), A::Sym(..)) => psplice(d, budget, &macros::m2(a, theory), p),
        (A::SigmaFwd(a), A::Sym(..)) => psplice(d, budget, &macros::m2s(a, theory), p),
        (A::DeltaFwd(_), A::BFwd(x, y, _)) => psplice(d, budget, &macros::m3(x, y, theory), p),
        (A::SigmaFwd(_), A::BBwd(_, y, z)) => psplice(d, budget, &macros::m3s(y, z, theory), p),
        // a unit elimination above a tree slides below it
        (A::DeltaFwd(_), A::Tensor(..)) => pstep(d, theory, budget, "delta-nat", p.clone(), R2L),
        (A::SigmaFwd(_), A::Tensor(..)) => pstep(d, theory, budget, "sigma-nat", p.clone(), R2L),
        // a structural map above a tree lets the tree rise through it
        (A::Sym(..), A::Tensor(..)) => pstep(d, theory, budget, "c-nat", p.clone(), R2L),
        (A::BFwd(..), A::Tensor(_, r)) => {
            if matches!(r.as_ref(), A::Id(_)) {
                pstep(d, theory, budget, "and1", extended(&extended(p, CF), TR), R2L)?;
            }
            pstep(d, theory, budget, "b-nat", p.clone(), R2L)
        }
        (A::BBwd(..), A::Tensor(l, _)) => {
            if matches!(l.as_ref(), A::Id(_)) {
                pstep(d, theory, budget, "and1", extended(&extended(p, CF), TL), R2L)?;
            }
            let node = sub(d, p);
            let A::Compose(_, f) = &node else { unreachable!() };
            let A::Tensor(lv, w) = f.as_ref() else {
                return Err(blocked(d, "an associativity head met an unsplittable tree"));
            };
            let A::Tensor(u, v) = lv.as_ref() else {
                return Err(blocked(d, "an associativity head met an unsplittable tree"));
            };
            psplice(d, budget, &macros::bnat_bwd(u, v, w, theory), p)
        }
        (A::DeltaBwd(_), lower) => psplice(d, budget, &macros::dnat_bwd(lower, theory), p),
        (A::SigmaBwd(_), lower) => psplice(d, budget, &macros::snat_bwd(lower, theory), p),
        // reflexivity feeding transitivity collapses to a unit elimination
        (A::Trans(..), A::Tensor(l, r))
            if matches!(r.as_ref(), A::Refl(_)) && matches!(l.as_ref(), A::Id(_)) =>
        {
            pstep(d, theory, budget, "rtdelta", p.clone(), L2R)
        }
        (A::Trans(..), A::Tensor(l, r))
            if matches!(l.as_ref(), A::Refl(_)) && matches!(r.as_ref(), A::Id(_)) =>
        {
            pstep(d, theory, budget, "rtsigma", p.clone(), L2R)
        }
        (A::Trans(..), A::Tensor(..)) => {
            Err(blocked(d, "a transitivity premise admits no slide"))
        }
        (A::Inv(..), A::Refl(_)) => pstep(d, theory, budget, "rs", p.clone(), L2R),
        (A::Inv(..), A::Inv(..)) => pstep(d, theory, budget, "ss", p.clone(), L2R),
        (A::Cong(..), A::Tensor(l, r)) => match (l.as_ref(), r.as_ref()) {
            (A::Refl(t), A::Refl(s)) => psplice(d, budget, &macros::ra_dance(t, s, theory), p),
            _ => Err(blocked(
                d,
                "a congruence premise never receives its reflexivity partner",
            )),
        },
        // a unit introduction below a tree rises above it
        (A::Tensor(u, _), A::DeltaBwd(_)) => {
            psplice(d, budget, &macros::dnat_bwd(u, theory).reversed(), p)
        }
        (A::Tensor(_, v), A::SigmaBwd(_)) => {
            psplice(d, budget, &macros::snat_bwd(v, theory).reversed(), p)
        }
        // a tree above a structural map slides below it
        (A::Tensor(..), A::Sym(..)) => pstep(d, theory, budget, "c-nat", p.clone(), L2R),
        (A::Tensor(l, _), A::BFwd(_, _, z)) => match l.as_ref() {
            // a unit elimination covering the whole rebracketed pair
            A::DeltaFwd(a) => psplice(d, budget, &macros::bmid(a, z, theory), p),
            A::SigmaFwd(b) => {
                psplice(
                    d,
                    budget,
                    &macros::m3s(b, z, theory).reversed(),
                    &extended(p, CG),
                )?;
                pstep(d, theory, budget, "cat2", p.clone(), L2R)?;
                pstep(d, theory, budget, "bb1", extended(p, CF), L2R)?;
                pstep(d, theory, budget, "cat1R", p.clone(), L2R)
            }
            _ => {
                if matches!(l.as_ref(), A::Id(_)) {
                    pstep(d, theory, budget, "and1", extended(&extended(p, CG), TL), R2L)?;
                }
                pstep(d, theory, budget, "b-nat", p.clone(), L2R)
            }
        },
        (A::Tensor(_, r), A::BBwd(x, y, _)) => match r.as_ref() {
            A::DeltaFwd(_) => {
                psplice(
                    d,
                    budget,
                    &macros::m3(x, y, theory).reversed(),
                    &extended(p, CG),
                )?;
                pstep(d, theory, budget, "cat2", p.clone(), L2R)?;
                pstep(d, theory, budget, "bb2", extended(p, CF), L2R)?;
                pstep(d, theory, budget, "cat1R", p.clone(), L2R)
            }
            A::SigmaFwd(_) => {
                let A::Tensor(l, _) = g.as_ref() else { unreachable!() };
                let A::Id(a) = l.as_ref() else {
                    return Err(blocked(d, "an associativity head met an unsplittable tree"));
                };
                let c = match f.as_ref() {
                    A::BBwd(_, _, c) => c.clone(),
                    _ => unreachable!(),
                };
                psplice(
                    d,
                    budget,
                    &macros::bds_bwd(a, &c, theory),
                    &extended(p, CF),
                )?;
                pstep(d, theory, budget, "cat2", p.clone(), R2L)?;
                pstep(d, theory, budget, "and2", extended(p, CG), R2L)?;
                pstep(
                    d,
                    theory,
                    budget,
                    "cat1L",
                    extended(&extended(p, CG), TL),
                    L2R,
                )?;
                pstep(
                    d,
                    theory,
                    budget,
                    "sigmasigma2",
                    extended(&extended(p, CG), TR),
                    L2R,
                )?;
                pstep(d, theory, budget, "and1", extended(p, CG), L2R)?;
                pstep(d, theory, budget, "cat1L", p.clone(), L2R)
            }
            _ => {
                if matches!(r.as_ref(), A::Id(_)) {
                    pstep(d, theory, budget, "and1", extended(&extended(p, CG), TR), R2L)?;
                }
                let node = sub(d, p);
                let A::Compose(g, _) = &node else { unreachable!() };
                let A::Tensor(u, vw) = g.as_ref() else {
                    return Err(blocked(d, "an associativity head met an unsplittable tree"));
                };
                let A::Tensor(v, w) = vw.as_ref() else {
                    return Err(blocked(d, "an associativity head met an unsplittable tree"));
                };
                psplice(d, budget, &macros::bnat_bwd(u, v, w, theory).reversed(), p)
            }
        },
        // a unit elimination met from above: let it rise
        (_, A::DeltaFwd(_)) => pstep(d, theory, budget, "delta-nat", p.clone(), L2R),
        (_, A::SigmaFwd(_)) => pstep(d, theory, budget, "sigma-nat", p.clone(), L2R),
        _ => Err(blocked(
            d,
            &format!("no move for `{}` over `{}`", g.head_name(), f.head_name()),
        )),
    }
}

/// Regroup so factors `j-1` and `j` of an `n`-factor right-nested chain form
/// one composition node, returning its path.
fn pair_up(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    j: usize,
    n: usize,
) -> Result<Path, PassError> {
    debug_assert!(j >= 1 && j < n);
    let base = Path(vec![CF; j - 1]);
    if j == n - 1 {
        Ok(base)
    } else {
        pstep(d, theory, budget, "cat2", base.clone(), R2L)?;
        Ok(extended(&base, CG))
    }
}

/// Pull one generator out of a factor that carries several, leaving the
/// leftmost one in the outer part.
fn split_factor(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    at: &Path,
    heads: &[Path],
) -> Result<(), PassError> {
    let tree = sub(d, at);
    let keep = &heads[0];
    let mut outer = tree.clone();
    for other in &heads[1..] {
        let head = tree.subterm(other).expect("generator position").clone();
        let target = head.infer_type(theory)?.target;
        outer = outer
            .replace_at(other, ArrowTerm::Id(target))
            .expect("generator position is inside the tree");
    }
    let head = tree.subterm(keep).expect("generator position").clone();
    let source = head.infer_type(theory)?.source;
    let inner = tree
        .replace_at(keep, ArrowTerm::Id(source))
        .expect("generator position is inside the tree");
    let mut e = Derivation::empty(ArrowTerm::compose(outer, inner));
    let mut free = Budget::unlimited();
    let stops = fuse(&mut e, theory, &mut free, &Path::default())?;
    if !stops.is_empty() || e.end() != &tree {
        return Err(blocked(
            d,
            "a multi-generator conjunction did not split into a composition",
        ));
    }
    psplice(d, budget, &e.reversed(), at)
}

/// Drive the term in `d` to developed, right-nested form.
fn develop_into(d: &mut Derivation, theory: Theory, budget: &mut Budget) -> Result<(), PassError> {
    use ArrowTerm as A;
    loop {
        let end = d.end().clone();
        if is_developed(&end) && right_nested(&end) {
            return Ok(());
        }
        // 1. lift a composition out from under a conjunction
        if let Some(p) = find_node(&end, &|t| {
            matches!(t, A::Tensor(l, r)
                if matches!(l.as_ref(), A::Compose(..)) || matches!(r.as_ref(), A::Compose(..)))
        }) {
            let Some(A::Tensor(l, r)) = end.subterm(&p) else {
                unreachable!()
            };
            if !matches!(l.as_ref(), A::Compose(..)) {
                pstep(d, theory, budget, "cat1R", extended(&p, TL), R2L)?;
            } else if !matches!(r.as_ref(), A::Compose(..)) {
                pstep(d, theory, budget, "cat1R", extended(&p, TR), R2L)?;
            }
            pstep(d, theory, budget, "and2", p, L2R)?;
            continue;
        }
        // 2. lean every composition to the right
        if !right_nested(&end) {
            let rn = macros::rightnest(&end, theory);
            budget.charge(1)?;
            d.extend(&rn);
            continue;
        }
        // 3. collapse a conjunction of two bare identities
        if let Some(p) = find_node(&end, &|t| {
            matches!(t, A::Tensor(l, r)
                if matches!(l.as_ref(), A::Id(_)) && matches!(r.as_ref(), A::Id(_)))
        }) {
            pstep(d, theory, budget, "and1", p, L2R)?;
            continue;
        }
        let paths = chain_paths(&end);
        let n = paths.len();
        // 4. absorb a bare identity factor sitting above the innermost one
        if let Some(i) =
            (0..n - 1).find(|&i| matches!(end.subterm(&paths[i]), Some(A::Id(_))))
        {
            pstep(d, theory, budget, "cat1L", Path(vec![CF; i]), L2R)?;
            continue;
        }
        // 5. split a factor that carries more than one generator
        if let Some((i, heads)) = (0..n).find_map(|i| {
            let heads = head_leaf_paths(end.subterm(&paths[i]).expect("factor path"));
            (heads.len() >= 2).then_some((i, heads))
        }) {
            split_factor(d, theory, budget, &paths[i], &heads)?;
            continue;
        }
        // 6. pad a generator sitting in the innermost position
        pstep(d, theory, budget, "cat1R", paths[n - 1].clone(), R2L)?;
    }
}

/// Factorize `f` so that every factor carries exactly one generator padded
/// with identities and the innermost factor is an identity map.  The trace
/// uses the categorial and bifunctoriality equations only; a term that is
/// already developed comes back unchanged with an empty trace.
pub fn develop(
    f: &ArrowTerm,
    theory: Theory,
    budget_limit: Option<u64>,
) -> Result<(ArrowTerm, Derivation), PassError> {
    f.infer_type(theory)?;
    if is_developed(f) {
        return Ok((f.clone(), Derivation::empty(f.clone())));
    }
    let mut budget = Budget::new(f, budget_limit);
    let mut d = Derivation::empty(f.clone());
    develop_into(&mut d, theory, &mut budget)?;
    Ok((d.end().clone(), d))
}

/// Float every reflexivity to the outside of `f` and split the result as
/// `f_r o f'`, returning `(f_r, f', trace)`: `f_r` carries nothing but
/// reflexivities and identities, `f'` is developed and reflexivity-free, and
/// the trace ends at exactly that two-part composition.
pub fn r_normal(
    f: &ArrowTerm,
    theory: Theory,
    budget_limit: Option<u64>,
) -> Result<(ArrowTerm, ArrowTerm, Derivation), PassError> {
    f.infer_type(theory)?;
    let mut budget = Budget::new(f, budget_limit);
    let mut d = Derivation::empty(f.clone());
    'outer: loop {
        develop_into(&mut d, theory, &mut budget)?;
        let end = d.end().clone();
        let paths = chain_paths(&end);
        let n = paths.len();
        let mut prefix = 0;
        while prefix < n && is_refl_factor(end.subterm(&paths[prefix]).expect("factor path")) {
            prefix += 1;
        }
        // factors past the leading reflexivity run that still carry one
        let candidates: Vec<usize> = (prefix + 1..n)
            .filter(|&i| contains_refl(end.subterm(&paths[i]).expect("factor path")))
            .collect();
        if candidates.is_empty() {
            break;
        }
        for &i in &candidates {
            let factor = end.subterm(&paths[i]).expect("factor path").clone();
            let upper = end.subterm(&paths[i - 1]).expect("factor path").clone();
            // a reflexivity feeding one congruence premise waits until the
            // factor right below it feeds the sibling premise
            if matches!(beta_head(&upper), Some(ArrowTerm::Cong(..))) {
                let cpath = head_path(&upper).expect("headed factor");
                let rpath = head_path(&factor).expect("headed factor");
                if rpath.0.len() == cpath.0.len() + 1 && rpath.0.starts_with(&cpath.0) {
                    let fed = rpath.0[cpath.0.len()];
                    let sibling = Path(
                        cpath
                            .0
                            .iter()
                            .copied()
                            .chain([if fed == TL { TR } else { TL }])
                            .collect(),
                    );
                    let partner = i + 1 < n && {
                        let below = end.subterm(&paths[i + 1]).expect("factor path");
                        is_refl_factor(below) && head_path(below) == Some(sibling)
                    };
                    if !partner {
                        continue;
                    }
                    let pair = pair_up(&mut d, theory, &mut budget, i + 1, n)?;
                    let stops = fuse(&mut d, theory, &mut budget, &pair)?;
                    if !stops.is_empty() {
                        return Err(blocked(&d, "congruence premises failed to merge"));
                    }
                    let pair = pair_up(&mut d, theory, &mut budget, i, n - 1)?;
                    let stops = fuse(&mut d, theory, &mut budget, &pair)?;
                    if stops.len() != 1 {
                        return Err(blocked(&d, "merged premises missed their congruence"));
                    }
                    resolve_stop(&mut d, theory, &mut budget, &stops[0])?;
                    continue 'outer;
                }
            }
            let moving = head_path(&factor).expect("headed factor");
            let fixed = head_path(&upper).expect("headed factor");
            let pair = pair_up(&mut d, theory, &mut budget, i, n)?;
            let stops = fuse(&mut d, theory, &mut budget, &pair)?;
            match stops.len() {
                0 => split_fused(&mut d, theory, &mut budget, &pair, &moving, &fixed)?,
                1 => resolve_stop(&mut d, theory, &mut budget, &stops[0])?,
                _ => return Err(blocked(&d, "a fused pair stopped in two places")),
            }
            continue 'outer;
        }
        return Err(PassError::Blocked {
            term: d.end().clone(),
            detail: "a congruence premise never receives its reflexivity partner".into(),
        });
    }
    // group the leading reflexivity run into the outer component
    let end = d.end().clone();
    let paths = chain_paths(&end);
    let n = paths.len();
    let mut k = 0;
    while k < n && is_refl_factor(end.subterm(&paths[k]).expect("factor path")) {
        k += 1;
    }
    debug_assert!(k < n, "the innermost factor is an identity map");
    if k == 0 {
        pstep(&mut d, theory, &mut budget, "cat1L", Path::default(), R2L)?;
    } else if k >= 2 {
        for _ in 0..k - 1 {
            pstep(&mut d, theory, &mut budget, "cat2", Path::default(), R2L)?;
        }
        let left = sub(&d, &Path(vec![CG]));
        let rn = macros::rightnest(&left, theory);
        if !rn.is_empty() {
            budget.charge(1)?;
            let lifted = rn.at_path(d.end(), &Path(vec![CG]));
            d.extend(&lifted);
        }
    }
    let ArrowTerm::Compose(fr, fp) = d.end() else {
        unreachable!("the trace ends at a two-part composition");
    };
    let (f_r, f_prime) = (fr.as_ref().clone(), fp.as_ref().clone());
    Ok((f_r, f_prime, d))
}

/// Remove every unit introduction and elimination from a reflexivity-free
/// term whose endpoints either never mention the unit or are both the bare
/// unit.  A term already free of them comes back unchanged.
pub fn delta_sigma_purge(
    f: &ArrowTerm,
    theory: Theory,
    budget_limit: Option<u64>,
) -> Result<(ArrowTerm, Derivation), PassError> {
    let ty = f.infer_type(theory)?;
    if !is_r_less(f) {
        return Err(PassError::PreconditionNotRLess);
    }
    let constant = ty.source == Formula::Top && ty.target == Formula::Top;
    if !constant {
        if ty.source.has_top() {
            return Err(PassError::PreconditionTopInType { formula: ty.source });
        }
        if ty.target.has_top() {
            return Err(PassError::PreconditionTopInType { formula: ty.target });
        }
    }
    if is_delta_sigma_less(f) {
        return Ok((f.clone(), Derivation::empty(f.clone())));
    }
    let mut budget = Budget::new(f, budget_limit);
    let mut d = Derivation::empty(f.clone());
    loop {
        develop_into(&mut d, theory, &mut budget)?;
        let end = d.end().clone();
        let paths = chain_paths(&end);
        let n = paths.len();
        // push the innermost-reachable elimination further down; it meets
        // and consumes the introduction that made its unit
        let Some(i) = (0..n)
            .rev()
            .find(|&i| is_destroyer_factor(end.subterm(&paths[i]).expect("factor path")))
        else {
            break;
        };
        debug_assert!(i + 1 < n, "an elimination never sits innermost");
        let factor = end.subterm(&paths[i]).expect("factor path").clone();
        let below = end.subterm(&paths[i + 1]).expect("factor path").clone();
        let moving = head_path(&factor).expect("headed factor");
        let fixed = head_path(&below);
        let pair = pair_up(&mut d, theory, &mut budget, i + 1, n)?;
        let stops = fuse(&mut d, theory, &mut budget, &pair)?;
        match stops.len() {
            0 => {
                let fixed = fixed.expect("factors between eliminations are headed");
                split_fused(&mut d, theory, &mut budget, &pair, &fixed, &moving)?;
            }
            1 => resolve_stop(&mut d, theory, &mut budget, &stops[0])?,
            _ => return Err(blocked(&d, "a fused pair stopped in two places")),
        }
    }
    if !is_delta_sigma_less(d.end()) {
        return Err(blocked(&d, "unit introductions survived the purge"));
    }
    Ok((d.end().clone(), d))
}

/// Where the atom line entering a factor from above comes out below, if it
/// survives the factor at all.
enum LineEnd {
    Continues(Vec<PathStep>),
    Absorbed,
    Dies,
}

/// Transport an atom position through one factor, outer boundary to inner.
fn line_through(factor: &ArrowTerm, pos: &[PathStep]) -> LineEnd {
    use ArrowTerm as A;
    let Some(head) = beta_head(factor) else {
        return LineEnd::Continues(pos.to_vec());
    };
    let hp = head_path(factor).expect("headed factor").0;
    if !pos.starts_with(&hp) {
        return LineEnd::Continues(pos.to_vec());
    }
    let rest: Vec<PathStep> = pos[hp.len()..].to_vec();
    let mapped: Option<Vec<PathStep>> = match head {
        A::Sym(..) => match rest.split_first() {
            Some((&TL, r)) => Some([&[TR][..], r].concat()),
            Some((&TR, r)) => Some([&[TL][..], r].concat()),
            _ => None,
        },
        A::BFwd(..) => match (rest.first(), rest.get(1)) {
            (Some(&TL), Some(&TL)) => Some([&[TL][..], &rest[2..]].concat()),
            (Some(&TL), Some(&TR)) => Some([&[TR, TL][..], &rest[2..]].concat()),
            (Some(&TR), _) => Some([&[TR, TR][..], &rest[1..]].concat()),
            _ => None,
        },
        A::BBwd(..) => match (rest.first(), rest.get(1)) {
            (Some(&TL), _) => Some([&[TL, TL][..], &rest[1..]].concat()),
            (Some(&TR), Some(&TL)) => Some([&[TL, TR][..], &rest[2..]].concat()),
            (Some(&TR), Some(&TR)) => Some([&[TR][..], &rest[2..]].concat()),
            _ => None,
        },
        A::DeltaFwd(_) => Some([&[TL][..], &rest].concat()),
        A::SigmaFwd(_) => Some([&[TR][..], &rest].concat()),
        A::DeltaBwd(_) => match rest.split_first() {
            Some((&TL, r)) => Some(r.to_vec()),
            _ => None,
        },
        A::SigmaBwd(_) => match rest.split_first() {
            Some((&TR, r)) => Some(r.to_vec()),
            _ => None,
        },
        A::Inv(..) if rest.is_empty() => Some(Vec::new()),
        A::Refl(_) if rest.is_empty() => return LineEnd::Absorbed,
        _ => None,
    };
    match mapped {
        Some(m) => LineEnd::Continues([&hp[..], &m].concat()),
        None => LineEnd::Dies,
    }
}

/// Whether the atom under the generator of factor `k` reaches a reflexivity
/// somewhere further in.
fn refl_below_on_line(end: &ArrowTerm, paths: &[Path], k: usize) -> bool {
    let factor = end.subterm(&paths[k]).expect("factor path");
    let Some(start) = head_path(factor) else {
        return false;
    };
    let mut pos = start.0;
    for below in &paths[k + 1..] {
        let f = end.subterm(below).expect("factor path");
        match line_through(f, &pos) {
            LineEnd::Continues(next) => pos = next,
            LineEnd::Absorbed => return true,
            LineEnd::Dies => return false,
        }
    }
    false
}

/// Walk an inversion carrying `key` inward until a reflexivity on its atom
/// line absorbs it.
fn walk_down_to_refl(
    d: &mut Derivation,
    theory: Theory,
    budget: &mut Budget,
    key: &(Term, Term),
) -> Result<(), PassError> {
    let target = key_count(d.end(), key).saturating_sub(1);
    loop {
        develop_into(d, theory, budget)?;
        let end = d.end().clone();
        if key_count(&end, key) <= target {
            return Ok(());
        }
        let paths = chain_paths(&end);
        let n = paths.len();
        // the innermost such inversion sinks; an outer choice could swap two
        // disjoint inversions back and forth without progress
        let Some(k) = (0..n).rev().find(|&k| {
            let f = end.subterm(&paths[k]).expect("factor path");
            matches!(beta_head(f), Some(ArrowTerm::Inv(a, b)) if inv_key(a, b) == *key)
                && refl_below_on_line(&end, &paths, k)
        }) else {
            return Err(PassError::Blocked {
                term: d.end().clone(),
                detail: "two inversions share a pair of terms but act on distinct atoms".into(),
            });
        };
        let factor = end.subterm(&paths[k]).expect("factor path").clone();
        let below = end.subterm(&paths[k + 1]).expect("factor path").clone();
        let moving = head_path(&factor).expect("headed factor");
        let fixed = head_path(&below);
        let pair = pair_up(d, theory, budget, k + 1, n)?;
        let stops = fuse(d, theory, budget, &pair)?;
        match stops.len() {
            0 => {
                let fixed = fixed.expect("an absorbing run ends before the innermost factor");
                split_fused(d, theory, budget, &pair, &fixed, &moving)?;
            }
            1 => resolve_stop(d, theory, budget, &stops[0])?,
            _ => return Err(blocked(d, "a fused pair stopped in two places")),
        }
    }
}

/// Cancel paired inversions until no unordered pair of terms is inverted
/// more than once.  Needs every variable to occur exactly twice across the
/// endpoints; the output is developed and the pass never introduces a
/// reflexivity of its own.
pub fn s_normal(
    f: &ArrowTerm,
    theory: Theory,
    budget_limit: Option<u64>,
) -> Result<(ArrowTerm, Derivation), PassError> {
    let ty = f.infer_type(theory)?;
    if let Some((variable, count)) = diversification_failure(&ty) {
        return Err(PassError::PreconditionNotDiversified { variable, count });
    }
    if is_developed(f) && is_s_normal(f) {
        return Ok((f.clone(), Derivation::empty(f.clone())));
    }
    let mut budget = Budget::new(f, budget_limit);
    let mut d = Derivation::empty(f.clone());
    loop {
        develop_into(&mut d, theory, &mut budget)?;
        let end = d.end().clone();
        let paths = chain_paths(&end);
        let n = paths.len();
        // outermost pair of inversion factors sharing a key
        let mut seen: BTreeMap<(Term, Term), usize> = BTreeMap::new();
        let mut dup: Option<(usize, usize, (Term, Term))> = None;
        for (idx, p) in paths.iter().enumerate() {
            if let Some(ArrowTerm::Inv(a, b)) = beta_head(end.subterm(p).expect("factor path")) {
                let key = inv_key(a, b);
                if let Some(&first) = seen.get(&key) {
                    dup = Some((first, idx, key));
                    break;
                }
                seen.insert(key, idx);
            }
        }
        let Some((i, j, key)) = dup else { break };
        let factor = end.subterm(&paths[j]).expect("factor path").clone();
        let upper = end.subterm(&paths[i]).expect("factor path").clone();
        if j == i + 1 && head_path(&upper) == head_path(&factor) {
            // adjacent on the same atom: cancel
            let pair = pair_up(&mut d, theory, &mut budget, j, n)?;
            let stops = fuse(&mut d, theory, &mut budget, &pair)?;
            if stops.len() != 1 {
                return Err(blocked(&d, "aligned inversions failed to meet"));
            }
            resolve_stop(&mut d, theory, &mut budget, &stops[0])?;
        } else if j == i + 1 {
            // same pair of terms on distinct atoms: one of them must come
            // from a reflexivity that can take it back
            walk_down_to_refl(&mut d, theory, &mut budget, &key)?;
        } else {
            // move the inner one up toward its partner
            let over = end.subterm(&paths[j - 1]).expect("factor path").clone();
            let moving = head_path(&factor).expect("headed factor");
            let fixed = head_path(&over).expect("headed factor");
            let pair = pair_up(&mut d, theory, &mut budget, j, n)?;
            let stops = fuse(&mut d, theory, &mut budget, &pair)?;
            match stops.len() {
                0 => split_fused(&mut d, theory, &mut budget, &pair, &moving, &fixed)?,
                1 => resolve_stop(&mut d, theory, &mut budget, &stops[0])?,
                _ => return Err(blocked(&d, "a fused pair stopped in two places")),
            }
        }
    }
    debug_assert!(is_s_normal(d.end()));
    Ok((d.end().clone(), d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{eval, Side};
    use crate::proofterm::random_term;
    use crate::syntax::Rel;
    use crate::text::parse_arrow;
    use Theory::{MLeq, SEquiv, SLeq, SdotEquiv};

    fn arr(s: &str) -> ArrowTerm {
        parse_arrow(s).expect("test term parses")
    }

    fn atom(l: &str, r: &str) -> Formula {
        Formula::Atom(Rel::Leq, Term::var(l), Term::var(r))
    }

    fn eatom(l: &str, r: &str) -> Formula {
        Formula::Atom(Rel::Equiv, Term::var(l), Term::var(r))
    }

    fn check(d: &Derivation, theory: Theory) {
        d.replay(theory).expect("pass trace replays");
        let a = eval(&d.start, theory).expect("start evaluates");
        let b = eval(d.end(), theory).expect("end evaluates");
        assert!(
            a.same_matching(&b),
            "diagram drifted: {} vs {}",
            d.start,
            d.end()
        );
        let ta = d.start.infer_type(theory).unwrap();
        let tb = d.end().infer_type(theory).unwrap();
        assert_eq!(ta, tb, "type drifted");
    }

    fn caps(t: &ArrowTerm, theory: Theory) -> usize {
        eval(t, theory)
            .expect("term evaluates")
            .edges()
            .iter()
            .filter(|(a, b)| a.side == Side::Tgt && b.side == Side::Tgt)
            .count()
    }

    fn refl_cap_total(t: &ArrowTerm) -> usize {
        match t {
            ArrowTerm::Refl(s) => s.vars().len(),
            ArrowTerm::Compose(g, f) => refl_cap_total(g) + refl_cap_total(f),
            ArrowTerm::Tensor(l, r) => refl_cap_total(l) + refl_cap_total(r),
            _ => 0,
        }
    }

    #[test]
    fn one_terms_and_heads_classify() {
        let conj = Formula::conj(atom("x", "y"), atom("y", "z"));
        assert!(is_one_term(&ArrowTerm::Id(conj)));
        assert!(is_one_term(&arr("id{x<=y} /\\ (id{y<=z} /\\ id{T})")));
        // a pad must be a bare identity, not an identity map
        assert!(!is_one_term(&arr(
            "(id{T} /\\ id{T}) /\\ (id{T} /\\ id{T})"
        )));
        assert!(!is_one_term(&arr("id{x<=y} /\\ r[x]")));

        let padded = arr("id{x<=y} /\\ t[x;y;z]");
        assert_eq!(beta_head(&padded), Some(&arr("t[x;y;z]")));
        assert!(is_beta_term(&padded, &arr("t[x;y;z]")));
        assert!(is_headed_factor(&arr("(id{T} /\\ r[x]) /\\ id{x<=y}")));
        assert!(beta_head(&arr("(id{T} /\\ id{T}) /\\ r[x]")).is_none());
        assert!(beta_head(&arr("r[x] /\\ r[y]")).is_none());
        assert!(beta_head(&ArrowTerm::Id(Formula::Top)).is_none());
    }

    #[test]
    fn chains_classify() {
        let dev = arr("t[x;y;z] o id{x<=y /\\ y<=z}");
        assert!(is_factorized(&dev));
        assert!(is_developed(&dev));
        assert!(!is_developed(&arr("t[x;y;z]")));
        assert!(!is_developed(&arr("t[x;y;y] o (id{x<=y} /\\ r[y])")));
        assert!(is_factorized(&arr("(r[x] /\\ id{y<=z}) o sig<{y<=z}")));
        assert!(!is_factorized(&arr("(r[x] o id{T}) /\\ id{y<=z}")));
        assert!(is_r_less(&arr("t[x;y;z]")));
        assert!(!is_r_less(&arr("t[x;y;y] o (id{x<=y} /\\ r[y])")));
        assert!(is_delta_sigma_less(&arr("t[x;y;z]")));
        assert!(!is_delta_sigma_less(&arr("del>{x<=y}")));
        assert!(is_r_factorized(&arr(
            "(r[x] /\\ id{y<=z}) o id{T /\\ y<=z}"
        )));
        assert!(!is_r_factorized(&arr("t[x;y;z] o id{x<=y /\\ y<=z}")));
    }

    #[test]
    fn inversion_counting_is_per_term_pair() {
        assert!(is_s_normal(&arr("s[x;y]")));
        assert!(!is_s_normal(&arr("s[y;x] o s[x;y]")));
        assert!(is_s_normal(&arr("s[x;y] /\\ s[u;v]")));
        // flipped arguments land on the same unordered pair
        assert!(!is_s_normal(&arr("s[x;y] /\\ s[y;x]")));
    }

    #[test]
    fn diversification_counts_endpoint_occurrences() {
        let ok = arr("s[x;y]").infer_type(SEquiv).unwrap();
        assert!(is_diversified_type(&ok));
        let bad = ArrowTerm::Id(Formula::conj(eatom("x", "y"), eatom("x", "z")))
            .infer_type(SEquiv)
            .unwrap();
        assert_eq!(
            diversification_failure(&bad),
            Some((Variable::new("x"), 4))
        );
    }

    #[test]
    fn develop_pads_a_bare_generator() {
        let f = arr("t[x;y;z]");
        let (dev, d) = develop(&f, MLeq, None).unwrap();
        assert_eq!(dev, arr("t[x;y;z] o id{x<=y /\\ y<=z}"));
        assert_eq!(d.len(), 1);
        assert_eq!(d.steps[0].equation, "cat1R");
        assert_eq!(d.steps[0].direction, R2L);
        check(&d, MLeq);
    }

    #[test]
    fn develop_splits_parallel_generators() {
        let a = atom("x", "y");
        let b = atom("u", "v");
        let f = ArrowTerm::tensor(ArrowTerm::DeltaFwd(a.clone()), ArrowTerm::SigmaFwd(b.clone()));
        let (dev, d) = develop(&f, MLeq, None).unwrap();
        let upper = ArrowTerm::tensor(ArrowTerm::DeltaFwd(a.clone()), ArrowTerm::Id(b.clone()));
        let lower = ArrowTerm::tensor(
            ArrowTerm::Id(Formula::conj(a.clone(), Formula::Top)),
            ArrowTerm::SigmaFwd(b.clone()),
        );
        let pad = ArrowTerm::Id(Formula::conj(
            Formula::conj(a, Formula::Top),
            Formula::conj(Formula::Top, b),
        ));
        assert_eq!(
            dev,
            ArrowTerm::compose(upper, ArrowTerm::compose(lower, pad))
        );
        check(&d, MLeq);
    }

    #[test]
    fn develop_leaves_developed_terms_alone() {
        let f = arr("t[x;y;z] o id{x<=y /\\ y<=z}");
        let (dev, d) = develop(&f, MLeq, None).unwrap();
        assert_eq!(dev, f);
        assert!(d.is_empty());
    }

    #[test]
    fn develop_stays_in_the_structural_fragment() {
        let f = arr(
            "(t[x;y;z] o (id{x<=y} /\\ (t[y;u;z] o (id{y<=u} /\\ id{u<=z})))) \
             o id{x<=y /\\ (y<=u /\\ u<=z)}",
        );
        let (dev, d) = develop(&f, MLeq, None).unwrap();
        assert!(is_developed(&dev));
        let allowed = ["cat1L", "cat1R", "cat2", "and1", "and2"];
        for s in &d.steps {
            assert!(
                allowed.contains(&s.equation.as_str()),
                "unexpected equation `{}`",
                s.equation
            );
        }
        check(&d, MLeq);
    }

    #[test]
    fn reflexivity_floats_out_of_a_bare_reflexivity() {
        let f = arr("r[x]");
        let (fr, fp, d) = r_normal(&f, MLeq, None).unwrap();
        assert_eq!(fr, arr("r[x]"));
        assert_eq!(fp, ArrowTerm::Id(Formula::Top));
        assert_eq!(d.end(), &ArrowTerm::compose(fr, fp));
        check(&d, MLeq);
    }

    #[test]
    fn reflexivity_feeding_transitivity_collapses() {
        let f = arr("t[x;y;y] o (id{x<=y} /\\ r[y])");
        let (fr, fp, d) = r_normal(&f, MLeq, None).unwrap();
        assert_eq!(fr, ArrowTerm::Id(atom("x", "y")));
        assert_eq!(fp, arr("del>{x<=y} o id{x<=y /\\ T}"));
        assert!(is_r_less(&fp));
        assert!(is_r_factorized(&fr));
        check(&d, MLeq);
    }

    #[test]
    fn reflexivity_already_outermost_stays_put() {
        let f = arr("(r[x] /\\ id{y<=z}) o sig<{y<=z}");
        let (fr, fp, d) = r_normal(&f, MLeq, None).unwrap();
        assert_eq!(fr, arr("r[x] /\\ id{y<=z}"));
        assert_eq!(fp, arr("sig<{y<=z} o id{y<=z}"));
        check(&d, MLeq);
    }

    #[test]
    fn parallel_reflexivities_form_the_outer_block() {
        let f = arr("r[x] /\\ r[y]");
        let (fr, fp, d) = r_normal(&f, MLeq, None).unwrap();
        assert_eq!(fr, arr("(r[x] /\\ id{y<=y}) o (id{T} /\\ r[y])"));
        assert_eq!(fp, ArrowTerm::Id(Formula::conj(Formula::Top, Formula::Top)));
        assert!(is_r_factorized(&fr));
        check(&d, MLeq);
    }

    #[test]
    fn congruence_premises_merge_into_a_product_reflexivity() {
        let f = arr("a[x;x;y;y] o (r[x] /\\ r[y])");
        let (fr, fp, d) = r_normal(&f, SdotEquiv, None).unwrap();
        assert_eq!(
            fr,
            ArrowTerm::Refl(Term::prod(Term::var("x"), Term::var("y")))
        );
        assert_eq!(fp, arr("del>{T} o id{T /\\ T}"));
        check(&d, SdotEquiv);
        assert_eq!(caps(&f, SdotEquiv), 2);
        assert_eq!(refl_cap_total(&fr), 2);
    }

    #[test]
    fn reflexivity_caps_match_the_diagram() {
        for (theory, src) in [
            (MLeq, "r[x]"),
            (MLeq, "t[x;y;y] o (id{x<=y} /\\ r[y])"),
            (SLeq, "(r[x] /\\ id{y<=z}) o sig<{y<=z}"),
            (SdotEquiv, "a[x;x;y;y] o (r[x] /\\ r[y])"),
        ] {
            let f = arr(src);
            let (fr, _, _) = r_normal(&f, theory, None).unwrap();
            assert_eq!(refl_cap_total(&fr), caps(&f, theory), "for `{src}`");
        }
    }

    #[test]
    fn purge_cancels_a_unit_introduction() {
        let f = arr("del>{x<=y} o del<{x<=y}");
        let (out, d) = delta_sigma_purge(&f, MLeq, None).unwrap();
        assert_eq!(out, ArrowTerm::Id(atom("x", "y")));
        check(&d, MLeq);
    }

    #[test]
    fn purge_pushes_an_elimination_through_a_twist() {
        let f = arr("del>{x<=y} o c{T; x<=y} o sig<{x<=y}");
        let (out, d) = delta_sigma_purge(&f, SLeq, None).unwrap();
        assert_eq!(out, ArrowTerm::Id(atom("x", "y")));
        check(&d, SLeq);
    }

    #[test]
    fn purge_slides_an_elimination_past_real_work() {
        let f = arr("del>{x<=z} o ((t[x;y;z] /\\ id{T}) o del<{x<=y /\\ y<=z})");
        let (out, d) = delta_sigma_purge(&f, MLeq, None).unwrap();
        assert_eq!(out, arr("t[x;y;z] o id{x<=y /\\ y<=z}"));
        check(&d, MLeq);
    }

    #[test]
    fn purge_crosses_a_rebracketing_whose_middle_is_the_unit() {
        // the elimination covers a whole rebracketed slot, so the usual
        // naturality slide cannot fire
        let f = arr(
            "(del>{x<=y} /\\ id{u<=v}) o b>{x<=y; T; u<=v} o (id{x<=y} /\\ sig<{u<=v})",
        );
        let (out, d) = delta_sigma_purge(&f, MLeq, None).unwrap();
        assert_eq!(out, ArrowTerm::Id(Formula::conj(atom("x", "y"), atom("u", "v"))));
        check(&d, MLeq);
    }

    #[test]
    fn purge_handles_maps_between_bare_units() {
        let f = arr("del>{T} o del<{T}");
        let (out, d) = delta_sigma_purge(&f, MLeq, None).unwrap();
        assert_eq!(out, ArrowTerm::Id(Formula::Top));
        check(&d, MLeq);
    }

    #[test]
    fn purge_leaves_clean_terms_alone() {
        let f = arr("t[x;y;z]");
        let (out, d) = delta_sigma_purge(&f, MLeq, None).unwrap();
        assert_eq!(out, f);
        assert!(d.is_empty());
    }

    #[test]
    fn purge_rejects_reflexivities_and_unit_endpoints() {
        assert_eq!(
            delta_sigma_purge(&arr("r[x]"), MLeq, None),
            Err(PassError::PreconditionNotRLess)
        );
        let err = delta_sigma_purge(&arr("del>{x<=y}"), MLeq, None).unwrap_err();
        assert_eq!(
            err,
            PassError::PreconditionTopInType {
                formula: Formula::conj(atom("x", "y"), Formula::Top)
            }
        );
    }

    #[test]
    fn aligned_inversions_cancel() {
        let f = arr("s[y;x] o s[x;y]");
        let (out, d) = s_normal(&f, SEquiv, None).unwrap();
        assert_eq!(out, ArrowTerm::Id(eatom("x", "y")));
        check(&d, SEquiv);
    }

    #[test]
    fn a_lone_inversion_is_developed_only() {
        let f = arr("s[x;y]");
        let (out, d) = s_normal(&f, SEquiv, None).unwrap();
        assert_eq!(out, arr("s[x;y] o id{x==y}"));
        assert!(is_s_normal(&out));
        check(&d, SEquiv);
    }

    #[test]
    fn three_inversions_reduce_to_one() {
        let f = arr("s[x;y] o s[y;x] o s[x;y]");
        let (out, d) = s_normal(&f, SEquiv, None).unwrap();
        assert_eq!(out, arr("s[x;y] o id{x==y}"));
        check(&d, SEquiv);
    }

    #[test]
    fn inversions_meet_across_a_unit_elimination() {
        let f = arr("s[y;x] o del>{y==x} o (s[x;y] /\\ id{T})");
        let (out, d) = s_normal(&f, SEquiv, None).unwrap();
        assert_eq!(out, arr("del>{x==y} o id{x==y /\\ T}"));
        check(&d, SEquiv);
    }

    #[test]
    fn misaligned_inversions_sink_to_their_reflexivities() {
        let f = arr("t[x;x;x] o ((s[x;x] o r[x]) /\\ (s[x;x] o r[x]))");
        let (out, d) = s_normal(&f, SEquiv, None).unwrap();
        assert!(is_s_normal(&out));
        assert!(is_developed(&out));
        check(&d, SEquiv);
    }

    #[test]
    fn inversion_cancellation_needs_diversified_endpoints() {
        let f = ArrowTerm::Id(Formula::conj(eatom("x", "y"), eatom("x", "z")));
        let err = s_normal(&f, SEquiv, None).unwrap_err();
        assert_eq!(
            err,
            PassError::PreconditionNotDiversified {
                variable: Variable::new("x"),
                count: 4
            }
        );
    }

    #[test]
    fn budgets_cut_runaway_passes_short() {
        let err = develop(&arr("t[x;y;z]"), MLeq, Some(0)).unwrap_err();
        assert_eq!(err, PassError::BudgetExceeded { budget: 0, used: 1 });
    }

    #[test]
    fn passes_preserve_type_and_diagram_on_random_terms() {
        let theories = [
            Theory::MLeq,
            Theory::SLeq,
            Theory::MEquiv,
            Theory::SEquiv,
            Theory::SdotLeq,
            Theory::SdotEquiv,
        ];
        let vars: Vec<Variable> = ["x", "y", "z"].iter().map(|v| Variable::new(v)).collect();
        for &theory in &theories {
            for seed in 0..40 {
                let f = random_term(theory, 12, seed, &vars);

                let (dev, d) = develop(&f, theory, None)
                    .unwrap_or_else(|e| panic!("develop failed on seed {seed}: {e}"));
                assert!(is_developed(&dev), "not developed: {dev}");
                check(&d, theory);

                match r_normal(&f, theory, None) {
                    Ok((fr, fp, d)) => {
                        assert!(is_r_factorized(&fr), "not r-factorized: {fr}");
                        assert!(is_r_less(&fp), "reflexivity survived: {fp}");
                        assert_eq!(refl_cap_total(&fr), caps(&f, theory));
                        check(&d, theory);
                    }
                    Err(PassError::Blocked { .. }) if theory.dotted() => {}
                    Err(e) => panic!("reflexivity extraction failed on seed {seed}: {e}"),
                }

                match delta_sigma_purge(&f, theory, None) {
                    Ok((out, d)) => {
                        assert!(is_delta_sigma_less(&out));
                        check(&d, theory);
                    }
                    Err(
                        PassError::PreconditionNotRLess
                        | PassError::PreconditionTopInType { .. },
                    ) => {}
                    Err(e) => panic!("unit purge failed on seed {seed}: {e}"),
                }

                match s_normal(&f, theory, None) {
                    Ok((out, d)) => {
                        assert!(is_s_normal(&out), "inversions survived: {out}");
                        check(&d, theory);
                    }
                    Err(PassError::PreconditionNotDiversified { .. }) => {}
                    Err(PassError::Blocked { .. }) if theory.has_inv() => {}
                    Err(e) => panic!("inversion cancellation failed on seed {seed}: {e}"),
                }
            }
        }
    }
}
