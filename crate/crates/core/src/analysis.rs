//! Semantic analyses over evaluated diagrams.
//!
//! Two arrows of one theory denote the same proof exactly when their
//! diagrams agree, so [`decide_equal`] settles proof equality by a pair of
//! evaluations.  The same diagrams answer generality questions: an arrow's
//! edges say which occurrences of its endpoints are forced to share a
//! variable, [`diversify`] realises that minimum by relabelling along the
//! edges, and [`same_generality`] compares two arrows of one type.
//!
//! The source row of a reflexivity-free arrow splits into maximal
//! sequences: blocks of occurrence positions glued by shared atoms and by
//! cups.  [`maximal_sequences`] computes the blocks, [`check_star`] verifies
//! that each block meets both sides of every target atom or neither, and
//! [`covered_conjunctions`] lists the source conjunctions spanned by a cup.
//!
//! Finally, [`AdjunctionContext`] packages the variable-extension
//! adjunction: gluing `y r z` onto objects free of `y` is left adjoint to
//! substituting `z` for `y` in objects headed by a `y`-atom, with unit
//! built from a reflexivity and counit built from a transitivity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde_json::json;

use crate::diagram::{eval, eval_traced, Diagram, Endpoint, Side};
use crate::proofterm::{random_term, ArrowTerm, ArrowType, Path, PathStep, Theory, TypeError};
use crate::rewrite::is_r_less;
use crate::syntax::{Branch, Formula, FormulaPath, Rel, Renaming, Term, Variable};

/// Why an analysis could not run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AnalysisError {
    Type(TypeError),
    /// Generality is only compared between arrows of one type.
    TypeMismatch { left: ArrowType, right: ArrowType },
    /// The operation is defined for arrows without reflexivity factors.
    NotRLess,
    /// The two variables of an adjunction context must differ.
    VariablesNotDistinct { variable: Variable },
    /// The extension functor takes inputs free of the distinguished variable.
    DistinguishedVariablePresent { variable: Variable },
    /// The restriction functor takes objects headed by a pivot atom.
    OutsideSubcategory { formula: Formula },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::Type(e) => write!(f, "{e}"),
            AnalysisError::TypeMismatch { left, right } => {
                write!(f, "generality needs one type on both sides: `{left}` against `{right}`")
            }
            AnalysisError::NotRLess => {
                write!(f, "sequence analysis runs on reflexivity-free terms only")
            }
            AnalysisError::VariablesNotDistinct { variable } => {
                write!(f, "the adjunction context needs two distinct variables, got `{variable}` twice")
            }
            AnalysisError::DistinguishedVariablePresent { variable } => {
                write!(f, "the extension functor takes inputs free of `{variable}`")
            }
            AnalysisError::OutsideSubcategory { formula } => write!(
                f,
                "the restriction functor takes objects of the shape `pivot atom /\\ rest`, not `{formula}`"
            ),
        }
    }
}

impl std::error::Error for AnalysisError {}

impl From<TypeError> for AnalysisError {
    fn from(e: TypeError) -> AnalysisError {
        AnalysisError::Type(e)
    }
}

/// Whether two arrows denote the same proof: they share a type and their
/// diagrams carry the same labels and edges.  Discarded loop counts do not
/// enter the comparison.
pub fn decide_equal(f: &ArrowTerm, g: &ArrowTerm, theory: Theory) -> Result<bool, AnalysisError> {
    let tf = f.infer_type(theory)?;
    let tg = g.infer_type(theory)?;
    if tf != tg {
        return Ok(false);
    }
    let df = eval(f, theory)?;
    let dg = eval(g, theory)?;
    Ok(df.same_matching(&dg))
}

/// Whether two arrows of one type are substitution instances of a common
/// diversified arrow: exactly when their diagrams agree.
pub fn same_generality(f: &ArrowTerm, g: &ArrowTerm, theory: Theory) -> Result<bool, AnalysisError> {
    let tf = f.infer_type(theory)?;
    let tg = g.infer_type(theory)?;
    if tf != tg {
        return Err(AnalysisError::TypeMismatch { left: tf, right: tg });
    }
    let df = eval(f, theory)?;
    let dg = eval(g, theory)?;
    Ok(df.same_matching(&dg))
}

/// Relabels an arrow so that every variable of its type occurs exactly
/// twice, by giving each edge of its diagram a fresh variable `v1`, `v2`, …
/// in edge order.  Returns the relabelled arrow together with the renaming
/// back: applying the renaming to the result restores the input exactly.
pub fn diversify(f: &ArrowTerm, theory: Theory) -> Result<(ArrowTerm, Renaming), AnalysisError> {
    let (d, prov) = eval_traced(f, theory)?;
    let mut class: BTreeMap<(Path, Endpoint), usize> = BTreeMap::new();
    for (k, steps) in prov.per_edge.iter().chain(prov.loops.iter()).enumerate() {
        for s in steps {
            class.insert((s.path.clone(), s.a), k);
            class.insert((s.path.clone(), s.b), k);
        }
    }
    let total = prov.per_edge.len() + prov.loops.len();
    let fresh: Vec<Variable> = (1..=total).map(|k| Variable::new(&format!("v{k}"))).collect();
    let relabelled = relabel_by_class(f, &Path::root(), &class, &fresh);
    let mut back = Renaming::new();
    for (k, &(a, _)) in d.edges().iter().enumerate() {
        back.insert(fresh[k].clone(), row_label(&d, a));
    }
    for (j, steps) in prov.loops.iter().enumerate() {
        let s = &steps[0];
        let generator = node_at(f, &s.path);
        let local = eval(generator, theory)?;
        back.insert(fresh[prov.per_edge.len() + j].clone(), row_label(&local, s.a));
    }
    Ok((relabelled, back))
}

fn row_label(d: &Diagram, p: Endpoint) -> Variable {
    match p.side {
        Side::Src => d.src_labels()[p.index].clone(),
        Side::Tgt => d.tgt_labels()[p.index].clone(),
    }
}

/// The subterm at a position recorded by edge provenance.
fn node_at<'a>(term: &'a ArrowTerm, path: &Path) -> &'a ArrowTerm {
    let mut node = term;
    for step in &path.0 {
        node = match (node, step) {
            (ArrowTerm::Compose(g, _), PathStep::ComposeG) => g,
            (ArrowTerm::Compose(_, f), PathStep::ComposeF) => f,
            (ArrowTerm::Tensor(l, _), PathStep::TensorL) => l,
            (ArrowTerm::Tensor(_, r), PathStep::TensorR) => r,
            _ => panic!("provenance paths address nodes of the evaluated term"),
        };
    }
    node
}

/// Rebuilds the term with every generator argument relabelled through the
/// classes of the whole-term edges passing its own row positions.  The feed
/// ranges mirror the per-generator row layout used by evaluation.
fn relabel_by_class(
    node: &ArrowTerm,
    here: &Path,
    class: &BTreeMap<(Path, Endpoint), usize>,
    fresh: &[Variable],
) -> ArrowTerm {
    let pick = |side: Side, index: usize| -> Variable {
        let key = (here.clone(), Endpoint { side, index });
        let k = class
            .get(&key)
            .expect("every generator position lies on one edge or loop of the whole diagram");
        fresh[*k].clone()
    };
    let formula = |a: &Formula, range: Range<usize>| -> Formula {
        let mut feed = range.map(|i| pick(Side::Src, i));
        a.relabel(&mut feed)
    };
    let term = |t: &Term, side: Side, range: Range<usize>| -> Term {
        let mut feed = range.map(move |i| pick(side, i));
        t.relabel(&mut feed)
    };
    match node {
        ArrowTerm::Id(a) => ArrowTerm::Id(formula(a, 0..a.occ_len())),
        ArrowTerm::BFwd(a, b, c) => {
            let (la, lb) = (a.occ_len(), b.occ_len());
            ArrowTerm::BFwd(
                formula(a, 0..la),
                formula(b, la..la + lb),
                formula(c, la + lb..la + lb + c.occ_len()),
            )
        }
        ArrowTerm::BBwd(a, b, c) => {
            let (la, lb) = (a.occ_len(), b.occ_len());
            ArrowTerm::BBwd(
                formula(a, 0..la),
                formula(b, la..la + lb),
                formula(c, la + lb..la + lb + c.occ_len()),
            )
        }
        ArrowTerm::DeltaFwd(a) => ArrowTerm::DeltaFwd(formula(a, 0..a.occ_len())),
        ArrowTerm::DeltaBwd(a) => ArrowTerm::DeltaBwd(formula(a, 0..a.occ_len())),
        ArrowTerm::SigmaFwd(a) => ArrowTerm::SigmaFwd(formula(a, 0..a.occ_len())),
        ArrowTerm::SigmaBwd(a) => ArrowTerm::SigmaBwd(formula(a, 0..a.occ_len())),
        ArrowTerm::Sym(a, b) => {
            let la = a.occ_len();
            ArrowTerm::Sym(formula(a, 0..la), formula(b, la..la + b.occ_len()))
        }
        ArrowTerm::Refl(t) => ArrowTerm::Refl(term(t, Side::Tgt, 0..t.len())),
        ArrowTerm::Trans(t0, t1, t2) => {
            let (n0, n1) = (t0.len(), t1.len());
            ArrowTerm::Trans(
                term(t0, Side::Src, 0..n0),
                term(t1, Side::Src, n0..n0 + n1),
                term(t2, Side::Src, n0 + 2 * n1..n0 + 2 * n1 + t2.len()),
            )
        }
        ArrowTerm::Inv(t0, t1) => {
            let n0 = t0.len();
            ArrowTerm::Inv(term(t0, Side::Src, 0..n0), term(t1, Side::Src, n0..n0 + t1.len()))
        }
        ArrowTerm::Cong(t1, t2, t3, t4) => {
            let (n1, n2, n3) = (t1.len(), t2.len(), t3.len());
            ArrowTerm::Cong(
                term(t1, Side::Src, 0..n1),
                term(t2, Side::Src, n1..n1 + n2),
                term(t3, Side::Src, n1 + n2..n1 + n2 + n3),
                term(t4, Side::Src, n1 + n2 + n3..n1 + n2 + n3 + t4.len()),
            )
        }
        ArrowTerm::Compose(g, f) => ArrowTerm::compose(
            relabel_by_class(g, &here.child(PathStep::ComposeG), class, fresh),
            relabel_by_class(f, &here.child(PathStep::ComposeF), class, fresh),
        ),
        ArrowTerm::Tensor(l, r) => ArrowTerm::tensor(
            relabel_by_class(l, &here.child(PathStep::TensorL), class, fresh),
            relabel_by_class(r, &here.child(PathStep::TensorR), class, fresh),
        ),
    }
}

/// One block of the source row of a reflexivity-free arrow, closed under
/// two rules: all positions of an atom enter together, and the two ends of
/// a cup enter together.
///
/// In the product-free theories a block is a chain and is listed as one:
/// positions at odd/even places share an atom, consecutive even/odd places
/// share a cup, starting from the smaller free end.  Product atoms widen
/// the steps, so in the dotted theories a block is listed in position
/// order instead.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MaximalSequence {
    pub endpoints: Vec<Endpoint>,
}

/// Splits the source row of a reflexivity-free arrow into its maximal
/// sequences.  Every source position lands in exactly one sequence; the
/// sequences are returned in ascending order of their smallest position.
pub fn maximal_sequences(
    f: &ArrowTerm,
    theory: Theory,
) -> Result<Vec<MaximalSequence>, AnalysisError> {
    let ty = f.infer_type(theory)?;
    if !is_r_less(f) {
        return Err(AnalysisError::NotRLess);
    }
    let d = eval(f, theory)?;
    let n = d.src_labels().len();
    let spans: Vec<Range<usize>> = ty
        .source
        .atom_spans()
        .iter()
        .map(|s| s.start..s.end())
        .collect();
    let mut span_of = vec![usize::MAX; n];
    for (si, span) in spans.iter().enumerate() {
        for i in span.clone() {
            span_of[i] = si;
        }
    }
    let mut cup = vec![None; n];
    for &(a, b) in d.edges() {
        if a.side == Side::Src && b.side == Side::Src {
            cup[a.index] = Some(b.index);
            cup[b.index] = Some(a.index);
        }
    }
    let mut group_of = vec![usize::MAX; n];
    let mut sequences = Vec::new();
    for start in 0..n {
        if group_of[start] != usize::MAX {
            continue;
        }
        let gid = sequences.len();
        let mut members = Vec::new();
        let mut stack = vec![start];
        group_of[start] = gid;
        while let Some(i) = stack.pop() {
            members.push(i);
            let mut reach: Vec<usize> = spans[span_of[i]].clone().collect();
            if let Some(j) = cup[i] {
                reach.push(j);
            }
            for j in reach {
                if group_of[j] == usize::MAX {
                    group_of[j] = gid;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        let ordered = if theory.dotted() {
            members
        } else {
            chain_order(&members, &spans, &span_of, &cup)
        };
        sequences.push(MaximalSequence {
            endpoints: ordered.into_iter().map(Endpoint::src).collect(),
        });
    }
    Ok(sequences)
}

/// Lists a product-free block as a chain from its smaller free end,
/// stepping to the atom mate and then across the cup.  A block with no
/// free end stays in position order.
fn chain_order(
    members: &[usize],
    spans: &[Range<usize>],
    span_of: &[usize],
    cup: &[Option<usize>],
) -> Vec<usize> {
    let Some(&start) = members.iter().find(|&&i| cup[i].is_none()) else {
        return members.to_vec();
    };
    let mate = |i: usize| -> usize {
        let span = &spans[span_of[i]];
        if i == span.start {
            i + 1
        } else {
            i - 1
        }
    };
    let mut out = Vec::with_capacity(members.len());
    let mut at = start;
    loop {
        out.push(at);
        let partner = mate(at);
        out.push(partner);
        match cup[partner] {
            Some(next) => at = next,
            None => break,
        }
    }
    out
}

/// Verifies, for a reflexivity-free arrow, that every maximal sequence
/// reaching one side of a target atom also reaches the other side.  This
/// holds for every well-typed input; it is exposed so suites can assert it.
pub fn check_star(f: &ArrowTerm, theory: Theory) -> Result<bool, AnalysisError> {
    let ty = f.infer_type(theory)?;
    let sequences = maximal_sequences(f, theory)?;
    let d = eval(f, theory)?;
    let mut line_to: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, b) in d.edges() {
        if a.side == Side::Src && b.side == Side::Tgt {
            line_to.insert(a.index, b.index);
        }
    }
    for seq in &sequences {
        let hits: BTreeSet<usize> = seq
            .endpoints
            .iter()
            .filter_map(|e| line_to.get(&e.index).copied())
            .collect();
        for span in ty.target.atom_spans() {
            let split = span.start + span.lhs_len();
            let lhs = (span.start..split).any(|i| hits.contains(&i));
            let rhs = (split..span.end()).any(|i| hits.contains(&i));
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Positions of the source conjunctions covered by a cup: the cup's two
/// ends lie on different sides of the conjunction's boundary in the
/// occurrence row.  Returned in preorder of the formula tree.
pub fn covered_conjunctions(
    f: &ArrowTerm,
    theory: Theory,
) -> Result<Vec<FormulaPath>, AnalysisError> {
    let ty = f.infer_type(theory)?;
    let d = eval(f, theory)?;
    let cups: Vec<(usize, usize)> = d
        .edges()
        .iter()
        .filter(|&&(a, b)| a.side == Side::Src && b.side == Side::Src)
        .map(|&(a, b)| (a.index, b.index))
        .collect();
    let mut out = Vec::new();
    collect_covered(&ty.source, FormulaPath::root(), 0, &cups, &mut out);
    Ok(out)
}

/// Walks the conjunction tree recording nodes whose boundary falls between
/// the ends of some cup.  Returns the position one past the subtree.
fn collect_covered(
    formula: &Formula,
    here: FormulaPath,
    start: usize,
    cups: &[(usize, usize)],
    out: &mut Vec<FormulaPath>,
) -> usize {
    match formula {
        Formula::Top => start,
        Formula::Atom(_, l, r) => start + l.len() + r.len(),
        Formula::Conj(l, r) => {
            let boundary = start + l.occ_len();
            if cups.iter().any(|&(i, j)| i < boundary && boundary <= j) {
                out.push(here.clone());
            }
            let mid = collect_covered(l, here.child(Branch::L), start, cups, out);
            collect_covered(r, here.child(Branch::R), mid, cups, out)
        }
    }
}

fn tv(v: &Variable) -> Term {
    Term::Var(v.clone())
}

/// The two variables and ambient theory of the variable-extension
/// adjunction.  The extension functor glues a pivot atom `y r z` onto
/// inputs free of `y`; the restriction functor substitutes `z` for `y` in
/// objects headed by a pivot atom; extension is left adjoint to
/// restriction, with the unit built from a reflexivity and the counit from
/// a transitivity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdjunctionContext {
    y: Variable,
    z: Variable,
    theory: Theory,
}

impl AdjunctionContext {
    pub fn new(y: Variable, z: Variable, theory: Theory) -> Result<Self, AnalysisError> {
        if y == z {
            return Err(AnalysisError::VariablesNotDistinct { variable: y });
        }
        Ok(AdjunctionContext { y, z, theory })
    }

    /// The distinguished variable removed and reintroduced by the functors.
    pub fn y(&self) -> &Variable {
        &self.y
    }

    /// The stand-in variable substituted for the distinguished one.
    pub fn z(&self) -> &Variable {
        &self.z
    }

    pub fn theory(&self) -> Theory {
        self.theory
    }

    fn atom(&self, l: &Variable, r: &Variable) -> Formula {
        Formula::atom(self.theory.relation(), tv(l), tv(r))
    }

    fn require_free(&self, a: &Formula) -> Result<(), AnalysisError> {
        if a.contains_var(&self.y) {
            return Err(AnalysisError::DistinguishedVariablePresent {
                variable: self.y.clone(),
            });
        }
        Ok(())
    }

    /// Splits an object of the restriction functor's domain into its pivot
    /// variable `u`, whether the pivot atom is flipped to `u r y`, and the
    /// rest of the conjunction.  The flipped orientation is admitted only
    /// for an equivalence relation.
    fn pivot(&self, b: &Formula) -> Result<(Variable, bool, Formula), AnalysisError> {
        let outside = || AnalysisError::OutsideSubcategory { formula: b.clone() };
        let Formula::Conj(head, rest) = b else {
            return Err(outside());
        };
        let Formula::Atom(_, lhs, rhs) = head.as_ref() else {
            return Err(outside());
        };
        if rest.contains_var(&self.y) {
            return Err(outside());
        }
        match (lhs, rhs) {
            (Term::Var(l), Term::Var(u)) if *l == self.y && *u != self.y => {
                Ok((u.clone(), false, rest.as_ref().clone()))
            }
            (Term::Var(u), Term::Var(r))
                if *r == self.y && *u != self.y && self.theory.relation() == Rel::Equiv =>
            {
                Ok((u.clone(), true, rest.as_ref().clone()))
            }
            _ => Err(outside()),
        }
    }

    /// The extension functor on objects: `A` becomes `y r z /\ A`.
    pub fn f_object(&self, a: &Formula) -> Result<Formula, AnalysisError> {
        self.require_free(a)?;
        Ok(Formula::conj(self.atom(&self.y, &self.z), a.clone()))
    }

    /// The extension functor on arrows: `f` becomes `id{y r z} /\ f`.
    pub fn f_arrow(&self, f: &ArrowTerm) -> Result<ArrowTerm, AnalysisError> {
        if arrow_mentions(f, &self.y) {
            return Err(AnalysisError::DistinguishedVariablePresent {
                variable: self.y.clone(),
            });
        }
        Ok(ArrowTerm::tensor(
            ArrowTerm::Id(self.atom(&self.y, &self.z)),
            f.clone(),
        ))
    }

    /// The restriction functor on objects: substitutes `z` for `y`.
    pub fn g_object(&self, b: &Formula) -> Result<Formula, AnalysisError> {
        self.pivot(b)?;
        Ok(b.rename(&self.to_z()))
    }

    /// The restriction functor on arrows: substitutes `z` for `y` in an
    /// arrow whose source and target both live in the functor's domain.
    pub fn g_arrow(&self, f: &ArrowTerm) -> Result<ArrowTerm, AnalysisError> {
        let ty = f.infer_type(self.theory)?;
        self.pivot(&ty.source)?;
        self.pivot(&ty.target)?;
        Ok(f.rename(&self.to_z()))
    }

    fn to_z(&self) -> Renaming {
        Renaming::from_pairs([(self.y.clone(), self.z.clone())])
    }

    /// The unit at `A`: a reflexivity on `z` tensored onto `A` after a unit
    /// introduction, of type `A |- z r z /\ A`.
    pub fn unit(&self, a: &Formula) -> Result<ArrowTerm, AnalysisError> {
        self.require_free(a)?;
        Ok(ArrowTerm::compose(
            ArrowTerm::tensor(ArrowTerm::Refl(tv(&self.z)), ArrowTerm::Id(a.clone())),
            ArrowTerm::SigmaBwd(a.clone()),
        ))
    }

    /// The counit at `B = y r u /\ A`: reassociate and cut the two pivot
    /// atoms together with a transitivity, of type
    /// `y r z /\ (z r u /\ A) |- B`.  For the flipped head `u r y /\ A` the
    /// pivot is reoriented with inversions on the way in and out.
    pub fn counit(&self, b: &Formula) -> Result<ArrowTerm, AnalysisError> {
        let (u, flipped, rest) = self.pivot(b)?;
        let spine = ArrowTerm::compose(
            ArrowTerm::tensor(
                ArrowTerm::Trans(tv(&self.y), tv(&self.z), tv(&u)),
                ArrowTerm::Id(rest.clone()),
            ),
            ArrowTerm::BFwd(
                self.atom(&self.y, &self.z),
                self.atom(&self.z, &u),
                rest.clone(),
            ),
        );
        if !flipped {
            return Ok(spine);
        }
        let reorient = ArrowTerm::tensor(
            ArrowTerm::Id(self.atom(&self.y, &self.z)),
            ArrowTerm::tensor(
                ArrowTerm::Inv(tv(&u), tv(&self.z)),
                ArrowTerm::Id(rest.clone()),
            ),
        );
        let flip = ArrowTerm::tensor(ArrowTerm::Inv(tv(&self.y), tv(&u)), ArrowTerm::Id(rest));
        Ok(ArrowTerm::compose(
            flip,
            ArrowTerm::compose(spine, reorient),
        ))
    }
}

fn arrow_mentions(t: &ArrowTerm, v: &Variable) -> bool {
    match t {
        ArrowTerm::Id(a)
        | ArrowTerm::DeltaFwd(a)
        | ArrowTerm::DeltaBwd(a)
        | ArrowTerm::SigmaFwd(a)
        | ArrowTerm::SigmaBwd(a) => a.contains_var(v),
        ArrowTerm::BFwd(a, b, c) | ArrowTerm::BBwd(a, b, c) => {
            a.contains_var(v) || b.contains_var(v) || c.contains_var(v)
        }
        ArrowTerm::Sym(a, b) => a.contains_var(v) || b.contains_var(v),
        ArrowTerm::Refl(t0) => t0.vars().contains(v),
        ArrowTerm::Trans(t0, t1, t2) => {
            [t0, t1, t2].iter().any(|t| t.vars().contains(v))
        }
        ArrowTerm::Inv(t0, t1) => t0.vars().contains(v) || t1.vars().contains(v),
        ArrowTerm::Cong(t1, t2, t3, t4) => {
            [t1, t2, t3, t4].iter().any(|t| t.vars().contains(v))
        }
        ArrowTerm::Compose(g, f) | ArrowTerm::Tensor(g, f) => {
            arrow_mentions(g, v) || arrow_mentions(f, v)
        }
    }
}

/// One verdict of [`check_adjunction`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdjunctionCheck {
    pub name: String,
    pub instance: String,
    pub holds: bool,
}

/// The verdicts of every adjunction law checked over a sample.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdjunctionReport {
    pub checks: Vec<AdjunctionCheck>,
}

impl AdjunctionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "checks": self
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "instance": c.instance, "holds": c.holds }))
                .collect::<Vec<_>>(),
            "all_hold": self.all_hold(),
        })
    }
}

/// Checks the adjunction laws over the sample objects: both triangle
/// identities per sample, naturality of unit and counit on a few seeded
/// random arrows, and the derived generators (a reflexivity from the unit,
/// a transitivity from the counit, and with inversions available an
/// inversion from the flipped counit).
pub fn check_adjunction(
    ctx: &AdjunctionContext,
    samples: &[Formula],
) -> Result<AdjunctionReport, AnalysisError> {
    let theory = ctx.theory();
    let mut checks: Vec<AdjunctionCheck> = Vec::new();

    for a in samples {
        let fa = ctx.f_object(a)?;
        let unit = ctx.unit(a)?;
        let lifted_unit = ctx.f_arrow(&unit)?;
        let counit_fa = ctx.counit(&fa)?;
        let round = ArrowTerm::compose(counit_fa.clone(), lifted_unit);
        checks.push(AdjunctionCheck {
            name: "triangle-extension".into(),
            instance: format!("A = {a}"),
            holds: decide_equal(&round, &ArrowTerm::Id(fa.clone()), theory)?,
        });

        let gb = ctx.g_object(&fa)?;
        let dropped_counit = ctx.g_arrow(&counit_fa)?;
        let unit_gb = ctx.unit(&gb)?;
        let round = ArrowTerm::compose(dropped_counit, unit_gb);
        checks.push(AdjunctionCheck {
            name: "triangle-restriction".into(),
            instance: format!("B = {fa}"),
            holds: decide_equal(&round, &ArrowTerm::Id(gb), theory)?,
        });
    }

    let pool: Vec<Variable> = ["x", "u", "w", "p", "q"]
        .iter()
        .map(|n| Variable::new(n))
        .filter(|v| v != ctx.y() && v != ctx.z())
        .take(3)
        .collect();
    let pivot_var = pool[0].clone();
    for seed in 0..4u64 {
        let f = random_term(theory, 8, 0x9c0 + seed, &pool);
        let ty = f.infer_type(theory).expect("random terms type-check");

        let lhs = ArrowTerm::compose(ctx.unit(&ty.target)?, f.clone());
        let rhs = ArrowTerm::compose(ctx.g_arrow(&ctx.f_arrow(&f)?)?, ctx.unit(&ty.source)?);
        checks.push(AdjunctionCheck {
            name: "unit-naturality".into(),
            instance: format!("f = {f}"),
            holds: decide_equal(&lhs, &rhs, theory)?,
        });

        let head = ctx.atom(ctx.y(), &pivot_var);
        let g = ArrowTerm::tensor(ArrowTerm::Id(head.clone()), f.clone());
        let b_src = Formula::conj(head.clone(), ty.source.clone());
        let b_tgt = Formula::conj(head, ty.target.clone());
        let lhs = ArrowTerm::compose(ctx.counit(&b_tgt)?, ctx.f_arrow(&ctx.g_arrow(&g)?)?);
        let rhs = ArrowTerm::compose(g.clone(), ctx.counit(&b_src)?);
        checks.push(AdjunctionCheck {
            name: "counit-naturality".into(),
            instance: format!("g = {g}"),
            holds: decide_equal(&lhs, &rhs, theory)?,
        });
    }

    let (y, z) = (ctx.y().clone(), ctx.z().clone());
    let lhs = ArrowTerm::compose(
        ArrowTerm::DeltaFwd(ctx.atom(&z, &z)),
        ctx.unit(&Formula::Top)?,
    );
    checks.push(AdjunctionCheck {
        name: "derived-reflexivity".into(),
        instance: format!("r[{z}]"),
        holds: decide_equal(&lhs, &ArrowTerm::Refl(tv(&z)), theory)?,
    });

    let head = ctx.atom(&y, &pivot_var);
    let b = Formula::conj(head.clone(), Formula::Top);
    let lhs = ArrowTerm::compose(
        ArrowTerm::DeltaFwd(head),
        ArrowTerm::compose(
            ctx.counit(&b)?,
            ArrowTerm::tensor(
                ArrowTerm::Id(ctx.atom(&y, &z)),
                ArrowTerm::DeltaBwd(ctx.atom(&z, &pivot_var)),
            ),
        ),
    );
    checks.push(AdjunctionCheck {
        name: "derived-transitivity".into(),
        instance: format!("t[{y};{z};{u}]", u = pivot_var),
        holds: decide_equal(
            &lhs,
            &ArrowTerm::Trans(tv(&y), tv(&z), tv(&pivot_var)),
            theory,
        )?,
    });

    if theory.has_inv() {
        let head = ctx.atom(&z, &y);
        let b = Formula::conj(head.clone(), Formula::Top);
        let lhs = ArrowTerm::compose(
            ArrowTerm::DeltaFwd(head),
            ArrowTerm::compose(
                ctx.counit(&b)?,
                ArrowTerm::compose(
                    ArrowTerm::tensor(
                        ArrowTerm::Id(ctx.atom(&y, &z)),
                        ctx.unit(&Formula::Top)?,
                    ),
                    ArrowTerm::DeltaBwd(ctx.atom(&y, &z)),
                ),
            ),
        );
        checks.push(AdjunctionCheck {
            name: "derived-inversion".into(),
            instance: format!("s[{y};{z}]"),
            holds: decide_equal(&lhs, &ArrowTerm::Inv(tv(&y), tv(&z)), theory)?,
        });
    }

    Ok(AdjunctionReport { checks })
}

/// The canonical transposition of the middle conjuncts,
/// `(A /\ B) /\ (C /\ D) |- (A /\ C) /\ (B /\ D)`: reassociate to expose
/// `B /\ (C /\ D)`, swap `B` past `C`, and reassociate back.  Needs a
/// theory with the symmetry generator.
pub fn middle_four(a: &Formula, b: &Formula, c: &Formula, d: &Formula) -> ArrowTerm {
    let inner = ArrowTerm::compose(
        ArrowTerm::BBwd(c.clone(), b.clone(), d.clone()),
        ArrowTerm::compose(
            ArrowTerm::tensor(ArrowTerm::Sym(b.clone(), c.clone()), ArrowTerm::Id(d.clone())),
            ArrowTerm::BFwd(b.clone(), c.clone(), d.clone()),
        ),
    );
    ArrowTerm::compose(
        ArrowTerm::BFwd(a.clone(), c.clone(), Formula::conj(b.clone(), d.clone())),
        ArrowTerm::compose(
            ArrowTerm::tensor(ArrowTerm::Id(a.clone()), inner),
            ArrowTerm::BBwd(a.clone(), b.clone(), Formula::conj(c.clone(), d.clone())),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_arrow;

    fn arr(s: &str) -> ArrowTerm {
        parse_arrow(s).unwrap()
    }

    fn v(name: &str) -> Variable {
        Variable::new(name)
    }

    fn leq(a: &str, b: &str) -> Formula {
        Formula::atom(Rel::Leq, Term::var(a), Term::var(b))
    }

    fn s(i: usize) -> Endpoint {
        Endpoint::src(i)
    }

    fn t(i: usize) -> Endpoint {
        Endpoint::tgt(i)
    }

    fn src_seq(indices: &[usize]) -> MaximalSequence {
        MaximalSequence {
            endpoints: indices.iter().map(|&i| Endpoint::src(i)).collect(),
        }
    }

    #[test]
    fn associated_transitivity_chains_decide_equal() {
        let left = arr("t[x;x;x] o (id{x<=x} /\\ t[x;x;x])");
        let right = arr("t[x;x;x] o (t[x;x;x] /\\ id{x<=x}) o b>{x<=x; x<=x; x<=x}");
        assert_eq!(decide_equal(&left, &right, Theory::MLeq), Ok(true));
    }

    #[test]
    fn equality_is_reflexive_on_a_composite() {
        let f = arr("t[x;y;y] o (id{x<=y} /\\ r[y]) o del<{x<=y}");
        assert_eq!(decide_equal(&f, &f, Theory::MLeq), Ok(true));
    }

    #[test]
    fn identity_and_twist_share_a_type_but_differ() {
        let f = arr("id{x<=x /\\ x<=x}");
        let g = arr("c{x<=x; x<=x}");
        assert_eq!(decide_equal(&f, &g, Theory::SLeq), Ok(false));
        assert_eq!(same_generality(&f, &g, Theory::SLeq), Ok(false));
    }

    #[test]
    fn distinct_types_decide_unequal_without_error() {
        let f = arr("id{x<=y}");
        let g = arr("id{x<=x}");
        assert_eq!(decide_equal(&f, &g, Theory::MLeq), Ok(false));
    }

    #[test]
    fn generality_demands_a_shared_type() {
        let f = arr("id{x<=y}");
        let g = arr("id{x<=x}");
        match same_generality(&f, &g, Theory::MLeq) {
            Err(AnalysisError::TypeMismatch { .. }) => {}
            other => panic!("expected a type mismatch, got {other:?}"),
        }
    }

    #[test]
    fn unit_absorption_keeps_generality() {
        let f = arr("t[x;x;x]");
        let g = arr("t[x;x;x] o id{x<=x /\\ x<=x}");
        assert_eq!(same_generality(&f, &g, Theory::MLeq), Ok(true));
    }

    #[test]
    fn inversion_and_identity_differ_in_generality() {
        let f = arr("s[x;x]");
        let g = arr("id{x==x}");
        assert_eq!(same_generality(&f, &g, Theory::SEquiv), Ok(false));
    }

    #[test]
    fn reflexivity_slide_keeps_generality() {
        let f = arr("t[y;y;x] o (r[y] /\\ id{y<=x})");
        let g = arr("sig>{y<=x}");
        assert_eq!(same_generality(&f, &g, Theory::MLeq), Ok(true));
    }

    #[test]
    fn diversify_splits_a_transitivity() {
        let (f, back) = diversify(&arr("t[x;x;x]"), Theory::MLeq).unwrap();
        assert_eq!(f, arr("t[v1;v2;v3]"));
        let ty = f.infer_type(Theory::MLeq).unwrap();
        assert_eq!(ty.source, Formula::conj(leq("v1", "v2"), leq("v2", "v3")));
        assert_eq!(ty.target, leq("v1", "v3"));
        let pairs: Vec<(Variable, Variable)> = back
            .iter()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        assert_eq!(
            pairs,
            vec![(v("v1"), v("x")), (v("v2"), v("x")), (v("v3"), v("x"))]
        );
    }

    #[test]
    fn diversify_relabels_an_identity_atom() {
        let (f, back) = diversify(&arr("id{x<=x}"), Theory::MLeq).unwrap();
        assert_eq!(f, arr("id{v1<=v2}"));
        assert_eq!(f.rename(&back), arr("id{x<=x}"));
    }

    #[test]
    fn diversify_keeps_a_reflexivity_cap_together() {
        let (f, back) = diversify(&arr("r[x]"), Theory::MLeq).unwrap();
        assert_eq!(f, arr("r[v1]"));
        assert_eq!(f.rename(&back), arr("r[x]"));
    }

    #[test]
    fn diversify_fixes_an_already_diversified_term() {
        let (f, back) = diversify(&arr("t[x;q;w]"), Theory::MLeq).unwrap();
        assert_eq!(f, arr("t[v1;v2;v3]"));
        let named: Vec<(Variable, Variable)> =
            back.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
        assert_eq!(
            named,
            vec![(v("v1"), v("x")), (v("v2"), v("q")), (v("v3"), v("w"))]
        );
    }

    #[test]
    fn transitivity_forms_one_sequence() {
        let seqs = maximal_sequences(&arr("t[x;y;z]"), Theory::MLeq).unwrap();
        assert_eq!(seqs, vec![src_seq(&[0, 1, 2, 3])]);
    }

    #[test]
    fn a_single_atom_is_its_own_sequence() {
        let seqs = maximal_sequences(&arr("id{x<=y}"), Theory::MLeq).unwrap();
        assert_eq!(seqs, vec![src_seq(&[0, 1])]);
    }

    #[test]
    fn two_cups_chain_three_atoms() {
        let f = arr("t[x;z;u] o (t[x;y;z] /\\ id{z<=u}) o b>{x<=y; y<=z; z<=u}");
        let seqs = maximal_sequences(&f, Theory::MLeq).unwrap();
        assert_eq!(seqs, vec![src_seq(&[0, 1, 2, 3, 4, 5])]);
    }

    #[test]
    fn sequences_demand_reflexivity_free_input() {
        let err = maximal_sequences(&arr("r[x]"), Theory::MLeq).unwrap_err();
        assert_eq!(err, AnalysisError::NotRLess);
    }

    fn worked_inversion_example() -> ArrowTerm {
        arr(
            "(t[z;x;u] /\\ id{u==v}) \
             o ((s[x;z] /\\ id{x==u}) /\\ id{u==v}) \
             o ((t[x;y;z] /\\ id{x==u}) /\\ id{u==v})",
        )
    }

    #[test]
    fn a_chain_is_listed_from_its_smaller_free_end() {
        let seqs = maximal_sequences(&worked_inversion_example(), Theory::MEquiv).unwrap();
        assert_eq!(seqs, vec![src_seq(&[3, 2, 1, 0, 4, 5]), src_seq(&[6, 7])]);
    }

    #[test]
    fn product_atoms_group_blockwise() {
        let f = ArrowTerm::Trans(
            Term::prod(Term::var("x"), Term::var("y")),
            Term::var("z"),
            Term::var("w"),
        );
        let seqs = maximal_sequences(&f, Theory::SdotLeq).unwrap();
        assert_eq!(seqs, vec![src_seq(&[0, 1, 2, 3, 4])]);
    }

    #[test]
    fn transitivity_satisfies_the_target_condition() {
        assert_eq!(check_star(&arr("t[x;y;z]"), Theory::MLeq), Ok(true));
        assert_eq!(check_star(&arr("id{x<=y}"), Theory::MLeq), Ok(true));
        assert_eq!(
            check_star(&worked_inversion_example(), Theory::MEquiv),
            Ok(true)
        );
    }

    #[test]
    fn a_cup_covers_the_conjunction_it_spans() {
        let covered = covered_conjunctions(&arr("t[x;y;z]"), Theory::MLeq).unwrap();
        assert_eq!(covered, vec![FormulaPath::root()]);
    }

    #[test]
    fn identities_cover_nothing() {
        let covered =
            covered_conjunctions(&arr("id{x<=y /\\ y<=z}"), Theory::MLeq).unwrap();
        assert_eq!(covered, Vec::<FormulaPath>::new());
    }

    #[test]
    fn cups_cover_every_conjunction_between_their_ends() {
        let covered =
            covered_conjunctions(&worked_inversion_example(), Theory::MEquiv).unwrap();
        assert_eq!(
            covered,
            vec![
                FormulaPath(vec![Branch::L]),
                FormulaPath(vec![Branch::L, Branch::L]),
            ]
        );
    }

    fn ctx(theory: Theory) -> AdjunctionContext {
        AdjunctionContext::new(v("y"), v("z"), theory).unwrap()
    }

    #[test]
    fn the_context_rejects_a_repeated_variable() {
        let err = AdjunctionContext::new(v("y"), v("y"), Theory::MLeq).unwrap_err();
        assert_eq!(err, AnalysisError::VariablesNotDistinct { variable: v("y") });
    }

    #[test]
    fn extension_glues_the_pivot_atom() {
        let ctx = ctx(Theory::MLeq);
        assert_eq!(
            ctx.f_object(&leq("x", "x")),
            Ok(Formula::conj(leq("y", "z"), leq("x", "x")))
        );
        assert_eq!(
            ctx.f_arrow(&arr("r[x]")),
            Ok(arr("id{y<=z} /\\ r[x]"))
        );
        assert_eq!(
            ctx.f_object(&leq("y", "x")),
            Err(AnalysisError::DistinguishedVariablePresent { variable: v("y") })
        );
    }

    #[test]
    fn restriction_substitutes_the_stand_in() {
        let ctx = ctx(Theory::MLeq);
        let b = Formula::conj(leq("y", "u"), leq("x", "x"));
        assert_eq!(
            ctx.g_object(&b),
            Ok(Formula::conj(leq("z", "u"), leq("x", "x")))
        );
        let fa = ctx.f_object(&Formula::Top).unwrap();
        assert_eq!(
            ctx.g_object(&fa),
            Ok(Formula::conj(leq("z", "z"), Formula::Top))
        );
    }

    #[test]
    fn restriction_rejects_foreign_shapes() {
        let ctx = ctx(Theory::MLeq);
        for b in [
            leq("y", "u"),
            Formula::conj(leq("x", "u"), Formula::Top),
            Formula::conj(leq("u", "y"), Formula::Top),
            Formula::conj(leq("y", "y"), Formula::Top),
            Formula::conj(leq("y", "u"), leq("y", "y")),
        ] {
            assert_eq!(
                ctx.g_object(&b),
                Err(AnalysisError::OutsideSubcategory { formula: b.clone() })
            );
        }
    }

    #[test]
    fn an_equivalence_admits_the_flipped_pivot() {
        let ctx = ctx(Theory::MEquiv);
        let b = Formula::conj(
            Formula::atom(Rel::Equiv, Term::var("u"), Term::var("y")),
            Formula::Top,
        );
        assert_eq!(
            ctx.g_object(&b),
            Ok(Formula::conj(
                Formula::atom(Rel::Equiv, Term::var("u"), Term::var("z")),
                Formula::Top
            ))
        );
    }

    #[test]
    fn the_unit_is_a_padded_reflexivity() {
        let ctx = ctx(Theory::MLeq);
        assert_eq!(
            ctx.unit(&leq("x", "x")),
            Ok(arr("(r[z] /\\ id{x<=x}) o sig<{x<=x}"))
        );
        let top_unit = ctx.unit(&Formula::Top).unwrap();
        let ty = top_unit.infer_type(Theory::MLeq).unwrap();
        assert_eq!(ty.source, Formula::Top);
        assert_eq!(ty.target, Formula::conj(leq("z", "z"), Formula::Top));
    }

    #[test]
    fn the_counit_is_a_padded_transitivity() {
        let ctx = ctx(Theory::MLeq);
        let b = Formula::conj(leq("y", "u"), Formula::Top);
        assert_eq!(
            ctx.counit(&b),
            Ok(arr("(t[y;z;u] /\\ id{T}) o b>{y<=z; z<=u; T}"))
        );
    }

    #[test]
    fn the_flipped_counit_reorients_with_inversions() {
        let ctx = ctx(Theory::SEquiv);
        let b = Formula::conj(
            Formula::atom(Rel::Equiv, Term::var("u"), Term::var("y")),
            Formula::Top,
        );
        let counit = ctx.counit(&b).unwrap();
        let ty = counit.infer_type(Theory::SEquiv).unwrap();
        assert_eq!(
            ty.source,
            Formula::conj(
                Formula::atom(Rel::Equiv, Term::var("y"), Term::var("z")),
                Formula::conj(
                    Formula::atom(Rel::Equiv, Term::var("u"), Term::var("z")),
                    Formula::Top
                )
            )
        );
        assert_eq!(ty.target, b);
    }

    #[test]
    fn the_adjunction_laws_hold_over_a_small_sample() {
        let samples = [
            Formula::Top,
            leq("x", "x"),
            Formula::conj(leq("x", "u"), Formula::Top),
            Formula::conj(leq("x", "u"), leq("u", "w")),
        ];
        let report = check_adjunction(&ctx(Theory::MLeq), &samples).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.holds).collect();
        assert!(failed.is_empty(), "failed checks: {failed:?}");
    }

    #[test]
    fn the_adjunction_laws_hold_with_inversions() {
        let eatom = |a: &str, b: &str| Formula::atom(Rel::Equiv, Term::var(a), Term::var(b));
        let samples = [
            Formula::Top,
            eatom("x", "x"),
            Formula::conj(eatom("u", "x"), Formula::Top),
        ];
        let report = check_adjunction(&ctx(Theory::SEquiv), &samples).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.holds).collect();
        assert!(failed.is_empty(), "failed checks: {failed:?}");
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "derived-inversion" && c.holds));
    }

    #[test]
    fn the_report_serialises_names_and_verdicts() {
        let report = check_adjunction(&ctx(Theory::MLeq), &[Formula::Top]).unwrap();
        let value = report.to_json();
        assert_eq!(value["all_hold"], json!(true));
        assert_eq!(value["checks"][0]["name"], json!("triangle-extension"));
        assert_eq!(value["checks"][0]["holds"], json!(true));
    }

    #[test]
    fn middle_four_transposes_the_inner_blocks() {
        let f = middle_four(
            &leq("x1", "x2"),
            &leq("y1", "y2"),
            &leq("z1", "z2"),
            &leq("w1", "w2"),
        );
        let d = eval(&f, Theory::SLeq).unwrap();
        assert_eq!(
            d.edges(),
            &[
                (s(0), t(0)),
                (s(1), t(1)),
                (s(2), t(4)),
                (s(3), t(5)),
                (s(4), t(2)),
                (s(5), t(3)),
                (s(6), t(6)),
                (s(7), t(7)),
            ]
        );
    }

    #[test]
    fn middle_four_with_empty_middles_is_an_identity_matching() {
        let f = middle_four(&leq("x", "y"), &Formula::Top, &Formula::Top, &leq("u", "w"));
        let d = eval(&f, Theory::SLeq).unwrap();
        assert_eq!(
            d.edges(),
            &[(s(0), t(0)), (s(1), t(1)), (s(2), t(2)), (s(3), t(3))]
        );
    }

    #[test]
    fn congruence_distributes_over_transitivity() {
        let tvn = |n: &str| Term::var(n);
        let lhs = ArrowTerm::compose(
            ArrowTerm::Cong(tvn("t1"), tvn("r1"), tvn("t2"), tvn("r2")),
            ArrowTerm::tensor(
                ArrowTerm::Trans(tvn("t1"), tvn("s1"), tvn("r1")),
                ArrowTerm::Trans(tvn("t2"), tvn("s2"), tvn("r2")),
            ),
        );
        let atom = |a: &str, b: &str| Formula::atom(Rel::Leq, Term::var(a), Term::var(b));
        let rhs = ArrowTerm::compose(
            ArrowTerm::Trans(
                Term::prod(tvn("t1"), tvn("t2")),
                Term::prod(tvn("s1"), tvn("s2")),
                Term::prod(tvn("r1"), tvn("r2")),
            ),
            ArrowTerm::compose(
                ArrowTerm::tensor(
                    ArrowTerm::Cong(tvn("t1"), tvn("s1"), tvn("t2"), tvn("s2")),
                    ArrowTerm::Cong(tvn("s1"), tvn("r1"), tvn("s2"), tvn("r2")),
                ),
                middle_four(
                    &atom("t1", "s1"),
                    &atom("s1", "r1"),
                    &atom("t2", "s2"),
                    &atom("s2", "r2"),
                ),
            ),
        );
        assert_eq!(decide_equal(&lhs, &rhs, Theory::SdotLeq), Ok(true));
    }

    #[test]
    fn randomized_decision_respects_renaming_and_congruence() {
        let vars = [v("x"), v("u"), v("w")];
        let swap = Renaming::from_pairs([
            (v("x"), v("u")),
            (v("u"), v("w")),
            (v("w"), v("x")),
        ]);
        for theory in Theory::ALL {
            for seed in 0..25u64 {
                let f = random_term(theory, 10, 31_000 + seed, &vars);
                let g = random_term(theory, 10, 57_000 + seed, &vars);
                assert_eq!(decide_equal(&f, &f, theory), Ok(true));
                assert_eq!(
                    decide_equal(&f, &g, theory),
                    decide_equal(&f.rename(&swap), &g.rename(&swap), theory),
                    "renaming changed the verdict for {f} against {g}"
                );

                let ty = f.infer_type(theory).unwrap();
                let padded = ArrowTerm::compose(f.clone(), ArrowTerm::Id(ty.source.clone()));
                assert_eq!(decide_equal(&f, &padded, theory), Ok(true));
                let tg = g.infer_type(theory).unwrap();
                let g_padded = ArrowTerm::compose(ArrowTerm::Id(tg.target.clone()), g.clone());
                assert_eq!(
                    decide_equal(
                        &ArrowTerm::tensor(f.clone(), g.clone()),
                        &ArrowTerm::tensor(padded, g_padded),
                        theory
                    ),
                    Ok(true)
                );
            }
        }
    }

    #[test]
    fn randomized_diversification_round_trips() {
        use crate::rewrite::is_diversified_type;
        let vars = [v("x"), v("u"), v("w")];
        for theory in Theory::ALL {
            for seed in 0..25u64 {
                let f = random_term(theory, 12, 77_000 + seed, &vars);
                let (f2, back) = diversify(&f, theory).unwrap();
                assert_eq!(f2.rename(&back), f, "round trip failed for {f}");
                let ty = f2.infer_type(theory).unwrap();
                assert!(is_diversified_type(&ty), "not diversified: {f2} : {ty}");
                let d = eval(&f, theory).unwrap();
                let d2 = eval(&f2, theory).unwrap();
                assert_eq!(d.edges(), d2.edges());
                assert_eq!(d.loops_discarded(), d2.loops_discarded());
            }
        }
    }

    #[test]
    fn randomized_generality_agrees_with_diversified_types() {
        let vars = [v("x"), v("u")];
        for theory in Theory::ALL {
            let pool: Vec<ArrowTerm> = (0..60u64)
                .map(|seed| random_term(theory, 8, 88_000 + seed, &vars))
                .collect();
            let mut buckets: BTreeMap<String, Vec<&ArrowTerm>> = BTreeMap::new();
            for f in &pool {
                let ty = f.infer_type(theory).unwrap();
                buckets.entry(format!("{ty}")).or_default().push(f);
            }
            let mut compared = 0;
            for mates in buckets.values() {
                for pair in mates.windows(2) {
                    let (f, g) = (pair[0], pair[1]);
                    let via_diagram = same_generality(f, g, theory).unwrap();
                    let tf = diversify(f, theory).unwrap().0.infer_type(theory).unwrap();
                    let tg = diversify(g, theory).unwrap().0.infer_type(theory).unwrap();
                    assert_eq!(
                        via_diagram,
                        tf == tg,
                        "generality disagreed with diversified types for {f} against {g}"
                    );
                    compared += 1;
                }
            }
            assert!(compared > 0, "no same-type pairs sampled for {theory:?}");
        }
    }

    #[test]
    fn randomized_sequences_partition_and_satisfy_star() {
        let vars = [v("x"), v("u"), v("w")];
        for theory in Theory::ALL {
            let mut checked = 0;
            let mut seed = 0u64;
            while checked < 40 && seed < 600 {
                let f = random_term(theory, 10, 99_000 + seed, &vars);
                seed += 1;
                if !is_r_less(&f) {
                    continue;
                }
                checked += 1;
                let d = eval(&f, theory).unwrap();
                let seqs = maximal_sequences(&f, theory).unwrap();
                let mut seen = BTreeSet::new();
                for seq in &seqs {
                    for e in &seq.endpoints {
                        assert_eq!(e.side, Side::Src);
                        assert!(seen.insert(e.index), "position listed twice in {f}");
                    }
                }
                assert_eq!(seen.len(), d.src_labels().len(), "partition gap in {f}");
                assert_eq!(check_star(&f, theory), Ok(true), "star failed for {f}");
            }
            assert!(checked >= 20, "too few reflexivity-free samples for {theory:?}");
        }
    }
}
