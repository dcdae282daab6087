//! Arrow terms of the six proof theories and their type discipline.
//!
//! An arrow term denotes a proof between two formulae, its source and
//! target. Typing is fully syntactic: every generator carries enough
//! arguments to determine both formulae, composition demands that the
//! target of the inner arrow equal the source of the outer one verbatim,
//! and each theory admits only its own generators, relation symbol and
//! (for the dotted theories) product terms.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Formula, Rel, Renaming, Term, Variable};

/// One of the six proof theories.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Theory {
    MLeq,
    SLeq,
    MEquiv,
    SEquiv,
    SdotLeq,
    SdotEquiv,
}

impl Theory {
    pub const ALL: [Theory; 6] = [
        Theory::MLeq,
        Theory::SLeq,
        Theory::MEquiv,
        Theory::SEquiv,
        Theory::SdotLeq,
        Theory::SdotEquiv,
    ];

    /// The relation symbol the theory's atoms are built from.
    pub fn relation(self) -> Rel {
        match self {
            Theory::MLeq | Theory::SLeq | Theory::SdotLeq => Rel::Leq,
            Theory::MEquiv | Theory::SEquiv | Theory::SdotEquiv => Rel::Equiv,
        }
    }

    /// Whether the symmetry generator `c` is available.
    pub fn has_sym(self) -> bool {
        !matches!(self, Theory::MLeq | Theory::MEquiv)
    }

    /// Whether the inversion generator `s` is available.
    pub fn has_inv(self) -> bool {
        matches!(self, Theory::MEquiv | Theory::SEquiv | Theory::SdotEquiv)
    }

    /// Whether the congruence generator `a` and product terms are available.
    pub fn dotted(self) -> bool {
        matches!(self, Theory::SdotLeq | Theory::SdotEquiv)
    }

    pub fn name(self) -> &'static str {
        match self {
            Theory::MLeq => "m-leq",
            Theory::SLeq => "s-leq",
            Theory::MEquiv => "m-equiv",
            Theory::SEquiv => "s-equiv",
            Theory::SdotLeq => "sdot-leq",
            Theory::SdotEquiv => "sdot-equiv",
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m-leq" => Ok(Theory::MLeq),
            "s-leq" => Ok(Theory::SLeq),
            "m-equiv" => Ok(Theory::MEquiv),
            "s-equiv" => Ok(Theory::SEquiv),
            "sdot-leq" => Ok(Theory::SdotLeq),
            "sdot-equiv" => Ok(Theory::SdotEquiv),
            other => Err(format!(
                "unknown theory `{other}` (expected one of m-leq, s-leq, m-equiv, s-equiv, sdot-leq, sdot-equiv)"
            )),
        }
    }
}

/// A proof term.
///
/// `Compose(g, f)` is `g o f`: first `f`, then `g`. `Tensor(f, g)` runs the
/// two arrows side by side on a conjunction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ArrowTerm {
    Id(Formula),
    BFwd(Formula, Formula, Formula),
    BBwd(Formula, Formula, Formula),
    DeltaFwd(Formula),
    DeltaBwd(Formula),
    SigmaFwd(Formula),
    SigmaBwd(Formula),
    Sym(Formula, Formula),
    Refl(Term),
    Trans(Term, Term, Term),
    Inv(Term, Term),
    Cong(Term, Term, Term, Term),
    Compose(Box<ArrowTerm>, Box<ArrowTerm>),
    Tensor(Box<ArrowTerm>, Box<ArrowTerm>),
}

/// Source and target of an arrow.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ArrowType {
    pub source: Formula,
    pub target: Formula,
}

impl fmt::Display for ArrowType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.source, self.target)
    }
}

/// One step into an arrow term: which child of a composite to enter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PathStep {
    /// The outer arrow `g` of `g o f`.
    ComposeG,
    /// The inner arrow `f` of `g o f`.
    ComposeF,
    /// The left arrow of a tensor.
    TensorL,
    /// The right arrow of a tensor.
    TensorR,
}

impl PathStep {
    pub fn code(self) -> &'static str {
        match self {
            PathStep::ComposeG => "cl",
            PathStep::ComposeF => "cr",
            PathStep::TensorL => "tl",
            PathStep::TensorR => "tr",
        }
    }

    pub fn from_code(code: &str) -> Option<PathStep> {
        match code {
            "cl" => Some(PathStep::ComposeG),
            "cr" => Some(PathStep::ComposeF),
            "tl" => Some(PathStep::TensorL),
            "tr" => Some(PathStep::TensorR),
            _ => None,
        }
    }
}

/// A position in an arrow term, from the root down.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Path(pub Vec<PathStep>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn child(&self, step: PathStep) -> Path {
        let mut steps = self.0.clone();
        steps.push(step);
        Path(steps)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(step.code())?;
        }
        Ok(())
    }
}

/// Why an arrow term failed to type-check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TypeError {
    /// In `g o f`, the source of `g` differs from the target of `f`.
    CompositionMismatch {
        expected: Formula,
        found: Formula,
        path: Path,
    },
    /// A generator was used in a theory that does not provide it.
    GeneratorNotInTheory {
        generator: &'static str,
        theory: Theory,
        path: Path,
    },
    /// A formula argument contains an atom with the wrong relation symbol.
    RelationMismatch {
        found: Rel,
        theory: Theory,
        path: Path,
    },
    /// A product term appeared outside the dotted theories.
    DottedTermNotInTheory { term: Term, theory: Theory, path: Path },
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::CompositionMismatch {
                expected,
                found,
                path,
            } => write!(
                f,
                "composition mismatch at {path}: inner target is {expected}, outer source is {found}"
            ),
            TypeError::GeneratorNotInTheory {
                generator,
                theory,
                path,
            } => write!(f, "generator `{generator}` is not part of {theory} (at {path})"),
            TypeError::RelationMismatch { found, theory, path } => write!(
                f,
                "atom uses `{found}` but {theory} is a `{}` theory (at {path})",
                theory.relation()
            ),
            TypeError::DottedTermNotInTheory { term, theory, path } => write!(
                f,
                "product term {term} is not allowed in {theory} (at {path})"
            ),
        }
    }
}

impl std::error::Error for TypeError {}

impl ArrowTerm {
    pub fn compose(g: ArrowTerm, f: ArrowTerm) -> ArrowTerm {
        ArrowTerm::Compose(Box::new(g), Box::new(f))
    }

    pub fn tensor(l: ArrowTerm, r: ArrowTerm) -> ArrowTerm {
        ArrowTerm::Tensor(Box::new(l), Box::new(r))
    }

    /// The concrete-syntax head of the term.
    pub fn head_name(&self) -> &'static str {
        match self {
            ArrowTerm::Id(_) => "id",
            ArrowTerm::BFwd(..) => "b>",
            ArrowTerm::BBwd(..) => "b<",
            ArrowTerm::DeltaFwd(_) => "del>",
            ArrowTerm::DeltaBwd(_) => "del<",
            ArrowTerm::SigmaFwd(_) => "sig>",
            ArrowTerm::SigmaBwd(_) => "sig<",
            ArrowTerm::Sym(..) => "c",
            ArrowTerm::Refl(_) => "r",
            ArrowTerm::Trans(..) => "t",
            ArrowTerm::Inv(..) => "s",
            ArrowTerm::Cong(..) => "a",
            ArrowTerm::Compose(..) => "o",
            ArrowTerm::Tensor(..) => "/\\",
        }
    }

    /// Number of arrow-term constructors; formula and term arguments do
    /// not count.
    pub fn ast_size(&self) -> usize {
        match self {
            ArrowTerm::Compose(g, f) => 1 + g.ast_size() + f.ast_size(),
            ArrowTerm::Tensor(l, r) => 1 + l.ast_size() + r.ast_size(),
            _ => 1,
        }
    }

    /// The subterm at `path`, if the path exists.
    pub fn subterm(&self, path: &Path) -> Option<&ArrowTerm> {
        let mut cur = self;
        for step in &path.0 {
            cur = match (cur, step) {
                (ArrowTerm::Compose(g, _), PathStep::ComposeG) => g,
                (ArrowTerm::Compose(_, f), PathStep::ComposeF) => f,
                (ArrowTerm::Tensor(l, _), PathStep::TensorL) => l,
                (ArrowTerm::Tensor(_, r), PathStep::TensorR) => r,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// The term with the subterm at `path` replaced. `None` if the path
    /// does not exist.
    pub fn replace_at(&self, path: &Path, replacement: ArrowTerm) -> Option<ArrowTerm> {
        fn go(term: &ArrowTerm, steps: &[PathStep], replacement: ArrowTerm) -> Option<ArrowTerm> {
            let Some((first, rest)) = steps.split_first() else {
                return Some(replacement);
            };
            match (term, first) {
                (ArrowTerm::Compose(g, f), PathStep::ComposeG) => Some(ArrowTerm::Compose(
                    Box::new(go(g, rest, replacement)?),
                    f.clone(),
                )),
                (ArrowTerm::Compose(g, f), PathStep::ComposeF) => Some(ArrowTerm::Compose(
                    g.clone(),
                    Box::new(go(f, rest, replacement)?),
                )),
                (ArrowTerm::Tensor(l, r), PathStep::TensorL) => Some(ArrowTerm::Tensor(
                    Box::new(go(l, rest, replacement)?),
                    r.clone(),
                )),
                (ArrowTerm::Tensor(l, r), PathStep::TensorR) => Some(ArrowTerm::Tensor(
                    l.clone(),
                    Box::new(go(r, rest, replacement)?),
                )),
                _ => None,
            }
        }
        go(self, &path.0, replacement)
    }

    /// All positions in the term, in preorder.
    pub fn all_paths(&self) -> Vec<Path> {
        fn go(term: &ArrowTerm, here: Path, out: &mut Vec<Path>) {
            out.push(here.clone());
            match term {
                ArrowTerm::Compose(g, f) => {
                    go(g, here.child(PathStep::ComposeG), out);
                    go(f, here.child(PathStep::ComposeF), out);
                }
                ArrowTerm::Tensor(l, r) => {
                    go(l, here.child(PathStep::TensorL), out);
                    go(r, here.child(PathStep::TensorR), out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, Path::root(), &mut out);
        out
    }

    /// Applies a variable renaming to every formula and term argument.
    pub fn rename(&self, ren: &Renaming) -> ArrowTerm {
        match self {
            ArrowTerm::Id(a) => ArrowTerm::Id(a.rename(ren)),
            ArrowTerm::BFwd(a, b, c) => {
                ArrowTerm::BFwd(a.rename(ren), b.rename(ren), c.rename(ren))
            }
            ArrowTerm::BBwd(a, b, c) => {
                ArrowTerm::BBwd(a.rename(ren), b.rename(ren), c.rename(ren))
            }
            ArrowTerm::DeltaFwd(a) => ArrowTerm::DeltaFwd(a.rename(ren)),
            ArrowTerm::DeltaBwd(a) => ArrowTerm::DeltaBwd(a.rename(ren)),
            ArrowTerm::SigmaFwd(a) => ArrowTerm::SigmaFwd(a.rename(ren)),
            ArrowTerm::SigmaBwd(a) => ArrowTerm::SigmaBwd(a.rename(ren)),
            ArrowTerm::Sym(a, b) => ArrowTerm::Sym(a.rename(ren), b.rename(ren)),
            ArrowTerm::Refl(t) => ArrowTerm::Refl(t.rename(ren)),
            ArrowTerm::Trans(t1, t2, t3) => {
                ArrowTerm::Trans(t1.rename(ren), t2.rename(ren), t3.rename(ren))
            }
            ArrowTerm::Inv(t1, t2) => ArrowTerm::Inv(t1.rename(ren), t2.rename(ren)),
            ArrowTerm::Cong(t1, t2, t3, t4) => ArrowTerm::Cong(
                t1.rename(ren),
                t2.rename(ren),
                t3.rename(ren),
                t4.rename(ren),
            ),
            ArrowTerm::Compose(g, f) => ArrowTerm::compose(g.rename(ren), f.rename(ren)),
            ArrowTerm::Tensor(l, r) => ArrowTerm::tensor(l.rename(ren), r.rename(ren)),
        }
    }

    /// Infers the type of the arrow in `theory`, validating generator
    /// availability, relation symbols and product terms along the way.
    pub fn infer_type(&self, theory: Theory) -> Result<ArrowType, TypeError> {
        self.infer_at(theory, &Path::root())
    }

    fn infer_at(&self, theory: Theory, path: &Path) -> Result<ArrowType, TypeError> {
        let rel = theory.relation();
        match self {
            ArrowTerm::Id(a) => {
                check_formula(a, theory, path)?;
                Ok(ty(a.clone(), a.clone()))
            }
            ArrowTerm::BFwd(a, b, c) => {
                for x in [a, b, c] {
                    check_formula(x, theory, path)?;
                }
                Ok(ty(
                    Formula::conj(a.clone(), Formula::conj(b.clone(), c.clone())),
                    Formula::conj(Formula::conj(a.clone(), b.clone()), c.clone()),
                ))
            }
            ArrowTerm::BBwd(a, b, c) => {
                for x in [a, b, c] {
                    check_formula(x, theory, path)?;
                }
                Ok(ty(
                    Formula::conj(Formula::conj(a.clone(), b.clone()), c.clone()),
                    Formula::conj(a.clone(), Formula::conj(b.clone(), c.clone())),
                ))
            }
            ArrowTerm::DeltaFwd(a) => {
                check_formula(a, theory, path)?;
                Ok(ty(Formula::conj(a.clone(), Formula::Top), a.clone()))
            }
            ArrowTerm::DeltaBwd(a) => {
                check_formula(a, theory, path)?;
                Ok(ty(a.clone(), Formula::conj(a.clone(), Formula::Top)))
            }
            ArrowTerm::SigmaFwd(a) => {
                check_formula(a, theory, path)?;
                Ok(ty(Formula::conj(Formula::Top, a.clone()), a.clone()))
            }
            ArrowTerm::SigmaBwd(a) => {
                check_formula(a, theory, path)?;
                Ok(ty(a.clone(), Formula::conj(Formula::Top, a.clone())))
            }
            ArrowTerm::Sym(a, b) => {
                if !theory.has_sym() {
                    return Err(TypeError::GeneratorNotInTheory {
                        generator: "c",
                        theory,
                        path: path.clone(),
                    });
                }
                check_formula(a, theory, path)?;
                check_formula(b, theory, path)?;
                Ok(ty(
                    Formula::conj(a.clone(), b.clone()),
                    Formula::conj(b.clone(), a.clone()),
                ))
            }
            ArrowTerm::Refl(t) => {
                check_term(t, theory, path)?;
                Ok(ty(
                    Formula::Top,
                    Formula::Atom(rel, t.clone(), t.clone()),
                ))
            }
            ArrowTerm::Trans(t1, t2, t3) => {
                for t in [t1, t2, t3] {
                    check_term(t, theory, path)?;
                }
                Ok(ty(
                    Formula::conj(
                        Formula::Atom(rel, t1.clone(), t2.clone()),
                        Formula::Atom(rel, t2.clone(), t3.clone()),
                    ),
                    Formula::Atom(rel, t1.clone(), t3.clone()),
                ))
            }
            ArrowTerm::Inv(t1, t2) => {
                if !theory.has_inv() {
                    return Err(TypeError::GeneratorNotInTheory {
                        generator: "s",
                        theory,
                        path: path.clone(),
                    });
                }
                check_term(t1, theory, path)?;
                check_term(t2, theory, path)?;
                Ok(ty(
                    Formula::Atom(Rel::Equiv, t1.clone(), t2.clone()),
                    Formula::Atom(Rel::Equiv, t2.clone(), t1.clone()),
                ))
            }
            ArrowTerm::Cong(t1, t2, t3, t4) => {
                if !theory.dotted() {
                    return Err(TypeError::GeneratorNotInTheory {
                        generator: "a",
                        theory,
                        path: path.clone(),
                    });
                }
                for t in [t1, t2, t3, t4] {
                    check_term(t, theory, path)?;
                }
                Ok(ty(
                    Formula::conj(
                        Formula::Atom(rel, t1.clone(), t2.clone()),
                        Formula::Atom(rel, t3.clone(), t4.clone()),
                    ),
                    Formula::Atom(
                        rel,
                        Term::prod(t1.clone(), t3.clone()),
                        Term::prod(t2.clone(), t4.clone()),
                    ),
                ))
            }
            ArrowTerm::Compose(g, f) => {
                let tf = f.infer_at(theory, &path.child(PathStep::ComposeF))?;
                let tg = g.infer_at(theory, &path.child(PathStep::ComposeG))?;
                if tf.target != tg.source {
                    return Err(TypeError::CompositionMismatch {
                        expected: tf.target,
                        found: tg.source,
                        path: path.clone(),
                    });
                }
                Ok(ty(tf.source, tg.target))
            }
            ArrowTerm::Tensor(l, r) => {
                let tl = l.infer_at(theory, &path.child(PathStep::TensorL))?;
                let tr = r.infer_at(theory, &path.child(PathStep::TensorR))?;
                Ok(ty(
                    Formula::conj(tl.source, tr.source),
                    Formula::conj(tl.target, tr.target),
                ))
            }
        }
    }
}

fn ty(source: Formula, target: Formula) -> ArrowType {
    ArrowType { source, target }
}

fn check_term(t: &Term, theory: Theory, path: &Path) -> Result<(), TypeError> {
    if t.has_product() && !theory.dotted() {
        return Err(TypeError::DottedTermNotInTheory {
            term: t.clone(),
            theory,
            path: path.clone(),
        });
    }
    Ok(())
}

fn check_formula(f: &Formula, theory: Theory, path: &Path) -> Result<(), TypeError> {
    match f {
        Formula::Top => Ok(()),
        Formula::Atom(rel, l, r) => {
            if *rel != theory.relation() {
                return Err(TypeError::RelationMismatch {
                    found: *rel,
                    theory,
                    path: path.clone(),
                });
            }
            check_term(l, theory, path)?;
            check_term(r, theory, path)
        }
        Formula::Conj(l, r) => {
            check_formula(l, theory, path)?;
            check_formula(r, theory, path)
        }
    }
}

impl fmt::Display for ArrowTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrowTerm::Id(a) => write!(f, "id{{{a}}}"),
            ArrowTerm::BFwd(a, b, c) => write!(f, "b>{{{a};{b};{c}}}"),
            ArrowTerm::BBwd(a, b, c) => write!(f, "b<{{{a};{b};{c}}}"),
            ArrowTerm::DeltaFwd(a) => write!(f, "del>{{{a}}}"),
            ArrowTerm::DeltaBwd(a) => write!(f, "del<{{{a}}}"),
            ArrowTerm::SigmaFwd(a) => write!(f, "sig>{{{a}}}"),
            ArrowTerm::SigmaBwd(a) => write!(f, "sig<{{{a}}}"),
            ArrowTerm::Sym(a, b) => write!(f, "c{{{a};{b}}}"),
            ArrowTerm::Refl(t) => write!(f, "r[{t}]"),
            ArrowTerm::Trans(t1, t2, t3) => write!(f, "t[{t1};{t2};{t3}]"),
            ArrowTerm::Inv(t1, t2) => write!(f, "s[{t1};{t2}]"),
            ArrowTerm::Cong(t1, t2, t3, t4) => write!(f, "a[{t1};{t2};{t3};{t4}]"),
            ArrowTerm::Compose(g, f2) => {
                // `o` is right-associative, so only a composite outer arrow
                // needs parentheses.
                match **g {
                    ArrowTerm::Compose(..) => write!(f, "({g}) o {f2}"),
                    _ => write!(f, "{g} o {f2}"),
                }
            }
            ArrowTerm::Tensor(l, r) => {
                match **l {
                    ArrowTerm::Compose(..) | ArrowTerm::Tensor(..) => write!(f, "({l})")?,
                    _ => write!(f, "{l}")?,
                }
                f.write_str(" /\\ ")?;
                match **r {
                    ArrowTerm::Compose(..) => write!(f, "({r})"),
                    _ => write!(f, "{r}"),
                }
            }
        }
    }
}

/// Generates a well-typed arrow term with at most `size_budget` arrow
/// constructors. The same seed always yields the same term.
pub fn random_term(theory: Theory, size_budget: usize, seed: u64, vars: &[Variable]) -> ArrowTerm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = size_budget.max(1);
    let source = random_formula(&mut rng, theory, vars, 2);
    gen_from(&mut rng, theory, vars, &source, budget)
}

fn random_var(rng: &mut ChaCha8Rng, vars: &[Variable]) -> Variable {
    vars.choose(rng).cloned().unwrap_or_else(|| Variable::new("x"))
}

fn random_obj_term(rng: &mut ChaCha8Rng, theory: Theory, vars: &[Variable], depth: usize) -> Term {
    if theory.dotted() && depth > 0 && rng.gen_bool(0.3) {
        Term::prod(
            random_obj_term(rng, theory, vars, depth - 1),
            random_obj_term(rng, theory, vars, depth - 1),
        )
    } else {
        Term::Var(random_var(rng, vars))
    }
}

fn random_formula(rng: &mut ChaCha8Rng, theory: Theory, vars: &[Variable], depth: usize) -> Formula {
    if depth > 0 && rng.gen_bool(0.4) {
        return Formula::conj(
            random_formula(rng, theory, vars, depth - 1),
            random_formula(rng, theory, vars, depth - 1),
        );
    }
    if rng.gen_bool(0.2) {
        return Formula::Top;
    }
    Formula::Atom(
        theory.relation(),
        random_obj_term(rng, theory, vars, 1),
        random_obj_term(rng, theory, vars, 1),
    )
}

/// Builds a random arrow with the given source formula, spending at most
/// `budget` constructors.
fn gen_from(
    rng: &mut ChaCha8Rng,
    theory: Theory,
    vars: &[Variable],
    source: &Formula,
    budget: usize,
) -> ArrowTerm {
    if budget >= 3 && rng.gen_bool(0.55) {
        // Split the budget between an inner arrow from `source` and an
        // outer arrow continuing from wherever the inner one lands.
        if rng.gen_bool(0.6) {
            let inner_budget = rng.gen_range(1..=budget - 2);
            let f = gen_from(rng, theory, vars, source, inner_budget);
            let mid = f
                .infer_type(theory)
                .expect("generated arrow must type-check")
                .target;
            let g = gen_from(rng, theory, vars, &mid, budget - 1 - f.ast_size());
            return ArrowTerm::compose(g, f);
        }
        if let Formula::Conj(a, c) = source {
            let left_budget = rng.gen_range(1..=budget - 2);
            let l = gen_from(rng, theory, vars, a, left_budget);
            let r = gen_from(rng, theory, vars, c, budget - 1 - l.ast_size());
            return ArrowTerm::tensor(l, r);
        }
    }
    random_generator(rng, theory, vars, source)
}

/// Picks a generator whose source is exactly `source`.
fn random_generator(
    rng: &mut ChaCha8Rng,
    theory: Theory,
    vars: &[Variable],
    source: &Formula,
) -> ArrowTerm {
    let mut options: Vec<ArrowTerm> = Vec::new();

    options.push(ArrowTerm::DeltaBwd(source.clone()));
    options.push(ArrowTerm::SigmaBwd(source.clone()));

    match source {
        Formula::Top => {
            let t = random_obj_term(rng, theory, vars, 1);
            options.push(ArrowTerm::Refl(t));
        }
        Formula::Atom(Rel::Equiv, t1, t2) if theory.has_inv() => {
            options.push(ArrowTerm::Inv(t1.clone(), t2.clone()));
        }
        Formula::Conj(l, r) => {
            if theory.has_sym() {
                options.push(ArrowTerm::Sym((**l).clone(), (**r).clone()));
            }
            if let Formula::Conj(a, b) = &**l {
                options.push(ArrowTerm::BBwd((**a).clone(), (**b).clone(), (**r).clone()));
            }
            if let Formula::Conj(b, c) = &**r {
                options.push(ArrowTerm::BFwd((**l).clone(), (**b).clone(), (**c).clone()));
            }
            if matches!(**r, Formula::Top) {
                options.push(ArrowTerm::DeltaFwd((**l).clone()));
            }
            if matches!(**l, Formula::Top) {
                options.push(ArrowTerm::SigmaFwd((**r).clone()));
            }
            if let (Formula::Atom(_, t1, t2), Formula::Atom(_, t2b, t3)) = (&**l, &**r) {
                if t2 == t2b {
                    options.push(ArrowTerm::Trans(t1.clone(), t2.clone(), t3.clone()));
                }
                if theory.dotted() {
                    if let (Formula::Atom(_, u1, u2), Formula::Atom(_, u3, u4)) = (&**l, &**r) {
                        options.push(ArrowTerm::Cong(
                            u1.clone(),
                            u2.clone(),
                            u3.clone(),
                            u4.clone(),
                        ));
                    }
                }
            }
        }
        _ => {}
    }

    // Identity stays available but should not dominate.
    if options.is_empty() || rng.gen_bool(0.15) {
        return ArrowTerm::Id(source.clone());
    }
    options.choose(rng).cloned().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x")
    }

    fn y() -> Term {
        Term::var("y")
    }

    fn leq(a: Term, b: Term) -> Formula {
        Formula::Atom(Rel::Leq, a, b)
    }

    #[test]
    fn generator_types() {
        let a = leq(x(), y());
        let id = ArrowTerm::Id(a.clone());
        assert_eq!(
            id.infer_type(Theory::MLeq).unwrap(),
            ArrowType {
                source: a.clone(),
                target: a.clone()
            }
        );

        let r = ArrowTerm::Refl(x());
        let rt = r.infer_type(Theory::MLeq).unwrap();
        assert_eq!(rt.source, Formula::Top);
        assert_eq!(rt.target, leq(x(), x()));

        let t = ArrowTerm::Trans(x(), y(), Term::var("z"));
        let tt = t.infer_type(Theory::MLeq).unwrap();
        assert_eq!(
            tt.source,
            Formula::conj(leq(x(), y()), leq(y(), Term::var("z")))
        );
        assert_eq!(tt.target, leq(x(), Term::var("z")));

        let b = ArrowTerm::BFwd(Formula::Top, a.clone(), Formula::Top);
        let bt = b.infer_type(Theory::MLeq).unwrap();
        assert_eq!(
            bt.source,
            Formula::conj(Formula::Top, Formula::conj(a.clone(), Formula::Top))
        );
        assert_eq!(
            bt.target,
            Formula::conj(Formula::conj(Formula::Top, a.clone()), Formula::Top)
        );
    }

    #[test]
    fn inversion_flips_sides() {
        let s = ArrowTerm::Inv(x(), y());
        let st = s.infer_type(Theory::MEquiv).unwrap();
        assert_eq!(st.source, Formula::Atom(Rel::Equiv, x(), y()));
        assert_eq!(st.target, Formula::Atom(Rel::Equiv, y(), x()));
    }

    #[test]
    fn congruence_builds_products() {
        let a = ArrowTerm::Cong(x(), y(), x(), x());
        let at = a.infer_type(Theory::SdotLeq).unwrap();
        assert_eq!(
            at.target,
            Formula::Atom(Rel::Leq, Term::prod(x(), x()), Term::prod(y(), x()))
        );
    }

    #[test]
    fn composition_checks_the_interface() {
        let f = ArrowTerm::Refl(x());
        let g = ArrowTerm::Id(leq(x(), x()));
        let ok = ArrowTerm::compose(g, f.clone());
        assert!(ok.infer_type(Theory::MLeq).is_ok());

        let bad_outer = ArrowTerm::Id(leq(x(), y()));
        let bad = ArrowTerm::compose(bad_outer, f);
        let err = bad.infer_type(Theory::MLeq).unwrap_err();
        match err {
            TypeError::CompositionMismatch {
                expected,
                found,
                path,
            } => {
                assert_eq!(expected, leq(x(), x()));
                assert_eq!(found, leq(x(), y()));
                assert!(path.is_root());
            }
            other => panic!("expected composition mismatch, got {other:?}"),
        }
    }

    #[test]
    fn mismatch_path_points_into_the_term() {
        let inner_bad = ArrowTerm::compose(
            ArrowTerm::Id(leq(x(), y())),
            ArrowTerm::Refl(x()),
        );
        let term = ArrowTerm::tensor(ArrowTerm::Id(Formula::Top), inner_bad);
        let err = term.infer_type(Theory::MLeq).unwrap_err();
        match err {
            TypeError::CompositionMismatch { path, .. } => {
                assert_eq!(path, Path(vec![PathStep::TensorR]));
                assert_eq!(path.to_string(), "tr");
            }
            other => panic!("expected composition mismatch, got {other:?}"),
        }
    }

    #[test]
    fn theory_gates_generators() {
        let c = ArrowTerm::Sym(Formula::Top, Formula::Top);
        assert!(matches!(
            c.infer_type(Theory::MLeq),
            Err(TypeError::GeneratorNotInTheory { generator: "c", .. })
        ));
        assert!(c.infer_type(Theory::SLeq).is_ok());

        let s = ArrowTerm::Inv(x(), y());
        assert!(matches!(
            s.infer_type(Theory::SLeq),
            Err(TypeError::GeneratorNotInTheory { generator: "s", .. })
        ));

        let a = ArrowTerm::Cong(x(), x(), y(), y());
        assert!(matches!(
            a.infer_type(Theory::SEquiv),
            Err(TypeError::GeneratorNotInTheory { generator: "a", .. })
        ));
        assert!(a.infer_type(Theory::SdotEquiv).is_ok());
    }

    #[test]
    fn relation_and_product_gates() {
        let wrong_rel = ArrowTerm::Id(Formula::Atom(Rel::Equiv, x(), y()));
        assert!(matches!(
            wrong_rel.infer_type(Theory::MLeq),
            Err(TypeError::RelationMismatch { found: Rel::Equiv, .. })
        ));

        let prod_formula = ArrowTerm::Id(leq(Term::prod(x(), y()), x()));
        assert!(matches!(
            prod_formula.infer_type(Theory::SLeq),
            Err(TypeError::DottedTermNotInTheory { .. })
        ));
        assert!(prod_formula.infer_type(Theory::SdotLeq).is_ok());
    }

    #[test]
    fn display_round_structure() {
        let term = ArrowTerm::compose(
            ArrowTerm::compose(
                ArrowTerm::Id(leq(x(), x())),
                ArrowTerm::Trans(x(), x(), x()),
            ),
            ArrowTerm::tensor(ArrowTerm::Id(leq(x(), x())), ArrowTerm::Refl(x())),
        );
        assert_eq!(
            term.to_string(),
            "(id{x<=x} o t[x;x;x]) o id{x<=x} /\\ r[x]"
        );

        let nested = ArrowTerm::tensor(
            ArrowTerm::tensor(ArrowTerm::Id(Formula::Top), ArrowTerm::Id(Formula::Top)),
            ArrowTerm::Id(Formula::Top),
        );
        assert_eq!(nested.to_string(), "(id{T} /\\ id{T}) /\\ id{T}");
    }

    #[test]
    fn paths_address_subterms() {
        let inner = ArrowTerm::Refl(x());
        let term = ArrowTerm::compose(
            ArrowTerm::Id(leq(x(), x())),
            ArrowTerm::tensor(ArrowTerm::Id(Formula::Top), inner.clone()),
        );
        let path = Path(vec![PathStep::ComposeF, PathStep::TensorR]);
        assert_eq!(term.subterm(&path), Some(&inner));

        let swapped = term
            .replace_at(&path, ArrowTerm::Refl(y()))
            .expect("path exists");
        assert_eq!(
            swapped.subterm(&path),
            Some(&ArrowTerm::Refl(y()))
        );
        assert_eq!(term.all_paths().len(), 5);
    }

    #[test]
    fn ast_size_counts_constructors_only() {
        assert_eq!(ArrowTerm::Trans(x(), y(), x()).ast_size(), 1);
        let term = ArrowTerm::compose(
            ArrowTerm::Id(Formula::Top),
            ArrowTerm::tensor(ArrowTerm::Id(Formula::Top), ArrowTerm::Id(Formula::Top)),
        );
        assert_eq!(term.ast_size(), 5);
    }

    #[test]
    fn random_terms_type_check_and_respect_budget() {
        let vars: Vec<Variable> = ["x", "y", "z"].iter().map(|n| Variable::new(n)).collect();
        for theory in Theory::ALL {
            for seed in 0..60 {
                let term = random_term(theory, 25, seed, &vars);
                assert!(term.ast_size() <= 25);
                term.infer_type(theory)
                    .unwrap_or_else(|e| panic!("seed {seed} in {theory}: {e}"));
            }
        }
    }

    #[test]
    fn random_terms_are_deterministic() {
        let vars: Vec<Variable> = ["x", "y"].iter().map(|n| Variable::new(n)).collect();
        let a = random_term(Theory::SEquiv, 20, 7, &vars);
        let b = random_term(Theory::SEquiv, 20, 7, &vars);
        assert_eq!(a, b);
    }

    #[test]
    fn rename_reaches_generator_arguments() {
        let ren = Renaming::from_pairs([(Variable::new("x"), Variable::new("q"))]);
        let term = ArrowTerm::compose(
            ArrowTerm::Trans(x(), x(), y()),
            ArrowTerm::tensor(ArrowTerm::Refl(x()), ArrowTerm::Id(leq(x(), y()))),
        );
        let q = Term::var("q");
        let expected = ArrowTerm::compose(
            ArrowTerm::Trans(q.clone(), q.clone(), y()),
            ArrowTerm::tensor(
                ArrowTerm::Refl(q.clone()),
                ArrowTerm::Id(leq(q.clone(), y())),
            ),
        );
        assert_eq!(term.rename(&ren), expected);
    }
}
