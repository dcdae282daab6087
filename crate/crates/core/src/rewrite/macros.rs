//! Canned multi-step derivations over the equation schemas: inverse
//! cancellation for structural isomorphisms, unit-shuffling lemmas, and a
//! mirror transform that reflects whole derivations left-to-right.
//!
//! Every function here returns a [`Derivation`] whose steps were validated
//! by [`Derivation::push`] while it was being built, so a successful return
//! is already a replay-checked equational proof.

use crate::proofterm::{ArrowTerm, Path, PathStep, Theory};
use crate::rewrite::derive::Derivation;
use crate::rewrite::schema::Direction;
use crate::syntax::Formula;

use Direction::{L2R, R2L};
use PathStep::{ComposeF as CF, ComposeG as CG, TensorL as TL, TensorR as TR};

fn step(d: &mut Derivation, theory: Theory, eq: &str, path: &[PathStep], dir: Direction) {
    let p = Path(path.to_vec());
    d.push(theory, eq, &p, dir).unwrap_or_else(|e| {
        panic!(
            "canned step {eq} ({dir:?}) at {p} failed: {e}\n  current term: {}",
            d.end()
        )
    });
}

/// Splices a sub-derivation whose start sits at `path` inside the end of `d`.
pub fn splice(d: &mut Derivation, sub: &Derivation, path: &[PathStep]) {
    let lifted = sub.at_path(d.end(), &Path(path.to_vec()));
    d.extend(&lifted);
}

/// The inverse of a term built from identities and the structural
/// isomorphisms (associativity, units, symmetry) under composition and
/// conjunction. Panics on any other generator.
pub fn iso_inverse(t: &ArrowTerm) -> ArrowTerm {
    match t {
        ArrowTerm::Id(a) => ArrowTerm::Id(a.clone()),
        ArrowTerm::BFwd(a, b, c) => ArrowTerm::BBwd(a.clone(), b.clone(), c.clone()),
        ArrowTerm::BBwd(a, b, c) => ArrowTerm::BFwd(a.clone(), b.clone(), c.clone()),
        ArrowTerm::DeltaFwd(a) => ArrowTerm::DeltaBwd(a.clone()),
        ArrowTerm::DeltaBwd(a) => ArrowTerm::DeltaFwd(a.clone()),
        ArrowTerm::SigmaFwd(a) => ArrowTerm::SigmaBwd(a.clone()),
        ArrowTerm::SigmaBwd(a) => ArrowTerm::SigmaFwd(a.clone()),
        ArrowTerm::Sym(a, b) => ArrowTerm::Sym(b.clone(), a.clone()),
        ArrowTerm::Compose(g, f) => ArrowTerm::compose(iso_inverse(f), iso_inverse(g)),
        ArrowTerm::Tensor(l, r) => ArrowTerm::tensor(iso_inverse(l), iso_inverse(r)),
        other => panic!("iso_inverse: {other} is not a structural isomorphism"),
    }
}

/// Derives `u o iso_inverse(u) = 1` by structural recursion on `u`.
pub fn cancel_pair(u: &ArrowTerm, theory: Theory) -> Derivation {
    let start = ArrowTerm::compose(u.clone(), iso_inverse(u));
    let mut d = Derivation::empty(start);
    match u {
        ArrowTerm::Id(_) => step(&mut d, theory, "cat1L", &[], L2R),
        ArrowTerm::BFwd(..) => step(&mut d, theory, "bb2", &[], L2R),
        ArrowTerm::BBwd(..) => step(&mut d, theory, "bb1", &[], L2R),
        ArrowTerm::DeltaFwd(_) => step(&mut d, theory, "deltadelta2", &[], L2R),
        ArrowTerm::DeltaBwd(_) => step(&mut d, theory, "deltadelta1", &[], L2R),
        ArrowTerm::SigmaFwd(_) => step(&mut d, theory, "sigmasigma2", &[], L2R),
        ArrowTerm::SigmaBwd(_) => step(&mut d, theory, "sigmasigma1", &[], L2R),
        ArrowTerm::Sym(..) => step(&mut d, theory, "cc", &[], L2R),
        ArrowTerm::Tensor(l, r) => {
            step(&mut d, theory, "and2", &[], R2L);
            splice(&mut d, &cancel_pair(l, theory), &[TL]);
            splice(&mut d, &cancel_pair(r, theory), &[TR]);
            step(&mut d, theory, "and1", &[], L2R);
        }
        ArrowTerm::Compose(g, f) => {
            step(&mut d, theory, "cat2", &[], L2R);
            step(&mut d, theory, "cat2", &[CF], R2L);
            splice(&mut d, &cancel_pair(f, theory), &[CF, CG]);
            step(&mut d, theory, "cat1L", &[CF], L2R);
            splice(&mut d, &cancel_pair(g, theory), &[]);
        }
        other => panic!("cancel_pair: {other} is not a structural isomorphism"),
    }
    d
}

/// Derives `t = t o (u o iso_inverse(u))`; `u`'s target must be `t`'s source.
pub fn insert_pair_right(t: &ArrowTerm, u: &ArrowTerm, theory: Theory) -> Derivation {
    let mut d = Derivation::empty(t.clone());
    step(&mut d, theory, "cat1R", &[], R2L);
    splice(&mut d, &cancel_pair(u, theory).reversed(), &[CF]);
    d
}

/// Derives `t = (u o iso_inverse(u)) o t`; `u`'s target must be `t`'s target.
pub fn insert_pair_left(t: &ArrowTerm, u: &ArrowTerm, theory: Theory) -> Derivation {
    let mut d = Derivation::empty(t.clone());
    step(&mut d, theory, "cat1L", &[], R2L);
    splice(&mut d, &cancel_pair(u, theory).reversed(), &[CG]);
    d
}

/// Right-nests every composition in `t` by exhaustive `cat2` steps.
pub fn rightnest(t: &ArrowTerm, theory: Theory) -> Derivation {
    let mut d = Derivation::empty(t.clone());
    loop {
        let paths = d.end().all_paths();
        let redex = paths.into_iter().find(|p| {
            matches!(
                d.end().subterm(p),
                Some(ArrowTerm::Compose(g, _)) if matches!(g.as_ref(), ArrowTerm::Compose(..))
            )
        });
        match redex {
            Some(p) => step(&mut d, theory, "cat2", &p.0, L2R),
            None => return d,
        }
    }
}

/// Derives `from = to` when the two differ only in how compositions are
/// grouped; panics otherwise.
pub fn assoc_bridge(from: &ArrowTerm, to: &ArrowTerm, theory: Theory) -> Derivation {
    if from == to {
        return Derivation::empty(from.clone());
    }
    let mut d = rightnest(from, theory);
    let e = rightnest(to, theory);
    assert_eq!(
        d.end(),
        e.end(),
        "assoc_bridge: terms differ beyond composition grouping"
    );
    d.extend(&e.reversed());
    d
}

/// `del<{D} o f  =  (f /\ id{T}) o del<{A}`  for any `f : A |- D`.
pub fn dnat_bwd(f: &ArrowTerm, theory: Theory) -> Derivation {
    let ty = f.infer_type(theory).expect("dnat_bwd input is well-typed");
    let start = ArrowTerm::compose(ArrowTerm::DeltaBwd(ty.target.clone()), f.clone());
    let mut d = Derivation::empty(start);
    step(&mut d, theory, "cat1R", &[], R2L);
    step(&mut d, theory, "deltadelta2", &[CF], R2L);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "cat2", &[CG], L2R);
    step(&mut d, theory, "delta-nat", &[CG, CF], L2R);
    step(&mut d, theory, "cat2", &[CG], R2L);
    step(&mut d, theory, "deltadelta1", &[CG, CG], L2R);
    step(&mut d, theory, "cat1L", &[CG], L2R);
    d
}

/// `sig<{D} o f  =  (id{T} /\ f) o sig<{A}`  for any `f : A |- D`.
pub fn snat_bwd(f: &ArrowTerm, theory: Theory) -> Derivation {
    let ty = f.infer_type(theory).expect("snat_bwd input is well-typed");
    let start = ArrowTerm::compose(ArrowTerm::SigmaBwd(ty.target.clone()), f.clone());
    let mut d = Derivation::empty(start);
    step(&mut d, theory, "cat1R", &[], R2L);
    step(&mut d, theory, "sigmasigma2", &[CF], R2L);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "cat2", &[CG], L2R);
    step(&mut d, theory, "sigma-nat", &[CG, CF], L2R);
    step(&mut d, theory, "cat2", &[CG], R2L);
    step(&mut d, theory, "sigmasigma1", &[CG, CG], L2R);
    step(&mut d, theory, "cat1L", &[CG], L2R);
    d
}

/// `b<{A';B';C'} o ((u /\ v) /\ w)  =  (u /\ (v /\ w)) o b<{A;B;C}`.
pub fn bnat_bwd(u: &ArrowTerm, v: &ArrowTerm, w: &ArrowTerm, theory: Theory) -> Derivation {
    let tu = u.infer_type(theory).expect("bnat_bwd u is well-typed");
    let tv = v.infer_type(theory).expect("bnat_bwd v is well-typed");
    let tw = w.infer_type(theory).expect("bnat_bwd w is well-typed");
    let start = ArrowTerm::compose(
        ArrowTerm::BBwd(tu.target, tv.target, tw.target),
        ArrowTerm::tensor(ArrowTerm::tensor(u.clone(), v.clone()), w.clone()),
    );
    let mut d = Derivation::empty(start);
    step(&mut d, theory, "cat1R", &[], R2L);
    step(&mut d, theory, "bb2", &[CF], R2L);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "cat2", &[CG], L2R);
    step(&mut d, theory, "b-nat", &[CG, CF], L2R);
    step(&mut d, theory, "cat2", &[CG], R2L);
    step(&mut d, theory, "bb1", &[CG, CG], L2R);
    step(&mut d, theory, "cat1L", &[CG], L2R);
    d
}

/// `del>{P} /\ id{T}  =  del>{P /\ T}`.
pub fn delta_merge(p: &Formula, theory: Theory) -> Derivation {
    let t0 = ArrowTerm::tensor(
        ArrowTerm::DeltaFwd(p.clone()),
        ArrowTerm::Id(Formula::Top),
    );
    let pt = Formula::conj(p.clone(), Formula::Top);
    let mut d = insert_pair_right(&t0, &ArrowTerm::DeltaBwd(pt), theory);
    step(&mut d, theory, "cat2", &[], R2L);
    splice(
        &mut d,
        &dnat_bwd(&ArrowTerm::DeltaFwd(p.clone()), theory).reversed(),
        &[CG],
    );
    step(&mut d, theory, "deltadelta1", &[CG], L2R);
    step(&mut d, theory, "cat1L", &[], L2R);
    d
}

/// `id{T} /\ sig>{P}  =  sig>{T /\ P}`.
pub fn sigma_merge(p: &Formula, theory: Theory) -> Derivation {
    let t0 = ArrowTerm::tensor(
        ArrowTerm::Id(Formula::Top),
        ArrowTerm::SigmaFwd(p.clone()),
    );
    let tp = Formula::conj(Formula::Top, p.clone());
    let mut d = insert_pair_right(&t0, &ArrowTerm::SigmaBwd(tp), theory);
    step(&mut d, theory, "cat2", &[], R2L);
    splice(
        &mut d,
        &snat_bwd(&ArrowTerm::SigmaFwd(p.clone()), theory).reversed(),
        &[CG],
    );
    step(&mut d, theory, "sigmasigma1", &[CG], L2R);
    step(&mut d, theory, "cat1L", &[], L2R);
    d
}

/// `b<{A;T;C}  =  (id{A} /\ sig<{C}) o (del>{A} /\ id{C})`, the inverse
/// reading of the unit-associativity equation.
pub fn bds_bwd(a: &Formula, c: &Formula, theory: Theory) -> Derivation {
    let start = ArrowTerm::BBwd(a.clone(), Formula::Top, c.clone());
    let mut d = Derivation::empty(start);
    step(&mut d, theory, "cat1R", &[], R2L);
    step(&mut d, theory, "and1", &[CF], R2L);
    step(&mut d, theory, "deltadelta1", &[CF, TL], R2L);
    step(&mut d, theory, "cat1L", &[CF, TR], R2L);
    step(&mut d, theory, "and2", &[CF], L2R);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "cat1R", &[CG], R2L);
    step(&mut d, theory, "and1", &[CG, CF], R2L);
    step(&mut d, theory, "sigmasigma2", &[CG, CF, TR], R2L);
    step(&mut d, theory, "cat1L", &[CG, CF, TL], R2L);
    step(&mut d, theory, "and2", &[CG, CF], L2R);
    step(&mut d, theory, "cat2", &[CG], L2R);
    step(&mut d, theory, "cat2", &[CG, CF], R2L);
    step(&mut d, theory, "bdeltasigma", &[CG, CF, CG], R2L);
    step(&mut d, theory, "cat2", &[CG], R2L);
    step(&mut d, theory, "bb1", &[CG, CG], L2R);
    step(&mut d, theory, "cat1L", &[CG], L2R);
    d
}

/// `(del>{A} /\ id{C}) o b>{A;T;C}  =  id{A} /\ sig>{C}`.
pub fn bmid(a: &Formula, c: &Formula, theory: Theory) -> Derivation {
    let start = ArrowTerm::compose(
        ArrowTerm::tensor(ArrowTerm::DeltaFwd(a.clone()), ArrowTerm::Id(c.clone())),
        ArrowTerm::BFwd(a.clone(), Formula::Top, c.clone()),
    );
    let mut d = Derivation::empty(start);
    step(&mut d, theory, "bdeltasigma", &[CF], L2R);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "and2", &[CG], R2L);
    step(&mut d, theory, "deltadelta2", &[CG, TL], L2R);
    step(&mut d, theory, "cat1L", &[CG, TR], L2R);
    step(&mut d, theory, "and1", &[CG], L2R);
    step(&mut d, theory, "cat1L", &[], L2R);
    d
}

/// Pentagon slide used while isolating unit isomorphisms:
/// `b<{P/\Q;T;T} o (b>{P;Q;T} /\ id{T})
///   =  b>{P;Q;T/\T} o ((id{P} /\ b<{Q;T;T}) o b<{P;Q/\T;T})`.
pub fn pent_slide(p: &Formula, q: &Formula, theory: Theory) -> Derivation {
    let top = Formula::Top;
    let pq = Formula::conj(p.clone(), q.clone());
    let qt = Formula::conj(q.clone(), top.clone());
    let tt = Formula::conj(top.clone(), top.clone());
    let start = ArrowTerm::compose(
        ArrowTerm::BBwd(pq.clone(), top.clone(), top.clone()),
        ArrowTerm::tensor(
            ArrowTerm::BFwd(p.clone(), q.clone(), top.clone()),
            ArrowTerm::Id(top.clone()),
        ),
    );
    // The inverse of the target composite, inserted on the right so the
    // pentagon equation can straighten everything out.
    let v_inv = ArrowTerm::compose(
        ArrowTerm::BFwd(p.clone(), qt, top.clone()),
        ArrowTerm::compose(
            ArrowTerm::tensor(
                ArrowTerm::Id(p.clone()),
                ArrowTerm::BFwd(q.clone(), top.clone(), top.clone()),
            ),
            ArrowTerm::BBwd(p.clone(), q.clone(), tt),
        ),
    );
    let mut d = insert_pair_right(&start, &v_inv, theory);
    step(&mut d, theory, "cat2", &[], L2R);
    step(&mut d, theory, "cat2", &[CF], R2L);
    step(&mut d, theory, "cat2", &[CF, CG], R2L);
    step(&mut d, theory, "cat2", &[CF, CG], R2L);
    step(&mut d, theory, "cat2", &[CF, CG, CG], L2R);
    step(&mut d, theory, "b5", &[CF, CG, CG], R2L);
    step(&mut d, theory, "cat2", &[CF, CG], L2R);
    step(&mut d, theory, "bb2", &[CF, CG, CF], L2R);
    step(&mut d, theory, "cat1R", &[CF, CG], L2R);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "bb1", &[CG], L2R);
    step(&mut d, theory, "cat1L", &[], L2R);
    step(&mut d, theory, "cat2", &[], L2R);
    d
}

/// `del>{P/\Q} o b>{P;Q;T}  =  id{P} /\ del>{Q}`.
pub fn m3(p: &Formula, q: &Formula, theory: Theory) -> Derivation {
    let top = Formula::Top;
    let pq = Formula::conj(p.clone(), q.clone());
    let src = Formula::conj(p.clone(), Formula::conj(q.clone(), top.clone()));
    let start = ArrowTerm::compose(
        ArrowTerm::DeltaFwd(pq.clone()),
        ArrowTerm::BFwd(p.clone(), q.clone(), top.clone()),
    );

    // Conjugate with del so the whole term rides inside `- /\ id{T}`.
    let mut d = insert_pair_right(&start, &ArrowTerm::DeltaFwd(src.clone()), theory);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "delta-nat", &[CG], L2R);

    // Split the padded copy into (del>{PQ} /\ 1) o (b> /\ 1).
    step(&mut d, theory, "cat1L", &[CG, CF, TR], R2L);
    step(&mut d, theory, "and2", &[CG, CF], L2R);

    // del>{PQ} /\ 1  =  (1 /\ sig>{T}) o b<{PQ;T;T}.
    let dpad = ArrowTerm::tensor(ArrowTerm::DeltaFwd(pq.clone()), ArrowTerm::Id(top.clone()));
    let spad = ArrowTerm::tensor(ArrowTerm::Id(pq.clone()), ArrowTerm::SigmaFwd(top.clone()));
    let mut b2 = insert_pair_left(&dpad, &spad, theory);
    step(&mut b2, theory, "cat2", &[], L2R);
    splice(&mut b2, &bds_bwd(&pq, &top, theory).reversed(), &[CF]);
    splice(&mut d, &b2, &[CG, CF, CG]);

    // Slide the pentagon under the sigma.
    step(&mut d, theory, "cat2", &[CG, CF], L2R);
    splice(&mut d, &pent_slide(p, q, theory), &[CG, CF, CF]);

    // (1{PQ} /\ sig>{T}) o b>{P;Q;T/\T}  =  b>{P;Q;T} o (1{P} /\ (1{Q} /\ sig>)).
    step(&mut d, theory, "and1", &[CG, CF, CG, TL], R2L);
    step(&mut d, theory, "cat2", &[CG, CF], R2L);
    step(&mut d, theory, "b-nat", &[CG, CF, CG], L2R);

    // Merge (1{Q} /\ sig>{T}) with b<{Q;T;T} and reduce it to del>{Q} /\ 1{T}.
    step(&mut d, theory, "cat2", &[CG, CF], L2R);
    step(&mut d, theory, "cat2", &[CG, CF, CF], R2L);
    step(&mut d, theory, "and2", &[CG, CF, CF, CG], R2L);
    step(&mut d, theory, "cat1L", &[CG, CF, CF, CG, TL], L2R);
    splice(
        &mut d,
        &{
            let zone = ArrowTerm::compose(
                ArrowTerm::tensor(ArrowTerm::Id(q.clone()), ArrowTerm::SigmaFwd(top.clone())),
                ArrowTerm::BBwd(q.clone(), top.clone(), top.clone()),
            );
            let mut z = Derivation::empty(zone);
            splice(&mut z, &bds_bwd(q, &top, theory), &[CF]);
            step(&mut z, theory, "cat2", &[], R2L);
            step(&mut z, theory, "and2", &[CG], R2L);
            step(&mut z, theory, "cat1L", &[CG, TL], L2R);
            step(&mut z, theory, "sigmasigma2", &[CG, TR], L2R);
            step(&mut z, theory, "and1", &[CG], L2R);
            step(&mut z, theory, "cat1L", &[], L2R);
            z
        },
        &[CG, CF, CF, CG, TR],
    );

    // Pull del>{Q} back through the association and cancel the leftover pair.
    splice(
        &mut d,
        &bnat_bwd(
            &ArrowTerm::Id(p.clone()),
            &ArrowTerm::DeltaFwd(q.clone()),
            &ArrowTerm::Id(top.clone()),
            theory,
        )
        .reversed(),
        &[CG, CF, CF],
    );
    step(&mut d, theory, "cat2", &[CG, CF], R2L);
    step(&mut d, theory, "bb2", &[CG, CF, CG], L2R);
    step(&mut d, theory, "cat1L", &[CG, CF], L2R);

    // Close the conjugation: del>{PQ} o ((1 /\ del>{Q}) /\ 1) o del<.
    step(&mut d, theory, "delta-nat", &[CG], R2L);
    step(&mut d, theory, "cat2", &[], L2R);
    step(&mut d, theory, "deltadelta2", &[CF], L2R);
    step(&mut d, theory, "cat1R", &[], L2R);
    d
}

/// Backward pentagon:
/// `b<{A;B;C/\D} o b<{A/\B;C;D}
///   =  (id{A} /\ b<{B;C;D}) o (b<{A;B/\C;D} o (b<{A;B;C} /\ id{D}))`.
pub fn b5_bwd(a: &Formula, b: &Formula, c: &Formula, dd: &Formula, theory: Theory) -> Derivation {
    let ab = Formula::conj(a.clone(), b.clone());
    let bc = Formula::conj(b.clone(), c.clone());
    let cd = Formula::conj(c.clone(), dd.clone());
    let start = ArrowTerm::compose(
        ArrowTerm::BBwd(a.clone(), b.clone(), cd),
        ArrowTerm::BBwd(ab, c.clone(), dd.clone()),
    );
    let y = ArrowTerm::compose(
        ArrowTerm::tensor(
            ArrowTerm::Id(a.clone()),
            ArrowTerm::BBwd(b.clone(), c.clone(), dd.clone()),
        ),
        ArrowTerm::compose(
            ArrowTerm::BBwd(a.clone(), bc, dd.clone()),
            ArrowTerm::tensor(
                ArrowTerm::BBwd(a.clone(), b.clone(), c.clone()),
                ArrowTerm::Id(dd.clone()),
            ),
        ),
    );
    let mut d = insert_pair_left(&start, &y, theory);
    step(&mut d, theory, "cat2", &[], L2R);
    step(&mut d, theory, "cat2", &[CF, CG], L2R);
    step(&mut d, theory, "b5", &[CF, CG], R2L);
    step(&mut d, theory, "cat2", &[CF], L2R);
    step(&mut d, theory, "cat2", &[CF, CF], R2L);
    step(&mut d, theory, "bb2", &[CF, CF, CG], L2R);
    step(&mut d, theory, "cat1L", &[CF, CF], L2R);
    step(&mut d, theory, "bb2", &[CF], L2R);
    step(&mut d, theory, "cat1R", &[], L2R);
    d
}

/// Expansion of a symmetry whose first component is a conjunction:
/// `c{B/\C;A}` rewritten through the hexagon for `c{A;B/\C}`.
pub fn c_first_expand(a: &Formula, b: &Formula, c: &Formula, theory: Theory) -> Derivation {
    let bc = Formula::conj(b.clone(), c.clone());
    let start = ArrowTerm::Sym(bc, a.clone());
    let hex = ArrowTerm::compose(
        ArrowTerm::BFwd(b.clone(), c.clone(), a.clone()),
        ArrowTerm::compose(
            ArrowTerm::tensor(
                ArrowTerm::Id(b.clone()),
                ArrowTerm::Sym(a.clone(), c.clone()),
            ),
            ArrowTerm::compose(
                ArrowTerm::BBwd(b.clone(), a.clone(), c.clone()),
                ArrowTerm::compose(
                    ArrowTerm::tensor(
                        ArrowTerm::Sym(a.clone(), b.clone()),
                        ArrowTerm::Id(c.clone()),
                    ),
                    ArrowTerm::BFwd(a.clone(), b.clone(), c.clone()),
                ),
            ),
        ),
    );
    let mut d = insert_pair_right(&start, &hex, theory);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "bc", &[CG, CF], R2L);
    step(&mut d, theory, "cc", &[CG], L2R);
    step(&mut d, theory, "cat1L", &[], L2R);
    d
}

/// Mirror image of a formula: conjunctions flip, atoms stay.
pub fn mirror_formula(a: &Formula) -> Formula {
    match a {
        Formula::Top => Formula::Top,
        Formula::Atom(..) => a.clone(),
        Formula::Conj(l, r) => Formula::conj(mirror_formula(r), mirror_formula(l)),
    }
}

/// Mirror image of a structural-isomorphism term; panics on relational
/// generators, which have no left-to-right reflection.
pub fn mirror_term(t: &ArrowTerm) -> ArrowTerm {
    match t {
        ArrowTerm::Id(a) => ArrowTerm::Id(mirror_formula(a)),
        ArrowTerm::BFwd(a, b, c) => {
            ArrowTerm::BBwd(mirror_formula(c), mirror_formula(b), mirror_formula(a))
        }
        ArrowTerm::BBwd(a, b, c) => {
            ArrowTerm::BFwd(mirror_formula(c), mirror_formula(b), mirror_formula(a))
        }
        ArrowTerm::DeltaFwd(a) => ArrowTerm::SigmaFwd(mirror_formula(a)),
        ArrowTerm::DeltaBwd(a) => ArrowTerm::SigmaBwd(mirror_formula(a)),
        ArrowTerm::SigmaFwd(a) => ArrowTerm::DeltaFwd(mirror_formula(a)),
        ArrowTerm::SigmaBwd(a) => ArrowTerm::DeltaBwd(mirror_formula(a)),
        ArrowTerm::Sym(a, b) => ArrowTerm::Sym(mirror_formula(b), mirror_formula(a)),
        ArrowTerm::Compose(g, f) => ArrowTerm::compose(mirror_term(g), mirror_term(f)),
        ArrowTerm::Tensor(l, r) => ArrowTerm::tensor(mirror_term(r), mirror_term(l)),
        other => panic!("mirror_term: {other} has no mirror image"),
    }
}

/// The path addressing the mirror image of `t`'s subterm at `path`.
fn mirror_path(t: &ArrowTerm, path: &Path) -> Path {
    let mut out = Vec::with_capacity(path.0.len());
    let mut cur = t;
    for stp in &path.0 {
        let (mirrored, next) = match (stp, cur) {
            (PathStep::ComposeG, ArrowTerm::Compose(g, _)) => (PathStep::ComposeG, g.as_ref()),
            (PathStep::ComposeF, ArrowTerm::Compose(_, f)) => (PathStep::ComposeF, f.as_ref()),
            (PathStep::TensorL, ArrowTerm::Tensor(l, _)) => (PathStep::TensorR, l.as_ref()),
            (PathStep::TensorR, ArrowTerm::Tensor(_, r)) => (PathStep::TensorL, r.as_ref()),
            _ => panic!("mirror_path: path does not fit the term"),
        };
        out.push(mirrored);
        cur = next;
    }
    Path(out)
}

fn splice_bridged(
    d: &mut Derivation,
    theory: Theory,
    path: &Path,
    core: Derivation,
    expect_sub_end: &ArrowTerm,
) {
    let sub_start = d
        .end()
        .subterm(path)
        .expect("splice_bridged path exists")
        .clone();
    let mut s = assoc_bridge(&sub_start, &core.start, theory);
    s.extend(&core);
    let tail = assoc_bridge(s.end(), expect_sub_end, theory);
    s.extend(&tail);
    let lifted = s.at_path(d.end(), path);
    d.extend(&lifted);
}

/// Reflects a derivation over structural isomorphisms left-to-right: every
/// term is mirrored, `del` trades places with `sig`, and the handedness of
/// the associativity and hexagon equations is rebuilt from canned proofs.
pub fn mirror_derivation(src: &Derivation, theory: Theory) -> Derivation {
    let mut d = Derivation::empty(mirror_term(&src.start));
    let mut pre = src.start.clone();
    for s in &src.steps {
        let mp = mirror_path(&pre, &s.path);
        let expect = mirror_term(&s.result);
        let expect_sub = expect
            .subterm(&mp)
            .unwrap_or_else(|| panic!("mirror image keeps the path {mp}"))
            .clone();
        match s.equation.as_str() {
            "cat1L" | "cat1R" | "cat2" | "and1" | "and2" | "cc" | "c-nat" => {
                d.push(theory, &s.equation, &mp, s.direction)
                    .unwrap_or_else(|e| panic!("mirrored {} failed: {e}", s.equation));
            }
            "delta-nat" | "sigma-nat" | "deltadelta1" | "sigmasigma1" | "deltadelta2"
            | "sigmasigma2" | "bb1" | "bb2" => {
                let swapped = match s.equation.as_str() {
                    "delta-nat" => "sigma-nat",
                    "sigma-nat" => "delta-nat",
                    "deltadelta1" => "sigmasigma1",
                    "sigmasigma1" => "deltadelta1",
                    "deltadelta2" => "sigmasigma2",
                    "sigmasigma2" => "deltadelta2",
                    "bb1" => "bb2",
                    _ => "bb1",
                };
                d.push(theory, swapped, &mp, s.direction)
                    .unwrap_or_else(|e| panic!("mirrored {} failed: {e}", s.equation));
            }
            "b-nat" => {
                let sub = d.end().subterm(&mp).expect("b-nat mirror subterm").clone();
                let core = match s.direction {
                    // L2R: mirrored redex is the end shape of bnat_bwd.
                    Direction::L2R => {
                        let ArrowTerm::Compose(g, _) = &sub else {
                            panic!("mirrored b-nat redex is a composition")
                        };
                        let ArrowTerm::Tensor(u, vw) = g.as_ref() else {
                            panic!("mirrored b-nat redex has a tensor above")
                        };
                        let ArrowTerm::Tensor(v, w) = vw.as_ref() else {
                            panic!("mirrored b-nat redex nests to the right")
                        };
                        bnat_bwd(u, v, w, theory).reversed()
                    }
                    Direction::R2L => {
                        let ArrowTerm::Compose(_, f) = &sub else {
                            panic!("mirrored b-nat redex is a composition")
                        };
                        let ArrowTerm::Tensor(uv, w) = f.as_ref() else {
                            panic!("mirrored b-nat redex has a tensor below")
                        };
                        let ArrowTerm::Tensor(u, v) = uv.as_ref() else {
                            panic!("mirrored b-nat redex nests to the left")
                        };
                        bnat_bwd(u, v, w, theory)
                    }
                };
                splice_bridged(&mut d, theory, &mp, core, &expect_sub);
            }
            "b5" => {
                let sub = d.end().subterm(&mp).expect("b5 mirror subterm").clone();
                let core = match s.direction {
                    Direction::L2R => {
                        let ArrowTerm::Compose(g, _) = &sub else {
                            panic!("mirrored b5 redex is a composition")
                        };
                        let ArrowTerm::BBwd(x, y, _) = g.as_ref() else {
                            panic!("mirrored b5 redex starts with b<")
                        };
                        let ArrowTerm::Compose(_, f) = &sub else { unreachable!() };
                        let ArrowTerm::BBwd(_, z, w) = f.as_ref() else {
                            panic!("mirrored b5 redex ends with b<")
                        };
                        b5_bwd(x, y, z, w, theory)
                    }
                    Direction::R2L => {
                        let ArrowTerm::Compose(g, _) = &sub else {
                            panic!("mirrored b5 redex is a composition")
                        };
                        let ArrowTerm::Tensor(i, bb) = g.as_ref() else {
                            panic!("mirrored b5 redex starts with a tensor")
                        };
                        let ArrowTerm::Id(x) = i.as_ref() else {
                            panic!("mirrored b5 redex has an identity pad")
                        };
                        let ArrowTerm::BBwd(y, z, w) = bb.as_ref() else {
                            panic!("mirrored b5 redex carries b<")
                        };
                        b5_bwd(x, y, z, w, theory).reversed()
                    }
                };
                splice_bridged(&mut d, theory, &mp, core, &expect_sub);
            }
            "bdeltasigma" => {
                let sub = d
                    .end()
                    .subterm(&mp)
                    .expect("bdeltasigma mirror subterm")
                    .clone();
                let core = match s.direction {
                    Direction::L2R => {
                        let ArrowTerm::BBwd(x, _, z) = &sub else {
                            panic!("mirrored bdeltasigma redex is b<")
                        };
                        bds_bwd(x, z, theory)
                    }
                    Direction::R2L => {
                        let ArrowTerm::Compose(g, _) = &sub else {
                            panic!("mirrored bdeltasigma redex is a composition")
                        };
                        let ArrowTerm::Tensor(i, sb) = g.as_ref() else {
                            panic!("mirrored bdeltasigma redex starts with a tensor")
                        };
                        let (ArrowTerm::Id(x), ArrowTerm::SigmaBwd(z)) = (i.as_ref(), sb.as_ref())
                        else {
                            panic!("mirrored bdeltasigma redex pads sig<")
                        };
                        bds_bwd(x, z, theory).reversed()
                    }
                };
                splice_bridged(&mut d, theory, &mp, core, &expect_sub);
            }
            "bc" => {
                let sub = d.end().subterm(&mp).expect("bc mirror subterm").clone();
                let core = match s.direction {
                    Direction::L2R => {
                        let ArrowTerm::Sym(cb, a) = &sub else {
                            panic!("mirrored bc redex is a symmetry")
                        };
                        let Formula::Conj(c, b) = cb else {
                            panic!("mirrored bc redex splits a conjunction")
                        };
                        c_first_expand(a, c, b, theory)
                    }
                    Direction::R2L => {
                        let ArrowTerm::Compose(g, _) = &sub else {
                            panic!("mirrored bc redex is a composition")
                        };
                        let ArrowTerm::BBwd(a, c, b) = g.as_ref() else {
                            panic!("mirrored bc redex starts with b<")
                        };
                        c_first_expand(a, c, b, theory).reversed()
                    }
                };
                splice_bridged(&mut d, theory, &mp, core, &expect_sub);
            }
            other => panic!("mirror_derivation: no mirror rule for equation {other}"),
        }
        debug_assert_eq!(d.end(), &expect, "mirror step drifted at {}", s.equation);
        pre = s.result.clone();
    }
    d
}

/// `sig>{Q/\R} o b<{T;Q;R}  =  sig>{Q} /\ id{R}`.
pub fn m3s(q: &Formula, r: &Formula, theory: Theory) -> Derivation {
    mirror_derivation(&m3(&mirror_formula(r), &mirror_formula(q), theory), theory)
}

/// `sig>{T}  =  del>{T}`: the two unit isomorphisms of `T /\ T` agree.
pub fn lam_rho(theory: Theory) -> Derivation {
    let top = Formula::Top;
    let tt = Formula::conj(top.clone(), top.clone());
    let start = ArrowTerm::SigmaFwd(top.clone());
    let mut d = insert_pair_right(&start, &ArrowTerm::SigmaFwd(tt.clone()), theory);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "sigma-nat", &[CG], L2R);

    // Rewrite 1{T} /\ sig>{T} into 1{T} /\ del>{T} by way of b>{T;T;T}.
    let pad = ArrowTerm::tensor(ArrowTerm::Id(top.clone()), ArrowTerm::SigmaFwd(top.clone()));
    let dpair = ArrowTerm::tensor(ArrowTerm::DeltaFwd(top.clone()), ArrowTerm::Id(top.clone()));
    let mut z = insert_pair_left(&pad, &dpair, theory);
    step(&mut z, theory, "cat2", &[], L2R);
    step(&mut z, theory, "bdeltasigma", &[CF], R2L);
    splice(&mut z, &delta_merge(&top, theory), &[CG]);
    splice(&mut z, &m3(&top, &top, theory), &[]);
    splice(&mut d, &z, &[CG, CF]);

    step(&mut d, theory, "sigma-nat", &[CG], R2L);
    step(&mut d, theory, "cat2", &[], L2R);
    step(&mut d, theory, "sigmasigma2", &[CF], L2R);
    step(&mut d, theory, "cat1R", &[], L2R);
    d
}

/// `del>{T} o sig<{T}  =  id{T}`.
pub fn scalar_ds(theory: Theory) -> Derivation {
    let start = ArrowTerm::compose(
        ArrowTerm::DeltaFwd(Formula::Top),
        ArrowTerm::SigmaBwd(Formula::Top),
    );
    let mut d = Derivation::empty(start);
    splice(&mut d, &lam_rho(theory).reversed(), &[CG]);
    step(&mut d, theory, "sigmasigma2", &[], L2R);
    d
}

/// `sig>{T} o del<{T}  =  id{T}`.
pub fn scalar_sd(theory: Theory) -> Derivation {
    let start = ArrowTerm::compose(
        ArrowTerm::SigmaFwd(Formula::Top),
        ArrowTerm::DeltaBwd(Formula::Top),
    );
    let mut d = Derivation::empty(start);
    splice(&mut d, &lam_rho(theory), &[CG]);
    step(&mut d, theory, "deltadelta2", &[], L2R);
    d
}

/// `sig>{B} o c{B;T}  =  del>{B}`: the unit isomorphisms agree across the
/// symmetry.
pub fn m2s(b: &Formula, theory: Theory) -> Derivation {
    let top = Formula::Top;
    let bt = Formula::conj(b.clone(), top.clone());
    let start = ArrowTerm::compose(
        ArrowTerm::SigmaFwd(b.clone()),
        ArrowTerm::Sym(b.clone(), top.clone()),
    );

    // Conjugate with del so the composite rides inside `- /\ id{T}`.
    let mut d = insert_pair_right(&start, &ArrowTerm::DeltaFwd(bt.clone()), theory);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "delta-nat", &[CG], L2R);

    // Zone: (T0 /\ 1{T}) o b>{B;T;T}  =  1{B} /\ sig>{T}, via the hexagon.
    let zone = {
        let w = ArrowTerm::tensor(start.clone(), ArrowTerm::Id(top.clone()));
        let mut z = insert_pair_right(
            &w,
            &ArrowTerm::BFwd(b.clone(), top.clone(), top.clone()),
            theory,
        );
        step(&mut z, theory, "cat2", &[], R2L);

        // Inner goal: (T0 /\ 1) o b>  ==>  1{B} /\ sig>{T}.
        let inner = {
            let g0 = ArrowTerm::compose(
                ArrowTerm::tensor(start.clone(), ArrowTerm::Id(top.clone())),
                ArrowTerm::BFwd(b.clone(), top.clone(), top.clone()),
            );
            let mut g = Derivation::empty(g0);

            // Split off sig>{B} /\ 1{T} and expand it through b<{T;B;T}.
            step(&mut g, theory, "cat1L", &[CG, TR], R2L);
            step(&mut g, theory, "and2", &[CG], L2R);
            step(&mut g, theory, "cat2", &[], L2R);
            splice(&mut g, &m3s(b, &top, theory).reversed(), &[CG]);
            step(&mut g, theory, "cat2", &[], L2R);

            // Rebuild the full hexagon for c{B;T/\T} around the tail.
            let u = ArrowTerm::compose(
                ArrowTerm::BFwd(top.clone(), top.clone(), b.clone()),
                ArrowTerm::tensor(
                    ArrowTerm::Id(top.clone()),
                    ArrowTerm::Sym(b.clone(), top.clone()),
                ),
            );
            let tail = {
                let ArrowTerm::Compose(_, f) = g.end() else {
                    unreachable!("hexagon tail sits under a composition")
                };
                f.as_ref().clone()
            };
            splice(
                &mut g,
                &insert_pair_left(&tail, &iso_inverse(&u), theory),
                &[CF],
            );
            step(&mut g, theory, "cat2", &[CF], L2R);
            step(&mut g, theory, "cat2", &[CF, CF], L2R);
            step(&mut g, theory, "bc", &[CF, CF], R2L);

            // Slide sig> across the leftover inverses, then cancel the
            // symmetries pairwise.
            step(&mut g, theory, "cat2", &[], R2L);
            step(&mut g, theory, "cat2", &[CG], R2L);
            step(&mut g, theory, "sigma-nat", &[CG, CG], R2L);
            step(&mut g, theory, "cat2", &[CG], L2R);
            splice(&mut g, &m3s(&top, b, theory), &[CG, CF]);
            step(&mut g, theory, "cat2", &[], L2R);
            step(&mut g, theory, "c-nat", &[CF], L2R);
            step(&mut g, theory, "cat2", &[], R2L);
            step(&mut g, theory, "cc", &[CG], L2R);
            step(&mut g, theory, "cat1L", &[], L2R);
            g
        };
        splice(&mut z, &inner, &[CG]);

        // (1{B} /\ sig>{T}) o b<  =  del>{B} /\ 1{T}.
        splice(&mut z, &bmid(b, &top, theory).reversed(), &[CG]);
        step(&mut z, theory, "cat2", &[], L2R);
        step(&mut z, theory, "bb2", &[CF], L2R);
        step(&mut z, theory, "cat1R", &[], L2R);
        z
    };
    splice(&mut d, &zone, &[CG, CF]);

    // Close the conjugation.
    step(&mut d, theory, "delta-nat", &[CG], R2L);
    step(&mut d, theory, "cat2", &[], L2R);
    step(&mut d, theory, "deltadelta2", &[CF], L2R);
    step(&mut d, theory, "cat1R", &[], L2R);
    d
}

/// `del>{A} o c{T;A}  =  sig>{A}`.
pub fn m2(a: &Formula, theory: Theory) -> Derivation {
    let start = ArrowTerm::compose(
        ArrowTerm::DeltaFwd(a.clone()),
        ArrowTerm::Sym(Formula::Top, a.clone()),
    );
    let mut d = Derivation::empty(start);
    splice(&mut d, &m2s(a, theory).reversed(), &[CG]);
    step(&mut d, theory, "cat2", &[], L2R);
    step(&mut d, theory, "cc", &[CF], L2R);
    step(&mut d, theory, "cat1R", &[], L2R);
    d
}

/// `a[t;t;s;s] o (r[t] /\ r[s])  =  r[t.s] o del>{T}`: two reflexivities
/// under a congruence merge into one reflexivity at the product term.
pub fn ra_dance(
    t: &crate::syntax::Term,
    s: &crate::syntax::Term,
    theory: Theory,
) -> Derivation {
    let start = ArrowTerm::compose(
        ArrowTerm::Cong(t.clone(), t.clone(), s.clone(), s.clone()),
        ArrowTerm::tensor(ArrowTerm::Refl(t.clone()), ArrowTerm::Refl(s.clone())),
    );
    let mut d = Derivation::empty(start);
    step(&mut d, theory, "cat1R", &[], R2L);
    step(&mut d, theory, "deltadelta1", &[CF], R2L);
    step(&mut d, theory, "cat2", &[], R2L);
    step(&mut d, theory, "cat2", &[CG], L2R);
    step(&mut d, theory, "ra", &[CG], L2R);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::eval;
    use crate::syntax::{Rel, Term};

    fn atom(l: &str, r: &str) -> Formula {
        Formula::Atom(Rel::Leq, Term::var(l), Term::var(r))
    }

    fn formulas() -> Vec<Formula> {
        vec![
            atom("x", "y"),
            Formula::Top,
            Formula::conj(atom("x", "y"), atom("u", "v")),
            Formula::conj(Formula::Top, Formula::conj(atom("p", "q"), Formula::Top)),
        ]
    }

    fn check(d: &Derivation, theory: Theory) {
        d.replay(theory).expect("canned derivation replays");
        let a = eval(&d.start, theory).expect("start evaluates");
        let b = eval(d.end(), theory).expect("end evaluates");
        assert!(a.same_matching(&b), "diagram drifted: {} vs {}", d.start, d.end());
        let ta = d.start.infer_type(theory).unwrap();
        let tb = d.end().infer_type(theory).unwrap();
        assert_eq!(ta, tb, "type drifted");
    }

    #[test]
    fn cancellation_and_insertion() {
        let th = Theory::MLeq;
        let u = ArrowTerm::compose(
            ArrowTerm::BBwd(atom("x", "y"), Formula::Top, Formula::Top),
            ArrowTerm::tensor(
                ArrowTerm::DeltaBwd(atom("x", "y")),
                ArrowTerm::Id(Formula::Top),
            ),
        );
        let d = cancel_pair(&u, th);
        check(&d, th);
        assert!(matches!(d.end(), ArrowTerm::Id(_)));

        let t = ArrowTerm::DeltaFwd(atom("x", "y"));
        let ins = insert_pair_right(
            &t,
            &ArrowTerm::tensor(
                ArrowTerm::Id(atom("x", "y")),
                ArrowTerm::DeltaFwd(Formula::Top),
            ),
            th,
        );
        check(&ins, th);
        let ins2 = insert_pair_left(&t, &ArrowTerm::DeltaFwd(atom("x", "y")), th);
        check(&ins2, th);
    }

    #[test]
    fn backward_naturality_macros() {
        let th = Theory::MLeq;
        let f = ArrowTerm::compose(
            ArrowTerm::Trans(Term::var("x"), Term::var("y"), Term::var("z")),
            ArrowTerm::Id(Formula::conj(atom("x", "y"), atom("y", "z"))),
        );
        let d = dnat_bwd(&f, th);
        check(&d, th);
        assert!(matches!(d.end(), ArrowTerm::Compose(g, _)
            if matches!(g.as_ref(), ArrowTerm::Tensor(..))));

        let d = snat_bwd(&f, th);
        check(&d, th);

        let u = ArrowTerm::Refl(Term::var("x"));
        let v = ArrowTerm::DeltaFwd(atom("u", "v"));
        let w = ArrowTerm::Id(Formula::Top);
        let d = bnat_bwd(&u, &v, &w, th);
        check(&d, th);
        assert!(matches!(d.end(), ArrowTerm::Compose(_, f2)
            if matches!(f2.as_ref(), ArrowTerm::BBwd(..))));
    }

    #[test]
    fn unit_shuffles() {
        let th = Theory::MLeq;
        for a in formulas() {
            for c in formulas() {
                check(&bds_bwd(&a, &c, th), th);
                check(&bmid(&a, &c, th), th);
                check(&pent_slide(&a, &c, th), th);
                let d = m3(&a, &c, th);
                check(&d, th);
                assert_eq!(
                    d.end(),
                    &ArrowTerm::tensor(ArrowTerm::Id(a.clone()), ArrowTerm::DeltaFwd(c.clone()))
                );
                let d = m3s(&a, &c, th);
                check(&d, th);
                assert_eq!(
                    d.end(),
                    &ArrowTerm::tensor(ArrowTerm::SigmaFwd(a.clone()), ArrowTerm::Id(c.clone()))
                );
            }
            check(&delta_merge(&a, th), th);
            check(&sigma_merge(&a, th), th);
        }
    }

    #[test]
    fn backward_pentagon() {
        let th = Theory::MLeq;
        let fs = formulas();
        let d = b5_bwd(&fs[0], &fs[1], &fs[2], &fs[3], th);
        check(&d, th);
    }

    #[test]
    fn unit_agreement() {
        let th = Theory::MLeq;
        let d = lam_rho(th);
        check(&d, th);
        assert_eq!(d.end(), &ArrowTerm::DeltaFwd(Formula::Top));
        check(&scalar_ds(th), th);
        check(&scalar_sd(th), th);
        assert!(matches!(scalar_ds(th).end(), ArrowTerm::Id(Formula::Top)));
    }

    #[test]
    fn symmetry_units() {
        let th = Theory::SLeq;
        for b in formulas() {
            let d = m2s(&b, th);
            check(&d, th);
            assert_eq!(d.end(), &ArrowTerm::DeltaFwd(b.clone()));
            let d = m2(&b, th);
            check(&d, th);
            assert_eq!(d.end(), &ArrowTerm::SigmaFwd(b.clone()));
        }
        let d = c_first_expand(&formulas()[0], &formulas()[1], &formulas()[2], th);
        check(&d, th);
    }

    #[test]
    fn congruence_reflexivity_merge() {
        let th = Theory::SdotLeq;
        let d = ra_dance(&Term::var("x"), &Term::prod(Term::var("u"), Term::var("v")), th);
        check(&d, th);
        assert!(matches!(d.end(), ArrowTerm::Compose(g, _)
            if matches!(g.as_ref(), ArrowTerm::Refl(_))));
    }

    #[test]
    fn mirror_reflects_whole_derivations() {
        let th = Theory::MLeq;
        let d = bds_bwd(&atom("x", "y"), &Formula::conj(atom("u", "v"), Formula::Top), th);
        let m = mirror_derivation(&d, th);
        m.replay(th).expect("mirrored derivation replays");
        assert_eq!(m.start, mirror_term(&d.start));
        assert_eq!(m.end(), &mirror_term(d.end()));
    }
}
