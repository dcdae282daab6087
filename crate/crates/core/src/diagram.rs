//! Matching diagrams: the semantic reading of arrow terms.
//!
//! A diagram has a row of labelled source points (drawn at the bottom), a
//! row of labelled target points (drawn at the top), and a perfect matching
//! between all of them. Composition glues two diagrams along an interface
//! row and walks the glued paths; closed cycles that arise this way carry
//! no information about outer points, so they are discarded and counted in
//! `loops_discarded`.
//!
//! Evaluation maps every arrow term to a diagram whose rows are the
//! variable occurrences of its source and target formulae. The traced
//! variant additionally remembers, for every resulting edge, which
//! primitive generator edges were walked to produce it; diversification
//! relies on that record.

use std::fmt::Write as _;

use serde_json::json;

use crate::proofterm::{ArrowTerm, Path, PathStep, Theory, TypeError};
use crate::syntax::{Term, Variable};

/// Which row a point lives in.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    Src,
    Tgt,
}

/// One point of a diagram.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Endpoint {
    pub side: Side,
    pub index: usize,
}

impl Endpoint {
    pub fn src(index: usize) -> Self {
        Endpoint {
            side: Side::Src,
            index,
        }
    }

    pub fn tgt(index: usize) -> Self {
        Endpoint {
            side: Side::Tgt,
            index,
        }
    }

    fn to_json(self) -> serde_json::Value {
        let side = match self.side {
            Side::Src => "s",
            Side::Tgt => "t",
        };
        json!([side, self.index])
    }
}

/// Errors from raw diagram construction and composition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DiagramError {
    /// The two rows being glued disagree at `position`. A label of `None`
    /// means that row is too short to have a point there.
    InterfaceMismatch {
        position: usize,
        label_f: Option<Variable>,
        label_g: Option<Variable>,
    },
    /// The edge list is not a perfect matching of the points.
    NotAMatching { detail: String },
}

impl std::fmt::Display for DiagramError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiagramError::InterfaceMismatch {
                position,
                label_f,
                label_g,
            } => {
                let show = |l: &Option<Variable>| match l {
                    Some(v) => v.to_string(),
                    None => "(missing)".to_string(),
                };
                write!(
                    f,
                    "interface mismatch at position {position}: inner row has {}, outer row has {}",
                    show(label_f),
                    show(label_g)
                )
            }
            DiagramError::NotAMatching { detail } => write!(f, "not a matching: {detail}"),
        }
    }
}

impl std::error::Error for DiagramError {}

/// A perfect matching between two labelled rows, plus a count of closed
/// loops discarded during earlier compositions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagram {
    src_labels: Vec<Variable>,
    tgt_labels: Vec<Variable>,
    edges: Vec<(Endpoint, Endpoint)>,
    loops_discarded: u64,
}

impl Diagram {
    /// Builds a diagram after checking that `edges` is a perfect matching
    /// of the labelled points. Edges are stored in canonical order.
    pub fn new(
        src_labels: Vec<Variable>,
        tgt_labels: Vec<Variable>,
        edges: Vec<(Endpoint, Endpoint)>,
        loops_discarded: u64,
    ) -> Result<Diagram, DiagramError> {
        let n = src_labels.len();
        let m = tgt_labels.len();
        let mut seen_src = vec![false; n];
        let mut seen_tgt = vec![false; m];
        for &(a, b) in &edges {
            for p in [a, b] {
                let (seen, len) = match p.side {
                    Side::Src => (&mut seen_src, n),
                    Side::Tgt => (&mut seen_tgt, m),
                };
                if p.index >= len {
                    return Err(DiagramError::NotAMatching {
                        detail: format!("point index {} out of range", p.index),
                    });
                }
                if seen[p.index] {
                    return Err(DiagramError::NotAMatching {
                        detail: format!("point matched twice: {p:?}"),
                    });
                }
                seen[p.index] = true;
            }
        }
        if seen_src.iter().any(|s| !s) || seen_tgt.iter().any(|s| !s) {
            return Err(DiagramError::NotAMatching {
                detail: "some point is unmatched".to_string(),
            });
        }
        let mut d = Diagram {
            src_labels,
            tgt_labels,
            edges,
            loops_discarded,
        };
        d.canonicalise();
        Ok(d)
    }

    /// The identity matching on one row of labels.
    pub fn identity(labels: Vec<Variable>) -> Diagram {
        let edges = (0..labels.len())
            .map(|i| (Endpoint::src(i), Endpoint::tgt(i)))
            .collect();
        Diagram {
            src_labels: labels.clone(),
            tgt_labels: labels,
            edges,
            loops_discarded: 0,
        }
    }

    fn canonicalise(&mut self) {
        for edge in &mut self.edges {
            if edge.0 > edge.1 {
                std::mem::swap(&mut edge.0, &mut edge.1);
            }
        }
        self.edges.sort();
    }

    pub fn src_labels(&self) -> &[Variable] {
        &self.src_labels
    }

    pub fn tgt_labels(&self) -> &[Variable] {
        &self.tgt_labels
    }

    /// Edges in canonical order: each edge has its smaller endpoint first,
    /// and the list is sorted.
    pub fn edges(&self) -> &[(Endpoint, Endpoint)] {
        &self.edges
    }

    pub fn loops_discarded(&self) -> u64 {
        self.loops_discarded
    }

    /// Equality of rows and matching, ignoring discarded-loop counts.
    pub fn same_matching(&self, other: &Diagram) -> bool {
        self.src_labels == other.src_labels
            && self.tgt_labels == other.tgt_labels
            && self.edges == other.edges
    }

    /// Glues `f` then `g`: the target row of `f` must match the source row
    /// of `g` exactly.
    pub fn compose(g: &Diagram, f: &Diagram) -> Result<Diagram, DiagramError> {
        let (td, _) = compose_traced(&TDiagram::from_diagram(g), &TDiagram::from_diagram(f))?;
        Ok(td.into_diagram().0)
    }

    /// Places `f` and `g` side by side.
    pub fn tensor(f: &Diagram, g: &Diagram) -> Diagram {
        tensor_traced(&TDiagram::from_diagram(f), &TDiagram::from_diagram(g))
            .into_diagram()
            .0
    }

    /// Swaps the two rows.
    pub fn mirror(&self) -> Diagram {
        let flip = |p: Endpoint| match p.side {
            Side::Src => Endpoint::tgt(p.index),
            Side::Tgt => Endpoint::src(p.index),
        };
        let mut d = Diagram {
            src_labels: self.tgt_labels.clone(),
            tgt_labels: self.src_labels.clone(),
            edges: self.edges.iter().map(|&(a, b)| (flip(a), flip(b))).collect(),
            loops_discarded: self.loops_discarded,
        };
        d.canonicalise();
        d
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "source": self.src_labels.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "target": self.tgt_labels.iter().map(|v| v.name()).collect::<Vec<_>>(),
            "edges": self
                .edges
                .iter()
                .map(|&(a, b)| json!([a.to_json(), b.to_json()]))
                .collect::<Vec<_>>(),
            "loops_discarded": self.loops_discarded,
        })
    }

    /// Graphviz output: target row on top, source row on the bottom.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("graph diagram {\n");
        out.push_str("  node [shape=plaintext];\n");
        out.push_str("  { rank=min;");
        for (i, v) in self.tgt_labels.iter().enumerate() {
            let _ = write!(out, " t{i} [label=\"{v}\"];");
        }
        out.push_str(" }\n  { rank=max;");
        for (i, v) in self.src_labels.iter().enumerate() {
            let _ = write!(out, " s{i} [label=\"{v}\"];");
        }
        out.push_str(" }\n");
        for pair in [("t", self.tgt_labels.len()), ("s", self.src_labels.len())] {
            let (row, len) = pair;
            for i in 1..len {
                let _ = writeln!(out, "  {row}{} -- {row}{i} [style=invis];", i - 1);
            }
        }
        for &(a, b) in &self.edges {
            let name = |p: Endpoint| {
                format!(
                    "{}{}",
                    match p.side {
                        Side::Src => "s",
                        Side::Tgt => "t",
                    },
                    p.index
                )
            };
            let _ = writeln!(out, "  {} -- {};", name(a), name(b));
        }
        let _ = writeln!(out, "  // loops discarded: {}", self.loops_discarded);
        out.push_str("}\n");
        out
    }

    /// Plain-text output with the same orientation as the DOT form.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        let row = |labels: &[Variable]| {
            labels
                .iter()
                .enumerate()
                .map(|(i, v)| format!("[{i}]{v}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "target: {}", row(&self.tgt_labels));
        let _ = writeln!(out, "source: {}", row(&self.src_labels));
        let name = |p: Endpoint| {
            format!(
                "{}{}",
                match p.side {
                    Side::Src => "s",
                    Side::Tgt => "t",
                },
                p.index
            )
        };
        let edges = self
            .edges
            .iter()
            .map(|&(a, b)| format!("{}-{}", name(a), name(b)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "edges: {edges}");
        let _ = writeln!(out, "loops discarded: {}", self.loops_discarded);
        out
    }
}

/// One primitive generator edge contributing to a composite edge: the
/// position of the generator in the arrow term, and the edge's endpoints
/// in that generator's own diagram.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceStep {
    pub path: Path,
    pub a: Endpoint,
    pub b: Endpoint,
}

/// For every edge of an evaluated diagram (and every discarded loop), the
/// primitive generator edges it is glued from. `per_edge` is aligned with
/// [`Diagram::edges`].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct EdgeProvenance {
    pub per_edge: Vec<Vec<TraceStep>>,
    pub loops: Vec<Vec<TraceStep>>,
}

/// Internal diagram with a trace attached to every edge.
struct TEdge {
    a: Endpoint,
    b: Endpoint,
    steps: Vec<TraceStep>,
}

struct TDiagram {
    src_labels: Vec<Variable>,
    tgt_labels: Vec<Variable>,
    edges: Vec<TEdge>,
    loops: Vec<Vec<TraceStep>>,
    loops_discarded: u64,
}

impl TDiagram {
    fn from_diagram(d: &Diagram) -> TDiagram {
        TDiagram {
            src_labels: d.src_labels.clone(),
            tgt_labels: d.tgt_labels.clone(),
            edges: d
                .edges
                .iter()
                .map(|&(a, b)| TEdge {
                    a,
                    b,
                    steps: Vec::new(),
                })
                .collect(),
            loops: Vec::new(),
            loops_discarded: d.loops_discarded,
        }
    }

    fn into_diagram(self) -> (Diagram, EdgeProvenance) {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        let key = |e: &TEdge| {
            let (a, b) = if e.a <= e.b { (e.a, e.b) } else { (e.b, e.a) };
            (a, b)
        };
        order.sort_by_key(|&i| key(&self.edges[i]));
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut per_edge = Vec::with_capacity(self.edges.len());
        for &i in &order {
            edges.push(key(&self.edges[i]));
            per_edge.push(self.edges[i].steps.clone());
        }
        (
            Diagram {
                src_labels: self.src_labels,
                tgt_labels: self.tgt_labels,
                edges,
                loops_discarded: self.loops_discarded,
            },
            EdgeProvenance {
                per_edge,
                loops: self.loops,
            },
        )
    }
}

/// Point numbering inside one diagram during composition: sources first,
/// then targets.
fn point_id(src_len: usize, p: Endpoint) -> usize {
    match p.side {
        Side::Src => p.index,
        Side::Tgt => src_len + p.index,
    }
}

/// Involution and edge index per point.
fn matching_map(d: &TDiagram) -> (Vec<Endpoint>, Vec<usize>) {
    let n = d.src_labels.len();
    let total = n + d.tgt_labels.len();
    let mut mate = vec![Endpoint::src(usize::MAX); total];
    let mut edge_of = vec![usize::MAX; total];
    for (idx, e) in d.edges.iter().enumerate() {
        mate[point_id(n, e.a)] = e.b;
        mate[point_id(n, e.b)] = e.a;
        edge_of[point_id(n, e.a)] = idx;
        edge_of[point_id(n, e.b)] = idx;
    }
    (mate, edge_of)
}

fn compose_traced(g: &TDiagram, f: &TDiagram) -> Result<(TDiagram, ()), DiagramError> {
    let interface = f.tgt_labels.len().max(g.src_labels.len());
    for position in 0..interface {
        let label_f = f.tgt_labels.get(position);
        let label_g = g.src_labels.get(position);
        if label_f != label_g {
            return Err(DiagramError::InterfaceMismatch {
                position,
                label_f: label_f.cloned(),
                label_g: label_g.cloned(),
            });
        }
    }
    let m = f.tgt_labels.len();
    let fn_src = f.src_labels.len();
    let gn_src = g.src_labels.len();
    let (f_mate, f_edge) = matching_map(f);
    let (g_mate, g_edge) = matching_map(g);

    let mut visited_interface = vec![false; m];
    let mut visited_f_src = vec![false; fn_src];
    let mut visited_g_tgt = vec![false; g.tgt_labels.len()];
    let mut edges: Vec<TEdge> = Vec::new();
    let mut loops: Vec<Vec<TraceStep>> = Vec::new();
    loops.extend(f.loops.iter().cloned());
    loops.extend(g.loops.iter().cloned());

    // Walks a glued path starting at an outer point. `start_in_f` says
    // whether the walk begins at a source point of `f` or a target point
    // of `g`. The returned endpoint is in result coordinates: `Src` for a
    // source point of `f`, `Tgt` for a target point of `g`.
    let walk = |visited_interface: &mut Vec<bool>,
                start: usize,
                start_in_f: bool|
     -> (Endpoint, Vec<TraceStep>) {
        let mut steps: Vec<TraceStep> = Vec::new();
        let mut in_f = start_in_f;
        let mut point = if start_in_f {
            Endpoint::src(start)
        } else {
            Endpoint::tgt(start)
        };
        loop {
            if in_f {
                let pid = point_id(fn_src, point);
                steps.extend(f.edges[f_edge[pid]].steps.iter().cloned());
                let mate = f_mate[pid];
                match mate.side {
                    Side::Src => return (Endpoint::src(mate.index), steps),
                    Side::Tgt => {
                        visited_interface[mate.index] = true;
                        point = Endpoint::src(mate.index);
                        in_f = false;
                    }
                }
            } else {
                let pid = point_id(gn_src, point);
                steps.extend(g.edges[g_edge[pid]].steps.iter().cloned());
                let mate = g_mate[pid];
                match mate.side {
                    Side::Tgt => return (Endpoint::tgt(mate.index), steps),
                    Side::Src => {
                        visited_interface[mate.index] = true;
                        point = Endpoint::tgt(mate.index);
                        in_f = true;
                    }
                }
            }
        }
    };

    let mark = |visited_f_src: &mut Vec<bool>, visited_g_tgt: &mut Vec<bool>, p: Endpoint| {
        match p.side {
            Side::Src => visited_f_src[p.index] = true,
            Side::Tgt => visited_g_tgt[p.index] = true,
        }
    };

    for i in 0..fn_src {
        if visited_f_src[i] {
            continue;
        }
        visited_f_src[i] = true;
        let (end, steps) = walk(&mut visited_interface, i, true);
        mark(&mut visited_f_src, &mut visited_g_tgt, end);
        edges.push(TEdge {
            a: Endpoint::src(i),
            b: end,
            steps,
        });
    }
    for k in 0..g.tgt_labels.len() {
        if visited_g_tgt[k] {
            continue;
        }
        visited_g_tgt[k] = true;
        let (end, steps) = walk(&mut visited_interface, k, false);
        mark(&mut visited_f_src, &mut visited_g_tgt, end);
        edges.push(TEdge {
            a: Endpoint::tgt(k),
            b: end,
            steps,
        });
    }

    // Whatever interface points remain lie on closed cycles.
    for j0 in 0..m {
        if visited_interface[j0] {
            continue;
        }
        let mut steps: Vec<TraceStep> = Vec::new();
        let mut j = j0;
        loop {
            visited_interface[j] = true;
            let g_pid = point_id(gn_src, Endpoint::src(j));
            steps.extend(g.edges[g_edge[g_pid]].steps.iter().cloned());
            let g_mate_pt = g_mate[g_pid];
            debug_assert_eq!(g_mate_pt.side, Side::Src, "closed cycle left the interface");
            let j2 = g_mate_pt.index;
            visited_interface[j2] = true;
            let f_pid = point_id(fn_src, Endpoint::tgt(j2));
            steps.extend(f.edges[f_edge[f_pid]].steps.iter().cloned());
            let f_mate_pt = f_mate[f_pid];
            debug_assert_eq!(f_mate_pt.side, Side::Tgt, "closed cycle left the interface");
            j = f_mate_pt.index;
            if j == j0 {
                break;
            }
        }
        loops.push(steps);
    }

    let loops_total = f.loops_discarded + g.loops_discarded
        + (loops.len() - f.loops.len() - g.loops.len()) as u64;
    Ok((
        TDiagram {
            src_labels: f.src_labels.clone(),
            tgt_labels: g.tgt_labels.clone(),
            edges,
            loops,
            loops_discarded: loops_total,
        },
        (),
    ))
}

fn tensor_traced(f: &TDiagram, g: &TDiagram) -> TDiagram {
    let src_shift = f.src_labels.len();
    let tgt_shift = f.tgt_labels.len();
    let shift = |p: Endpoint| match p.side {
        Side::Src => Endpoint::src(p.index + src_shift),
        Side::Tgt => Endpoint::tgt(p.index + tgt_shift),
    };
    let mut src_labels = f.src_labels.clone();
    src_labels.extend(g.src_labels.iter().cloned());
    let mut tgt_labels = f.tgt_labels.clone();
    tgt_labels.extend(g.tgt_labels.iter().cloned());
    let mut edges: Vec<TEdge> = f
        .edges
        .iter()
        .map(|e| TEdge {
            a: e.a,
            b: e.b,
            steps: e.steps.clone(),
        })
        .collect();
    edges.extend(g.edges.iter().map(|e| TEdge {
        a: shift(e.a),
        b: shift(e.b),
        steps: e.steps.clone(),
    }));
    let mut loops = f.loops.clone();
    loops.extend(g.loops.iter().cloned());
    TDiagram {
        src_labels,
        tgt_labels,
        edges,
        loops,
        loops_discarded: f.loops_discarded + g.loops_discarded,
    }
}

/// Evaluates an arrow term to its diagram.
pub fn eval(term: &ArrowTerm, theory: Theory) -> Result<Diagram, TypeError> {
    term.infer_type(theory)?;
    let td = build(term, theory, &Path::root());
    Ok(td.into_diagram().0)
}

/// Evaluates an arrow term, keeping the provenance of every edge.
pub fn eval_traced(
    term: &ArrowTerm,
    theory: Theory,
) -> Result<(Diagram, EdgeProvenance), TypeError> {
    term.infer_type(theory)?;
    let td = build(term, theory, &Path::root());
    Ok(td.into_diagram())
}

fn occ(t: &Term) -> Vec<Variable> {
    t.vars()
}

/// Builds the traced diagram of a term already known to type-check.
fn build(term: &ArrowTerm, theory: Theory, path: &Path) -> TDiagram {
    let step = |a: Endpoint, b: Endpoint| TraceStep {
        path: path.clone(),
        a,
        b,
    };
    let generator_identity = |src: Vec<Variable>| {
        let edges = (0..src.len())
            .map(|i| TEdge {
                a: Endpoint::src(i),
                b: Endpoint::tgt(i),
                steps: vec![step(Endpoint::src(i), Endpoint::tgt(i))],
            })
            .collect();
        TDiagram {
            src_labels: src.clone(),
            tgt_labels: src,
            edges,
            loops: Vec::new(),
            loops_discarded: 0,
        }
    };

    match term {
        ArrowTerm::Id(a) => generator_identity(a.occurrences()),
        ArrowTerm::BFwd(a, b, c) | ArrowTerm::BBwd(a, b, c) => {
            let mut row = a.occurrences();
            row.extend(b.occurrences());
            row.extend(c.occurrences());
            generator_identity(row)
        }
        ArrowTerm::DeltaFwd(a) | ArrowTerm::DeltaBwd(a) | ArrowTerm::SigmaFwd(a)
        | ArrowTerm::SigmaBwd(a) => generator_identity(a.occurrences()),
        ArrowTerm::Sym(a, b) => {
            let occ_a = a.occurrences();
            let occ_b = b.occurrences();
            let (la, lb) = (occ_a.len(), occ_b.len());
            let mut src = occ_a.clone();
            src.extend(occ_b.iter().cloned());
            let mut tgt = occ_b;
            tgt.extend(occ_a);
            let mut edges = Vec::with_capacity(la + lb);
            for i in 0..la {
                let (a1, b1) = (Endpoint::src(i), Endpoint::tgt(lb + i));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            for j in 0..lb {
                let (a1, b1) = (Endpoint::src(la + j), Endpoint::tgt(j));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            TDiagram {
                src_labels: src,
                tgt_labels: tgt,
                edges,
                loops: Vec::new(),
                loops_discarded: 0,
            }
        }
        ArrowTerm::Refl(t) => {
            let vars = occ(t);
            let n = vars.len();
            let mut tgt = vars.clone();
            tgt.extend(vars);
            let edges = (0..n)
                .map(|i| {
                    let (a1, b1) = (Endpoint::tgt(i), Endpoint::tgt(n + i));
                    TEdge {
                        a: a1,
                        b: b1,
                        steps: vec![step(a1, b1)],
                    }
                })
                .collect();
            TDiagram {
                src_labels: Vec::new(),
                tgt_labels: tgt,
                edges,
                loops: Vec::new(),
                loops_discarded: 0,
            }
        }
        ArrowTerm::Trans(t1, t2, t3) => {
            let (v1, v2, v3) = (occ(t1), occ(t2), occ(t3));
            let (n1, n2, n3) = (v1.len(), v2.len(), v3.len());
            let mut src = v1.clone();
            src.extend(v2.iter().cloned());
            src.extend(v2.iter().cloned());
            src.extend(v3.iter().cloned());
            let mut tgt = v1;
            tgt.extend(v3);
            let mut edges = Vec::with_capacity(n1 + n2 + n3);
            for i in 0..n1 {
                let (a1, b1) = (Endpoint::src(i), Endpoint::tgt(i));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            for j in 0..n2 {
                let (a1, b1) = (Endpoint::src(n1 + j), Endpoint::src(n1 + n2 + j));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            for k in 0..n3 {
                let (a1, b1) = (Endpoint::src(n1 + 2 * n2 + k), Endpoint::tgt(n1 + k));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            TDiagram {
                src_labels: src,
                tgt_labels: tgt,
                edges,
                loops: Vec::new(),
                loops_discarded: 0,
            }
        }
        ArrowTerm::Inv(t1, t2) => {
            let (v1, v2) = (occ(t1), occ(t2));
            let (n1, n2) = (v1.len(), v2.len());
            let mut src = v1.clone();
            src.extend(v2.iter().cloned());
            let mut tgt = v2;
            tgt.extend(v1);
            let mut edges = Vec::with_capacity(n1 + n2);
            for i in 0..n1 {
                let (a1, b1) = (Endpoint::src(i), Endpoint::tgt(n2 + i));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            for j in 0..n2 {
                let (a1, b1) = (Endpoint::src(n1 + j), Endpoint::tgt(j));
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            }
            TDiagram {
                src_labels: src,
                tgt_labels: tgt,
                edges,
                loops: Vec::new(),
                loops_discarded: 0,
            }
        }
        ArrowTerm::Cong(t1, t2, t3, t4) => {
            let (v1, v2, v3, v4) = (occ(t1), occ(t2), occ(t3), occ(t4));
            let (n1, n2, n3, n4) = (v1.len(), v2.len(), v3.len(), v4.len());
            let mut src = v1.clone();
            src.extend(v2.iter().cloned());
            src.extend(v3.iter().cloned());
            src.extend(v4.iter().cloned());
            let mut tgt = v1;
            tgt.extend(v3);
            tgt.extend(v2);
            tgt.extend(v4);
            let mut edges = Vec::with_capacity(n1 + n2 + n3 + n4);
            let mut push = |a1: Endpoint, b1: Endpoint| {
                edges.push(TEdge {
                    a: a1,
                    b: b1,
                    steps: vec![step(a1, b1)],
                });
            };
            for i in 0..n1 {
                push(Endpoint::src(i), Endpoint::tgt(i));
            }
            for j in 0..n2 {
                push(Endpoint::src(n1 + j), Endpoint::tgt(n1 + n3 + j));
            }
            for k in 0..n3 {
                push(Endpoint::src(n1 + n2 + k), Endpoint::tgt(n1 + k));
            }
            for l in 0..n4 {
                push(
                    Endpoint::src(n1 + n2 + n3 + l),
                    Endpoint::tgt(n1 + n2 + n3 + l),
                );
            }
            TDiagram {
                src_labels: src,
                tgt_labels: tgt,
                edges,
                loops: Vec::new(),
                loops_discarded: 0,
            }
        }
        ArrowTerm::Compose(g, f) => {
            let fd = build(f, theory, &path.child(PathStep::ComposeF));
            let gd = build(g, theory, &path.child(PathStep::ComposeG));
            compose_traced(&gd, &fd)
                .expect("typing guarantees the interface rows agree")
                .0
        }
        ArrowTerm::Tensor(l, r) => {
            let ld = build(l, theory, &path.child(PathStep::TensorL));
            let rd = build(r, theory, &path.child(PathStep::TensorR));
            tensor_traced(&ld, &rd)
        }
    }
}
