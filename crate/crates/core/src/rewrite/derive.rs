//! Derivations: recorded sequences of equation steps, with replay,
//! serialisation, and a bounded bidirectional search for short proofs.

use std::collections::HashMap;
use std::fmt;

use serde_json::json;

use crate::proofterm::{ArrowTerm, Path, Theory};
use crate::rewrite::schema::{applicable_steps, apply_equation, Direction, RewriteError};

/// One applied equation: which schema, where, which way, and the whole
/// term after the step.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Step {
    pub equation: String,
    pub path: Path,
    pub direction: Direction,
    pub result: ArrowTerm,
}

/// A chain of equation steps out of a starting term.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub start: ArrowTerm,
    pub steps: Vec<Step>,
}

/// A derivation that failed to replay.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ReplayError {
    /// A step's equation failed to apply during replay.
    Rewrite { index: usize, error: RewriteError },
    /// A step applied but produced a different term than recorded.
    Mismatch { index: usize },
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayError::Rewrite { index, error } => {
                write!(f, "step {index} failed to replay: {error}")
            }
            ReplayError::Mismatch { index } => {
                write!(f, "step {index} produced a different term than recorded")
            }
        }
    }
}

impl std::error::Error for ReplayError {}

impl Derivation {
    /// The empty derivation at a term.
    pub fn empty(start: ArrowTerm) -> Derivation {
        Derivation {
            start,
            steps: Vec::new(),
        }
    }

    /// The term after the last step.
    pub fn end(&self) -> &ArrowTerm {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Applies one equation to the current end and records the step.
    pub fn push(
        &mut self,
        theory: Theory,
        equation: &str,
        path: &Path,
        direction: Direction,
    ) -> Result<(), RewriteError> {
        let result = apply_equation(self.end(), theory, equation, path, direction)?;
        self.steps.push(Step {
            equation: equation.to_string(),
            path: path.clone(),
            direction,
            result,
        });
        Ok(())
    }

    /// Appends another derivation; its start must be this one's end.
    pub fn extend(&mut self, other: &Derivation) {
        assert_eq!(
            self.end(),
            &other.start,
            "derivations do not meet: {} vs {}",
            self.end(),
            other.start
        );
        self.steps.extend(other.steps.iter().cloned());
    }

    /// The same proof read backwards: every step flips direction, and the
    /// recorded results shift by one.
    pub fn reversed(&self) -> Derivation {
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate().rev() {
            let result = if i == 0 {
                self.start.clone()
            } else {
                self.steps[i - 1].result.clone()
            };
            steps.push(Step {
                equation: step.equation.clone(),
                path: step.path.clone(),
                direction: step.direction.flip(),
                result,
            });
        }
        Derivation {
            start: self.end().clone(),
            steps,
        }
    }

    /// The same derivation acting below `prefix` inside a larger term.
    /// `host` is the surrounding term; its subterm at `prefix` must be
    /// this derivation's start.
    pub fn at_path(&self, host: &ArrowTerm, prefix: &Path) -> Derivation {
        assert_eq!(
            host.subterm(prefix),
            Some(&self.start),
            "derivation start does not sit at the prefix"
        );
        let mut current = host.clone();
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let mut path = prefix.clone();
            path.0.extend(step.path.0.iter().copied());
            current = current
                .replace_at(prefix, step.result.clone())
                .expect("prefix exists in host");
            steps.push(Step {
                equation: step.equation.clone(),
                path,
                direction: step.direction,
                result: current.clone(),
            });
        }
        Derivation {
            start: host.clone(),
            steps,
        }
    }

    /// Re-applies every step, checking the recorded results.
    pub fn replay(&self, theory: Theory) -> Result<(), ReplayError> {
        let mut current = self.start.clone();
        for (index, step) in self.steps.iter().enumerate() {
            let next = apply_equation(&current, theory, &step.equation, &step.path, step.direction)
                .map_err(|error| ReplayError::Rewrite { index, error })?;
            if next != step.result {
                return Err(ReplayError::Mismatch { index });
            }
            current = next;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "start": self.start.to_string(),
            "steps": self
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "eq": s.equation,
                        "path": s.path.0.iter().map(|p| p.code()).collect::<Vec<_>>(),
                        "dir": s.direction.code(),
                        "term": s.result.to_string(),
                    })
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Bounds for the equality search.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Maximum number of distinct terms explored across both frontiers.
    pub max_states: usize,
    /// Terms larger than this are not explored.
    pub max_size: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_states: 20_000,
            max_size: 24,
        }
    }
}

/// How a stored search node was reached: from which arena index, by which
/// equation step.
struct Parent {
    from: usize,
    equation: &'static str,
    path: Path,
    direction: Direction,
}

struct Frontier {
    arena: Vec<ArrowTerm>,
    parents: Vec<Option<Parent>>,
    index: HashMap<ArrowTerm, usize>,
    queue: std::collections::VecDeque<usize>,
}

impl Frontier {
    fn new(start: ArrowTerm) -> Frontier {
        let mut index = HashMap::new();
        index.insert(start.clone(), 0);
        Frontier {
            arena: vec![start],
            parents: vec![None],
            index,
            queue: std::collections::VecDeque::from([0]),
        }
    }

    /// The chain of steps from the frontier's start to `node`.
    fn steps_to(&self, node: usize) -> Vec<(String, Path, Direction)> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(parent) = &self.parents[cur] {
            out.push((
                parent.equation.to_string(),
                parent.path.clone(),
                parent.direction,
            ));
            cur = parent.from;
        }
        out.reverse();
        out
    }
}

/// Searches for a derivation from `from` to `to` by expanding equation
/// steps from both ends. Returns `None` when the bounds run out.
pub fn derive_eq(
    from: &ArrowTerm,
    to: &ArrowTerm,
    theory: Theory,
    limits: &SearchLimits,
) -> Option<Derivation> {
    if from == to {
        return Some(Derivation::empty(from.clone()));
    }
    let mut fwd = Frontier::new(from.clone());
    let mut bwd = Frontier::new(to.clone());
    let mut states = 2usize;

    loop {
        // Expand the smaller queue first to keep the frontiers balanced.
        let expand_fwd = match (fwd.queue.is_empty(), bwd.queue.is_empty()) {
            (true, true) => return None,
            (false, true) => true,
            (true, false) => false,
            (false, false) => fwd.queue.len() <= bwd.queue.len(),
        };
        let (this, other) = if expand_fwd {
            (&mut fwd, &mut bwd)
        } else {
            (&mut bwd, &mut fwd)
        };
        let Some(node) = this.queue.pop_front() else {
            return None;
        };
        let term = this.arena[node].clone();
        for (equation, path, direction) in applicable_steps(&term, theory) {
            let Ok(next) = apply_equation(&term, theory, equation, &path, direction) else {
                continue;
            };
            if next.ast_size() > limits.max_size || this.index.contains_key(&next) {
                continue;
            }
            let idx = this.arena.len();
            this.arena.push(next.clone());
            this.parents.push(Some(Parent {
                from: node,
                equation,
                path,
                direction,
            }));
            this.index.insert(next.clone(), idx);
            this.queue.push_back(idx);
            states += 1;

            if let Some(&meet) = other.index.get(&next) {
                // Assemble: from -> meeting term -> to.
                let (fwd_ref, bwd_ref) = if expand_fwd {
                    (&*this, &*other)
                } else {
                    (&*other, &*this)
                };
                let (f_node, b_node) = if expand_fwd { (idx, meet) } else { (meet, idx) };
                let mut derivation = Derivation::empty(from.clone());
                for (eq, p, d) in fwd_ref.steps_to(f_node) {
                    derivation
                        .push(theory, &eq, &p, d)
                        .expect("forward steps replay");
                }
                for (eq, p, d) in bwd_ref.steps_to(b_node).into_iter().rev() {
                    derivation
                        .push(theory, &eq, &p, d.flip())
                        .expect("backward steps replay in reverse");
                }
                debug_assert_eq!(derivation.end(), to);
                return Some(derivation);
            }
            if states >= limits.max_states {
                return None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proofterm::PathStep;
    use crate::syntax::{Formula, Rel, Term};

    fn leq_xx() -> Formula {
        Formula::Atom(Rel::Leq, Term::var("x"), Term::var("x"))
    }

    #[test]
    fn push_and_replay() {
        let term = ArrowTerm::compose(ArrowTerm::Id(leq_xx()), ArrowTerm::Refl(Term::var("x")));
        let mut d = Derivation::empty(term);
        d.push(Theory::MLeq, "cat1L", &Path::root(), Direction::L2R)
            .unwrap();
        assert_eq!(d.end(), &ArrowTerm::Refl(Term::var("x")));
        d.replay(Theory::MLeq).unwrap();

        // Corrupt the recorded result and watch replay object.
        let mut bad = d.clone();
        bad.steps[0].result = ArrowTerm::Id(Formula::Top);
        assert!(matches!(
            bad.replay(Theory::MLeq),
            Err(ReplayError::Mismatch { index: 0 })
        ));
    }

    #[test]
    fn reversal_inverts_every_step() {
        let term = ArrowTerm::Refl(Term::var("x"));
        let mut d = Derivation::empty(term.clone());
        d.push(Theory::MLeq, "cat1L", &Path::root(), Direction::R2L)
            .unwrap();
        d.push(Theory::MLeq, "cat1R", &Path::root(), Direction::R2L)
            .unwrap();
        let r = d.reversed();
        assert_eq!(r.start, *d.end());
        assert_eq!(r.end(), &term);
        r.replay(Theory::MLeq).unwrap();
    }

    #[test]
    fn at_path_shifts_positions() {
        let inner = ArrowTerm::compose(ArrowTerm::Id(leq_xx()), ArrowTerm::Refl(Term::var("x")));
        let mut d = Derivation::empty(inner.clone());
        d.push(Theory::MLeq, "cat1L", &Path::root(), Direction::L2R)
            .unwrap();
        let host = ArrowTerm::tensor(ArrowTerm::Id(Formula::Top), inner);
        let shifted = d.at_path(&host, &Path(vec![PathStep::TensorR]));
        assert_eq!(shifted.start, host);
        shifted.replay(Theory::MLeq).unwrap();
        assert_eq!(
            shifted.end(),
            &ArrowTerm::tensor(ArrowTerm::Id(Formula::Top), ArrowTerm::Refl(Term::var("x")))
        );
    }

    #[test]
    fn search_finds_a_two_sided_proof() {
        // del>{A} o del<{A} and the identity are one deltadelta2 apart;
        // a padded variant needs the search to work from both ends.
        let a = leq_xx();
        let from = ArrowTerm::compose(
            ArrowTerm::DeltaFwd(a.clone()),
            ArrowTerm::DeltaBwd(a.clone()),
        );
        let to = ArrowTerm::compose(ArrowTerm::Id(a.clone()), ArrowTerm::Id(a.clone()));
        let d = derive_eq(&from, &to, Theory::MLeq, &SearchLimits::default())
            .expect("proof within bounds");
        d.replay(Theory::MLeq).unwrap();
        assert_eq!(d.start, from);
        assert_eq!(d.end(), &to);
    }

    #[test]
    fn search_respects_limits() {
        let from = ArrowTerm::Refl(Term::var("x"));
        let to = ArrowTerm::compose(
            ArrowTerm::DeltaFwd(leq_xx()),
            ArrowTerm::compose(
                ArrowTerm::DeltaBwd(leq_xx()),
                ArrowTerm::Refl(Term::var("x")),
            ),
        );
        let tight = SearchLimits {
            max_states: 5,
            max_size: 10,
        };
        assert!(derive_eq(&from, &to, Theory::MLeq, &tight).is_none());
        let roomy = SearchLimits {
            max_states: 50_000,
            max_size: 12,
        };
        let d = derive_eq(&from, &to, Theory::MLeq, &roomy).expect("within bounds");
        d.replay(Theory::MLeq).unwrap();
    }
}
