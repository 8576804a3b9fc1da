//! Goal corpora: exhaustive enumeration of small sequents and seeded random
//! generation.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::lang::{Formula, Goal, Sequent};

/// Bounds for [`enumerate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusParams {
    pub atoms: Vec<String>,
    /// Connectives in the whole sequent, context and conclusion together.
    pub max_connectives: usize,
    pub max_context: usize,
}

impl CorpusParams {
    /// Atoms `p` and `q`, at most three connectives, at most two assumptions.
    pub fn pinned() -> Self {
        CorpusParams {
            atoms: vec!["p".into(), "q".into()],
            max_connectives: 3,
            max_context: 2,
        }
    }
}

/// All formulas over `atoms` built from `/\`, `\/` and `->` with exactly
/// `n` connectives, indexed by `n`.
fn formulas_by_size(atoms: &[String], max: usize) -> Vec<Vec<Formula>> {
    let mut by_size: Vec<Vec<Formula>> = vec![atoms.iter().map(Formula::atom).collect()];
    for n in 1..=max {
        let mut layer = Vec::new();
        for left in 0..n {
            let right = n - 1 - left;
            for l in &by_size[left] {
                for r in &by_size[right] {
                    layer.push(Formula::and(l.clone(), r.clone()));
                    layer.push(Formula::or(l.clone(), r.clone()));
                    layer.push(Formula::imp(l.clone(), r.clone()));
                }
            }
        }
        by_size.push(layer);
    }
    by_size
}

/// Every sequent within the bounds, each context a sorted multiset.
pub fn enumerate(params: &CorpusParams) -> Vec<Goal> {
    let by_size = formulas_by_size(&params.atoms, params.max_connectives);
    let sized: Vec<(usize, &Formula)> = by_size
        .iter()
        .enumerate()
        .flat_map(|(n, fs)| fs.iter().map(move |f| (n, f)))
        .collect();

    // Sorted multisets of context formulas with their total size.
    let mut contexts: Vec<(usize, Vec<Formula>)> = vec![(0, Vec::new())];
    let mut frontier: Vec<(usize, usize, Vec<Formula>)> = vec![(0, 0, Vec::new())];
    for _ in 0..params.max_context {
        let mut next = Vec::new();
        for (from, size, ctx) in &frontier {
            // `sized` runs in increasing size, so the first misfit ends the scan.
            for (i, (n, f)) in sized.iter().enumerate().skip(*from) {
                if size + n > params.max_connectives {
                    break;
                }
                let mut c = ctx.clone();
                c.push((*f).clone());
                next.push((i, size + n, c));
            }
        }
        contexts.extend(next.iter().map(|(_, s, c)| (*s, c.clone())));
        frontier = next;
    }

    // Distinct index multisets give distinct formula multisets, so no sequent repeats.
    let mut out = Vec::new();
    for (size, ctx) in &mut contexts {
        ctx.sort();
        for (n, f) in &sized {
            if *size + n > params.max_connectives {
                break;
            }
            out.push(Sequent::new(ctx.clone(), (*f).clone()));
        }
    }
    out
}

/// Seeded generator of random IPL goals.
pub struct GoalGen {
    rng: StdRng,
    atoms: Vec<String>,
}

impl GoalGen {
    pub fn new(seed: u64) -> Self {
        GoalGen {
            rng: StdRng::seed_from_u64(seed),
            atoms: vec!["p".into(), "q".into(), "r".into()],
        }
    }

    /// A formula with exactly `n` connectives; leaves are atoms, rarely `T` or `F`.
    pub fn formula(&mut self, n: usize) -> Formula {
        if n == 0 {
            return match self.rng.gen_range(0..12) {
                0 => Formula::Top,
                1 => Formula::Bottom,
                _ => Formula::atom(self.atoms[self.rng.gen_range(0..self.atoms.len())].clone()),
            };
        }
        let left = self.rng.gen_range(0..n);
        let l = self.formula(left);
        let r = self.formula(n - 1 - left);
        match self.rng.gen_range(0..3) {
            0 => Formula::and(l, r),
            1 => Formula::or(l, r),
            _ => Formula::imp(l, r),
        }
    }

    /// A goal of at most `max_size` connectives in total, with up to three assumptions.
    pub fn goal(&mut self, max_size: usize) -> Goal {
        let mut budget = self.rng.gen_range(0..=max_size);
        let assumptions = self.rng.gen_range(0..=3);
        let mut context = Vec::new();
        for _ in 0..assumptions {
            let n = self.rng.gen_range(0..=budget);
            budget -= n;
            context.push(self.formula(n));
        }
        let conclusion = self.formula(budget);
        Sequent::new(context, conclusion)
    }

    pub fn goals(&mut self, count: usize, max_size: usize) -> Vec<Goal> {
        (0..count).map(|_| self.goal(max_size)).collect()
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn formula_counts() {
        let by_size = formulas_by_size(&["p".into(), "q".into()], 3);
        let counts: Vec<usize> = by_size.iter().map(Vec::len).collect();
        assert_eq!(counts, [2, 12, 144, 2160]);
    }

    #[test]
    fn pinned_corpus_is_within_bounds_and_distinct() {
        let corpus = enumerate(&CorpusParams::pinned());
        assert!(corpus.iter().all(|s| s.size() <= 3 && s.context.len() <= 2));
        let distinct: BTreeSet<_> = corpus.iter().collect();
        assert_eq!(distinct.len(), corpus.len());
        assert!(corpus.contains(&"p -> p |- p".parse().unwrap()));
        assert!(corpus.contains(&"p, p |- q".parse().unwrap()));
    }

    #[test]
    fn generator_is_reproducible_and_bounded() {
        let a = GoalGen::new(7).goals(50, 6);
        assert_eq!(a, GoalGen::new(7).goals(50, 6));
        assert!(a.iter().all(|g| g.size() <= 6));
    }
}
