//! The multiplicative fragment: contexts are multisets of resources and `*`
//! on the right divides them between its two branches.
//!
//! [`io_prove`] never guesses a division. It hands the whole context to the
//! left branch, takes back what that branch left unused and hands it to the
//! right branch. [`naive_split_prove`] tries every division explicitly.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::lang::{parse_sequent, Formula, LangError, Sequent};

/// A sequent whose context is read as a multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResourceSequent {
    pub context: Vec<Formula>,
    pub conclusion: Formula,
}

fn star_only(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::Star(a, b) => star_only(a) && star_only(b),
        _ => false,
    }
}

impl ResourceSequent {
    pub fn new(context: Vec<Formula>, conclusion: Formula) -> Result<Self, LangError> {
        if let Some(bad) = context.iter().chain([&conclusion]).find(|f| !star_only(f)) {
            return Err(LangError::Fragment(format!(
                "`{bad}` is outside the multiplicative fragment (atoms and `*` only)"
            )));
        }
        Ok(ResourceSequent { context, conclusion })
    }
}

impl TryFrom<Sequent> for ResourceSequent {
    type Error = LangError;

    fn try_from(s: Sequent) -> Result<Self, Self::Error> {
        ResourceSequent::new(s.context, s.conclusion)
    }
}

impl FromStr for ResourceSequent {
    type Err = LangError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sequent(s)?.try_into()
    }
}

impl fmt::Display for ResourceSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Sequent::new(self.context.clone(), self.conclusion.clone()).fmt(f)
    }
}

fn atoms_into(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Star(a, b) => {
            atoms_into(a, out);
            atoms_into(b, out);
        }
        other => out.push(other.clone()),
    }
}

/// Every multiset (sorted) of input left over after proving `goal` from `input`.
fn leftovers(input: &[Formula], goal: &Formula) -> BTreeSet<Vec<Formula>> {
    match goal {
        Formula::Star(a, b) => leftovers(input, a)
            .iter()
            .flat_map(|rest| leftovers(rest, b))
            .collect(),
        atom => match input.iter().position(|f| f == atom) {
            Some(i) => {
                let mut rest = input.to_vec();
                rest.remove(i);
                BTreeSet::from([rest])
            }
            None => BTreeSet::new(),
        },
    }
}

/// Input/output method: thread the context left branch first; provable iff
/// some run consumes everything.
pub fn io_prove(s: &ResourceSequent) -> bool {
    // Star on the left is invertible, so the input starts fully decomposed.
    let mut input = Vec::new();
    for f in &s.context {
        atoms_into(f, &mut input);
    }
    input.sort();
    leftovers(&input, &s.conclusion).contains(&Vec::new())
}

/// Decide by enumerating every two-part division of the context at each `*`.
/// Parts are bitmasks over the decomposed context.
pub fn naive_split_prove(s: &ResourceSequent) -> bool {
    fn go(ctx: &[Formula], part: u32, goal: &Formula) -> bool {
        match goal {
            Formula::Star(a, b) => {
                // Every submask of `part`, the empty one included.
                let mut left = part;
                loop {
                    if go(ctx, left, a) && go(ctx, part & !left, b) {
                        return true;
                    }
                    if left == 0 {
                        return false;
                    }
                    left = (left - 1) & part;
                }
            }
            atom => part.count_ones() == 1 && ctx[part.trailing_zeros() as usize] == *atom,
        }
    }
    // Star on the left splits into its two sides.
    let mut ctx: Vec<Formula> = s.context.clone();
    while let Some(i) = ctx.iter().position(|f| matches!(f, Formula::Star(..))) {
        let Formula::Star(a, b) = ctx.remove(i) else { unreachable!() };
        ctx.splice(i..i, [*a, *b]);
    }
    assert!(ctx.len() < 32, "context too large to split by bitmask");
    let all = if ctx.is_empty() { 0 } else { u32::MAX >> (32 - ctx.len()) };
    go(&ctx, all, &s.conclusion)
}

/// Star-trees over `atoms` with exactly `stars` occurrences of `*`.
fn star_trees(atoms: &[&str], stars: usize) -> Vec<Formula> {
    if stars == 0 {
        return atoms.iter().map(|a| Formula::atom(*a)).collect();
    }
    let mut out = Vec::new();
    for left in 0..stars {
        for l in star_trees(atoms, left) {
            for r in star_trees(atoms, stars - 1 - left) {
                out.push(Formula::star(l.clone(), r));
            }
        }
    }
    out
}

/// Every multiset context of at most `max_context` formulas with at most one
/// `*`, against every conclusion with at most `max_stars` occurrences of `*`,
/// over the atoms `p` and `q`.
pub fn multiplicative_corpus(max_context: usize, max_stars: usize) -> Vec<ResourceSequent> {
    let atoms = ["p", "q"];
    let pieces: Vec<Formula> = (0..=1).flat_map(|n| star_trees(&atoms, n)).collect();
    let mut contexts: Vec<Vec<Formula>> = vec![Vec::new()];
    let mut layer: Vec<(usize, Vec<Formula>)> = vec![(0, Vec::new())];
    for _ in 0..max_context {
        let mut next = Vec::new();
        for (from, ctx) in &layer {
            for (i, piece) in pieces.iter().enumerate().skip(*from) {
                let mut c = ctx.clone();
                c.push(piece.clone());
                next.push((i, c));
            }
        }
        contexts.extend(next.iter().map(|(_, c)| c.clone()));
        layer = next;
    }
    let conclusions: Vec<Formula> = (0..=max_stars).flat_map(|n| star_trees(&atoms, n)).collect();
    contexts
        .iter()
        .flat_map(|ctx| {
            conclusions.iter().map(move |c| ResourceSequent {
                context: ctx.clone(),
                conclusion: c.clone(),
            })
        })
        .collect()
}
