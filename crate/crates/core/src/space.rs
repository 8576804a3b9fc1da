//! Reduction spaces: the and/or tree of every way a goal can be reduced.
//!
//! The space of a goal is in general infinite, so it is exposed through a lazy
//! cursor ([`SpaceCursor`]) and materialized to a given number of goal layers
//! ([`unfold`]). [`unfold_iterative`] builds the same object bottom-up through
//! the chain of approximants `∂₀ = I`, `∂ₖ₊₁ = I × (PP(∂ₖ) ∘ ∂)`, and
//! [`coherence_check`] compares the two at finite depth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::rc::Rc;
use std::str::FromStr;

use serde_json::{json, Value};
use thiserror::Error;

use crate::lang::Goal;
use crate::reduction::{self, destruct, Binding, Operator, State};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("unsupported export format `{0}` (expected `dot` or `json`)")]
    UnsupportedFormat(String),
    #[error("bindings do not reduce the goal to □: {0}")]
    NotClosed(String),
}

/// A goal node. `alternatives` has one entry per distinct subgoal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceNode {
    pub goal: Goal,
    pub alternatives: Vec<OrNode>,
    /// False on the truncation frontier: the goal is there, its reductions are not.
    pub expanded: bool,
    /// Path index (root = 0) of the nearest ancestor carrying the same goal.
    pub cyclic: Option<usize>,
}

/// A `•` node: one choice of premisses. No children means the choice closes (□).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrNode {
    /// Every operator producing this premiss set; empty for nodes built from ∂ alone.
    pub via: Vec<Operator>,
    pub children: Vec<SpaceNode>,
}

impl OrNode {
    pub fn is_closed(&self) -> bool {
        self.children.is_empty()
    }
}

impl SpaceNode {
    pub fn node_count(&self) -> usize {
        1 + self
            .alternatives
            .iter()
            .flat_map(|alt| alt.children.iter())
            .map(SpaceNode::node_count)
            .sum::<usize>()
    }

    /// Every node of `self` occurs in `other` at the same position, with the
    /// same alternatives wherever `self` is expanded.
    pub fn is_prefix_of(&self, other: &SpaceNode) -> bool {
        if self.goal != other.goal || self.cyclic != other.cyclic {
            return false;
        }
        if !self.expanded {
            return true;
        }
        other.expanded
            && self.alternatives.len() == other.alternatives.len()
            && self.alternatives.iter().zip(&other.alternatives).all(|(a, b)| {
                a.via == b.via
                    && a.children.len() == b.children.len()
                    && a.children.iter().zip(&b.children).all(|(x, y)| x.is_prefix_of(y))
            })
    }
}

/// The alternatives at a goal: premiss lists grouped by premiss set, ordered by
/// operator name then principal position. Each group keeps the premiss list of
/// its first operator.
pub fn alternatives(goal: &Goal) -> Vec<(Vec<Operator>, Vec<Goal>)> {
    let mut found = reduction::reductions(goal);
    found.sort_by(|(a, _), (b, _)| (a.schema.name(), a.principal).cmp(&(b.schema.name(), b.principal)));
    let mut groups: Vec<(BTreeSet<Goal>, Vec<Operator>, Vec<Goal>)> = Vec::new();
    for (op, subgoals) in found {
        let key: BTreeSet<Goal> = subgoals.iter().cloned().collect();
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, ops, _)) => ops.push(op),
            None => groups.push((key, vec![op], subgoals)),
        }
    }
    groups.into_iter().map(|(_, ops, subs)| (ops, subs)).collect()
}

/// A position in the (infinite) space: a goal together with the path above it.
#[derive(Debug, Clone)]
pub struct SpaceCursor {
    goal: Goal,
    ancestors: Rc<Vec<Goal>>,
}

impl SpaceCursor {
    pub fn root(goal: Goal) -> Self {
        SpaceCursor {
            goal,
            ancestors: Rc::new(Vec::new()),
        }
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    pub fn depth(&self) -> usize {
        self.ancestors.len()
    }

    pub fn cyclic(&self) -> Option<usize> {
        self.ancestors.iter().rposition(|a| *a == self.goal)
    }

    /// One destructor step.
    pub fn alternatives(&self) -> Vec<(Vec<Operator>, Vec<SpaceCursor>)> {
        let mut path = (*self.ancestors).clone();
        path.push(self.goal.clone());
        let path = Rc::new(path);
        alternatives(&self.goal)
            .into_iter()
            .map(|(ops, subs)| {
                let children = subs
                    .into_iter()
                    .map(|goal| SpaceCursor {
                        goal,
                        ancestors: Rc::clone(&path),
                    })
                    .collect();
                (ops, children)
            })
            .collect()
    }

    /// Materialize `depth` goal layers below (and including) this node.
    pub fn materialize(&self, depth: usize) -> SpaceNode {
        let cyclic = self.cyclic();
        if depth == 0 {
            return SpaceNode {
                goal: self.goal.clone(),
                alternatives: Vec::new(),
                expanded: false,
                cyclic,
            };
        }
        let alternatives = self
            .alternatives()
            .into_iter()
            .map(|(via, children)| OrNode {
                via,
                children: children.iter().map(|c| c.materialize(depth - 1)).collect(),
            })
            .collect();
        SpaceNode {
            goal: self.goal.clone(),
            alternatives,
            expanded: true,
            cyclic,
        }
    }
}

/// The space of `goal` truncated after `depth` goal layers.
pub fn unfold(goal: &Goal, depth: usize) -> SpaceNode {
    SpaceCursor::root(goal.clone()).materialize(depth)
}

/// An element of the approximant `Yₖ`: a bare goal (`Y₀`) or a goal with a set
/// of sets of `Yₖ₋₁` elements.
#[derive(Debug, PartialEq, Eq)]
enum Approximant {
    Base(Goal),
    Layer(Goal, Vec<Vec<Rc<Approximant>>>),
}

/// `∂_depth(goal)`, computed layer by layer from the leaves up and re-encoded
/// as a [`SpaceNode`]. Alternatives carry no operator labels.
pub fn unfold_iterative(goal: &Goal, depth: usize) -> SpaceNode {
    // Goals reachable at each layer.
    let mut layers: Vec<BTreeSet<Goal>> = vec![BTreeSet::from([goal.clone()])];
    let mut destructed: BTreeMap<Goal, BTreeSet<BTreeSet<Goal>>> = BTreeMap::new();
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for g in layers.last().expect("nonempty") {
            let d = destructed.entry(g.clone()).or_insert_with(|| destruct(g));
            next.extend(d.iter().flatten().cloned());
        }
        layers.push(next);
    }

    // ∂₀ on the deepest layer, then ∂ₖ₊₁ from ∂ₖ one layer up.
    let mut stage: BTreeMap<Goal, Rc<Approximant>> = layers[depth]
        .iter()
        .map(|g| (g.clone(), Rc::new(Approximant::Base(g.clone()))))
        .collect();
    for layer in layers[..depth].iter().rev() {
        stage = layer
            .iter()
            .map(|g| {
                let sets = destructed[g]
                    .iter()
                    .map(|set| set.iter().map(|child| Rc::clone(&stage[child])).collect())
                    .collect();
                (g.clone(), Rc::new(Approximant::Layer(g.clone(), sets)))
            })
            .collect();
    }

    fn encode(a: &Approximant, path: &mut Vec<Goal>) -> SpaceNode {
        let (goal, sets) = match a {
            Approximant::Base(g) => (g, None),
            Approximant::Layer(g, sets) => (g, Some(sets)),
        };
        let cyclic = path.iter().rposition(|p| p == goal);
        let Some(sets) = sets else {
            return SpaceNode {
                goal: goal.clone(),
                alternatives: Vec::new(),
                expanded: false,
                cyclic,
            };
        };
        path.push(goal.clone());
        let alternatives = sets
            .iter()
            .map(|set| OrNode {
                via: Vec::new(),
                children: set.iter().map(|c| encode(c, path)).collect(),
            })
            .collect();
        path.pop();
        SpaceNode {
            goal: goal.clone(),
            alternatives,
            expanded: true,
            cyclic,
        }
    }

    encode(&stage[goal], &mut Vec::new())
}

/// Set-level shape of a space: alternatives and children as sets, labels dropped.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Shape {
    goal: Goal,
    expanded: bool,
    cyclic: Option<usize>,
    alternatives: BTreeSet<BTreeSet<Shape>>,
}

fn shape(node: &SpaceNode) -> Shape {
    Shape {
        goal: node.goal.clone(),
        expanded: node.expanded,
        cyclic: node.cyclic,
        alternatives: node
            .alternatives
            .iter()
            .map(|alt| alt.children.iter().map(shape).collect())
            .collect(),
    }
}

/// Structural equality of two spaces read as sets of sets.
pub fn same_shape(a: &SpaceNode, b: &SpaceNode) -> bool {
    shape(a) == shape(b)
}

/// Do the destructor-defined and the approximant-defined spaces agree to `depth`?
pub fn coherence_check(goal: &Goal, depth: usize) -> bool {
    same_shape(&unfold(goal, depth), &unfold_iterative(goal, depth))
}

/// A committed reduction: one alternative chosen at every goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionTree {
    pub goal: Goal,
    pub via: Operator,
    pub children: Vec<ReductionTree>,
}

impl ReductionTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ReductionTree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(ReductionTree::height).max().unwrap_or(0)
    }

    /// Bindings that replay this tree from `[goal]`, leftmost goal first.
    pub fn bindings(&self) -> Vec<Binding> {
        let mut out = Vec::new();
        fn walk(t: &ReductionTree, out: &mut Vec<Binding>) {
            out.push(Binding::new(t.via, 0));
            for c in &t.children {
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }

    /// Every node's operator really produces its children's goals.
    pub fn is_certified(&self) -> bool {
        self.via
            .apply(&self.goal)
            .is_ok_and(|subs| subs.len() == self.children.len() && subs.iter().zip(&self.children).all(|(s, c)| *s == c.goal))
            && self.children.iter().all(ReductionTree::is_certified)
    }

    /// Rebuild the tree a closing binding sequence describes.
    pub fn from_bindings(root: &Goal, bindings: &[Binding]) -> Result<ReductionTree, SpaceError> {
        struct Slot {
            goal: Goal,
            via: Option<Operator>,
            children: Vec<usize>,
        }
        let mut arena = vec![Slot {
            goal: root.clone(),
            via: None,
            children: Vec::new(),
        }];
        let mut state = State::singleton(root.clone());
        let mut ids = vec![0usize];
        for b in bindings {
            let next = reduction::step_interleave(&state, b).map_err(|e| SpaceError::NotClosed(e.to_string()))?;
            let id = ids[b.goal];
            let subgoals = b.operator.apply(&state.0[b.goal]).expect("step succeeded");
            let mut new_ids = Vec::with_capacity(subgoals.len());
            for goal in subgoals {
                arena.push(Slot {
                    goal,
                    via: None,
                    children: Vec::new(),
                });
                new_ids.push(arena.len() - 1);
            }
            arena[id].via = Some(b.operator);
            arena[id].children = new_ids.clone();
            ids.splice(b.goal..=b.goal, new_ids);
            state = next;
        }
        if !state.is_box() {
            return Err(SpaceError::NotClosed(format!("{} goal(s) remain", state.len())));
        }
        fn build(arena: &[Slot], id: usize) -> ReductionTree {
            ReductionTree {
                goal: arena[id].goal.clone(),
                via: arena[id].via.expect("closed state reduces every goal"),
                children: arena[id].children.iter().map(|&c| build(arena, c)).collect(),
            }
        }
        Ok(build(&arena, 0))
    }
}

/// Every complete reduction tree inside a truncated space, up to `bound` of them.
pub fn extract_trees(node: &SpaceNode, bound: usize) -> Vec<ReductionTree> {
    let mut out = Vec::new();
    if !node.expanded || bound == 0 {
        return out;
    }
    for alt in &node.alternatives {
        if out.len() >= bound {
            break;
        }
        let Some(&via) = alt.via.first() else {
            continue;
        };
        let mut combos: Vec<Vec<ReductionTree>> = vec![Vec::new()];
        for child in &alt.children {
            let subtrees = extract_trees(child, bound);
            let mut next = Vec::new();
            'outer: for prefix in &combos {
                for t in &subtrees {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    next.push(v);
                    if next.len() >= bound {
                        break 'outer;
                    }
                }
            }
            combos = next;
            if combos.is_empty() {
                break;
            }
        }
        for children in combos {
            if out.len() >= bound {
                break;
            }
            out.push(ReductionTree {
                goal: node.goal.clone(),
                via,
                children,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(SpaceError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Deterministic dot and json renderings.
pub trait Export {
    fn to_json(&self) -> Value;
    fn to_dot(&self) -> String;

    fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Dot => self.to_dot(),
            ExportFormat::Json => self.to_json().to_string(),
        }
    }
}

/// Export by format name; unknown names are an error.
pub fn export<T: Export + ?Sized>(x: &T, format: &str) -> Result<String, SpaceError> {
    Ok(x.export(format.parse()?))
}

fn dot_escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

impl Export for SpaceNode {
    fn to_json(&self) -> Value {
        let mut obj = json!({
            "goal": self.goal.to_json(),
            "alts": self.alternatives.iter().map(|alt| json!({
                "via": alt.via.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "children": alt.children.iter().map(Export::to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        });
        if let Some(k) = self.cyclic {
            obj["cyclic"] = json!(k);
        }
        if !self.expanded {
            obj["frontier"] = json!(true);
        }
        obj
    }

    fn to_dot(&self) -> String {
        fn walk(node: &SpaceNode, out: &mut String, next: &mut usize, path: &mut Vec<usize>) {
            let id = *next;
            *next += 1;
            let style = if node.expanded { "" } else { ", style=dotted" };
            let _ = writeln!(out, "  n{id} [label=\"{}\"{style}];", dot_escape(&node.goal.to_string()));
            if let Some(k) = node.cyclic {
                let _ = writeln!(out, "  n{id} -> n{} [style=dashed, constraint=false];", path[k]);
            }
            path.push(id);
            for alt in &node.alternatives {
                let bullet = *next;
                *next += 1;
                let label = alt.via.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
                let _ = writeln!(out, "  n{bullet} [label=\"•\", shape=circle];");
                let _ = writeln!(out, "  n{id} -> n{bullet} [label=\"{label}\"];");
                if alt.is_closed() {
                    let leaf = *next;
                    *next += 1;
                    let _ = writeln!(out, "  n{leaf} [label=\"□\", shape=plaintext];");
                    let _ = writeln!(out, "  n{bullet} -> n{leaf};");
                }
                for child in &alt.children {
                    let child_id = *next;
                    walk(child, out, next, path);
                    let _ = writeln!(out, "  n{bullet} -> n{child_id};");
                }
            }
            path.pop();
        }
        let mut out = String::from("digraph space {\n  node [shape=box];\n");
        walk(self, &mut out, &mut 0, &mut Vec::new());
        out.push_str("}\n");
        out
    }
}

impl Export for ReductionTree {
    fn to_json(&self) -> Value {
        json!({
            "goal": self.goal.to_json(),
            "via": self.via.to_string(),
            "children": self.children.iter().map(Export::to_json).collect::<Vec<_>>(),
        })
    }

    fn to_dot(&self) -> String {
        fn walk(t: &ReductionTree, out: &mut String, next: &mut usize) {
            let id = *next;
            *next += 1;
            let _ = writeln!(out, "  n{id} [label=\"{}\"];", dot_escape(&t.goal.to_string()));
            if t.children.is_empty() {
                let leaf = *next;
                *next += 1;
                let _ = writeln!(out, "  n{leaf} [label=\"□\", shape=plaintext];");
                let _ = writeln!(out, "  n{id} -> n{leaf} [label=\"{}\"];", t.via);
            }
            for c in &t.children {
                let child_id = *next;
                walk(c, out, next);
                let _ = writeln!(out, "  n{id} -> n{child_id} [label=\"{}\"];", t.via);
            }
        }
        let mut out = String::from("digraph reduction {\n  node [shape=box];\n");
        walk(self, &mut out, &mut 0);
        out.push_str("}\n");
        out
    }
}
