use std::collections::VecDeque;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lang::Goal;
use crate::reduction::{operators_for, step_interleave, Binding, Operator, ReductionError, Schema, State};
use crate::space::ReductionTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GoalSelection {
    Leftmost,
    SmallestGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Traversal {
    Dfs,
    Bfs,
    IterativeDeepening,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopCheck {
    Off,
    BranchRepeat,
}

impl FromStr for Traversal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfs" => Ok(Traversal::Dfs),
            "bfs" => Ok(Traversal::Bfs),
            "id" | "iterative-deepening" => Ok(Traversal::IterativeDeepening),
            other => Err(format!("unknown traversal `{other}` (dfs, bfs or id)")),
        }
    }
}

impl FromStr for LoopCheck {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(LoopCheck::Off),
            "on" | "branch-repeat" => Ok(LoopCheck::BranchRepeat),
            other => Err(format!("unknown loop check `{other}` (on or off)")),
        }
    }
}

impl FromStr for GoalSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leftmost" => Ok(GoalSelection::Leftmost),
            "smallest" | "smallest-goal" => Ok(GoalSelection::SmallestGoal),
            other => Err(format!("unknown goal selection `{other}` (leftmost or smallest)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub goal_selection: GoalSelection,
    /// Schemas in the order they are tried; schemas left out are never tried.
    pub operator_order: Vec<Schema>,
    pub traversal: Traversal,
    pub loop_check: LoopCheck,
    /// Most operator applications along one branch.
    pub depth_budget: usize,
    /// Most goal expansions in the whole run.
    pub node_budget: usize,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy {
            goal_selection: GoalSelection::Leftmost,
            operator_order: Schema::ALL.to_vec(),
            traversal: Traversal::IterativeDeepening,
            loop_check: LoopCheck::BranchRepeat,
            depth_budget: 64,
            node_budget: 1_000_000,
        }
    }
}

impl Strategy {
    pub fn new(traversal: Traversal, loop_check: LoopCheck, depth_budget: usize) -> Self {
        Strategy {
            traversal,
            loop_check,
            depth_budget,
            ..Strategy::default()
        }
    }

    fn rank(&self, schema: Schema) -> Option<usize> {
        self.operator_order.iter().position(|s| *s == schema)
    }

    fn ordered_operators(&self, goal: &Goal) -> Vec<Operator> {
        let mut ops: Vec<(usize, Operator)> = operators_for(goal)
            .into_iter()
            .filter_map(|op| self.rank(op.schema).map(|r| (r, op)))
            .collect();
        ops.sort_by_key(|(r, op)| (*r, op.principal));
        ops.into_iter().map(|(_, op)| op).collect()
    }

    /// Order in which a list of sibling goals is attacked.
    fn sibling_order(&self, goals: &[Goal]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..goals.len()).collect();
        if self.goal_selection == GoalSelection::SmallestGoal {
            order.sort_by_key(|&i| goals[i].size());
        }
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    Proved,
    /// Every alternative was tried and no budget was hit.
    Exhausted,
    BudgetExceeded,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Proved => "Proved",
            SearchStatus::Exhausted => "Exhausted",
            SearchStatus::BudgetExceeded => "BudgetExceeded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceEvent {
    Apply(Binding),
    /// Undo the most recent `Apply` still in force.
    Backtrack,
    /// The goal at this index repeats a goal on its own branch and was dropped.
    Pruned(usize),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Apply(b) => write!(f, "apply {b}"),
            TraceEvent::Backtrack => f.write_str("backtrack"),
            TraceEvent::Pruned(i) => write!(f, "pruned #{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub tree: Option<ReductionTree>,
    pub trace: Vec<TraceEvent>,
    pub nodes_visited: usize,
    /// Greatest goal depth reached.
    pub deepest: usize,
}

/// Replay a trace from `[root]`, returning the state it ends in and the
/// bindings still in force.
pub fn replay(root: &Goal, trace: &[TraceEvent]) -> Result<(State, Vec<Binding>), ReductionError> {
    let mut states = vec![State::singleton(root.clone())];
    let mut path = Vec::new();
    for event in trace {
        match event {
            TraceEvent::Apply(b) => {
                let next = step_interleave(states.last().expect("root stays"), b)?;
                states.push(next);
                path.push(*b);
            }
            TraceEvent::Backtrack => {
                if path.pop().is_none() {
                    return Err(ReductionError::InvalidBinding {
                        binding: Binding::new(Operator::right(Schema::TopR), 0),
                        reason: "backtrack with nothing to undo".into(),
                    });
                }
                states.pop();
            }
            TraceEvent::Pruned(_) => {}
        }
    }
    Ok((states.pop().expect("root stays"), path))
}

/// The goals above a goal on its branch.
#[derive(Debug)]
struct Link {
    goal: Goal,
    up: Branch,
}

type Branch = Option<Rc<Link>>;

fn on_branch(branch: &Branch, goal: &Goal) -> bool {
    let mut at = branch;
    while let Some(link) = at {
        if link.goal == *goal {
            return true;
        }
        at = &link.up;
    }
    false
}

fn extend(branch: &Branch, goal: &Goal) -> Branch {
    Some(Rc::new(Link {
        goal: goal.clone(),
        up: branch.clone(),
    }))
}

struct NodeBudgetHit;

struct Run<'s> {
    strat: &'s Strategy,
    trace: Vec<TraceEvent>,
    applied: usize,
    nodes: usize,
    deepest: usize,
    cut: bool,
}

impl Run<'_> {
    fn new(strat: &Strategy) -> Run<'_> {
        Run {
            strat,
            trace: Vec::new(),
            applied: 0,
            nodes: 0,
            deepest: 0,
            cut: false,
        }
    }

    fn expand(&mut self) -> Result<(), NodeBudgetHit> {
        self.nodes += 1;
        if self.nodes > self.strat.node_budget {
            Err(NodeBudgetHit)
        } else {
            Ok(())
        }
    }

    fn undo_to(&mut self, base: usize) {
        while self.applied > base {
            self.trace.push(TraceEvent::Backtrack);
            self.applied -= 1;
        }
    }

    /// Close `goal`, sitting at `pos` in the global state, within `limit`
    /// applications along any branch.
    fn close(
        &mut self,
        goal: &Goal,
        pos: usize,
        branch: &Branch,
        depth: usize,
        limit: usize,
    ) -> Result<Option<ReductionTree>, NodeBudgetHit> {
        self.deepest = self.deepest.max(depth);
        if self.strat.loop_check == LoopCheck::BranchRepeat && on_branch(branch, goal) {
            self.trace.push(TraceEvent::Pruned(pos));
            return Ok(None);
        }
        let ops = self.strat.ordered_operators(goal);
        if ops.is_empty() {
            return Ok(None);
        }
        if depth >= limit {
            self.cut = true;
            return Ok(None);
        }
        self.expand()?;
        let below = extend(branch, goal);
        'ops: for op in ops {
            let base = self.applied;
            self.trace.push(TraceEvent::Apply(Binding::new(op, pos)));
            self.applied += 1;
            let subgoals = op.apply(goal).expect("operators_for only yields applicable operators");
            let order = self.strat.sibling_order(&subgoals);
            let mut solved: Vec<Option<ReductionTree>> = vec![None; subgoals.len()];
            for &i in &order {
                let offset = (0..i).filter(|&j| solved[j].is_none()).count();
                match self.close(&subgoals[i], pos + offset, &below, depth + 1, limit)? {
                    Some(t) => solved[i] = Some(t),
                    None => {
                        self.undo_to(base);
                        continue 'ops;
                    }
                }
            }
            return Ok(Some(ReductionTree {
                goal: goal.clone(),
                via: op,
                children: solved.into_iter().map(|t| t.expect("all solved")).collect(),
            }));
        }
        Ok(None)
    }

    fn finish(self, status: SearchStatus, tree: Option<ReductionTree>) -> SearchOutcome {
        SearchOutcome {
            status,
            tree,
            trace: self.trace,
            nodes_visited: self.nodes,
            deepest: self.deepest,
        }
    }
}

fn depth_first(goal: &Goal, strat: &Strategy, limits: impl IntoIterator<Item = usize>) -> SearchOutcome {
    let mut run = Run::new(strat);
    for limit in limits {
        run.cut = false;
        match run.close(goal, 0, &None, 0, limit) {
            Ok(Some(tree)) => return run.finish(SearchStatus::Proved, Some(tree)),
            Ok(None) if !run.cut => return run.finish(SearchStatus::Exhausted, None),
            Ok(None) => {}
            Err(NodeBudgetHit) => {
                run.undo_to(0);
                return run.finish(SearchStatus::BudgetExceeded, None);
            }
        }
    }
    run.finish(SearchStatus::BudgetExceeded, None)
}

#[derive(Clone)]
struct Frontier {
    goals: Vec<(Goal, Branch, usize)>,
    path: Vec<Binding>,
}

fn breadth_first(root: &Goal, strat: &Strategy) -> SearchOutcome {
    let mut run = Run::new(strat);
    let mut at: Vec<Binding> = Vec::new();
    let mut queue = VecDeque::from([Frontier {
        goals: vec![(root.clone(), None, 0)],
        path: Vec::new(),
    }]);
    while let Some(node) = queue.pop_front() {
        let common = at.iter().zip(&node.path).take_while(|(a, b)| a == b).count();
        for _ in common..at.len() {
            run.trace.push(TraceEvent::Backtrack);
        }
        for b in &node.path[common..] {
            run.trace.push(TraceEvent::Apply(*b));
        }
        at = node.path.clone();
        run.applied = at.len();
        if node.goals.is_empty() {
            let tree = ReductionTree::from_bindings(root, &at).expect("path closes the root");
            return run.finish(SearchStatus::Proved, Some(tree));
        }
        let pick = match strat.goal_selection {
            GoalSelection::Leftmost => 0,
            GoalSelection::SmallestGoal => (0..node.goals.len())
                .min_by_key(|&i| node.goals[i].0.size())
                .expect("nonempty"),
        };
        let (goal, branch, depth) = &node.goals[pick];
        run.deepest = run.deepest.max(*depth);
        if strat.loop_check == LoopCheck::BranchRepeat && on_branch(branch, goal) {
            run.trace.push(TraceEvent::Pruned(pick));
            continue;
        }
        let ops = strat.ordered_operators(goal);
        if ops.is_empty() {
            continue;
        }
        if *depth >= strat.depth_budget {
            run.cut = true;
            continue;
        }
        if run.expand().is_err() {
            run.undo_to(0);
            return run.finish(SearchStatus::BudgetExceeded, None);
        }
        let below = extend(branch, goal);
        for op in ops {
            let subgoals = op.apply(goal).expect("applicable");
            let mut goals = node.goals[..pick].to_vec();
            goals.extend(subgoals.into_iter().map(|g| (g, below.clone(), depth + 1)));
            goals.extend_from_slice(&node.goals[pick + 1..]);
            let mut path = node.path.clone();
            path.push(Binding::new(op, pick));
            queue.push_back(Frontier { goals, path });
        }
    }
    run.undo_to(0);
    let status = if run.cut {
        SearchStatus::BudgetExceeded
    } else {
        SearchStatus::Exhausted
    };
    run.finish(status, None)
}

/// Search the reduction space of `goal` under a control régime.
pub fn search(goal: &Goal, strat: &Strategy) -> SearchOutcome {
    match strat.traversal {
        Traversal::Dfs => depth_first(goal, strat, [strat.depth_budget]),
        Traversal::IterativeDeepening => depth_first(goal, strat, 1..=strat.depth_budget),
        Traversal::Bfs => breadth_first(goal, strat),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_sequent;

    fn seq(s: &str) -> Goal {
        parse_sequent(s).unwrap()
    }

    #[test]
    fn finds_contraction_proof() {
        let g = seq("phi, phi -> psi |- psi");
        let out = search(&g, &Strategy::new(Traversal::Dfs, LoopCheck::BranchRepeat, 10));
        assert_eq!(out.status, SearchStatus::Proved);
        let tree = out.tree.unwrap();
        assert_eq!(tree.via.to_string(), "ImpL@1");
        assert!(tree.children.iter().all(|c| c.via.to_string() == "Ax@0" && c.children.is_empty()));
        let (end, path) = replay(&g, &out.trace).unwrap();
        assert!(end.is_box());
        assert_eq!(ReductionTree::from_bindings(&g, &path).unwrap(), tree);
    }

    #[test]
    fn contraction_regress_is_cut_by_budget() {
        let g = seq("p -> p |- p");
        for k in [2, 5, 9] {
            let out = search(&g, &Strategy::new(Traversal::Dfs, LoopCheck::Off, k));
            assert_eq!(out.status, SearchStatus::BudgetExceeded, "budget {k}");
            assert_eq!(out.deepest, k);
        }
        let out = search(&g, &Strategy::new(Traversal::IterativeDeepening, LoopCheck::BranchRepeat, 20));
        assert_eq!(out.status, SearchStatus::Exhausted);
        assert!(out.trace.iter().any(|e| matches!(e, TraceEvent::Pruned(_))));
    }

    #[test]
    fn irreducible_goal_is_exhausted_everywhere() {
        for traversal in [Traversal::Dfs, Traversal::Bfs, Traversal::IterativeDeepening] {
            let out = search(&seq("p |- q"), &Strategy::new(traversal, LoopCheck::Off, 3));
            assert_eq!(out.status, SearchStatus::Exhausted);
            assert!(out.trace.is_empty());
        }
    }

    #[test]
    fn breadth_first_finds_a_replayable_proof() {
        let g = seq("p /\\ q |- q /\\ p");
        let out = search(&g, &Strategy::new(Traversal::Bfs, LoopCheck::BranchRepeat, 8));
        assert_eq!(out.status, SearchStatus::Proved);
        let (end, path) = replay(&g, &out.trace).unwrap();
        assert!(end.is_box());
        assert_eq!(ReductionTree::from_bindings(&g, &path).unwrap(), out.tree.unwrap());
    }

    #[test]
    fn smallest_goal_first_still_replays() {
        let g = seq("(p -> q) /\\ p |- (p \\/ r) /\\ q");
        let strat = Strategy {
            goal_selection: GoalSelection::SmallestGoal,
            ..Strategy::new(Traversal::Dfs, LoopCheck::BranchRepeat, 12)
        };
        let out = search(&g, &strat);
        assert_eq!(out.status, SearchStatus::Proved);
        let (end, path) = replay(&g, &out.trace).unwrap();
        assert!(end.is_box());
        assert_eq!(ReductionTree::from_bindings(&g, &path).unwrap(), out.tree.unwrap());
    }

    #[test]
    fn failed_runs_unwind_to_the_root() {
        let g = seq("p -> q, q -> p |- p");
        let out = search(&g, &Strategy::new(Traversal::IterativeDeepening, LoopCheck::BranchRepeat, 30));
        assert_eq!(out.status, SearchStatus::Exhausted);
        let (end, path) = replay(&g, &out.trace).unwrap();
        assert_eq!(end, State::singleton(g));
        assert!(path.is_empty());
    }

    #[test]
    fn node_budget_stops_the_run() {
        let strat = Strategy {
            node_budget: 3,
            ..Strategy::new(Traversal::Dfs, LoopCheck::Off, 100)
        };
        let out = search(&seq("p -> p |- p"), &strat);
        assert_eq!(out.status, SearchStatus::BudgetExceeded);
        assert_eq!(out.nodes_visited, 4);
    }

    #[test]
    fn restricted_operator_order() {
        let strat = Strategy {
            operator_order: vec![Schema::Ax],
            ..Strategy::new(Traversal::Dfs, LoopCheck::Off, 5)
        };
        assert_eq!(search(&seq("p |- p /\\ p"), &strat).status, SearchStatus::Exhausted);
    }
}
