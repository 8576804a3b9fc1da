mod common;

use proptest::prelude::*;

use common::{ipl_goal, seq};
use reductive::reduction::{step_interleave, State};
use reductive::space::{coherence_check, extract_trees, unfold, unfold_iterative, SpaceNode};

/// Every cycle marker names an ancestor with the same goal.
fn cycles_are_sound(node: &SpaceNode, path: &mut Vec<reductive::Goal>) -> bool {
    if let Some(i) = node.cyclic {
        if path.get(i) != Some(&node.goal) {
            return false;
        }
    }
    path.push(node.goal.clone());
    let ok = node
        .alternatives
        .iter()
        .all(|alt| alt.children.iter().all(|c| cycles_are_sound(c, path)));
    path.pop();
    ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn extracted_trees_glue_back_to_box(g in ipl_goal(5), depth in 1usize..4) {
        let space = unfold(&g, depth);
        for tree in extract_trees(&space, 25) {
            let mut s = State::singleton(g.clone());
            for b in tree.bindings() {
                s = step_interleave(&s, &b).expect("tree labels replay");
            }
            prop_assert!(s.is_box());
        }
    }

    #[test]
    fn deeper_unfoldings_extend_shallower(g in ipl_goal(5), depth in 0usize..3) {
        prop_assert!(unfold(&g, depth).is_prefix_of(&unfold(&g, depth + 1)));
    }

    #[test]
    fn cycle_markers_point_at_equal_ancestors(g in ipl_goal(5), depth in 1usize..4) {
        prop_assert!(cycles_are_sound(&unfold(&g, depth), &mut Vec::new()));
    }

    #[test]
    fn both_constructions_agree(g in ipl_goal(6), depth in 1usize..5) {
        prop_assert!(coherence_check(&g, depth));
    }
}

#[test]
fn contraction_space_loops_back() {
    let g = seq("phi, phi -> phi |- phi");
    let space = unfold_iterative(&g, 2);
    assert_eq!(space.alternatives.len(), 2);
    assert!(cycles_are_sound(&space, &mut Vec::new()));
}
