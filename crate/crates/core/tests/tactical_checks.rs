use std::sync::LazyLock;

use proptest::prelude::*;

use reductive::reduction::Schema;
use reductive::tactical::{
    check_operator_validity, check_tactic_validity, meeting_instance, meeting_operator, meeting_tactic,
    milner_instance, milner_operator, milner_tactic, recheck_operator_witness, recheck_tactic_witness, Consequence,
    GoalOperator, MilnerInstance, Procedure, TacticalInstance, ValidityStatus,
};
use reductive::{Formula, Goal};

/// A Milner instance that offers its whole procedure set to every goal.
struct FullSet<'a>(&'a MilnerInstance);

impl TacticalInstance for FullSet<'_> {
    type Goal = Goal;
    type Event = Consequence;

    fn goals(&self) -> Vec<Goal> {
        self.0.goals()
    }
    fn is_event(&self, e: &Consequence) -> bool {
        self.0.is_event(e)
    }
    fn achieves(&self, g: &Goal, e: &Consequence) -> bool {
        self.0.achieves(g, e)
    }
    fn achieving_events(&self, g: &Goal) -> Vec<Consequence> {
        self.0.achieving_events(g)
    }
    fn procedures(&self) -> Vec<Procedure<Consequence>> {
        self.0.procedures()
    }
}

/// `Γ ▷ A ∧ B` to `[Γ ▷ A]`: forgets half the obligation.
fn half_conjunction() -> GoalOperator<Goal> {
    GoalOperator::new("half-and", |g: &Goal| match &g.conclusion {
        Formula::And(a, _) => Some(vec![Goal::new(g.context.clone(), (**a).clone())]),
        _ => None,
    })
}

#[test]
fn valid_tactics_have_valid_operators() {
    let inst = milner_instance(2, 2);
    for schema in Schema::ALL {
        let t = milner_tactic(schema);
        if check_tactic_validity(&inst, &t, 5_000).is_valid_within_bound() {
            let v = check_operator_validity(&inst, &t.operator(), 5_000);
            assert!(v.is_valid_within_bound(), "{schema}: {:?}", v.witness);
        }
    }
    let m = meeting_instance();
    assert!(check_tactic_validity(&m, &meeting_tactic(), 1_000).is_valid_within_bound());
    assert!(check_operator_validity(&m, &meeting_tactic().operator(), 1_000).is_valid_within_bound());
    assert!(check_operator_validity(&m, &meeting_operator(), 1_000).is_valid_within_bound());
}

#[test]
fn sequential_composition_preserves_validity() {
    let inst = milner_instance(2, 3);
    let pairs = [
        (Schema::ImpR, Schema::Ax),
        (Schema::AndR, Schema::Ax),
        (Schema::ImpR, Schema::AndR),
        (Schema::AndL, Schema::Ax),
        (Schema::ImpL, Schema::Ax),
        (Schema::OrL, Schema::OrR1),
    ];
    for (a, b) in pairs {
        let (ta, tb) = (milner_tactic(a), milner_tactic(b));
        assert!(check_tactic_validity(&inst, &ta, 10_000).is_valid_within_bound());
        assert!(check_tactic_validity(&inst, &tb, 10_000).is_valid_within_bound());
        let both = ta.then(&tb);
        let v = check_tactic_validity(&inst, &both, 10_000);
        assert!(v.is_valid_within_bound(), "{}: {:?}", both.name, v.witness);
        assert!(v.goals > 0, "{} applies nowhere", both.name);
    }
}

#[test]
fn candidate_filter_agrees_with_the_full_procedure_set() {
    let inst = milner_instance(1, 2);
    let full = FullSet(&inst);
    let mut ops: Vec<GoalOperator<Goal>> = Schema::ALL.into_iter().map(milner_operator).collect();
    ops.push(half_conjunction());
    for op in &ops {
        let filtered = check_operator_validity(&inst, op, 2_000);
        let exhaustive = check_operator_validity(&full, op, 2_000);
        assert_eq!(filtered.status, exhaustive.status, "{}", op.name);
    }
}

#[test]
fn counterexamples_survive_a_recheck() {
    let inst = milner_instance(2, 2);
    let v = check_operator_validity(&inst, &half_conjunction(), 5_000);
    assert_eq!(v.status, ValidityStatus::Counterexample);
    let w = v.witness.unwrap();
    assert!(recheck_operator_witness(&inst, &half_conjunction(), &w));

    let lying = reductive::tactical::Tactic::new("lying-ax", |g: &Goal| {
        Some((vec![], Procedure::new("claim", {
            let e = Consequence::new(g.context.iter().cloned(), g.conclusion.clone());
            move |_: &[Consequence]| Some(e.clone())
        })))
    });
    let v = check_tactic_validity(&inst, &lying, 5_000);
    assert_eq!(v.status, ValidityStatus::Counterexample);
    assert!(recheck_tactic_witness(&inst, &lying, &v.witness.unwrap()));
}

static INSTANCE: LazyLock<MilnerInstance> = LazyLock::new(|| milner_instance(2, 2));

static POOL: LazyLock<Vec<Consequence>> = LazyLock::new(|| {
    let inst = &*INSTANCE;
    let mut pool: Vec<Consequence> = inst.goals().iter().flat_map(|g| inst.achieving_events(g)).collect();
    pool.sort();
    pool.dedup();
    pool
});

static PROCEDURES: LazyLock<Vec<Procedure<Consequence>>> = LazyLock::new(|| INSTANCE.procedures());

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn procedures_only_produce_consequences(
        proc in 0..PROCEDURES.len(),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 0..=3),
    ) {
        let events: Vec<Consequence> = picks.iter().map(|i| i.get(&POOL).clone()).collect();
        if let Some(out) = PROCEDURES[proc].apply(&events) {
            prop_assert!(INSTANCE.valid(&out), "{} on {:?} gave {}", PROCEDURES[proc].name, events, out);
        }
    }
}

#[test]
fn unary_procedure_outputs_are_consequences() {
    let inst = milner_instance(1, 2);
    let mut pool: Vec<Consequence> = inst.goals().iter().flat_map(|g| inst.achieving_events(g)).collect();
    pool.sort();
    pool.dedup();
    let mut produced = 0usize;
    for proc in inst.procedures() {
        for e in &pool {
            if let Some(out) = proc.apply(std::slice::from_ref(e)) {
                produced += 1;
                assert!(inst.valid(&out), "{} on {e} gave {out}", proc.name);
            }
        }
    }
    assert!(produced > pool.len());
}
