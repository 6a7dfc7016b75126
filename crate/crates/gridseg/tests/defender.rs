mod common;

use std::collections::BTreeSet;

use common::cases::{brute_force_orbits, canonical, case9, random_plan, toy};
use gridseg::attacker::{apply_segmentation, search_attacks, worst_attack_enumerate};
use gridseg::dcopf::ShedCache;
use gridseg::defender::{
    budget_sweep, build_defender_model, enumerate_plans, model_violations, solve_trilevel, solve_with, Oracle, PlanOptions,
    PlanSpace, SegmentationPlan,
};
use gridseg::ingest::write_results;
use gridseg::lp::{solve_milp, Sense, Status};
use gridseg::model::{DefenderBudget, Instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn b(s: usize, c: usize, a: usize) -> DefenderBudget {
    DefenderBudget::new(s, c, a)
}

fn canonical_set(inst: &Instance, plans: &[SegmentationPlan]) -> BTreeSet<String> {
    let set: BTreeSet<String> = plans.iter().map(|p| canonical(inst, p)).collect();
    assert_eq!(set.len(), plans.len(), "enumeration repeats a plan");
    set
}

/// Exhaustive trilevel value: every enumerated plan against its worst attack.
fn brute_force_value(inst: &Instance, budget: DefenderBudget, attack_budget: usize) -> f64 {
    let cache = ShedCache::new();
    enumerate_plans(inst, budget, PlanOptions::default())
        .iter()
        .map(|p| {
            let forest = apply_segmentation(inst, p).unwrap();
            search_attacks(&forest, &inst.grid, attack_budget, &cache, f64::INFINITY).unwrap().load_shed
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn plan_counts_match_labeled_brute_force_9bus() {
    let inst = case9();
    for (budget, expected) in [(b(1, 0, 0), 42), (b(0, 2, 0), 891), (b(1, 1, 1), 43008)] {
        let (labeled, orbits) = brute_force_orbits(&inst, budget, true);
        let plans = enumerate_plans(&inst, budget, PlanOptions::default());
        assert_eq!(plans.len(), expected, "{budget}");
        assert_eq!(PlanSpace::new(&inst, budget, PlanOptions::default()).count(), expected);
        assert!(labeled >= expected);
        assert!(canonical_set(&inst, &plans) == orbits, "{budget}: orbit sets differ");
    }
}

#[test]
fn plan_counts_match_labeled_brute_force_toy() {
    let inst = toy();
    for s in 0..=2 {
        for c in 0..=2 {
            for a in 0..=2 {
                for childless in [true, false] {
                    let opts = PlanOptions { allow_childless: childless };
                    let (_, orbits) = brute_force_orbits(&inst, b(s, c, a), childless);
                    let plans = enumerate_plans(&inst, b(s, c, a), opts);
                    assert!(canonical_set(&inst, &plans) == orbits, "({s},{c},{a}) childless={childless}");
                }
            }
        }
    }
}

#[test]
fn enumerated_plans_satisfy_the_model() {
    let inst = case9();
    for budget in [b(0, 0, 0), b(1, 0, 0), b(0, 1, 0), b(0, 0, 2), b(0, 2, 0)] {
        for plan in enumerate_plans(&inst, budget, PlanOptions::default()) {
            assert_eq!(model_violations(&inst, &plan).unwrap(), Vec::<String>::new());
        }
    }
    let identity = SegmentationPlan::identity(&inst).unwrap();
    assert!(model_violations(&inst, &identity).unwrap().is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..40 {
        let plan = random_plan(&mut rng, &inst, 2);
        assert!(model_violations(&inst, &plan).unwrap().is_empty(), "{plan:?}");
    }
}

#[test]
fn model_rejects_broken_plans() {
    let inst = case9();
    let mut plan = enumerate_plans(&inst, b(1, 0, 0), PlanOptions::default()).remove(0);
    // Move every relay of the new substation enclave back to the original.
    let new_id = plan.new_enclaves[0].id.clone();
    let home = format!("{}/0", plan.new_enclaves[0].entity);
    for e in plan.relay_enclave.values_mut() {
        if *e == new_id {
            *e = home.clone();
        }
    }
    assert!(!model_violations(&inst, &plan).unwrap().is_empty());
}

/// Every feasible point of the defender model, found by re-solving with a
/// no-good cut on each previous decision vector.
fn model_solutions(inst: &Instance, budget: DefenderBudget) -> Vec<SegmentationPlan> {
    let mut model = build_defender_model(inst, budget);
    let vars = model.decision_vars();
    let mut out = Vec::new();
    loop {
        let sol = solve_milp(&model.program, None).unwrap();
        if sol.status == Status::Infeasible {
            return out;
        }
        assert_eq!(sol.status, Status::Optimal);
        out.push(model.decode(inst, &sol.x));
        let ones: Vec<usize> = vars.iter().copied().filter(|&j| sol.x[j] > 0.5).collect();
        let terms: Vec<(usize, f64)> = vars.iter().map(|&j| (j, if sol.x[j] > 0.5 { -1.0 } else { 1.0 })).collect();
        let n = model.program.lp.rows.len();
        model.program.lp.add_row(format!("nogood{n}"), terms, Sense::Ge, 1.0 - ones.len() as f64);
    }
}

#[test]
fn model_feasible_set_equals_enumeration_toy() {
    let inst = toy();
    for budget in [b(0, 0, 0), b(1, 0, 0), b(0, 1, 0), b(0, 0, 1), b(1, 1, 0), b(0, 1, 1), b(2, 0, 0), b(1, 1, 1)] {
        let found: BTreeSet<String> = model_solutions(&inst, budget).iter().map(|p| canonical(&inst, p)).collect();
        let plans = enumerate_plans(&inst, budget, PlanOptions::default());
        assert!(canonical_set(&inst, &plans) == found, "{budget}");
    }
}

#[test]
fn solver_matches_exhaustive_plan_search() {
    let inst = toy();
    for budget in [b(0, 0, 0), b(1, 0, 0), b(1, 1, 0), b(2, 1, 1)] {
        for u in 0..=4 {
            let rec = solve_trilevel(&inst, budget, u, Oracle::Enumerate).unwrap();
            assert!((rec.load_shed - brute_force_value(&inst, budget, u)).abs() <= 1e-9, "{budget} U={u}");
        }
    }
    let inst = case9();
    for (budget, u) in [(b(0, 1, 0), 5), (b(1, 0, 0), 5), (b(0, 0, 2), 5), (b(0, 2, 0), 3), (b(0, 2, 0), 5)] {
        let rec = solve_trilevel(&inst, budget, u, Oracle::Enumerate).unwrap();
        assert!((rec.load_shed - brute_force_value(&inst, budget, u)).abs() <= 1e-9, "{budget} U={u}");
        // The reported plan really achieves the value.
        let forest = apply_segmentation(&inst, &rec.plan).unwrap();
        let (attack, l) = worst_attack_enumerate(&forest, &inst.grid, u).unwrap();
        assert!((l - rec.load_shed).abs() <= 1e-6);
        assert_eq!(attack.enclaves, rec.attack.enclaves);
        assert_eq!(rec.plan_count as usize, enumerate_plans(&inst, budget, PlanOptions::default()).len());
    }
}

#[test]
fn oracles_give_the_same_trilevel_value() {
    let inst = case9();
    for (budget, u) in [(b(0, 1, 0), 3), (b(1, 0, 0), 5), (b(0, 0, 2), 4)] {
        let e = solve_trilevel(&inst, budget, u, Oracle::Enumerate).unwrap();
        let m = solve_trilevel(&inst, budget, u, Oracle::Milp).unwrap();
        assert!((e.load_shed - m.load_shed).abs() <= 1e-4, "{budget} U={u}: {} vs {}", e.load_shed, m.load_shed);
    }
}

#[test]
fn childless_option_never_helps_the_attacker() {
    let inst = case9();
    let cache = ShedCache::new();
    let strict = PlanOptions { allow_childless: false };
    for budget in [b(0, 2, 0), b(0, 0, 2), b(1, 1, 1)] {
        let (loose, _) = solve_with(&inst, budget, 5, Oracle::Enumerate, PlanOptions::default(), &cache).unwrap();
        let (tight, _) = solve_with(&inst, budget, 5, Oracle::Enumerate, strict, &cache).unwrap();
        assert!(loose.load_shed <= tight.load_shed + 1e-9);
        assert!(tight.plan.childless_enclaves().is_empty());
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let inst = case9();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            [b(0, 2, 0), b(1, 1, 1)]
                .iter()
                .map(|&budget| write_results(&inst.grid, &solve_trilevel(&inst, budget, 5, Oracle::Enumerate).unwrap()))
                .collect::<Vec<_>>()
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn sweep_rows_repeat_exactly() {
    let inst = case9();
    let budgets = [b(0, 2, 0), b(1, 0, 0), b(0, 2, 0)];
    let rows = budget_sweep(&inst, &budgets, 5, Oracle::Enumerate).unwrap();
    assert_eq!(write_results(&inst.grid, &rows[0]), write_results(&inst.grid, &rows[2]));
    let single = solve_trilevel(&inst, b(1, 0, 0), 5, Oracle::Enumerate).unwrap();
    assert_eq!(write_results(&inst.grid, &rows[1]), write_results(&inst.grid, &single));
}

#[test]
fn empty_budget_keeps_the_original_forest() {
    let inst = case9();
    let plans = enumerate_plans(&inst, b(0, 0, 0), PlanOptions::default());
    assert_eq!(plans.len(), 1);
    assert_eq!(canonical(&inst, &plans[0]), canonical(&inst, &SegmentationPlan::identity(&inst).unwrap()));
}
