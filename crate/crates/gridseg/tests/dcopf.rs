mod common;

use common::cases::{case30, case9, toy};
use gridseg::dcopf::{
    audit_dual_caps, check_strong_duality, dual_row_residual, operator_shed, solve_operator, solve_operator_reduced, Attack,
    OutageMask, ShedCache,
};
use gridseg::model::{GridCase, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DUALITY_TOL: f64 = 1e-6;
const MODEL_TOL: f64 = 1e-6;

fn random_attack(rng: &mut impl Rng, grid: &GridCase) -> Attack {
    let p: f64 = rng.gen_range(0.0..0.5);
    let mut mask = OutageMask::default();
    for i in 0..grid.component_count() {
        if rng.gen_bool(p) {
            mask.insert(i);
        }
    }
    Attack::from_mask(grid, &mask)
}

/// Solves both formulations on `n` random attacks; returns the worst
/// strong-duality residual and the worst formulation gap.
fn compare(inst: &Instance, seed: u64, n: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = &inst.grid;
    let (mut gap, mut diff) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let attack = random_attack(&mut rng, grid);
        let (dispatch, dual) = solve_operator(grid, &attack).unwrap();
        gap = gap.max(check_strong_duality(grid, &attack, &dispatch, &dual).unwrap());
        assert!(dual_row_residual(grid, &dual).unwrap() <= 1e-6);
        assert!(audit_dual_caps(grid, &dual).is_empty(), "dual above its assumed cap");
        let reduced = solve_operator_reduced(grid, &attack).unwrap();
        diff = diff.max((reduced.total_shed - dispatch.total_shed).abs());
    }
    (gap, diff)
}

#[test]
fn formulations_agree_on_random_attacks_9bus() {
    let (gap, diff) = compare(&case9(), 9, 250);
    assert!(gap <= DUALITY_TOL, "duality residual {gap}");
    assert!(diff <= MODEL_TOL, "formulation gap {diff}");
}

#[test]
fn formulations_agree_on_random_attacks_30bus() {
    let (gap, diff) = compare(&case30(), 30, 250);
    assert!(gap <= DUALITY_TOL, "duality residual {gap}");
    assert!(diff <= MODEL_TOL, "formulation gap {diff}");
}

#[test]
fn empty_attack_sheds_nothing() {
    for inst in [case9(), case30(), toy()] {
        let none = Attack::none(&inst.grid);
        let (d, dual) = solve_operator(&inst.grid, &none).unwrap();
        assert!(d.total_shed.abs() <= 1e-6);
        assert!(check_strong_duality(&inst.grid, &none, &d, &dual).unwrap() <= DUALITY_TOL);
    }
}

#[test]
fn everything_off_sheds_all_demand() {
    for inst in [case9(), case30()] {
        let mut mask = OutageMask::default();
        for i in 0..inst.grid.component_count() {
            mask.insert(i);
        }
        let all = Attack::from_mask(&inst.grid, &mask);
        let (d, dual) = solve_operator(&inst.grid, &all).unwrap();
        assert!((d.total_shed - inst.total_demand()).abs() <= 1e-6);
        assert!(check_strong_duality(&inst.grid, &all, &d, &dual).unwrap() <= DUALITY_TOL);
    }
}

#[test]
fn toy_line_limit_binds() {
    // 60 MW load behind an 80 MW line: no shed; line out sheds all 60.
    let inst = toy();
    let grid = &inst.grid;
    assert!(operator_shed(grid, &Attack::none(grid)).unwrap().abs() <= 1e-9);
    let line_out = Attack::from_outages(grid, &["L1"]).unwrap();
    let (d, dual) = solve_operator(grid, &line_out).unwrap();
    assert!((d.total_shed - 60.0).abs() <= 1e-9);
    assert!(check_strong_duality(grid, &line_out, &d, &dual).unwrap() <= DUALITY_TOL);
}

#[test]
fn dispatch_balances_at_every_bus() {
    let inst = case9();
    let grid = &inst.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let attack = random_attack(&mut rng, grid);
        let (d, _) = solve_operator(grid, &attack).unwrap();
        let mut net = vec![0.0; grid.substations.len()];
        let at = |id: &str| grid.substation_index(id).unwrap();
        for (g, gen) in grid.generators.iter().enumerate() {
            net[at(&gen.bus)] += d.generation[g];
        }
        for (i, load) in grid.loads.iter().enumerate() {
            net[at(&load.bus)] -= load.demand - d.shed[i];
        }
        for (k, l) in grid.lines.iter().enumerate() {
            net[at(&l.from)] -= d.flow[k];
            net[at(&l.to)] += d.flow[k];
            assert!(d.flow[k].abs() <= l.rating + 1e-6);
            if !attack.line_up[k] {
                assert!(d.flow[k].abs() <= 1e-9);
            }
        }
        assert!(net.iter().all(|v| v.abs() <= 1e-6), "imbalance {net:?}");
    }
}

#[test]
fn shed_cache_matches_direct_solves() {
    let inst = case9();
    let grid = &inst.grid;
    let cache = ShedCache::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let attack = random_attack(&mut rng, grid);
        let direct = operator_shed(grid, &attack).unwrap();
        assert_eq!(cache.shed(grid, &attack.mask()).unwrap(), cache.shed(grid, &attack.mask()).unwrap());
        assert!((cache.shed(grid, &attack.mask()).unwrap() - direct).abs() <= 1e-12);
    }
}
