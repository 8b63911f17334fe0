//! The grid oracle against the closed-form thresholds on random markets.

use edgeworth_core::oracle::{find_all_pure_equilibria, verify_candidate, DEFAULT_GRID_CAP};
use edgeworth_core::{
    classical_threshold, quantum_threshold, undercut_check, Duopoly, MarketParams, RationingRule,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const N: usize = 2001;

fn random_market(rng: &mut StdRng) -> MarketParams {
    let a = rng.gen_range(0.5..2.0);
    let k = rng.gen_range(0.005..0.495) * a;
    MarketParams::new(a, k).unwrap()
}

#[test]
fn classical_oracle_matches_thresholds() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..200 {
        let params = random_market(&mut rng);
        for rule in RationingRule::ALL {
            let game = Duopoly::classical(params, rule).unwrap();
            let threshold = classical_threshold(rule, params.a);
            let margin = game.margin_band(&game.default_grid(N).unwrap());
            if (params.k - threshold).abs() < margin {
                continue;
            }
            let eps = 1e-9 * params.a * params.a;
            let report = verify_candidate(&game, N, eps).unwrap();
            assert_eq!(
                report.verdict.exists(),
                params.k <= threshold,
                "{rule} a={} k={}: {report:?}",
                params.a,
                params.k
            );
            checked += 1;
        }
    }
    assert!(checked > 350, "only {checked} samples outside the margin band");
}

#[test]
fn quantum_oracle_matches_threshold() {
    let mut rng = StdRng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..200 {
        let params = random_market(&mut rng);
        let gamma = rng.gen_range(0.0..5.0);
        let game = Duopoly::quantum(params, RationingRule::Proportional, gamma).unwrap();
        let threshold = quantum_threshold(params.a, gamma);
        if (params.k - threshold).abs() < game.margin_band(&game.default_grid(N).unwrap()) {
            continue;
        }
        let report = verify_candidate(&game, N, 1e-9 * params.a * params.a).unwrap();
        assert_eq!(
            report.verdict.exists(),
            params.k <= threshold,
            "a={} k={} gamma={gamma}: {report:?}",
            params.a,
            params.k
        );
        checked += 1;
    }
    assert!(checked > 180);
}

#[test]
fn efficient_rule_ignores_entanglement() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..200 {
        let params = random_market(&mut rng);
        let gamma = rng.gen_range(0.0..5.0);
        let game = Duopoly::quantum(params, RationingRule::Efficient, gamma).unwrap();
        let threshold = params.a / 3.0;
        if (params.k - threshold).abs() < game.margin_band(&game.default_grid(N).unwrap()) {
            continue;
        }
        let report = verify_candidate(&game, N, 1e-9 * params.a * params.a).unwrap();
        assert_eq!(report.verdict.exists(), params.k <= threshold, "gamma={gamma} {params:?}");
    }
}

#[test]
fn refining_the_grid_keeps_verdicts() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..100 {
        let params = random_market(&mut rng);
        let gamma = if rng.gen_bool(0.5) { Some(rng.gen_range(0.0..5.0)) } else { None };
        let rule = if rng.gen_bool(0.5) { RationingRule::Proportional } else { RationingRule::Efficient };
        let game = Duopoly::new(params, rule, gamma).unwrap();
        let threshold = match (rule, gamma) {
            (RationingRule::Proportional, Some(g)) => quantum_threshold(params.a, g),
            _ => classical_threshold(rule, params.a),
        };
        if (params.k - threshold).abs() < game.margin_band(&game.default_grid(N).unwrap()) {
            continue;
        }
        let eps = 1e-9 * params.a * params.a;
        let coarse = verify_candidate(&game, N, eps).unwrap();
        let fine = verify_candidate(&game, 2 * N - 1, eps).unwrap();
        assert_eq!(coarse.verdict, fine.verdict, "{game:?}");
    }
}

#[test]
fn undercutting_never_pays() {
    let mut rng = StdRng::seed_from_u64(15);
    for _ in 0..100 {
        let params = random_market(&mut rng);
        let gamma = rng.gen_range(0.0..5.0);
        for rule in RationingRule::ALL {
            for game in [
                Duopoly::classical(params, rule).unwrap(),
                Duopoly::quantum(params, rule, gamma).unwrap(),
            ] {
                let check = undercut_check(&game, &game.default_grid(N).unwrap());
                assert!(check.holds, "{game:?}: {check:?}");
            }
        }
    }
}

#[test]
fn search_only_finds_the_competitive_profile() {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..24 {
        let params = random_market(&mut rng);
        let rule = if rng.gen_bool(0.5) { RationingRule::Proportional } else { RationingRule::Efficient };
        let gamma = if rng.gen_bool(0.5) { Some(rng.gen_range(0.0..3.0)) } else { None };
        let game = Duopoly::new(params, rule, gamma).unwrap();
        let grid = game.default_grid(201).unwrap();
        let found = find_all_pure_equilibria(&game, &grid, 1e-9 * params.a * params.a, DEFAULT_GRID_CAP).unwrap();
        assert!(found.len() <= 1, "{game:?}: {found:?}");
        for eq in found {
            let ce = game.ce_action();
            assert!((eq.actions.0 - ce).abs() < 1e-12 && (eq.actions.1 - ce).abs() < 1e-12, "{game:?}: {eq:?}");
        }
    }
}
