mod common;

use common::*;
use polylearn::bimatrix::{self, lower_bound_game, solve_game, utilities, verify_wsne, SolveConfig};
use polylearn::multiplayer::{
    build_net, jordan_game, learn_multiplayer_labellings, multi_br_oracle, solve_wsne_multiplayer,
    verify_wsne_multiplayer, MultiBrOracle, NormalFormGame,
};
use polylearn::partition::{OracleKind, Policy};
use proptest::prelude::*;

#[test]
fn random_bimatrix_solutions_verify_independently() {
    for seed in 0..5 {
        let g = bimatrix::random_game(3, 3, seed).unwrap();
        let (a, b) = (g.a().to_vec(), g.b().to_vec());
        let sol = solve_game(&g, Policy::Seeded, &SolveConfig::new(0.2)).unwrap();
        assert!(bimatrix_regret(&a, &b, &sol.u, &sol.v) <= 0.2 + 1e-9);
        assert!(verify_wsne(&g, &sol.u, &sol.v, 0.2).unwrap().valid);
    }
}

#[test]
fn lower_bound_game_is_solved_under_every_policy() {
    let g = lower_bound_game(0.35, 0.8).unwrap();
    let (a, b) = (g.a().to_vec(), g.b().to_vec());
    for p in [Policy::Seeded, Policy::RoundRobin, Policy::MaxIndex, Policy::AntiLearner] {
        let sol = solve_game(&g, p, &SolveConfig::new(0.1)).unwrap();
        assert!(bimatrix_regret(&a, &b, &sol.u, &sol.v) <= 0.1 + 1e-9, "{p:?}");
    }
}

#[test]
fn solving_reads_no_payoffs_after_oracles_exist() {
    let g = bimatrix::random_game(2, 3, 7).unwrap();
    let mut ro = bimatrix::br_oracle(&g, bimatrix::Side::Row, OracleKind::Adversarial(Policy::Seeded), 1);
    let mut co = bimatrix::br_oracle(&g, bimatrix::Side::Column, OracleKind::Adversarial(Policy::Seeded), 2);
    let before = g.payoff_reads();
    bimatrix::solve_wsne(&mut ro, &mut co, &SolveConfig::new(0.2)).unwrap();
    assert_eq!(g.payoff_reads(), before);
}

fn solve_multi(g: &NormalFormGame, eps: f64) -> Vec<Vec<f64>> {
    let mut os: Vec<MultiBrOracle> = (0..g.players())
        .map(|i| multi_br_oracle(g, i, OracleKind::Adversarial(Policy::Seeded), i as u64).unwrap())
        .collect();
    let labs = learn_multiplayer_labellings(&mut os, eps).unwrap();
    solve_wsne_multiplayer(&labs, eps, 2).unwrap().profile
}

#[test]
fn jordan_game_equilibrium_verifies() {
    let g = jordan_game();
    let x = solve_multi(&g, 0.25);
    let u = |i: usize, a: &[usize]| g.utility(i, a);
    assert!(tensor_regret(3, 2, &u, &x) <= 0.25 + 1e-9);
    assert!(verify_wsne_multiplayer(&g, &x, 0.25).unwrap().valid);
}

#[test]
fn bimatrix_as_tensor_game_agrees() {
    let g = bimatrix::random_game(2, 2, 3).unwrap();
    let t = NormalFormGame::from_bimatrix(&g).unwrap();
    let (u, v) = (vec![0.3], vec![0.6]);
    let (ur, uc) = utilities(&g, &u, &v).unwrap();
    let x = [u.clone(), v.clone()];
    let full = |p: &[f64]| [1.0 - p[0], p[0]];
    let mut er = 0.0;
    let mut ec = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let w = full(&x[0])[r] * full(&x[1])[c];
            er += w * t.utility(0, &[r, c]);
            ec += w * t.utility(1, &[r, c]);
        }
    }
    assert!((er - ur).abs() < 1e-12 && (ec - uc).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn net_covers_random_views(n in 2usize..4, k in 2usize..4, eps in 0.2f64..0.8, seed in 0u64..1000) {
        let net = build_net(n, k, eps).unwrap();
        prop_assert_eq!(net.simplex_points.len() as u64, binom(net.kappa + k as u64 - 1, k as u64 - 1));
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let raw: Vec<f64> = (0..k).map(|_| -next().max(1e-12).ln()).collect();
            let tot: f64 = raw.iter().sum();
            let y: Vec<f64> = raw[1..].iter().map(|v| v / tot).collect();
            let near = net
                .simplex_points
                .iter()
                .map(|q| q.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum::<f64>() + (q.iter().sum::<f64>() - y.iter().sum::<f64>()).abs())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(near <= 2.0 * net.eps_prime + 1e-9, "gap {near} eps' {}", net.eps_prime);
        }
    }

    #[test]
    fn bimatrix_utilities_are_lipschitz(seed in 0u64..1000, u in 0.0f64..1.0, v1 in 0.0f64..1.0, v2 in 0.0f64..1.0) {
        let g = bimatrix::random_game(2, 2, seed).unwrap();
        let (a, _) = utilities(&g, &[u], &[v1]).unwrap();
        let (b, _) = utilities(&g, &[u], &[v2]).unwrap();
        // ‖full(v1) - full(v2)‖₁ = 2|v1 - v2| and payoffs lie in [0, 1].
        prop_assert!((a - b).abs() <= 2.0 * (v1 - v2).abs() + 1e-12);
    }
}
