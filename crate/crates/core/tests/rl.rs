mod common;

use common::{one_region, small_scenario, toy};
use kcharge::oracle::{solve_exact, OracleBudget, TimeMode};
use kcharge::rl::{rollout, solve_dqn, train, Env, PartialSolution, QPolicy, RlHyperparams, FEATURES};
use kcharge::{verify, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed under which the toy rollout is checked against the oracle.
const TOY_SEED: u64 = 7;

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / norm_a.max(norm_b).max(1e-12)
}

#[test]
fn gradient_matches_central_differences() {
    for net in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(net);
        let dim = 3 + net as usize % 4;
        let mut policy = QPolicy::random(dim, [5, 4], &mut rng);
        let inputs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let batch: Vec<(&[f64], f64)> = inputs.iter().map(|x| x.as_slice()).zip(targets.iter().copied()).collect();

        let (_, grads) = policy.loss_and_gradient(&batch);
        let analytic = grads.flat();
        let base = policy.params();
        let h = 1e-6;
        let mut numeric = Vec::with_capacity(base.len());
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] = base[i] + h;
            policy.set_params(&p).unwrap();
            let up = policy.loss(&batch);
            p[i] = base[i] - h;
            policy.set_params(&p).unwrap();
            let down = policy.loss(&batch);
            numeric.push((up - down) / (2.0 * h));
        }
        policy.set_params(&base).unwrap();
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-4, "net {net}: relative error {err}");
    }
}

#[test]
fn toy_rollout_reaches_the_oracle_optimum() {
    let sc = toy();
    assert_eq!(sc.demand.num_colors(), 5);
    let best = solve_exact(&sc, &OracleBudget::default(), TimeMode::Continuous)
        .unwrap()
        .unwrap();
    let hp = RlHyperparams {
        seed: TOY_SEED,
        ..RlHyperparams::default()
    };
    let sol = solve_dqn(&sc, &hp).unwrap().unwrap();
    assert_eq!(sol.distance_m, best.distance_m);
    assert!(verify(&sol.order, &sc).unwrap().is_valid());
}

#[test]
fn training_is_deterministic() {
    let sc = small_scenario(14, 2, 0.5, 3);
    let hp = RlHyperparams {
        episodes: 60,
        seed: 11,
        ..RlHyperparams::default()
    };
    let a = train(&sc, &hp).unwrap();
    let b = train(&sc, &hp).unwrap();
    assert_eq!(a.policy.params(), b.policy.params());
    assert_eq!(a.episode_losses, b.episode_losses);
}

#[test]
fn loss_falls_over_training() {
    let sc = toy();
    let report = train(&sc, &RlHyperparams::default()).unwrap();
    let n = report.episode_losses.len();
    let tenth = n / 10;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let first = mean(&report.episode_losses[..tenth]);
    let last = mean(&report.episode_losses[n - tenth..]);
    assert!(last < first, "first {first} last {last}");
}

#[test]
fn episode_returns_telescope_to_tour_length() {
    // with no dead end the undiscounted return is minus the final tour
    // length in diagonals
    let sc = toy();
    let env = Env::new(&sc);
    let mut state = PartialSolution::start();
    let mut ret = 0.0;
    while !env.is_done(&state) {
        let actions = env.actions(&state);
        let next = env.apply(&state, &actions[actions.len() - 1]);
        ret += -(next.distance - state.distance) / env.diagonal();
        state = next;
    }
    assert!((ret + state.distance / env.diagonal()).abs() < 1e-12);
}

#[test]
fn empty_tour_has_zero_visited_fraction() {
    let sc = toy();
    let env = Env::new(&sc);
    let start = PartialSolution::start();
    for c in 0..env.num_colors() {
        let f = env.encode(&start, c);
        assert_eq!(f[7], 0.0);
        assert_eq!(f[8], 0.0);
    }
}

#[test]
fn dead_candidate_is_flagged_and_masked() {
    // sensor 4 is 269 m out with a 20 s deadline
    let sc = one_region(
        200.0,
        3,
        Point::new(0.0, 0.0),
        &[
            (1, 10.0, 0.0, 3000.0, 0.2),
            (2, 0.0, 20.0, 3000.0, 0.2),
            (3, 90.0, 90.0, 9000.0, 0.2),
            (4, 190.0, 190.0, 20.0, 1.0),
        ],
    );
    let env = Env::new(&sc);
    let dead = sc.demand.color_of(4).unwrap();
    let start = PartialSolution::start();
    let f = env.encode(&start, dead);
    assert_eq!(f[6], 0.0);
    assert!(env.actions(&start).iter().all(|a| a.color != dead));
}

#[test]
fn features_have_the_documented_length_and_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = 0;
    for seed in 0..60u64 {
        let sc = small_scenario(14, 2, 0.5, seed);
        let env = Env::new(&sc);
        if env.num_colors() == 0 || pairs >= 100 {
            continue;
        }
        let mut state = PartialSolution::start();
        for _ in 0..5 {
            let c = rng.gen_range(0..env.num_colors());
            let f = env.encode(&state, c);
            assert_eq!(f.len(), FEATURES);
            assert!(f.iter().all(|v| (-1.0..=1.0).contains(v)));
            pairs += 1;
            let actions = env.actions(&state);
            if actions.is_empty() || env.is_done(&state) {
                break;
            }
            state = env.apply(&state, &actions[rng.gen_range(0..actions.len())]);
        }
    }
    assert!(pairs >= 100, "only {pairs} pairs");
}

#[test]
fn zero_table_gives_the_empty_tour() {
    let sc = one_region(
        100.0,
        1,
        Point::new(50.0, 50.0),
        &[(1, 10.0, 10.0, 2000.0, 0.2), (2, 90.0, 10.0, 9000.0, 0.2)],
    );
    let sol = solve_dqn(&sc, &RlHyperparams::default()).unwrap().unwrap();
    assert!(sol.order.is_empty());
}

#[test]
fn returned_tours_revalidate() {
    let hp = RlHyperparams {
        episodes: 40,
        ..RlHyperparams::default()
    };
    let mut found = 0;
    for seed in 0..100u64 {
        let sc = small_scenario(12, 2, 0.5, seed);
        let report = train(&sc, &hp).unwrap();
        if let Some(sol) = rollout(&report.policy, &sc).unwrap() {
            assert!(verify(&sol.order, &sc).unwrap().is_valid(), "seed {seed}");
            found += 1;
        }
    }
    assert!(found > 50, "only {found} tours");
}

#[test]
fn rollout_rejects_a_wrong_input_width() {
    let policy = QPolicy::zeros(FEATURES + 1, [4, 4]);
    assert!(rollout(&policy, &toy()).is_err());
}
