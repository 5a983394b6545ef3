use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde_json::json;

use snep::algorithms::{rssa_step, rssa_step_with_shift, run, seg_step, sfb_step, sprg_step, tik_step};
use snep::games::{diag_game, game_a_verbatim, game_b, GameAParams, GameBParams};
use snep::sampling::sa_sample;
use snep::{
    residual, Algorithm, AlgorithmConfig, AlgorithmRegistry, BatchSchedule, Error, Estimator, GameSpec, RngStream,
    SolverState, StepSchedule, StepSize,
};

/// `diag(1, 2)` on `[−1, 1]²` with degenerate noise.
fn diag12() -> GameSpec {
    diag_game(&[1.0, 2.0], 1.0, 0.0).unwrap().to_spec().unwrap()
}

fn game_a() -> GameSpec {
    game_a_verbatim(&GameAParams::default()).unwrap().to_spec().unwrap()
}

fn state(game: &GameSpec, x: Vec<f64>) -> SolverState {
    SolverState::new(game.profile(x).unwrap(), RngStream::new(0, 0))
}

fn assert_close(got: &[f64], want: &[f64]) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-12, "{got:?} != {want:?}");
    }
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn sfb_affine_step() {
    let g = diag12();
    assert_close(sfb_step(&g, &state(&g, vec![0.8, -0.5]), 0.25, 1).x.values(), &[0.6, -0.25]);
}

#[test]
fn sfb_on_game_a_at_the_means() {
    let g = game_a_verbatim(&GameAParams { xi1_std: 0.0, xi2_std: 0.0, ..GameAParams::default() })
        .unwrap()
        .to_spec()
        .unwrap();
    // (1,1) − 0.001·(2, 2000) = (0.998, −1)
    assert_close(sfb_step(&g, &state(&g, vec![1.0, 1.0]), 0.001, 1).x.values(), &[0.998, -1.0]);
}

#[test]
fn seg_two_affine_evaluations() {
    let g = diag12();
    // y = (0.75, 0), x⁺ = (1, 0) − 0.25·(0.75, 0)
    assert_close(seg_step(&g, &state(&g, vec![1.0, 0.0]), 0.25, 1).x.values(), &[0.8125, 0.0]);
}

#[test]
fn tik_adds_regularization() {
    let g = diag12();
    assert_close(tik_step(&g, &state(&g, vec![1.0, 0.0]), 0.25, 1.0, 1).x.values(), &[0.5, 0.0]);
}

#[test]
fn rssa_evaluates_at_shifted_point() {
    let g = diag12();
    let next = rssa_step_with_shift(&g, &state(&g, vec![1.0, 0.0]), 0.25, Some(&[0.1, 0.0]), 0.0, 1);
    assert_close(next.x.values(), &[0.725, 0.0]);
}

#[test]
fn sprg_evaluates_at_reflected_point() {
    let g = diag12();
    let mut s = state(&g, vec![1.0, 0.0]);
    s.x_prev = Some(g.profile(vec![0.5, 0.0]).unwrap());
    let next = sprg_step(&g, &s, 0.25, 1);
    assert_close(next.x.values(), &[0.625, 0.0]);
    assert_eq!(next.x_prev.unwrap().values(), &[1.0, 0.0]);
}

#[test]
fn solutions_and_zero_steps_are_fixed() {
    let g = diag12();
    let zero = state(&g, vec![0.0, 0.0]);
    assert_eq!(sfb_step(&g, &zero, 0.25, 1).x.values(), &[0.0, 0.0]);
    assert_eq!(seg_step(&g, &zero, 0.25, 1).x.values(), &[0.0, 0.0]);
    assert_eq!(tik_step(&g, &zero, 0.25, 0.3, 1).x.values(), &[0.0, 0.0]);
    assert_eq!(rssa_step(&g, &zero, 0.25, 0.0, 0.7, 1).x.values(), &[0.0, 0.0]);
    let mut reflected = zero.clone();
    reflected.x_prev = Some(g.profile(vec![0.0, 0.0]).unwrap());
    assert_eq!(sprg_step(&g, &reflected, 0.25, 1).x.values(), &[0.0, 0.0]);

    let s = state(&g, vec![0.3, -0.9]);
    assert_eq!(seg_step(&g, &s, 0.0, 1).x.values(), s.x.values());
}

#[test]
fn reductions_are_bitwise_on_random_states() {
    let g = game_a();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
    for t in 0..100u64 {
        let x = vec![rng.random_range(-1000.0..=1000.0), rng.random_range(-1000.0..=1000.0)];
        let gamma = rng.random_range(1e-5..1e-1);
        let batch = rng.random_range(1..5);
        let mut s = SolverState::new(g.profile(x.clone()).unwrap(), RngStream::new(t, t + 1));
        s.k = t * 37;
        let reference = bits(sfb_step(&g, &s, gamma, batch).x.values());
        assert_eq!(bits(tik_step(&g, &s, gamma, 0.0, batch).x.values()), reference);
        assert_eq!(bits(rssa_step(&g, &s, gamma, 0.0, 0.0, batch).x.values()), reference);
        let mut r = s.clone();
        r.x_prev = Some(s.x.clone());
        assert_eq!(bits(sprg_step(&g, &r, gamma, batch).x.values()), reference);
    }
}

#[test]
fn agents_update_from_the_same_pre_step_profile() {
    let g = game_b(&GameBParams::default()).unwrap().to_spec().unwrap();
    let mut s = state(&g, vec![4.0, -7.5, 9.0]);
    s.k = 5;
    let gamma = 0.05;
    let next = sfb_step(&g, &s, gamma, 1);
    let f = sa_sample(&g, &s.x, s.stream.at(5, 0));
    // update agents in reverse order, each from the pre-step profile
    let mut manual = [0.0; 3];
    for i in (0..3).rev() {
        manual[i] = (s.x.values()[i] - gamma * f[i]).clamp(-10.0, 10.0);
    }
    assert_eq!(bits(next.x.values()), bits(&manual));
}

#[test]
fn per_agent_step_sizes() {
    let g = diag12();
    let next = sfb_step(&g, &state(&g, vec![0.8, -0.5]), StepSize::scaled(0.25, &[1.0, 0.5]), 1);
    // second agent uses γ = 0.125: −0.5 + 0.125·1 = −0.375
    assert_close(next.x.values(), &[0.6, -0.375]);
}

#[test]
fn oracle_sample_accounting() {
    let g = game_a();
    let registry = AlgorithmRegistry::with_builtins();
    for name in registry.names() {
        let alg = registry.build(name, &serde_json::Value::Null).unwrap();
        let mut s = alg.init(g.profile(vec![10.0, -3.0]).unwrap(), RngStream::new(1, 0));
        for batch in [1u64, 7] {
            let before = s.samples;
            s = alg.step(&g, &s, &StepSize::Shared(1e-3), batch);
            let per_eval = if name == "seg" { 2 } else { 1 };
            assert_eq!(alg.evaluations_per_step(), per_eval);
            assert_eq!(s.samples - before, per_eval * batch, "{name}");
        }
    }
}

#[test]
fn iterates_stay_feasible() {
    let g = game_a();
    let registry = AlgorithmRegistry::with_builtins();
    let steps = StepSchedule::constant(0.01);
    for name in registry.names() {
        let alg = registry.build(name, &serde_json::Value::Null).unwrap();
        let mut s = alg.init(g.profile(vec![999.0, -1000.0]).unwrap(), RngStream::new(2, 0));
        for k in 0..500 {
            s = alg.step(&g, &s, &StepSize::Shared(steps.at(k)), 1);
            assert!(g.is_feasible(s.x.values()), "{name} left the box at {k}: {:?}", s.x.values());
        }
    }
}

#[test]
fn noiseless_contraction_on_diag_game() {
    let g = diag_game(&[1.0, 2.0], 10.0, 0.0).unwrap().to_spec().unwrap();
    let (mu, l, gamma) = (1.0, 2.0, 0.25);
    let factor = 1.0 - 2.0 * gamma * mu + gamma * gamma * l * l;
    let mut s = state(&g, vec![1.0, 1.0]);
    for _ in 0..100 {
        let next = sfb_step(&g, &s, gamma, 1);
        let (a, b) = (next.x.norm(), s.x.norm());
        assert!(a < b || b == 0.0);
        assert!(a * a <= factor * b * b + 1e-12);
        s = next;
    }
}

#[test]
fn run_records_every_iteration() {
    let g = game_a();
    let cfg = AlgorithmConfig::new("sfb", StepSchedule::harmonic_1000(), 10_000).with_initial_point(vec![1000.0, 1000.0]);
    let rec = run(&g, &cfg, &mut |_| {}).unwrap();
    assert_eq!(rec.records.len(), 10_000);
    assert!(rec.records.iter().all(|r| r.residual.unwrap().is_finite()));
    assert_eq!(rec.records.last().unwrap().iteration, 10_000);
    assert_eq!(rec.last().samples, 10_000);
}

#[test]
fn zero_iterations_keep_only_initial_metrics() {
    let g = diag12();
    let cfg = AlgorithmConfig::new("seg", StepSchedule::constant(0.1), 0).with_initial_point(vec![0.5, 0.5]);
    let rec = run(&g, &cfg, &mut |_| {}).unwrap();
    assert!(rec.records.is_empty());
    assert_eq!(rec.last().iteration, 0);
    assert_eq!(rec.initial.residual, Some(residual(&g, &g.profile(vec![0.5, 0.5]).unwrap()).unwrap()));
}

#[test]
fn metric_stride_and_early_stop() {
    let g = diag_game(&[1.0, 2.0], 10.0, 0.0).unwrap().to_spec().unwrap();
    let mut cfg = AlgorithmConfig::new("sfb", StepSchedule::constant(0.25), 25).with_initial_point(vec![1.0, 1.0]);
    cfg.metric_stride = 10;
    let rec = run(&g, &cfg, &mut |_| {}).unwrap();
    assert_eq!(rec.records.iter().map(|r| r.iteration).collect::<Vec<_>>(), vec![10, 20, 25]);

    cfg.metric_stride = 1;
    cfg.max_iters = 100;
    cfg.tol = Some(1e-3);
    let rec = run(&g, &cfg, &mut |_| {}).unwrap();
    assert!(rec.stopped_early);
    assert!(rec.last().residual.unwrap() <= 1e-3);
    assert!(rec.records[rec.records.len() - 2].residual.unwrap() > 1e-3);
}

#[test]
fn same_seed_same_trajectory() {
    let g = game_a();
    let cfg = AlgorithmConfig::new("rssa", StepSchedule::harmonic_1000(), 300)
        .with_initial_point(vec![-200.0, 700.0])
        .with_estimator(Estimator::Vr { batch: BatchSchedule::constant(3) })
        .with_seed(9);
    let a = run(&g, &cfg, &mut |_| {}).unwrap();
    let b = run(&g, &cfg, &mut |_| {}).unwrap();
    let untimed = |r: &snep::RunRecord| -> Vec<_> {
        r.records.iter().map(|x| (x.iteration, x.residual.map(f64::to_bits), x.samples)).collect()
    };
    assert_eq!(untimed(&a), untimed(&b));
    assert_eq!(bits(a.final_x.values()), bits(b.final_x.values()));
    let c = run(&g, &cfg.clone().with_seed(10), &mut |_| {}).unwrap();
    assert_ne!(bits(a.final_x.values()), bits(c.final_x.values()));
}

#[test]
fn divergence_is_reported() {
    // unconstrained game with a step far above the stability limit
    let g = game_b(&GameBParams { constrained: false, variance: 0.0, ..GameBParams::default() }).unwrap().to_spec().unwrap();
    let cfg = AlgorithmConfig::new("sfb", StepSchedule::constant(1e3), 10_000).with_initial_point(vec![1.0, 1.0, 1.0]);
    let err = run(&g, &cfg, &mut |_| {}).unwrap_err();
    assert!(matches!(err, Error::Divergence { iteration } if iteration > 1));
}

#[test]
fn registry_lookup_and_params() {
    let r = AlgorithmRegistry::with_builtins();
    assert_eq!(r.names().collect::<Vec<_>>(), vec!["rssa", "seg", "sfb", "sprg", "tik"]);
    assert_eq!(r.build("SEG", &serde_json::Value::Null).unwrap().name(), "seg");
    assert!(matches!(r.build("adam", &serde_json::Value::Null), Err(Error::UnknownAlgorithm(_))));
    assert!(r.build("sfb", &json!({ "eps": 1.0 })).is_err());
    assert!(r.build("tik", &json!({ "delta": { "kind": "constant", "value": 0.0 } })).is_err());
    assert!(r.build("tik", &json!({ "eps": { "kind": "constant", "value": -1.0 } })).is_err());
    assert!(r.build("rssa", &json!({ "eta": { "kind": "polynomial", "scale": 1.0, "offset": 5.0, "exponent": 0.5 } })).is_ok());
}

#[derive(Debug)]
struct HalfStep;

impl Algorithm for HalfStep {
    fn name(&self) -> &'static str {
        "half"
    }

    fn step(&self, game: &GameSpec, state: &SolverState, gamma: &StepSize, batch: u64) -> SolverState {
        let g = match gamma {
            StepSize::Shared(g) => *g,
            StepSize::PerAgent(v) => v[0],
        };
        sfb_step(game, state, 0.5 * g, batch)
    }
}

#[test]
fn custom_schemes_can_be_registered() {
    let mut r = AlgorithmRegistry::with_builtins();
    r.register("half", |_| Ok(Box::new(HalfStep)));
    let g = diag12();
    let s = state(&g, vec![0.8, -0.5]);
    let alg = r.build("half", &serde_json::Value::Null).unwrap();
    let via_registry = alg.step(&g, &s, &StepSize::Shared(0.5), 1);
    assert_eq!(bits(via_registry.x.values()), bits(sfb_step(&g, &s, 0.25, 1).x.values()));
}
