use proptest::prelude::*;

use snep::compliance::{self, CheckId, Status};
use snep::{make_profile, AlgorithmConfig, BatchSchedule, Constants, DecisionProfile, Error, Partition, StepSchedule};

#[test]
fn make_profile_splits_into_blocks() {
    let p = make_profile(vec![1.0, 2.0, 3.0], &[1, 2]).unwrap();
    assert_eq!(p.block(0), &[1.0]);
    assert_eq!(p.block(1), &[2.0, 3.0]);

    let single = make_profile(vec![0.0, 0.0], &[2]).unwrap();
    assert_eq!(single.n_agents(), 1);
    assert_eq!(single.block(0), &[0.0, 0.0]);
}

#[test]
fn make_profile_rejects_wrong_total() {
    let err = make_profile(vec![1.0, 2.0, 3.0], &[1, 1]).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
}

#[test]
fn partition_rejects_empty_blocks() {
    assert!(Partition::new(&[]).is_err());
    assert!(Partition::new(&[2, 0]).is_err());
}

#[test]
fn step_schedule_values() {
    let h = StepSchedule::polynomial(1.0, 1000.0, 1.0);
    assert_eq!(h.at(0), 0.001);
    assert_eq!(h.at(1000), 0.0005);
    assert_eq!(StepSchedule::constant(0.25).at(7), 0.25);
}

#[test]
fn batch_schedule_values() {
    let b = BatchSchedule::polynomial(1.0, 1.0, 1.0);
    assert_eq!(b.at(0), 1);
    assert_eq!(b.at(9), 100);
    assert_eq!(BatchSchedule::constant(5).at(123), 5);
}

#[test]
fn batch_schedule_hits_exact_squares() {
    let b = BatchSchedule::polynomial(1.0, 1.0, 1.0);
    for k in 0..10_000u64 {
        assert_eq!(b.at(k), (k + 1) * (k + 1), "k = {k}");
    }
}

#[test]
fn batch_schedule_is_monotone() {
    for b in [
        BatchSchedule::polynomial(1.0, 1.0, 1.0),
        BatchSchedule::polynomial(0.3, 2.5, 0.2),
        BatchSchedule::polynomial(7.0, 0.1, 1.7),
    ] {
        let mut prev = 0;
        for k in 0..=10_000u64 {
            let s = b.at(k);
            assert!(s >= prev, "{b:?} decreases at k = {k}");
            prev = s;
        }
    }
}

fn vanishing_status(exponent: f64) -> Status {
    let cfg = AlgorithmConfig::new("sfb", StepSchedule::polynomial(1.0, 1000.0, exponent), 1);
    let report = compliance::check(&cfg, &Constants::default());
    report.checks.into_iter().find(|c| c.id == CheckId::VanishingStep).unwrap().status
}

#[test]
fn vanishing_step_exponent_window() {
    for p in [0.51, 0.75, 1.0] {
        assert_eq!(vanishing_status(p), Status::Pass, "p = {p}");
    }
    for p in [0.25, 0.5, 1.01, 2.0] {
        assert!(matches!(vanishing_status(p), Status::Fail(_)), "p = {p}");
    }
}

#[test]
fn schedule_validation() {
    assert!(StepSchedule::constant(0.0).validate_step().is_err());
    assert!(StepSchedule::constant(-1.0).validate_nonnegative().is_err());
    assert!(StepSchedule::polynomial(1.0, 0.0, 1.0).validate_step().is_err());
    assert!(StepSchedule::polynomial(1.0, 1.0, 1.0).validate_step().is_ok());
    assert!(BatchSchedule::constant(0).validate().is_err());
    assert!(BatchSchedule::polynomial(1.0, 0.0, 1.0).validate().is_err());
}

fn sizes_and_values() -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
    prop::collection::vec(1usize..5, 1..6).prop_flat_map(|sizes| {
        let n: usize = sizes.iter().sum();
        (Just(sizes), prop::collection::vec(-1e6f64..1e6, n))
    })
}

proptest! {
    #[test]
    fn split_then_stack_is_identity((sizes, values) in sizes_and_values()) {
        let p = make_profile(values.clone(), &sizes).unwrap();
        let blocks: Vec<Vec<f64>> = p.blocks().map(<[f64]>::to_vec).collect();
        prop_assert_eq!(blocks.iter().map(Vec::len).collect::<Vec<_>>(), sizes.clone());
        let back = DecisionProfile::from_blocks(&blocks).unwrap();
        prop_assert_eq!(back.values(), values.as_slice());
        prop_assert_eq!(back.partition().sizes(), sizes);
    }

    #[test]
    fn polynomial_batches_never_decrease(
        scale in 0.01f64..10.0,
        offset in 0.01f64..10.0,
        exponent in 0.01f64..2.0,
        k in 0u64..10_000,
    ) {
        let b = BatchSchedule::polynomial(scale, offset, exponent);
        prop_assert!(b.at(k + 1) >= b.at(k));
        prop_assert!(b.at(k) >= 1);
    }
}
