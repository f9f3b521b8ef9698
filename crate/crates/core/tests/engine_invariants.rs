mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reruns_are_identical(seed in any::<u64>()) {
        prop_assert_eq!(common::check_determinism(seed), Ok(()));
    }

    #[test]
    fn rigid_runs_scale(seed in any::<u64>()) {
        prop_assert_eq!(common::check_rigid_scaling(seed), Ok(()));
    }

    #[test]
    fn swapping_robots_reflects(seed in any::<u64>()) {
        prop_assert_eq!(common::check_swap_symmetry(seed), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn meeting_is_absorbing(seed in any::<u64>()) {
        prop_assert_eq!(common::check_absorbing(seed), Ok(()));
    }
}

#[test]
fn snapshots_are_stale() {
    common::check_staleness().unwrap();
}

#[test]
fn lights_show_one_step_late() {
    common::check_visibility().unwrap();
}
