mod common;

use common::random_program;
use pattern_core::checker::CheckLimits;
use pattern_core::oracle::as_terminating_mdp;
use pattern_core::responses::{check_response_pattern, construct_response, is_normal_form, normalize, ResponseError};
use pattern_core::semantics::{build, BuildOptions, Instance};

#[test]
fn normal_form_preserves_termination_and_admits_responses() {
    let (mut built, mut refuted) = (0, 0);
    for seed in 0..200u64 {
        let p = random_program(seed, true);
        let n = normalize(&p);
        n.validate().unwrap();
        assert!(is_normal_form(&n), "seed {seed}");
        let before = build(&p, &Instance::new(), BuildOptions::default()).unwrap();
        let after = build(&n, &Instance::new(), BuildOptions::default()).unwrap();
        let truth = as_terminating_mdp(&before).is_ok();
        assert_eq!(as_terminating_mdp(&after).is_ok(), truth, "seed {seed}");
        match construct_response(&after) {
            Ok(r) => {
                assert!(truth);
                let size = after.node_count();
                assert!(r.len() <= size * size, "seed {seed}");
                let v = check_response_pattern(&after, &r, CheckLimits::default()).unwrap();
                assert!(v.is_terminating(), "seed {seed}: {r}");
                built += 1;
            }
            Err(ResponseError::Refuted(_)) => {
                assert!(!truth);
                refuted += 1;
            }
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(built > 30 && refuted > 30, "built {built}, refuted {refuted}");
}
