//! Analytic gradients against central finite differences.

mod common;

const INSTANCES: u64 = 100;

#[test]
fn gcn_gradients_match_finite_differences() {
    for seed in 0..INSTANCES {
        if let Err(e) = common::gcn_gradient_instance(seed) {
            panic!("instance {seed}: {e}");
        }
    }
}

#[test]
fn mlp_gradients_match_finite_differences() {
    for seed in 0..INSTANCES {
        if let Err(e) = common::mlp_gradient_instance(seed) {
            panic!("instance {seed}: {e}");
        }
    }
}
