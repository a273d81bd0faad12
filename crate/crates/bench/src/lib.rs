//! Fixtures shared by the benchmarks.

use critlab_core::{MapDescriptor, RandomSystem};

/// `{T4, T2}` with `P(T2) = p2`.
pub fn logistic_pair(p2: f64) -> RandomSystem {
    RandomSystem::logistic_pair(p2).expect("valid probabilities")
}

/// Order-one bad map mixed with `T4`.
pub fn mobius_mix() -> RandomSystem {
    RandomSystem::new(
        vec![MapDescriptor::logistic4(), MapDescriptor::mobius(0.5).expect("valid slope")],
        vec![0.6, 0.4],
    )
    .expect("valid system")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        assert_eq!(super::logistic_pair(0.5).theta(), 1.0);
        assert_eq!(super::mobius_mix().ell_max(), 1.0);
    }
}
