//! Random compositions of interval maps with critical intermittency.
//!
//! Good maps have full branches and repelling endpoints, bad maps fix the
//! shared critical point `c`. Composing them at random produces long laminar
//! phases near `c`, `0` and `1`; the stationary density is finite or not
//! depending on `theta`, the probability-weighted order of the bad maps.

pub mod bounds_oracle;
pub mod inducing;
pub mod map_kernel;
pub mod point;
pub mod random_system;
pub mod rng;
pub mod transfer_ulam;

pub use bounds_oracle::{BoundParameters, EnvelopeConstants};
pub use map_kernel::{
    BranchDescriptor, Condition, ConditionCheck, Family, KernelError, MapDescriptor, MapKind,
    Monotonicity, Side, ValidationReport,
};
pub use inducing::{CriticalQuadruple, InducingScheme, KacDiagnostic, ReturnTimeSample};
pub use point::{Anchor, Offset, Point};
pub use random_system::{OccupationStats, OrbitTrace, RandomSystem, Region, SystemError};
pub use rng::stream_rng;
pub use transfer_ulam::{DensityEstimate, Normalization, UlamOperator};
