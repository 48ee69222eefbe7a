//! Step functions, BMO and `A_{p1,p2}` characteristics, rearrangement.

pub mod characteristic;
pub mod interval;
pub mod rearrange;
pub mod step;

pub use characteristic::{
    ap_characteristic_continuous_1d, ap_characteristic_dyadic, ap_continuous_search, continuous_bmo_search,
    continuous_bmo_seminorm_1d, dyadic_bmo_seminorm, ApParams,
};
pub use interval::{IntervalMax, IntervalSearch};
pub use rearrange::{
    class_characteristic, embed_ap, embed_ap_1d, embed_bmo, embed_bmo_1d, lens_rearrangement, membership_in_class,
    monotone_rearrangement, monotone_rearrangement_ordered, ClassMembership, Order,
};
pub use step::{DyadicStepFunction, StepFunction1D, StepValue, MAX_LOG2_CELLS};
