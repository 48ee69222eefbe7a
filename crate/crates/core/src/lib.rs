//! Sharp norms of the monotonic rearrangement operator from dyadic classes
//! (BMO, `A_2`, `A_{p1,p2}`) to their continuous counterparts.
//!
//! The constants come from minimal α-extensions of lens domains
//! ([`geometry`]); [`spaces`] holds the step functions, characteristics and the
//! rearrangement itself; [`martingale`] the filtrations and the binary
//! refinement; [`witness`] the extremal functions that attain the constants.

pub mod error;
pub mod geometry;
pub mod martingale;
pub mod numeric;
pub mod spaces;
pub mod witness;

pub use error::{Error, Result};
pub use geometry::{Extension, Lens, Point2, Segment};
pub use martingale::{Filtration, MartingaleTrajectory};
pub use spaces::{ApParams, DyadicStepFunction, StepFunction1D};
pub use witness::{Falsification, WitnessConfig, WitnessReport};
