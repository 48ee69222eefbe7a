//! Lens domains, higher segments and minimal α-extensions.

pub mod envelope;
pub mod extension;
pub mod lens;

pub use envelope::{
    extension_monotone_in_alpha, higher_segments_at, is_alpha_extension, numeric_envelope, Envelope,
    EnvelopeGrid, HigherSegment,
};
pub use extension::{
    epigraph_threshold, eq2_residual, min_extension, min_extension_a2, min_extension_parabolic,
    min_extension_power, solve_eq2, Extension,
};
pub use lens::{
    affine_orbit_parabolic, affine_orbit_power, is_higher_segment, segment_in_lens, Lens, Point2, Segment,
    BOUNDARY_TOL,
};
