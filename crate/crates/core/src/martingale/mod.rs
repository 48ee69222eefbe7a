//! Finite filtrations, α-filtrations, α-martingales and binary refinement.

pub mod filtration;
pub mod refinement;

pub use filtration::{
    admissible_alphas, atom_averages, dyadic_filtration, first_violation, generate_martingale,
    is_alpha_filtration, membership_in_class_f, union_ratios, Atom, Filtration, MartingaleTrajectory,
};
pub use refinement::{binary_refinement, is_alpha_martingale_certified, Certificate};
