//! Numerical laboratory for the dissipation of contactomorphisms of the space
//! of cooriented contact elements over the torus `T^n`, `n` in {2, 3}.
//!
//! Points are pairs `(u, q)` with `u` a unit covector direction and `q` in
//! `T^n`; contact forms are `F(u, q) * sum u_i dq_i`. Maps are compositions of
//! closed-form primitives, differentiated with forward-mode jets.

pub mod algebra;
pub mod dissipation;
pub mod error;
pub mod form;
pub mod geometry;
pub mod jet;
pub mod maps;
pub mod shapes;
pub mod stats;

pub use algebra::{
    a_block, abelian_bar_s, abelian_growth_table, cyclic_reduce, eigen_moduli, free_growth,
    is_hyperbolic, is_periodic, s_value, ABlock, FreeAutomorphism, GroupWord, GrowthTable,
    IntMatrix,
};
pub use dissipation::{
    bound_check, chi_estimate, classify, lyapunov_estimate, r_sequence, refinement_delta,
    verify_bound, BoundCheck, ChiEstimate, DissipationReport, SamplingGrid, Thresholds, Verdict,
};
pub use error::{LabError, Result};
pub use form::{ContactForm, Wave};
pub use geometry::{
    eval_form, norm_of, sphere_grid, torus_grid, wrap, CEPoint, CotangentPoint, Direction,
    TorusPoint,
};
pub use jet::{jacobian, Jet, Scalar};
pub use maps::{ContactMap, Hamiltonian, Primitive, ShearAxis};
pub use shapes::{
    act, delta, displacement_estimate, duality_check, flat_shape, stable_norm, DirectionGrid,
    DisplacementEstimate, DualityReport, FlatMetric, StarDomain,
};
