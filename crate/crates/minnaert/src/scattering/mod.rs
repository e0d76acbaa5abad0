//! Scattering by the bubble: the scaled volume–boundary system, field
//! evaluation, the flux identity and the resolvent applied to sources.

mod medium;
mod resolvent;
mod solution;
mod system;

pub use medium::{IncidentField, IncidentKind, Medium};
pub use resolvent::{resolvent_apply, ResolventField, ResolventNormalization};
pub use solution::{
    check_flux_identity, energy_flux, eval_field, eval_scattered, solve_bubble, FluxCheck,
    ScatterSolution,
};
pub use system::{BubbleSystem, SolveDiagnostics, CONDITION_WARNING};
pub(crate) use system::characteristic_matrix;
