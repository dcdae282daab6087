//! Equational rewriting: schemas, derivations, and normal-form passes.

pub mod derive;
pub mod macros;
pub mod passes;
pub mod schema;

pub use derive::{derive_eq, Derivation, ReplayError, SearchLimits, Step};

pub use passes::{
    beta_head, delta_sigma_purge, develop, diversification_failure, factors, is_beta_term,
    is_delta_sigma_less, is_developed, is_diversified_type, is_factorized, is_headed_factor,
    is_one_term, is_r_factorized, is_r_less, is_s_normal, r_normal, s_normal, PassError,
};

pub use schema::{
    apply_equation, applicable_steps, sample_lhs, schema_by_name, schema_names, schemas,
    Direction, RewriteError, SampleMode, Schema,
};
