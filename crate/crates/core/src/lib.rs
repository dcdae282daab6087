//! Proof terms for linear equality logics, their matching-diagram semantics,
//! and equational rewriting toward normal forms.
//!
//! The library is organised in layers:
//!
//! * [`syntax`] defines variables, terms, relation symbols and formulae,
//!   together with renamings and occurrence bookkeeping.
//! * [`proofterm`] defines the six proof theories, arrow terms over them,
//!   and type inference for arrows.
//! * [`text`] provides the concrete grammar: parsing and canonical printing
//!   of terms, formulae and arrows.
//! * [`diagram`] interprets arrows as matchings between occurrence rows,
//!   with composition that discards and counts closed loops.
//! * [`rewrite`] holds the equation schemas of each theory, single-step
//!   rewriting at a position, derivations, and the normalisation passes.
//! * [`analysis`] builds on all of the above: deciding proof equality,
//!   comparing generality, diversification, maximal sequences, and the
//!   variable-extension adjunction.

pub mod analysis;
pub mod diagram;
pub mod proofterm;
pub mod rewrite;
pub mod syntax;
pub mod text;

pub use proofterm::Theory;
