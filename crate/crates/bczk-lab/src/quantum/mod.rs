//! Dense statevector toolkit: small-register simulation, two-outcome
//! measurement operators, the measure-and-reflect rewinding amplifier, and
//! the adaptive cloning-oracle attack.

pub mod amplifier;
pub mod circuit;
pub mod cloning;
pub mod measure;
pub mod state;

pub use amplifier::{AmplifierProfile, RewindAmplifier};
pub use circuit::{Circuit, Gate};
pub use cloning::{
    closed_form_delta, cloning_attack, AttackOutcome, AttackTrace, ClassicalPredicate,
};
pub use measure::{apply_measure, MeasurementOp};
pub use state::StateVector;
