//! Cross-language JVM compiler fuzzing: program model, generator, mutators,
//! renderers, compile harness, minimizer and campaign driver.

pub mod campaign;
pub mod generator;
pub mod harness;
pub mod ir;
pub mod minimizer;
pub mod mutators;
pub mod override_rules;
pub mod render;
pub mod rng;
