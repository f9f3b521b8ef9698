//! Two-robot rendezvous with external lights: a simulator and bounded verifier
//! for ℒ-algorithms under adversarial schedulers.

pub mod algorithms;
pub mod cli;
pub mod engine;
pub mod model;
pub mod par;
pub mod schedules;
pub mod verify;
