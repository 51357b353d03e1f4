//! Data-level parallel virtual screening.
//!
//! A docking engine (the built-in mock kernel or an external command such as
//! AutoDock Vina) is treated as a black box that turns one receptor and one
//! ligand into a multi-model `out.pdbqt`. Throughput comes from running many
//! such jobs at once, each with its own core allotment.

pub mod pdbqt;
pub mod dockkern;
pub mod scheduler;
pub mod executor;
pub mod screenpipe;
pub mod bench;
pub mod synthetic;
