//! Workbench for the greedy online transportation algorithm under capacity
//! augmentation: simulation, exact offline optima, response-graph analysis
//! and the tight lower-bound family.

pub mod analysis;
pub mod experiment;
pub mod greedy;
pub mod instance;
pub mod metric;
pub mod num;
pub mod opt;
pub mod pipeline;
