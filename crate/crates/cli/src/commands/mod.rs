pub mod build_graphs;
pub mod evaluate;
pub mod predict;
pub mod prepare;
pub mod synth;
pub mod train;
