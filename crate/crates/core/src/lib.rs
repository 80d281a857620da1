pub mod admissibility;
pub mod circuits;
pub mod cost;
pub mod eval;
pub mod mapreduce;
pub mod prover;
pub mod syntax;
pub mod testing;
pub mod workbench;
