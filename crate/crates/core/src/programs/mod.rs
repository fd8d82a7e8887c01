//! Ready-made solvers: greatest common divisor, all-pairs shortest paths,
//! and Levenshtein distance on top of a variable assignment solver.

pub mod gcd;
pub mod lev;
pub mod shp;

pub use gcd::gcd_program;
pub use lev::{
    assignment_solver, levenshtein_program, resolve, Assignment, LevFact, LevKey, LevenshteinGoal, Operand,
    Rhs, SymbolGenerator,
};
pub use shp::{primitive_paths, shortest_path_program, Edge, GraphFact, GraphKey, Path};
