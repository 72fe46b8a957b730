pub mod cli;
pub mod detect;
pub mod egraph;
pub mod gen;
pub mod model;
pub mod rewrite;
pub mod rules;
pub mod symbol;
