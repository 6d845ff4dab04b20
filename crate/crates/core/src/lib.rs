pub mod color;
pub mod embedding;
pub mod generator;
pub mod instance;
pub mod lists;
pub mod oracle;
pub mod solver;
pub mod structure;
pub mod sweep;
pub mod verifiers;
