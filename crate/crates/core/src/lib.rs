pub mod exterior;
pub mod linalg;
pub mod scalar;
pub mod classify;
pub mod acs;
pub mod random;
pub mod formlang;
pub mod field;
pub mod g2;
pub mod cli;
