pub mod campaign;
pub mod exec;
