pub mod generate;
pub mod render;
pub mod solve;
pub mod validate;
