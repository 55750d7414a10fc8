pub mod analysis;
pub mod factorize;
pub mod plan;
pub mod simulate;
pub mod tiles;
