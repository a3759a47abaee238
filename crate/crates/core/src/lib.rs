pub mod cli;
pub mod game;
pub mod nccm;
pub mod risk;
pub mod rng;
pub mod roots;
pub mod saito;
pub mod simulate;
pub mod stats;
