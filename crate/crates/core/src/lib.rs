pub mod agents;
pub mod analysis;
pub mod game;
pub mod gateway;
pub mod points;
pub mod runner;
pub mod report;
pub mod cli;
