pub mod action;
pub mod bench;
pub mod entity;
pub mod error;
pub mod grid;
pub mod material;
pub mod math;
pub mod meshing;
pub mod physics;
pub mod render;
pub mod rng;
pub mod scenarios;
pub mod vec_env;
