#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod certificate;
pub mod cli;
pub mod error;
pub mod families;
pub mod flow;
pub mod graph;
pub mod l1cut;
pub mod linalg;
pub mod rational;
pub mod suite;
pub mod theta;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{FiniteMetric, MetricGraph, Point};
pub use rational::Rational;
