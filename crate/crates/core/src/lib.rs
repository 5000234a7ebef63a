#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod dynamics;
pub mod emission;
pub mod metrics;
pub mod network;
pub mod routing;
pub mod sim;
pub mod state;
