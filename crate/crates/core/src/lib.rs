//! Collect social-media posts, build interaction networks, code their text,
//! and follow how the network evolves day by day.

pub mod animate;
pub mod coding;
pub mod ingest;
pub mod network;
pub mod paths;
pub mod pipeline;
pub mod temporal;
