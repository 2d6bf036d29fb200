//! Behavioral process mining for human-computer interaction logs.
//!
//! The pipeline simulates low-level interaction logs, translates them into
//! high-level events, discovers a behavioral Petri net, replays user and
//! optimal traces against it and derives ranked recommendations that move a
//! user toward a known optimal interaction strategy.

pub mod event_model;
pub mod petri_net;
pub mod translator;
pub mod discovery;
pub mod replay;
pub mod simulator;
pub mod recommender;
pub mod pipeline;
