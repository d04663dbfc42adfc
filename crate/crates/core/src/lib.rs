//! LoRaWAN modelling toolkit: time-on-air and EU868 capacity, single-gateway
//! collision simulation, free-space distance estimation, generic-key frame
//! decoding and gateway trace analytics.

pub mod cli;
pub mod codec;
pub mod pathloss;
pub mod radio;
pub mod sim;
pub mod trace;
