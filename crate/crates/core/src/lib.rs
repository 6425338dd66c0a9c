//! Link-level simulation of space-time coded MIMO transmission over
//! temporally and spatially correlated Rayleigh fading.

pub mod mathcore;
pub mod stcodes;
pub mod designmetrics;
pub mod channel;
pub mod chanest;
pub mod demod;
pub mod harness;
