pub mod cx;
pub mod envelope_x;
pub mod envelope_xprime;
pub mod error;
pub mod limit;
pub mod mirror;
pub mod rect_combinatorics;
pub mod sampling;
pub mod theta_core;
