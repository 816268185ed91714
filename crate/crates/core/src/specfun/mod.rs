//! Special functions for the near-wall solution: Kummer's confluent
//! hypergeometric functions and order-1 Hankel functions.

mod bessel;
mod dd;
mod gamma;
mod kummer;

pub use bessel::{bessel_jy0, bessel_jy1, hankel1_order1, hankel2_order1};
pub use gamma::{digamma, gamma, rgamma, EULER_GAMMA};
pub use kummer::{kummer_m, kummer_u, T_SWITCH};
