//! CODATA values, SI units.

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const G_N: f64 = 9.806_65;
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
