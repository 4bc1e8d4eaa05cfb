pub mod fd;
pub mod ode;
pub mod quadrature;

pub use ode::Dopri5;
pub use quadrature::{integrate, integrate_with_breaks, Estimate, Tolerance};
