pub mod cma;
pub mod harness;
pub mod numerics;
pub mod restart;
pub mod saacm;
pub mod surrogate;
pub mod testbed;
