pub mod common;
pub mod emission;
pub mod lens;
pub mod thermal;
pub mod trap;
