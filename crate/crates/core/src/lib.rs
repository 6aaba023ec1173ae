//! p-adic point counting on curves over finite fields by lifting Frobenius
//! to local expansions at the ends and evaluating cup products as residues.

pub mod cli;
pub mod error;
pub(crate) mod fp;
pub mod frobenius;
pub mod laurent;
pub mod model;
pub mod oracle;
pub mod padic;
pub mod pairing;
pub mod planner;
pub mod poly;
pub mod specfile;
pub mod zeta;

pub use error::Error;
