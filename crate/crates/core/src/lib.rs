//! Numerical toolkit for ADHM-type hyperkähler moment maps, their zero loci,
//! small F2 chain-complex computations, generating series and a lattice
//! vortex solver on the flat torus.

pub mod adhm;
pub mod error;
pub mod floer;
pub mod linalg;
pub mod moment;
pub mod optim;
pub mod series;
pub mod strata;
pub mod vortex;
pub mod zero_flow;

pub use error::{Error, Result};
