pub mod classical;
pub mod cli;
pub mod config;
pub mod intersection;
pub mod intlinalg;
pub mod jsonfmt;
pub mod series;
pub mod specfun;
pub mod triangulation;
