pub mod algstar;
pub mod cli;
pub mod coeff;
pub mod expr;
pub mod glue;
pub mod kontsevich;
pub mod lie;
pub mod linalg;
pub mod orbit;
pub mod pbw;
pub mod sample;
pub mod weyl;
