//! Strichartz admissibility, the linear Schrödinger group on radial data in
//! `H³` and small-data power NLS.

pub mod dst;
pub mod duhamel;
pub mod strichartz;

pub use dst::SineBasis;
pub use duhamel::{
    duhamel_solve, duhamel_solve_in, first_order_iterate, linear_propagate, linear_propagate_in, scattering_residual,
    scattering_tail, NlsOptions, NlsRun, NormSeries, NormsRecord, ScatteringResidual, WindowStat, YgammaNorm,
};
pub use strichartz::{
    exponents_for, is_admissible, parse_pairs, strichartz_quotient, ttstar_kernel_norms, ygamma_quotient, AdmissiblePair,
    StrichartzQuotient, TtStarNorms,
};
