//! Physics estimators over tag streams.

mod cauchy_schwarz;
mod fit;
mod g2;
mod heralded;
mod hom;
mod rates;

pub use cauchy_schwarz::{auto_g2_zero, cauchy_schwarz_r, AutoG2, CauchySchwarz};
pub use fit::{fit_gaussian_dip, linear_fit, HomFit, LinearFit};
pub use g2::{cross_g2, G2Result};
pub use heralded::{heralded_g2, HeraldedG2};
pub use hom::{hom_scan, theory_overlay, HomScanResult, MIN_FOURFOLD_EVENTS};
pub use rates::{rate_scaling, RateRow, RateScaling};
