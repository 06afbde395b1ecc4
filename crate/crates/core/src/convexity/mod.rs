//! Variational tools for the convexity of `d_S`: Jacobi fields, the index
//! form, the concavity witness along boundary segments, the signed distance
//! with its second fundamental form, and sampled convexity reports.

mod jacobi;
mod report;
mod signed;
mod witness;

pub use jacobi::{index_form, jacobi_field, PathField, PathFrame, VariationData};
pub use report::{convexity_report, ConvexityReport, GeodesicProfile, ReportOptions, ReportRegion, ReportTarget};
pub use signed::{second_fundamental_form, SecondFundamentalForm, SignedDistanceField};
pub use witness::{concavity_witness, ConcavityWitness, WitnessOptions};
