//! Volterra-type operators `T_g` and `S_g` on the weighted spaces `H∞_α` of
//! analytic functions on the unit disk, with numerical boundedness and
//! compactness criteria and empirical cross-checks.

pub mod criteria;
pub mod estimation;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod sector;
pub mod series;
pub mod spaces;
pub mod symbols;

pub use num_complex::Complex64;

pub use criteria::{
    classify, ClassifyConfig, CriterionKind, CriterionReport, CriterionVerdict, LadderConfig,
    RadialLadder, Verdict, VerdictTag,
};
pub use estimation::{ProbeTrace, TestBattery, UpperBound};
pub use operators::{apply, apply_sg, apply_tg, product_rule_residual, OperatorKind};
pub use quadrature::{QuadratureConfig, RadialPoint, RadialQuadrature};
pub use sector::{SectorMap, SectorParams};
pub use series::{FunctionHandle, Sample, SeriesError, TaylorSeries};
pub use spaces::{DiskGrid, SpacePair, SupEstimate};
pub use symbols::{GroundTruthRow, Hypothesis, SymbolMetadata, SymbolSpec};
