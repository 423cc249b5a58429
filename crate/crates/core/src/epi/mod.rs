//! R(t) estimation and pandemic period segmentation.

mod periods;
mod rt;
mod smooth;

pub use periods::{
    slice_periods, slice_trajectory, PandemicPeriods, PeakRule, Period, PeriodConfig, PeriodFlags,
};
pub use rt::{estimate_rt, RtConfig, RtGrid, RtPosterior};
pub use smooth::smooth_cases;
