//! The tree projection `F_1`, skeleton fixing, and composition with a
//! bit-fixing extractor.

mod extract;
mod f1;
mod fixing;
mod params;

pub use extract::*;
pub use f1::{f1_code, for_each_lone_parent, lca_level, project_f1, project_f1_reference};
pub use fixing::{
    decompose_source, enumerate_fixings, image_restriction, skeleton_fixing, FixingCase,
    FixingOutcome, FixingPolicy, FixingTree, StepUpDecomposition, DEFAULT_DELTA_HAT,
};
pub use params::{build_params, StepUpParams};
