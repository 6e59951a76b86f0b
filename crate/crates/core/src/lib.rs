pub mod dpg;
pub mod error;
pub mod layerpot;
pub mod mesh;
pub mod polyspace;
pub mod problems;
pub mod reference;
pub mod study;
pub mod trialtest;

pub use dpg::{DpgOptions, DpgSystem, ErrorReport, L2Errors, Load, Reference};
pub use error::{Error, Result};
pub use layerpot::QuadOptions;
pub use mesh::{BrokenTrace, CurveKind, Element, Mesh, Point};
pub use polyspace::{gauss_rule, LocalPoly, PwPoly, PwPolySpace, QuadRule};
pub use trialtest::{
    eval_b, v_inner, BrokenPoly, TestFunction, Theta, TrialFunction, TrialIndex, TrialLayout,
};
pub use study::{ConvergenceRow, CurveSpec, MarkingMeasure, Mode, StudyConfig};
