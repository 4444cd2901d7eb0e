//! Explicit partially hyperbolic maps of the 3-torus with intermingled basins:
//! a glued-Kan skew product over a linear Anosov map, a DA surgery at the
//! saddle-node points and a vertical push, plus tools to validate their
//! properties and sample their basins.
//!
//! Map code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases are
//! the double-precision instances used by the drivers and the CLI.

pub mod basin;
pub mod certify;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod kan;
pub mod linalg;
pub mod render;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod smooth;
pub mod surgery;
pub mod torus;

pub use basin::{
    intermingle_report, measure_report, sweep_box3, sweep_raster, BasinRaster, BoxGrid, IntermingleReport, LabelPlane,
    MeasureReport, SliceKind, SliceSpec,
};
pub use certify::{
    scan_saddle_structure, validate_m, validate_r, volume_certificate, CertificateReport, EscapeReport, SaddleScan,
};
pub use dynamics::{
    classify_basin, cone_check, lyapunov_spectrum, unstable_disk_probe, BasinLabel, ClassifyParams, Label,
    LyapunovEstimate, ProbeReport,
};
pub use error::{Error, Result};
pub use export::{export_csv, export_kv, Export};
pub use kan::{make_profile, validate_p, FiberProfile, ProfileParams, SkewMap, Windows};
pub use render::{render_plane, render_ppm, Palette};
pub use report::{PropertyCheck, PropertyReport};
pub use surgery::{apply_stage, make_layered, DAParams, LayeredMap, PushParams, Stage};
pub use scalar::Real;
pub use torus::{normalize, torus_distance, AnosovBase, Chart, Point2, Point3};

pub type Point2d = Point2<f64>;
pub type Point3d = Point3<f64>;
pub type AnosovBase64 = AnosovBase<f64>;
pub type FiberProfile64 = FiberProfile<f64>;
pub type SkewMap64 = SkewMap<f64>;
pub type LayeredMap64 = LayeredMap<f64>;
