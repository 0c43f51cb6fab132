//! Session service for foldscope: an HTTP API over the engine, op-log
//! persistence, metrics reports and SVG export.

pub mod api;
pub mod error;
pub mod render;
pub mod report;
pub mod session;
pub mod store;

pub use api::{router, serve};
pub use error::ServiceError;
pub use render::{render_svg, SvgOptions};
pub use report::{metrics_report, MetricsReport, TargetHit};
pub use session::{replay, InsetPatch, OpOutcome, Session, SessionHeader, SessionOp, TaskRecord};
pub use store::{Store, DATA_DIR_ENV};
