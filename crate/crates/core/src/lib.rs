//! Headless analytics for urban design review.
//!
//! The crate measures landmark visibility and candidate-building shading by
//! counting pixels in offscreen mask renders, searches for observation
//! viewpoints that keep a target building in clear view, classifies two-hand
//! gesture traces into scene edits, and sweeps design variations of a
//! candidate building into a report that a parallel-coordinates front-end can
//! plot.
//!
//! Coordinates are right-handed and z-up; the ground is the XY plane.

pub mod config;
pub mod error;
pub mod geometry;
pub mod gestures;
pub mod raster;
pub mod scene;
pub mod solar;
pub mod sweep;
pub mod viewopt;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use geometry::{Cuboid, Plane, Point2, Point3, Polygon2};
pub use scene::{Building, BuildingRole, GeoOrigin, Scene};
