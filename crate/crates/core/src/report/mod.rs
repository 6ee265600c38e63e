//! Run manifests, transcript validation and SVG rendering.

pub mod manifest;
pub mod svg;
pub mod validate;

pub use manifest::{GatewayMode, GatewaySettings, ManifestError, RunManifest};
pub use validate::{check_transcript, validate_batch, Violation, ViolationKind};
