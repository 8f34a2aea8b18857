//! JSON documents and SVG figures.

pub mod json;
pub mod svg;

pub use json::{load_json, save_json, CircleRecord, Metadata, PatternDocument, VertexRecord, SCHEMA_VERSION};
pub use svg::{render_svg, RenderOptions};
