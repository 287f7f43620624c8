//! Process models rendered as 3D scenes.
//!
//! The pipeline reads `pm3d-1` XML into a [`model::ProcessModel`], resolves a
//! [`mapping::MappingConfig`] into per-node offsets, scales and face labels,
//! lays the control flow out in 3D and emits a [`scene::SceneGraph`].
//!
//! ```
//! use pm3d_core::{mapping::MappingConfig, parser, pipeline, samples, scene::SceneOptions};
//!
//! let (model, _) = parser::parse(samples::BLOOD_ANALYSIS).unwrap();
//! let config = MappingConfig::parse(samples::FIVE_ATTRIBUTE_CONFIG).unwrap();
//! let scene = pipeline::render(&model, &config, &SceneOptions::default()).unwrap();
//! assert!(scene.legend.is_some());
//! ```

pub mod bench;
pub mod flow;
pub mod generator;
pub mod layout;
pub mod mapping;
pub mod model;
pub mod parser;
pub mod pipeline;
pub mod samples;
pub mod scene;
