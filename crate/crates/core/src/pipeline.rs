//! The full path from a parsed model and a mapping config to a scene.

use crate::layout::{layout, Layout, LayoutError};
use crate::mapping::{resolve, MappingConfig, Resolution, ResolveError};
use crate::model::ProcessModel;
use crate::scene::{build_scene, SceneError, SceneGraph, SceneOptions};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Intermediate results of [`render_all`].
#[derive(Debug, Clone)]
pub struct Rendered {
    pub resolution: Resolution,
    pub layout: Layout,
    pub scene: SceneGraph,
}

pub fn render_all(
    model: &ProcessModel,
    config: &MappingConfig,
    options: &SceneOptions,
) -> Result<Rendered, RenderError> {
    let resolution = resolve(model, config)?;
    let layout = layout(model, &resolution)?;
    let scene = build_scene(model, &layout, config, options)?;
    Ok(Rendered {
        resolution,
        layout,
        scene,
    })
}

/// resolve, layout and build_scene in one call.
pub fn render(
    model: &ProcessModel,
    config: &MappingConfig,
    options: &SceneOptions,
) -> Result<SceneGraph, RenderError> {
    Ok(render_all(model, config, options)?.scene)
}
