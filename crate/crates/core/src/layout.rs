//! Layout documents: trees of named nodes with absolute frames in logical
//! pixels. Every element is scored as its axis-aligned bounding rectangle.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{ConversionError, DeviceProfile};
use crate::model::PhysicalSize;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("malformed layout at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("duplicate node id \"{id}\" at `{path}` (first used at `{first}`)")]
    DuplicateId { id: String, path: String, first: String },
    #[error("invalid node at `{path}`: {reason}")]
    InvalidNode { path: String, reason: String },
    #[error("invalid name pattern {pattern:?}: {message}")]
    InvalidGlob { pattern: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    Frame,
    Group,
    Rectangle,
    Ellipse,
    Text,
    Component,
    Instance,
    Vector,
    Other,
}

/// Absolute axis-aligned rectangle in logical pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutNode {
    pub id: String,
    pub name: String,
    #[serde(rename = "type")]
    pub node_type: NodeType,
    pub frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tappable: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<LayoutNode>,
}

impl LayoutNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Pre-order traversal including `self`.
    pub fn descendants(&self) -> impl Iterator<Item = &LayoutNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDocument {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_device: Option<String>,
    pub root: LayoutNode,
}

impl LayoutDocument {
    pub fn nodes(&self) -> impl Iterator<Item = &LayoutNode> {
        self.root.descendants()
    }

    pub fn node(&self, id: &str) -> Option<&LayoutNode> {
        self.nodes().find(|n| n.id == id)
    }
}

/// Parses and validates a layout document from JSON text.
pub fn parse_document(source: &[u8]) -> Result<LayoutDocument, LayoutError> {
    let mut de = serde_json::Deserializer::from_slice(source);
    let doc: LayoutDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        LayoutError::Parse {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    de.end().map_err(|e| LayoutError::Parse {
        path: ".".into(),
        message: e.to_string(),
    })?;
    validate(&doc)?;
    Ok(doc)
}

/// Same as [`parse_document`] for an already-decoded JSON value.
pub fn document_from_value(value: serde_json::Value) -> Result<LayoutDocument, LayoutError> {
    let doc: LayoutDocument = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        LayoutError::Parse {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    validate(&doc)?;
    Ok(doc)
}

fn validate(doc: &LayoutDocument) -> Result<(), LayoutError> {
    if doc.root.node_type != NodeType::Frame {
        return Err(LayoutError::InvalidNode {
            path: "root".into(),
            reason: "root node must be of type \"frame\"".into(),
        });
    }
    let mut seen = HashMap::new();
    validate_node(&doc.root, "root".to_string(), &mut seen)
}

fn validate_node(
    node: &LayoutNode,
    path: String,
    seen: &mut HashMap<String, String>,
) -> Result<(), LayoutError> {
    let f = &node.frame;
    if ![f.x, f.y, f.width, f.height].iter().all(|v| v.is_finite()) {
        return Err(LayoutError::InvalidNode {
            path,
            reason: format!("frame of \"{}\" has non-finite values", node.id),
        });
    }
    if f.width < 0.0 || f.height < 0.0 {
        return Err(LayoutError::InvalidNode {
            path,
            reason: format!(
                "frame of \"{}\" has negative size {} x {}",
                node.id, f.width, f.height
            ),
        });
    }
    if let Some(first) = seen.get(&node.id) {
        return Err(LayoutError::DuplicateId {
            id: node.id.clone(),
            path,
            first: first.clone(),
        });
    }
    seen.insert(node.id.clone(), path.clone());
    for (i, child) in node.children.iter().enumerate() {
        validate_node(child, format!("{path}.children[{i}]"), seen)?;
    }
    Ok(())
}

/// Which nodes of a document get scored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementSelection {
    /// Also score nodes that have children.
    pub include_containers: bool,
    /// Keep only nodes whose name matches this glob.
    pub name_glob: Option<String>,
    /// Keep only nodes flagged `tappable: true`.
    pub explicit_only: bool,
}

/// Picks the nodes to score, in depth-first document order.
///
/// An explicit `tappable` flag always wins. Otherwise a node is scored when
/// it has positive area, is a leaf (or containers are requested) and its
/// name matches the glob, if any.
pub fn select_elements<'a>(
    doc: &'a LayoutDocument,
    sel: &ElementSelection,
) -> Result<Vec<&'a LayoutNode>, LayoutError> {
    let pattern = sel
        .name_glob
        .as_deref()
        .map(|g| {
            glob::Pattern::new(g).map_err(|e| LayoutError::InvalidGlob {
                pattern: g.to_string(),
                message: e.to_string(),
            })
        })
        .transpose()?;

    Ok(doc
        .nodes()
        .filter(|node| match node.tappable {
            Some(flag) => flag,
            None if sel.explicit_only => false,
            None => {
                node.frame.area() > 0.0
                    && (node.is_leaf() || sel.include_containers)
                    && pattern.as_ref().map_or(true, |p| p.matches(&node.name))
            }
        })
        .collect())
}

/// Physical size of a node's bounding rectangle on the given device.
pub fn bounding_rect_mm(node: &LayoutNode, profile: &DeviceProfile) -> Result<PhysicalSize, ConversionError> {
    let w = profile.px_to_mm(node.frame.width)?;
    let h = profile.px_to_mm(node.frame.height)?;
    // Both values come out of a successful conversion, so they are finite and >= 0.
    Ok(PhysicalSize::new(w, h).expect("converted lengths are valid"))
}
