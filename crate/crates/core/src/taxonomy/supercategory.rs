use std::collections::HashMap;
use std::path::Path;

use super::{ConceptTree, NodeId, TaxonomyError};

/// Coarse labels defined as unions of taxonomy subtrees, e.g. `urchin`
/// covering everything under Echinoidea.
///
/// File format: one supercategory per line, `label<TAB>root1|root2|...`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupercategoryMap {
    pub entries: Vec<(String, Vec<String>)>,
}

impl SupercategoryMap {
    pub fn new(entries: Vec<(String, Vec<String>)>) -> Self {
        Self { entries }
    }

    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, roots) = line.split_once('\t').ok_or_else(|| TaxonomyError::Malformed {
                line: lineno + 1,
                message: "expected label<TAB>roots".into(),
            })?;
            let roots: Vec<String> = roots
                .split('|')
                .map(str::trim)
                .filter(|r| !r.is_empty())
                .map(str::to_string)
                .collect();
            if label.trim().is_empty() || roots.is_empty() {
                return Err(TaxonomyError::Malformed {
                    line: lineno + 1,
                    message: "supercategory needs a label and at least one root".into(),
                });
            }
            entries.push((label.trim().to_string(), roots));
        }
        Ok(Self { entries })
    }

    pub fn load_file(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path).map_err(|e| TaxonomyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Resolves every root against `tree` and rejects any node that would
    /// fall under two different supercategories.
    pub fn validate(&self, tree: &ConceptTree) -> Result<ValidatedSupercategories, TaxonomyError> {
        let mut root_label: HashMap<NodeId, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(self.entries.len());
        for (label, roots) in &self.entries {
            // Repeated labels extend the same supercategory.
            let label_idx = match labels.iter().position(|l| l == label) {
                Some(i) => i,
                None => {
                    labels.push(label.clone());
                    labels.len() - 1
                }
            };
            for root in roots {
                let id = tree.resolve(root).map_err(|e| {
                    TaxonomyError::Config(format!("supercategory {label:?}: root {root:?}: {e}"))
                })?;
                if let Some(prev) = root_label.insert(id, label_idx) {
                    if prev != label_idx {
                        return Err(overlap(tree, id, &labels[prev], label));
                    }
                }
            }
        }
        for (&root, &label_idx) in &root_label {
            for anc in tree.ancestors_or_self(root).skip(1) {
                if let Some(&other) = root_label.get(&anc) {
                    if other != label_idx {
                        return Err(overlap(tree, root, &labels[other], &labels[label_idx]));
                    }
                }
            }
        }
        Ok(ValidatedSupercategories { generation: tree.generation(), labels, root_label })
    }
}

fn overlap(tree: &ConceptTree, node: NodeId, a: &str, b: &str) -> TaxonomyError {
    TaxonomyError::Config(format!(
        "node {:?} falls under both supercategories {a:?} and {b:?}",
        tree.name(node)
    ))
}

/// A [`SupercategoryMap`] checked against one particular tree.
#[derive(Debug, Clone)]
pub struct ValidatedSupercategories {
    generation: u64,
    labels: Vec<String>,
    root_label: HashMap<NodeId, usize>,
}

impl ValidatedSupercategories {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Supercategory covering `node`, if any root in the map is an
/// ancestor-or-self of it.
pub fn supercategory_of<'m>(
    tree: &ConceptTree,
    map: &'m ValidatedSupercategories,
    node: NodeId,
) -> Result<Option<&'m str>, TaxonomyError> {
    if map.generation != tree.generation() {
        return Err(TaxonomyError::Config(
            "supercategory map was validated against a different taxonomy".into(),
        ));
    }
    Ok(tree
        .ancestors_or_self(node)
        .find_map(|a| map.root_label.get(&a))
        .map(|&i| map.labels[i].as_str()))
}
