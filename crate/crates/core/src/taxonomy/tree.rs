use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{Rank, TaxonomyError};

static NEXT_GENERATION: AtomicU64 = AtomicU64::new(1);

/// Index of a node inside one [`ConceptTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One line of a taxonomy file, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub rank: Rank,
    pub parent: Option<String>,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TaxonomyNode {
    pub name: String,
    pub rank: Rank,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub aliases: Vec<String>,
}

/// Validated, immutable concept hierarchy.
///
/// Invariants (enforced by every constructor): a single root, acyclic parent
/// links, names and aliases unique under case folding, and every ranked node
/// strictly finer than its nearest ranked ancestor.
#[derive(Debug)]
pub struct ConceptTree {
    nodes: Vec<TaxonomyNode>,
    index: HashMap<String, NodeId>,
    root: NodeId,
    generation: u64,
}

fn fold(name: &str) -> String {
    name.trim().to_lowercase()
}

impl ConceptTree {
    /// Parses the tab-separated taxonomy format:
    /// `name<TAB>rank<TAB>parent<TAB>alias1|alias2`.
    ///
    /// The parent column is empty for the root; trailing columns may be
    /// omitted. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        Self::from_specs(parse_specs(text)?)
    }

    pub fn load_file(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path).map_err(|e| TaxonomyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn from_specs(specs: Vec<NodeSpec>) -> Result<Self, TaxonomyError> {
        if specs.is_empty() {
            return Err(TaxonomyError::Empty);
        }
        let mut index = HashMap::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let id = NodeId(i as u32);
            if spec.name.trim().is_empty() {
                return Err(TaxonomyError::Malformed {
                    line: i + 1,
                    message: "empty node name".into(),
                });
            }
            for key in std::iter::once(&spec.name).chain(spec.aliases.iter()) {
                if index.insert(fold(key), id).is_some() {
                    return Err(TaxonomyError::DuplicateName { name: key.clone() });
                }
            }
        }

        let mut nodes: Vec<TaxonomyNode> = specs
            .iter()
            .map(|s| TaxonomyNode {
                name: s.name.trim().to_string(),
                rank: s.rank,
                parent: None,
                children: Vec::new(),
                aliases: s.aliases.iter().map(|a| a.trim().to_string()).collect(),
            })
            .collect();

        let mut roots = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            match spec.parent.as_deref().map(str::trim).filter(|p| !p.is_empty()) {
                None => roots.push(NodeId(i as u32)),
                Some(p) => {
                    let parent = *index.get(&fold(p)).ok_or_else(|| TaxonomyError::UnknownParent {
                        node: spec.name.clone(),
                        parent: p.to_string(),
                    })?;
                    nodes[i].parent = Some(parent);
                }
            }
        }

        detect_cycle(&nodes)?;
        let root = match roots.as_slice() {
            [only] => *only,
            [] => unreachable!("an acyclic forest has at least one root"),
            many => {
                return Err(TaxonomyError::MultipleRoots {
                    roots: many.iter().map(|r| nodes[r.index()].name.clone()).collect(),
                })
            }
        };

        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                nodes[p.index()].children.push(NodeId(i as u32));
            }
        }

        let tree = ConceptTree {
            nodes,
            index,
            root,
            generation: NEXT_GENERATION.fetch_add(1, Ordering::Relaxed),
        };
        tree.check_ranks()?;
        Ok(tree)
    }

    fn check_ranks(&self) -> Result<(), TaxonomyError> {
        for id in self.ids() {
            let node = self.node(id);
            if !node.rank.is_ranked() {
                continue;
            }
            let ranked_ancestor = self
                .ancestors_or_self(id)
                .skip(1)
                .find(|a| self.node(*a).rank.is_ranked());
            if let Some(a) = ranked_ancestor {
                let anc = self.node(a);
                if !anc.rank.is_coarser_than(node.rank) {
                    return Err(TaxonomyError::RankInversion {
                        node: node.name.clone(),
                        rank: node.rank,
                        ancestor: anc.name.clone(),
                        ancestor_rank: anc.rank,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Identifies this particular loaded tree; reloading yields a new value.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(|i| NodeId(i as u32))
    }

    pub fn node(&self, id: NodeId) -> &TaxonomyNode {
        &self.nodes[id.index()]
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// Exact name or alias lookup, case-insensitive. No fuzzy matching.
    pub fn resolve(&self, name: &str) -> Result<NodeId, TaxonomyError> {
        let trimmed = name.trim();
        if trimmed.is_empty() || trimmed.contains(['\t', '\n', '\r']) {
            return Err(TaxonomyError::MalformedName { name: name.to_string() });
        }
        self.index
            .get(&fold(trimmed))
            .copied()
            .ok_or_else(|| TaxonomyError::NotFound { name: trimmed.to_string() })
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    /// Walks from `id` up to the root, starting with `id` itself.
    pub fn ancestors_or_self(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(id), move |n| self.parent(*n))
    }

    pub fn is_ancestor_or_self(&self, ancestor: NodeId, id: NodeId) -> bool {
        self.ancestors_or_self(id).any(|a| a == ancestor)
    }

    /// `id` and all of its transitive children, in preorder.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev().copied());
        }
        out
    }

    /// Label of `id` at `target` rank.
    ///
    /// Returns the ancestor-or-self holding exactly `target` when there is
    /// one. Otherwise coarsens: the deepest ranked ancestor-or-self whose
    /// rank is above `target` (for example a genus-level annotation asked
    /// for species yields the genus).
    pub fn rank_label(&self, id: NodeId, target: Rank) -> Result<NodeId, TaxonomyError> {
        if !target.is_ranked() {
            return Err(TaxonomyError::UnrankedTarget);
        }
        // Ranks only get coarser walking upward, so the first ranked node at
        // or above the target is either an exact hit or the nearest fallback.
        self.ancestors_or_self(id)
            .find(|a| self.node(*a).rank.is_coarser_or_equal(target))
            .ok_or_else(|| TaxonomyError::NoRank { node: self.name(id).to_string() })
    }

    pub fn rank_label_name(&self, id: NodeId, target: Rank) -> Result<&str, TaxonomyError> {
        self.rank_label(id, target).map(|n| self.name(n))
    }

    /// Round-trips to the text format accepted by [`ConceptTree::parse`].
    pub fn to_specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| NodeSpec {
                name: n.name.clone(),
                rank: n.rank,
                parent: n.parent.map(|p| self.name(p).to_string()),
                aliases: n.aliases.clone(),
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for spec in self.to_specs() {
            out.push_str(&spec.name);
            out.push('\t');
            out.push_str(spec.rank.as_str());
            out.push('\t');
            out.push_str(spec.parent.as_deref().unwrap_or(""));
            out.push('\t');
            out.push_str(&spec.aliases.join("|"));
            out.push('\n');
        }
        out
    }
}

fn detect_cycle(nodes: &[TaxonomyNode]) -> Result<(), TaxonomyError> {
    // 0 = unvisited, 1 = on the current walk, 2 = known to reach a root
    let mut state = vec![0u8; nodes.len()];
    for start in 0..nodes.len() {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match state[i] {
                2 => break,
                1 => return Err(TaxonomyError::Cycle { node: nodes[i].name.clone() }),
                _ => {
                    state[i] = 1;
                    path.push(i);
                    cur = nodes[i].parent.map(NodeId::index);
                }
            }
        }
        for i in path {
            state[i] = 2;
        }
    }
    Ok(())
}

pub fn parse_specs(text: &str) -> Result<Vec<NodeSpec>, TaxonomyError> {
    let mut specs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let name = cols.next().unwrap_or_default().trim().to_string();
        if name.is_empty() {
            return Err(TaxonomyError::Malformed { line: lineno + 1, message: "empty node name".into() });
        }
        let rank = cols
            .next()
            .unwrap_or_default()
            .parse::<Rank>()
            .map_err(|e| TaxonomyError::Malformed { line: lineno + 1, message: e.to_string() })?;
        let parent = cols.next().map(str::trim).filter(|p| !p.is_empty()).map(str::to_string);
        let aliases = cols
            .next()
            .map(|a| {
                a.split('|')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        if cols.next().is_some() {
            return Err(TaxonomyError::Malformed { line: lineno + 1, message: "too many columns".into() });
        }
        specs.push(NodeSpec { name, rank, parent, aliases });
    }
    Ok(specs)
}
