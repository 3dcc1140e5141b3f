use std::collections::{HashSet, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ConceptTree, NodeSpec, Rank, TaxonomyError};

/// Wire record for one taxon. This is also the JSON body returned by
/// `GET <base>/taxa?name=<name>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonRecord {
    pub name: String,
    pub rank: Rank,
    pub parent: Option<String>,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub children: Vec<String>,
}

/// Name-lookup seam over a taxonomic authority.
pub trait TaxonomyProvider: Send + Sync {
    /// Case-insensitive name or alias lookup. Unknown names are
    /// [`TaxonomyError::NotFound`].
    fn lookup(&self, name: &str) -> Result<TaxonRecord, TaxonomyError>;

    fn resolve(&self, name: &str) -> Result<TaxonRecord, TaxonomyError> {
        self.lookup(name)
    }

    fn parent(&self, name: &str) -> Result<Option<TaxonRecord>, TaxonomyError> {
        match self.lookup(name)?.parent {
            Some(p) => self.lookup(&p).map(Some),
            None => Ok(None),
        }
    }

    fn children(&self, name: &str) -> Result<Vec<TaxonRecord>, TaxonomyError> {
        self.lookup(name)?.children.iter().map(|c| self.lookup(c)).collect()
    }
}

/// Provider backed by an in-memory tree.
#[derive(Debug, Clone)]
pub struct LocalProvider {
    tree: Arc<ConceptTree>,
}

impl LocalProvider {
    pub fn new(tree: Arc<ConceptTree>) -> Self {
        Self { tree }
    }

    pub fn tree(&self) -> &Arc<ConceptTree> {
        &self.tree
    }
}

pub fn record_for(tree: &ConceptTree, id: super::NodeId) -> TaxonRecord {
    let node = tree.node(id);
    TaxonRecord {
        name: node.name.clone(),
        rank: node.rank,
        parent: node.parent.map(|p| tree.name(p).to_string()),
        aliases: node.aliases.clone(),
        children: node.children.iter().map(|c| tree.name(*c).to_string()).collect(),
    }
}

impl TaxonomyProvider for LocalProvider {
    fn lookup(&self, name: &str) -> Result<TaxonRecord, TaxonomyError> {
        let id = self.tree.resolve(name)?;
        Ok(record_for(&self.tree, id))
    }
}

/// HTTP client for a WoRMS-style name lookup service.
pub struct RemoteProvider {
    base: String,
    agent: ureq::Agent,
}

impl RemoteProvider {
    pub fn new(base: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .build();
        Self { base: base.into().trim_end_matches('/').to_string(), agent: config.into() }
    }
}

impl TaxonomyProvider for RemoteProvider {
    fn lookup(&self, name: &str) -> Result<TaxonRecord, TaxonomyError> {
        let url = format!("{}/taxa", self.base);
        let mut resp = self
            .agent
            .get(&url)
            .query("name", name)
            .call()
            .map_err(|e| TaxonomyError::Provider(format!("{url}: {e}")))?;
        match resp.status().as_u16() {
            200 => resp
                .body_mut()
                .read_json::<TaxonRecord>()
                .map_err(|e| TaxonomyError::Provider(format!("{url}: bad body: {e}"))),
            404 => Err(TaxonomyError::NotFound { name: name.trim().to_string() }),
            400 => Err(TaxonomyError::MalformedName { name: name.to_string() }),
            code => Err(TaxonomyError::Provider(format!("{url}: HTTP {code}"))),
        }
    }
}

/// Materializes the subtree under `root` by walking the provider breadth
/// first. The fetched root becomes the root of the resulting tree.
pub fn tree_from_provider(
    provider: &dyn TaxonomyProvider,
    root: &str,
) -> Result<ConceptTree, TaxonomyError> {
    let first = provider.lookup(root)?;
    let mut seen = HashSet::new();
    seen.insert(first.name.to_lowercase());
    let mut specs = Vec::new();
    let mut queue = VecDeque::from([(first, None::<String>)]);
    while let Some((rec, parent)) = queue.pop_front() {
        for child in &rec.children {
            let child_rec = provider.lookup(child)?;
            if !seen.insert(child_rec.name.to_lowercase()) {
                return Err(TaxonomyError::Cycle { node: child_rec.name });
            }
            queue.push_back((child_rec, Some(rec.name.clone())));
        }
        specs.push(NodeSpec { name: rec.name, rank: rec.rank, parent, aliases: rec.aliases });
    }
    ConceptTree::from_specs(specs)
}
