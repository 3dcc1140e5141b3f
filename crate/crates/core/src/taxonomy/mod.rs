//! Hierarchical concept tree: loading, name resolution, rank back-propagation
//! and supercategory rollup.

mod provider;
mod rank;
mod supercategory;
mod tree;

use std::path::Path;
use std::sync::Arc;

use parking_lot::RwLock;

pub use provider::{record_for, tree_from_provider, LocalProvider, RemoteProvider, TaxonRecord, TaxonomyProvider};
pub use rank::{Rank, UnknownRank};
pub use supercategory::{supercategory_of, SupercategoryMap, ValidatedSupercategories};
pub use tree::{parse_specs, ConceptTree, NodeId, NodeSpec, TaxonomyNode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("taxonomy has no nodes")]
    Empty,
    #[error("duplicate concept name or alias {name:?}")]
    DuplicateName { name: String },
    #[error("node {node:?} names unknown parent {parent:?}")]
    UnknownParent { node: String, parent: String },
    #[error("taxonomy has several roots: {roots:?}")]
    MultipleRoots { roots: Vec<String> },
    #[error("parent links form a cycle through {node:?}")]
    Cycle { node: String },
    #[error("{node:?} ({rank}) is not finer than its ancestor {ancestor:?} ({ancestor_rank})")]
    RankInversion { node: String, rank: Rank, ancestor: String, ancestor_rank: Rank },
    #[error("concept {name:?} not found")]
    NotFound { name: String },
    #[error("malformed concept name {name:?}")]
    MalformedName { name: String },
    #[error("{node:?} has no ranked ancestor")]
    NoRank { node: String },
    #[error("rank queries need a biological rank, not `unranked`")]
    UnrankedTarget,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("taxonomy provider: {0}")]
    Provider(String),
}

/// Where a tree comes from.
pub enum TaxonomySource<'a> {
    File(&'a Path),
    Text(&'a str),
    /// Crawl a provider starting at the named root.
    Provider { provider: &'a dyn TaxonomyProvider, root: &'a str },
}

pub fn load_taxonomy(source: TaxonomySource<'_>) -> Result<ConceptTree, TaxonomyError> {
    match source {
        TaxonomySource::File(path) => ConceptTree::load_file(path),
        TaxonomySource::Text(text) => ConceptTree::parse(text),
        TaxonomySource::Provider { provider, root } => tree_from_provider(provider, root),
    }
}

/// Current tree behind a lock; readers take an `Arc` snapshot and reloads
/// swap the whole tree at once.
#[derive(Debug, Clone)]
pub struct SharedTaxonomy {
    inner: Arc<RwLock<Arc<ConceptTree>>>,
}

impl SharedTaxonomy {
    pub fn new(tree: ConceptTree) -> Self {
        Self { inner: Arc::new(RwLock::new(Arc::new(tree))) }
    }

    pub fn current(&self) -> Arc<ConceptTree> {
        self.inner.read().clone()
    }

    pub fn replace(&self, tree: ConceptTree) -> Arc<ConceptTree> {
        std::mem::replace(&mut *self.inner.write(), Arc::new(tree))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    const FIXTURE: &str = include_str!("../../fixtures/taxonomy.tsv");
    const SUPERCATS: &str = include_str!("../../fixtures/supercategories.tsv");

    fn fixture() -> ConceptTree {
        ConceptTree::parse(FIXTURE).unwrap()
    }

    fn names(tree: &ConceptTree, ids: &[NodeId]) -> HashSet<String> {
        ids.iter().map(|i| tree.name(*i).to_string()).collect()
    }

    #[test]
    fn single_node_tree() {
        let tree = ConceptTree::parse("object\tunranked\t\t\n").unwrap();
        assert_eq!(tree.len(), 1);
        assert_eq!(tree.name(tree.root()), "object");
    }

    #[test]
    fn fixture_species_chain_resolves() {
        let tree = fixture();
        let sp = tree.resolve("Bathochordaeus mcnutti").unwrap();
        let chain: Vec<&str> = tree.ancestors_or_self(sp).map(|a| tree.name(a)).collect();
        assert_eq!(
            chain,
            [
                "Bathochordaeus mcnutti",
                "Bathochordaeus",
                "Oikopleuridae",
                "Copelata",
                "Appendicularia",
                "Tunicata",
                "Chordata",
                "Animalia"
            ]
        );
    }

    #[test]
    fn parent_naming_a_descendant_is_a_cycle() {
        let text = "root\tkingdom\t\nA\tphylum\tB\nB\tclass\tA\n";
        assert!(matches!(ConceptTree::parse(text), Err(TaxonomyError::Cycle { .. })));
        let selfloop = "root\tkingdom\t\nA\tphylum\tA\n";
        assert_eq!(ConceptTree::parse(selfloop).unwrap_err(), TaxonomyError::Cycle { node: "A".into() });
    }

    #[test]
    fn load_errors_name_the_node() {
        assert_eq!(
            ConceptTree::parse("a\tkingdom\t\nA\tphylum\ta\n").unwrap_err(),
            TaxonomyError::DuplicateName { name: "A".into() }
        );
        assert_eq!(
            ConceptTree::parse("a\tkingdom\t\nb\tphylum\t\n").unwrap_err(),
            TaxonomyError::MultipleRoots { roots: vec!["a".into(), "b".into()] }
        );
        assert!(matches!(
            ConceptTree::parse("a\tgenus\t\nb\tfamily\ta\n").unwrap_err(),
            TaxonomyError::RankInversion { node, .. } if node == "b"
        ));
        assert!(matches!(
            ConceptTree::parse("a\tgenus\t\nb\tgenus\ta\n").unwrap_err(),
            TaxonomyError::RankInversion { .. }
        ));
        assert_eq!(ConceptTree::parse("# nothing\n\n").unwrap_err(), TaxonomyError::Empty);
        assert!(matches!(
            ConceptTree::parse("a\tkingdom\tnope\n").unwrap_err(),
            TaxonomyError::UnknownParent { .. }
        ));
        assert!(matches!(
            ConceptTree::parse("a\ttribe\t\n").unwrap_err(),
            TaxonomyError::Malformed { line: 1, .. }
        ));
    }

    #[test]
    fn alias_collides_with_name_across_nodes() {
        let text = "a\tkingdom\t\tjelly\nJelly\tphylum\ta\n";
        assert_eq!(ConceptTree::parse(text).unwrap_err(), TaxonomyError::DuplicateName { name: "Jelly".into() });
    }

    #[test]
    fn unranked_nodes_may_sit_between_ranks() {
        // Medusae is unranked between a class and an order in the fixture.
        let tree = fixture();
        let medusae = tree.resolve("Medusae").unwrap();
        assert_eq!(tree.node(medusae).rank, Rank::Unranked);
        // ... but ranks skipping an unranked node must still be ordered.
        let bad = "a\tclass\t\nm\tunranked\ta\nb\tphylum\tm\n";
        assert!(matches!(ConceptTree::parse(bad), Err(TaxonomyError::RankInversion { .. })));
    }

    #[test]
    fn resolve_is_case_insensitive_and_strict() {
        let tree = fixture();
        let sp = tree.resolve("bathochordaeus mcnutti").unwrap();
        assert_eq!(tree.name(sp), "Bathochordaeus mcnutti");
        assert_eq!(tree.name(tree.resolve("jelly").unwrap()), "Medusae");
        assert_eq!(tree.name(tree.resolve("  JELLYFISH ").unwrap()), "Medusae");
        assert_eq!(
            tree.resolve("Nonexistus fakeus").unwrap_err(),
            TaxonomyError::NotFound { name: "Nonexistus fakeus".into() }
        );
        assert!(tree.resolve("Bathochordaeus mcnuti").is_err());
        assert!(matches!(tree.resolve("   "), Err(TaxonomyError::MalformedName { .. })));
        assert!(matches!(tree.resolve("a\tb"), Err(TaxonomyError::MalformedName { .. })));
    }

    #[test]
    fn descendants_examples() {
        let tree = fixture();
        let leaf = tree.resolve("Bathochordaeus mcnutti").unwrap();
        assert_eq!(tree.descendants(leaf), vec![leaf]);
        assert_eq!(tree.descendants(tree.root()).len(), tree.len());
        let genus = tree.resolve("Bathochordaeus").unwrap();
        assert_eq!(
            names(&tree, &tree.descendants(genus)),
            ["Bathochordaeus", "Bathochordaeus mcnutti", "Bathochordaeus stygius"]
                .into_iter()
                .map(String::from)
                .collect()
        );
    }

    #[test]
    fn rank_label_table() {
        let tree = fixture();
        let label = |n: &str, r: Rank| tree.rank_label_name(tree.resolve(n).unwrap(), r).unwrap().to_string();
        assert_eq!(label("Bathochordaeus mcnutti", Rank::Genus), "Bathochordaeus");
        assert_eq!(label("Bathochordaeus mcnutti", Rank::Species), "Bathochordaeus mcnutti");
        assert_eq!(label("Bathochordaeus", Rank::Species), "Bathochordaeus");
        assert_eq!(label("Bathochordaeus mcnutti", Rank::Kingdom), "Animalia");
        for r in Rank::BIOLOGICAL {
            assert_eq!(label("Animalia", r), "Animalia");
        }
        // No order between Echinoidea and Strongylocentrotidae: fall back to the class.
        assert_eq!(label("Strongylocentrotus fragilis", Rank::Order), "Echinoidea");
        // Unranked node takes its nearest ranked ancestor.
        assert_eq!(label("Medusae", Rank::Genus), "Hydrozoa");
    }

    #[test]
    fn rank_label_errors() {
        let tree = ConceptTree::parse("object\tunranked\t\nequipment\tunranked\tobject\n").unwrap();
        let eq = tree.resolve("equipment").unwrap();
        assert_eq!(tree.rank_label(eq, Rank::Genus).unwrap_err(), TaxonomyError::NoRank { node: "equipment".into() });
        let tree = fixture();
        assert_eq!(tree.rank_label(tree.root(), Rank::Unranked).unwrap_err(), TaxonomyError::UnrankedTarget);
    }

    #[test]
    fn supercategory_examples() {
        let tree = fixture();
        let map = SupercategoryMap::parse(SUPERCATS).unwrap().validate(&tree).unwrap();
        let of = |n: &str| supercategory_of(&tree, &map, tree.resolve(n).unwrap()).unwrap();
        assert_eq!(of("Strongylocentrotus fragilis"), Some("urchin"));
        assert_eq!(of("Echinoidea"), Some("urchin"));
        assert_eq!(of("Paragorgia"), Some("sea fan"));
        assert_eq!(of("Chordata"), None);
        assert_eq!(of("Animalia"), None);
    }

    #[test]
    fn overlapping_supercategories_are_rejected() {
        let tree = fixture();
        let map = SupercategoryMap::new(vec![
            ("coral".into(), vec!["Anthozoa".into()]),
            ("sea fan".into(), vec!["Paragorgiidae".into()]),
        ]);
        assert!(matches!(map.validate(&tree), Err(TaxonomyError::Config(_))));
        let same_root = SupercategoryMap::new(vec![
            ("a".into(), vec!["Echinoidea".into()]),
            ("b".into(), vec!["echinoidea".into()]),
        ]);
        assert!(matches!(same_root.validate(&tree), Err(TaxonomyError::Config(_))));
        let unknown = SupercategoryMap::new(vec![("a".into(), vec!["Nope".into()])]);
        assert!(matches!(unknown.validate(&tree), Err(TaxonomyError::Config(_))));
        // The same label may list nested roots.
        let nested = SupercategoryMap::new(vec![("coral".into(), vec!["Anthozoa".into(), "Paragorgia".into()])]);
        assert!(nested.validate(&tree).is_ok());
    }

    #[test]
    fn map_validated_for_another_tree_is_a_config_error() {
        let a = fixture();
        let b = fixture();
        let map = SupercategoryMap::parse(SUPERCATS).unwrap().validate(&a).unwrap();
        assert!(matches!(supercategory_of(&b, &map, b.root()), Err(TaxonomyError::Config(_))));
    }

    #[test]
    fn text_round_trip() {
        let tree = fixture();
        let again = ConceptTree::parse(&tree.to_text()).unwrap();
        assert_eq!(again.to_specs(), tree.to_specs());
    }

    #[test]
    fn local_provider_matches_tree() {
        let tree = Arc::new(fixture());
        let p = LocalProvider::new(tree.clone());
        let rec = p.resolve("jelly").unwrap();
        assert_eq!(rec.name, "Medusae");
        assert_eq!(p.parent("Medusae").unwrap().unwrap().name, "Hydrozoa");
        assert_eq!(p.children("Medusae").unwrap()[0].name, "Narcomedusae");
        let rebuilt = load_taxonomy(TaxonomySource::Provider { provider: &p, root: "Animalia" }).unwrap();
        assert_eq!(rebuilt.len(), tree.len());
    }

    #[test]
    fn shared_taxonomy_swaps_atomically() {
        let shared = SharedTaxonomy::new(fixture());
        let before = shared.current();
        shared.replace(ConceptTree::parse("object\tunranked\t\n").unwrap());
        assert_eq!(before.len(), fixture().len());
        assert_eq!(shared.current().len(), 1);
    }
}
