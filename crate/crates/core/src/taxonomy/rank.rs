use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Taxonomic rank of a concept.
///
/// Biological ranks are totally ordered by depth (kingdom is coarsest).
/// `Unranked` (equipment, debris, geology) compares with nothing, itself
/// included, so it never satisfies a rank query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Kingdom,
    Phylum,
    Class,
    Order,
    Family,
    Genus,
    Species,
    Unranked,
}

impl Rank {
    pub const BIOLOGICAL: [Rank; 7] = [
        Rank::Kingdom,
        Rank::Phylum,
        Rank::Class,
        Rank::Order,
        Rank::Family,
        Rank::Genus,
        Rank::Species,
    ];

    /// Depth below kingdom; `None` for `Unranked`.
    pub fn depth(self) -> Option<u8> {
        match self {
            Rank::Kingdom => Some(0),
            Rank::Phylum => Some(1),
            Rank::Class => Some(2),
            Rank::Order => Some(3),
            Rank::Family => Some(4),
            Rank::Genus => Some(5),
            Rank::Species => Some(6),
            Rank::Unranked => None,
        }
    }

    pub fn is_ranked(self) -> bool {
        self != Rank::Unranked
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rank::Kingdom => "kingdom",
            Rank::Phylum => "phylum",
            Rank::Class => "class",
            Rank::Order => "order",
            Rank::Family => "family",
            Rank::Genus => "genus",
            Rank::Species => "species",
            Rank::Unranked => "unranked",
        }
    }
}

impl Rank {
    /// `Less` means `self` is coarser than `other`.
    pub fn compare(self, other: Rank) -> Option<Ordering> {
        Some(self.depth()?.cmp(&other.depth()?))
    }

    pub fn is_coarser_than(self, other: Rank) -> bool {
        self.compare(other) == Some(Ordering::Less)
    }

    pub fn is_coarser_or_equal(self, other: Rank) -> bool {
        matches!(self.compare(other), Some(Ordering::Less | Ordering::Equal))
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rank {0:?}")]
pub struct UnknownRank(pub String);

impl FromStr for Rank {
    type Err = UnknownRank;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rank = match s.trim().to_ascii_lowercase().as_str() {
            "kingdom" => Rank::Kingdom,
            "phylum" => Rank::Phylum,
            "class" => Rank::Class,
            "order" => Rank::Order,
            "family" => Rank::Family,
            "genus" => Rank::Genus,
            "species" => Rank::Species,
            "unranked" | "" => Rank::Unranked,
            _ => return Err(UnknownRank(s.to_string())),
        };
        Ok(rank)
    }
}
