//! Random fixture generators and brute-force oracles shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use seacat_core::catalog::{ImageEntry, ImageRecord, Localization};
use seacat_core::evaluation::Segment;
use seacat_core::stats::SampleRng;
use seacat_core::taxonomy::{ConceptTree, NodeId, NodeSpec, Rank};
use seacat_core::BoundingBox;

pub fn fixture_tree() -> ConceptTree {
    ConceptTree::parse(include_str!("../../fixtures/taxonomy.tsv")).unwrap()
}

pub fn fixture_path(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

pub struct Gen(pub SampleRng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(SampleRng::new(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.below(n as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// Random valid tree of `n` nodes rooted at a kingdom. Ranks strictly
/// refine along every path of ranked nodes; about a fifth are unranked.
pub fn random_tree(g: &mut Gen, n: usize) -> ConceptTree {
    let mut specs: Vec<NodeSpec> = Vec::with_capacity(n);
    // nearest ranked ancestor-or-self depth per node
    let mut floor: Vec<i32> = Vec::with_capacity(n);
    specs.push(NodeSpec { name: "N0".into(), rank: Rank::Kingdom, parent: None, aliases: vec![] });
    floor.push(0);
    for i in 1..n {
        let p = g.below(i);
        let above = floor[p];
        let rank = if above >= 6 || g.chance(0.2) {
            Rank::Unranked
        } else {
            Rank::BIOLOGICAL[g.range(above as usize + 1, 6)]
        };
        floor.push(rank.depth().map_or(above, i32::from));
        let aliases = if g.chance(0.1) { vec![format!("alias{i}")] } else { vec![] };
        specs.push(NodeSpec { name: format!("N{i}"), rank, parent: Some(format!("N{p}")), aliases });
    }
    ConceptTree::from_specs(specs).unwrap()
}

/// Ancestor-or-self walk using only parent links.
pub fn naive_ancestors(tree: &ConceptTree, id: NodeId) -> Vec<NodeId> {
    let mut out = vec![id];
    let mut cur = id;
    while let Some(p) = tree.node(cur).parent {
        out.push(p);
        cur = p;
    }
    out
}

pub fn naive_rank_label(tree: &ConceptTree, id: NodeId, rank: Rank) -> Option<NodeId> {
    let want = rank.depth()?;
    naive_ancestors(tree, id)
        .into_iter()
        .find(|a| tree.node(*a).rank.depth().is_some_and(|d| d <= want))
}

pub fn fixture_concepts() -> Vec<&'static str> {
    vec![
        "Animalia",
        "Tunicata",
        "Bathochordaeus",
        "Bathochordaeus mcnutti",
        "Bathochordaeus stygius",
        "Aegina",
        "Aegina citrea",
        "Medusae",
        "Narcomedusae",
        "Paragorgia",
        "Gersemia juliepackardae",
        "Strongylocentrotus fragilis",
        "Strongylocentrotidae",
        "Asteroidea",
        "Porifera",
    ]
}

/// Up to `max_images` images with 0..6 boxes each over `concepts`; some
/// images lack pixel dimensions.
pub fn random_snapshot(g: &mut Gen, max_images: usize, concepts: &[String]) -> Vec<ImageEntry> {
    let n = g.range(1, max_images);
    (0..n)
        .map(|i| {
            let mut image = ImageRecord::new(format!("https://img.example.org/{i}.png"));
            if !g.chance(0.15) {
                image.width_px = Some(g.range(50, 2000) as u32);
                image.height_px = Some(g.range(50, 2000) as u32);
            }
            let (w, h) = (image.width_px.unwrap_or(2000) as usize, image.height_px.unwrap_or(2000) as usize);
            let k = g.below(7);
            let localizations = (0..k)
                .map(|_| {
                    let bw = g.range(1, w);
                    let bh = g.range(1, h);
                    let bbox = BoundingBox::new(g.below(w - bw + 1) as f64, g.below(h - bh + 1) as f64, bw as f64, bh as f64);
                    Localization::new(g.pick(concepts).clone(), bbox)
                })
                .collect();
            ImageEntry { image, localizations }
        })
        .collect()
}

/// Number of unit cells of the integer grid covered by both boxes.
pub fn grid_iou(a: (i64, i64, i64, i64), b: (i64, i64, i64, i64)) -> f64 {
    let cover = |r: (i64, i64, i64, i64), x: i64, y: i64| x >= r.0 && x < r.0 + r.2 && y >= r.1 && y < r.1 + r.3;
    let (mut inter, mut union) = (0u64, 0u64);
    let lo_x = a.0.min(b.0);
    let hi_x = (a.0 + a.2).max(b.0 + b.2);
    let lo_y = a.1.min(b.1);
    let hi_y = (a.1 + a.3).max(b.1 + b.3);
    for x in lo_x..hi_x {
        for y in lo_y..hi_y {
            let (ca, cb) = (cover(a, x, y), cover(b, x, y));
            inter += u64::from(ca && cb);
            union += u64::from(ca || cb);
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Sorted, disjoint, non-touching segments on `[0, horizon]` seconds with
/// endpoints on the millisecond grid when `on_grid`.
pub fn random_segments(g: &mut Gen, horizon: f64, max: usize, on_grid: bool) -> Vec<Segment<f64>> {
    let k = g.below(max + 1);
    let mut cuts: Vec<f64> = (0..2 * k)
        .map(|_| {
            let t = g.unit() * horizon;
            if on_grid {
                (t * 1000.0).round() / 1000.0
            } else {
                t
            }
        })
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.chunks_exact(2)
        .filter(|c| c[1] > c[0])
        .map(|c| Segment::new(c[0], c[1]).unwrap())
        .collect()
}

/// Intersection and union durations counted on the 1 ms grid: a cell
/// `[i, i+1)` ms counts when its midpoint is covered.
pub fn grid_durations(a: &[Segment<f64>], b: &[Segment<f64>], horizon: f64) -> (f64, f64) {
    let covered = |s: &[Segment<f64>], t: f64| s.iter().any(|x| x.start <= t && t < x.end);
    let cells = (horizon * 1000.0).ceil() as usize;
    let (mut inter, mut union) = (0usize, 0usize);
    for i in 0..cells {
        let t = (i as f64 + 0.5) / 1000.0;
        let (ia, ib) = (covered(a, t), covered(b, t));
        inter += usize::from(ia && ib);
        union += usize::from(ia || ib);
    }
    (inter as f64 / 1000.0, union as f64 / 1000.0)
}

/// Closing by definition: an inactive frame turns on iff some active frame
/// before it and some active frame after it are less than `window` apart.
pub fn naive_close(times: &[f64], active: &[bool], window: f64) -> Vec<bool> {
    (0..times.len())
        .map(|i| {
            active[i]
                || (0..i).any(|p| {
                    active[p] && (i + 1..times.len()).any(|q| active[q] && times[q] - times[p] < window)
                })
        })
        .collect()
}

pub fn histogram_of(values: &[usize]) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for v in values {
        *m.entry(*v).or_insert(0) += 1;
    }
    m
}

pub fn distinct<T: std::hash::Hash + Eq>(items: impl IntoIterator<Item = T>) -> usize {
    items.into_iter().collect::<HashSet<_>>().len()
}
