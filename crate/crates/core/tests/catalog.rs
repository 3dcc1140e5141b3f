mod common;

use std::collections::HashSet;

use chrono::{TimeZone, Utc};
use common::*;
use proptest::prelude::*;
use seacat_core::catalog::*;
use seacat_core::taxonomy::SharedTaxonomy;
use uuid::Uuid;

fn populate(g: &mut Gen) -> (Catalog, Vec<ImageEntry>) {
    let cat = Catalog::in_memory(fixture_tree());
    let concepts: Vec<String> = fixture_concepts().into_iter().map(String::from).collect();
    let mut all = Vec::new();
    for c in 0..g.range(1, 3) {
        let mut snap = random_snapshot(g, 20, &concepts);
        for e in &mut snap {
            e.image.image_url = format!("{}?c={c}", e.image.image_url);
            e.image.depth_m = g.chance(0.8).then(|| g.below(4000) as f64);
            e.image.latitude = Some(g.below(180) as f64 - 90.0);
            e.image.longitude = Some(g.below(360) as f64 - 180.0);
            e.image.imaging_type = Some(["ROV", "AUV"][g.below(2)].to_string());
            // duplicated timestamps exercise the uuid tie-break
            e.image.timestamp = g.chance(0.9).then(|| Utc.timestamp_opt(g.below(50) as i64 * 60, 0).unwrap());
        }
        let col = Collection::new(Uuid::new_v4(), format!("Org {c}"), format!("c{c}@example.org"), "https://x.org");
        let id = cat.upsert_collection(col).unwrap();
        cat.add_images(id, snap).unwrap();
    }
    for id in cat.collections().iter().map(|c| c.uuid) {
        all.extend(cat.collection_entries(id).unwrap());
    }
    (cat, all)
}

fn brute(all: &[ImageEntry], f: &QueryFilter) -> HashSet<(Uuid, Vec<Uuid>)> {
    let tree = fixture_tree();
    let concept_ok = |c: &str| match &f.concept {
        None => true,
        Some(q) => {
            let target = tree.resolve(q).unwrap();
            let node = tree.resolve(c).unwrap();
            if f.include_descendants {
                naive_ancestors(&tree, node).contains(&target)
            } else {
                node == target
            }
        }
    };
    all.iter()
        .filter(|e| {
            let i = &e.image;
            f.depth.is_none_or(|(lo, hi)| i.depth_m.is_some_and(|d| d >= lo && d <= hi))
                && f.geo.as_ref().is_none_or(|g| {
                    let (lat, lon) = (i.latitude.unwrap(), i.longitude.unwrap());
                    lat >= g.min_lat && lat <= g.max_lat && lon >= g.min_lon && lon <= g.max_lon
                })
                && f.imaging_type.as_ref().is_none_or(|t| i.imaging_type.as_deref() == Some(t.as_str()))
        })
        .filter_map(|e| {
            let locs: Vec<Uuid> = e
                .localizations
                .iter()
                .filter(|l| concept_ok(&l.concept) && f.verification.is_none_or(|v| l.verification == v))
                .map(|l| l.uuid)
                .collect();
            let narrowing = f.concept.is_some() || f.verification.is_some();
            if narrowing && locs.is_empty() {
                None
            } else {
                Some((e.image.uuid, if narrowing { locs } else { e.localizations.iter().map(|l| l.uuid).collect() }))
            }
        })
        .collect()
}

fn random_filter(g: &mut Gen) -> QueryFilter {
    let concepts = fixture_concepts();
    let mut f = QueryFilter::default();
    if g.chance(0.6) {
        f.concept = Some(g.pick(&concepts).to_string());
        f.include_descendants = g.chance(0.5);
    }
    if g.chance(0.3) {
        let lo = g.below(3000) as f64;
        f.depth = Some((lo, lo + g.below(2000) as f64));
    }
    if g.chance(0.3) {
        let lat = g.below(90) as f64 - 90.0;
        let lon = g.below(180) as f64 - 180.0;
        f.geo = Some(GeoBox { min_lat: lat, max_lat: lat + 90.0, min_lon: lon, max_lon: lon + 180.0 });
    }
    if g.chance(0.2) {
        f.imaging_type = Some("ROV".into());
    }
    if g.chance(0.2) {
        f.verification = Some(VerificationState::Unverified);
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn queries_match_brute_force_and_pages_partition(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (cat, all) = populate(&mut g);
        prop_assert_eq!(cat.check_integrity(), Ok(()));
        for _ in 0..8 {
            let mut f = random_filter(&mut g);
            let everything = cat.query_all(&f).unwrap();
            let got: HashSet<(Uuid, Vec<Uuid>)> = everything
                .iter()
                .map(|e| (e.image.uuid, e.localizations.iter().map(|l| l.uuid).collect()))
                .collect();
            prop_assert_eq!(&got, &brute(&all, &f));

            f.page_size = g.range(1, 7);
            let mut paged = Vec::new();
            for page in 1.. {
                f.page = page;
                let p = cat.query(&f).unwrap();
                prop_assert_eq!(p.total, everything.len());
                if p.items.is_empty() {
                    break;
                }
                prop_assert!(p.items.len() <= f.page_size);
                paged.extend(p.items);
            }
            prop_assert_eq!(&paged, &everything);
            let keys: Vec<_> = paged.iter().map(|e| (e.image.timestamp, e.image.uuid)).collect();
            prop_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn file_store_replay_reproduces_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.jsonl");
    let mut g = Gen::new(8);
    let concepts: Vec<String> = fixture_concepts().into_iter().map(String::from).collect();
    let (snapshot, audit) = {
        let cat = Catalog::open(Box::new(FileStore::open(&path).unwrap()), SharedTaxonomy::new(fixture_tree())).unwrap();
        let col = Collection::new(Uuid::new_v4(), "MBARI", "a@b.org", "https://x.org");
        let outcome = cat.ingest(col, random_snapshot(&mut g, 20, &concepts)).unwrap();
        assert!(outcome.created);
        let locs: Vec<Uuid> = cat.snapshot().iter().flat_map(|e| e.localizations.iter().map(|l| l.uuid)).collect();
        for (i, l) in locs.iter().enumerate().take(5) {
            let to = if i % 2 == 0 { VerificationState::Verified } else { VerificationState::Rejected };
            cat.set_verification(*l, to, "expert").unwrap();
        }
        if let Some(l) = locs.first() {
            assert!(cat.set_verification(*l, VerificationState::Unverified, "expert").is_err());
        }
        (cat.snapshot(), cat.audit_log())
    };
    let reopened = Catalog::open(Box::new(FileStore::open(&path).unwrap()), SharedTaxonomy::new(fixture_tree())).unwrap();
    assert_eq!(reopened.snapshot(), snapshot);
    assert_eq!(reopened.audit_log(), audit);

    // a torn final line is dropped on open
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.extend_from_slice(b"{\"op\":\"set_verif");
    std::fs::write(&path, bytes).unwrap();
    let recovered = Catalog::open(Box::new(FileStore::open(&path).unwrap()), SharedTaxonomy::new(fixture_tree())).unwrap();
    assert_eq!(recovered.snapshot(), snapshot);
}

#[test]
fn failed_batches_leave_no_trace() {
    let cat = Catalog::in_memory(fixture_tree());
    let col = Collection::new(Uuid::new_v4(), "MBARI", "a@b.org", "https://x.org");
    let id = cat.upsert_collection(col).unwrap();
    let bbox = seacat_core::BoundingBox::new(0.0, 0.0, 5.0, 5.0);
    let good = ImageEntry { image: ImageRecord::new("a.png"), localizations: vec![Localization::new("Aegina", bbox)] };
    let bad = ImageEntry { image: ImageRecord::new("b.png"), localizations: vec![Localization::new("Nessie", bbox)] };
    let err = cat.add_images(id, vec![good, bad]).unwrap_err();
    assert!(err.is_validation());
    assert_eq!(cat.image_count(), 0);
    assert_eq!(cat.localization_count(), 0);
}
