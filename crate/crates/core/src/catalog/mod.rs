//! Collections, images and localizations: validation, transactional batch
//! writes, filtered queries and the verification state machine.

mod store;
mod types;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use uuid::Uuid;

use crate::taxonomy::{ConceptTree, SharedTaxonomy, TaxonomyError};

pub use store::{read_journal, FileStore, MemoryStore, Mutation, Store, StoreError};
pub use types::*;

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("missing required field: {0}")]
    MissingField(CollectionField),
    #[error("invalid {field}: {message}")]
    InvalidField { field: String, message: String },
    #[error("unknown collection {0}")]
    UnknownCollection(Uuid),
    #[error("unknown image {0}")]
    UnknownImage(Uuid),
    #[error("unknown localization {0}")]
    UnknownLocalization(Uuid),
    #[error("image {image_url}: {field}: {message}")]
    InvalidImage { image_url: String, field: String, message: String },
    #[error("image {image_url}: concept {concept:?} does not resolve: {source}")]
    UnresolvableConcept { image_url: String, concept: String, source: TaxonomyError },
    #[error("concept filter {concept:?} does not resolve: {source}")]
    UnresolvableFilter { concept: String, source: TaxonomyError },
    #[error("illegal verification transition {from} -> {to}")]
    IllegalTransition { from: VerificationState, to: VerificationState },
    #[error("invalid filter {field}: {message}")]
    InvalidFilter { field: String, message: String },
    #[error("duplicate uuid {0}")]
    DuplicateUuid(Uuid),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl CatalogError {
    /// Validation problems are the caller's fault; store failures are not.
    pub fn is_validation(&self) -> bool {
        !matches!(self, CatalogError::Store(_))
    }
}

/// Sort key for stable pagination.
type OrderKey = (Option<DateTime<Utc>>, Uuid);

#[derive(Debug, Default, Clone)]
struct State {
    collections: BTreeMap<Uuid, Collection>,
    images: HashMap<Uuid, ImageRecord>,
    image_locs: HashMap<Uuid, Vec<Uuid>>,
    localizations: HashMap<Uuid, Localization>,
    collection_images: HashMap<Uuid, Vec<Uuid>>,
    order: BTreeSet<OrderKey>,
    audit: Vec<AuditEntry>,
}

impl State {
    fn apply(&mut self, m: &Mutation) {
        match m {
            Mutation::UpsertCollection { collection } => {
                self.collections.insert(collection.uuid, collection.clone());
            }
            Mutation::AddImages { collection, images } => self.add_images(*collection, images),
            Mutation::Ingest { collection, images } => {
                self.collections.insert(collection.uuid, collection.clone());
                self.add_images(collection.uuid, images);
            }
            Mutation::SetVerification { entry } => {
                if let Some(loc) = self.localizations.get_mut(&entry.localization) {
                    loc.verification = entry.to;
                    loc.verifier = Some(entry.verifier.clone());
                }
                self.audit.push(entry.clone());
            }
            Mutation::AddLocalization { localization } => {
                self.image_locs.entry(localization.image).or_default().push(localization.uuid);
                self.localizations.insert(localization.uuid, localization.clone());
            }
        }
    }

    fn add_images(&mut self, collection: Uuid, images: &[ImageEntry]) {
        let list = self.collection_images.entry(collection).or_default();
        for entry in images {
            let img = &entry.image;
            list.push(img.uuid);
            self.order.insert((img.timestamp, img.uuid));
            self.image_locs
                .insert(img.uuid, entry.localizations.iter().map(|l| l.uuid).collect());
            for loc in &entry.localizations {
                self.localizations.insert(loc.uuid, loc.clone());
            }
            self.images.insert(img.uuid, img.clone());
        }
    }

    fn entry(&self, image: Uuid) -> ImageEntry {
        ImageEntry {
            image: self.images[&image].clone(),
            localizations: self.image_locs[&image].iter().map(|l| self.localizations[l].clone()).collect(),
        }
    }
}

/// Result of committing a collection upload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOutcome {
    pub collection: Uuid,
    pub created: bool,
    pub images: usize,
    pub localizations: usize,
}

/// The catalog. Readers see a consistent snapshot per call; writers are
/// serialized, validate against the current state, journal the change and
/// only then make it visible.
pub struct Catalog {
    store: Box<dyn Store>,
    taxonomy: SharedTaxonomy,
    state: RwLock<State>,
    write_gate: Mutex<()>,
}

impl Catalog {
    /// Opens a catalog, replaying the store's journal.
    pub fn open(store: Box<dyn Store>, taxonomy: SharedTaxonomy) -> Result<Self, CatalogError> {
        let mut state = State::default();
        for m in store.load()? {
            state.apply(&m);
        }
        Ok(Self { store, taxonomy, state: RwLock::new(state), write_gate: Mutex::new(()) })
    }

    pub fn in_memory(tree: ConceptTree) -> Self {
        Self::open(Box::new(MemoryStore::new()), SharedTaxonomy::new(tree)).expect("memory store cannot fail")
    }

    pub fn taxonomy(&self) -> Arc<ConceptTree> {
        self.taxonomy.current()
    }

    pub fn shared_taxonomy(&self) -> &SharedTaxonomy {
        &self.taxonomy
    }

    pub fn store_description(&self) -> String {
        self.store.describe()
    }

    fn commit(&self, m: Mutation) -> Result<(), CatalogError> {
        self.store.append(&m)?;
        self.state.write().apply(&m);
        Ok(())
    }

    pub fn upsert_collection(&self, mut c: Collection) -> Result<Uuid, CatalogError> {
        validate_collection(&c)?;
        let _gate = self.write_gate.lock();
        c.modified = Utc::now();
        let id = c.uuid;
        self.commit(Mutation::UpsertCollection { collection: c })?;
        Ok(id)
    }

    /// Adds a batch of images to an existing collection. All or nothing.
    pub fn add_images(&self, collection: Uuid, entries: Vec<ImageEntry>) -> Result<(usize, usize), CatalogError> {
        let _gate = self.write_gate.lock();
        let images = {
            let state = self.state.read();
            if !state.collections.contains_key(&collection) {
                return Err(CatalogError::UnknownCollection(collection));
            }
            prepare_images(&state, &self.taxonomy(), collection, entries)?
        };
        let counts = count(&images);
        self.commit(Mutation::AddImages { collection, images })?;
        Ok(counts)
    }

    /// Upserts `c` and adds `entries` to it as one committed change.
    pub fn ingest(&self, mut c: Collection, entries: Vec<ImageEntry>) -> Result<IngestOutcome, CatalogError> {
        validate_collection(&c)?;
        let _gate = self.write_gate.lock();
        let (images, created) = {
            let state = self.state.read();
            let created = !state.collections.contains_key(&c.uuid);
            (prepare_images(&state, &self.taxonomy(), c.uuid, entries)?, created)
        };
        let (n_images, n_locs) = count(&images);
        c.modified = Utc::now();
        let id = c.uuid;
        self.commit(Mutation::Ingest { collection: c, images })?;
        Ok(IngestOutcome { collection: id, created, images: n_images, localizations: n_locs })
    }

    /// Runs every check [`Catalog::ingest`] would, without writing.
    pub fn validate_ingest(&self, c: &Collection, entries: Vec<ImageEntry>) -> Result<(usize, usize), CatalogError> {
        validate_collection(c)?;
        let state = self.state.read();
        let images = prepare_images(&state, &self.taxonomy(), c.uuid, entries)?;
        Ok(count(&images))
    }

    pub fn set_verification(
        &self,
        localization: Uuid,
        to: VerificationState,
        verifier: &str,
    ) -> Result<Localization, CatalogError> {
        if verifier.trim().is_empty() {
            return Err(CatalogError::InvalidField { field: "verifier".into(), message: "must not be empty".into() });
        }
        let _gate = self.write_gate.lock();
        let from = self
            .state
            .read()
            .localizations
            .get(&localization)
            .map(|l| l.verification)
            .ok_or(CatalogError::UnknownLocalization(localization))?;
        if !from.can_transition(to) {
            return Err(CatalogError::IllegalTransition { from, to });
        }
        let entry = AuditEntry { localization, from, to, verifier: verifier.trim().to_string(), at: Utc::now() };
        self.commit(Mutation::SetVerification { entry })?;
        Ok(self.state.read().localizations[&localization].clone())
    }

    /// Attaches one new box to a stored image.
    pub fn add_localization(&self, image: Uuid, mut loc: Localization) -> Result<Localization, CatalogError> {
        let _gate = self.write_gate.lock();
        {
            let state = self.state.read();
            let img = state.images.get(&image).ok_or(CatalogError::UnknownImage(image))?;
            let tree = self.taxonomy();
            let id = tree.resolve(&loc.concept).map_err(|source| CatalogError::UnresolvableConcept {
                image_url: img.image_url.clone(),
                concept: loc.concept.clone(),
                source,
            })?;
            loc.concept = tree.name(id).to_string();
            loc.bbox.validate(img.frame()).map_err(|e| CatalogError::InvalidImage {
                image_url: img.image_url.clone(),
                field: "bbox".into(),
                message: e.to_string(),
            })?;
            if loc.uuid.is_nil() {
                loc.uuid = Uuid::new_v4();
            }
            if state.localizations.contains_key(&loc.uuid) {
                return Err(CatalogError::DuplicateUuid(loc.uuid));
            }
        }
        loc.image = image;
        loc.verification = VerificationState::Unverified;
        loc.verifier = None;
        self.commit(Mutation::AddLocalization { localization: loc.clone() })?;
        Ok(loc)
    }

    pub fn image(&self, id: Uuid) -> Option<ImageEntry> {
        let state = self.state.read();
        state.images.contains_key(&id).then(|| state.entry(id))
    }

    pub fn collection(&self, id: Uuid) -> Option<Collection> {
        self.state.read().collections.get(&id).cloned()
    }

    pub fn collections(&self) -> Vec<Collection> {
        self.state.read().collections.values().cloned().collect()
    }

    /// Images of one collection in upload order.
    pub fn collection_entries(&self, id: Uuid) -> Result<Vec<ImageEntry>, CatalogError> {
        let state = self.state.read();
        if !state.collections.contains_key(&id) {
            return Err(CatalogError::UnknownCollection(id));
        }
        Ok(state
            .collection_images
            .get(&id)
            .map(|ids| ids.iter().map(|i| state.entry(*i)).collect())
            .unwrap_or_default())
    }

    pub fn localization(&self, id: Uuid) -> Option<Localization> {
        self.state.read().localizations.get(&id).cloned()
    }

    /// Every image, ordered by (timestamp, uuid).
    pub fn snapshot(&self) -> Vec<ImageEntry> {
        let state = self.state.read();
        state.order.iter().map(|(_, id)| state.entry(*id)).collect()
    }

    pub fn image_count(&self) -> usize {
        self.state.read().images.len()
    }

    pub fn localization_count(&self) -> usize {
        self.state.read().localizations.len()
    }

    pub fn audit_log(&self) -> Vec<AuditEntry> {
        self.state.read().audit.clone()
    }

    /// Every localization points at a stored image and every image at a
    /// stored collection.
    pub fn check_integrity(&self) -> Result<(), String> {
        let state = self.state.read();
        for loc in state.localizations.values() {
            if !state.images.contains_key(&loc.image) {
                return Err(format!("localization {} references missing image {}", loc.uuid, loc.image));
            }
        }
        for img in state.images.values() {
            if !state.collections.contains_key(&img.collection) {
                return Err(format!("image {} references missing collection {}", img.uuid, img.collection));
            }
        }
        Ok(())
    }

    /// One page of images matching `filter`, plus the total match count.
    pub fn query(&self, filter: &QueryFilter) -> Result<Page, CatalogError> {
        let matcher = Matcher::new(filter, &self.taxonomy())?;
        let state = self.state.read();
        let skip = (filter.page - 1).saturating_mul(filter.page_size);
        let mut total = 0;
        let mut items = Vec::new();
        for (_, id) in &state.order {
            if let Some(entry) = matcher.apply(&state, *id) {
                if total >= skip && items.len() < filter.page_size {
                    items.push(entry);
                }
                total += 1;
            }
        }
        Ok(Page { items, total, page: filter.page, page_size: filter.page_size })
    }

    /// Every match, ignoring pagination.
    pub fn query_all(&self, filter: &QueryFilter) -> Result<Vec<ImageEntry>, CatalogError> {
        let matcher = Matcher::new(filter, &self.taxonomy())?;
        let state = self.state.read();
        Ok(state.order.iter().filter_map(|(_, id)| matcher.apply(&state, *id)).collect())
    }
}

fn count(images: &[ImageEntry]) -> (usize, usize) {
    (images.len(), images.iter().map(|e| e.localizations.len()).sum())
}

pub fn validate_collection(c: &Collection) -> Result<(), CatalogError> {
    if let Some(field) = c.missing_required() {
        return Err(CatalogError::MissingField(field));
    }
    if c.record_type.trim() != RECORD_TYPE_IMAGES {
        return Err(CatalogError::InvalidField {
            field: CollectionField::RecordType.label().into(),
            message: format!("must be {RECORD_TYPE_IMAGES:?}, got {:?}", c.record_type),
        });
    }
    Ok(())
}

/// Checks the per-image invariants that do not need the taxonomy.
pub fn validate_image(img: &ImageRecord) -> Result<(), (String, String)> {
    let bad = |f: &str, m: String| Err((f.to_string(), m));
    if img.image_url.trim().is_empty() {
        return bad("image_url", "must not be empty".into());
    }
    if let Some(lat) = img.latitude {
        if !(-90.0..=90.0).contains(&lat) {
            return bad("latitude", format!("{lat} outside [-90, 90]"));
        }
    }
    if let Some(lon) = img.longitude {
        if !(-180.0..=180.0).contains(&lon) {
            return bad("longitude", format!("{lon} outside [-180, 180]"));
        }
    }
    if let Some(d) = img.depth_m {
        if !(d >= 0.0 && d.is_finite()) {
            return bad("depth_m", format!("{d} must be a non-negative number"));
        }
    }
    if let Some(a) = img.altitude_m {
        if !a.is_finite() {
            return bad("altitude_m", "must be finite".into());
        }
    }
    if img.width_px == Some(0) {
        return bad("width_px", "must be positive".into());
    }
    if img.height_px == Some(0) {
        return bad("height_px", "must be positive".into());
    }
    Ok(())
}

fn prepare_images(
    state: &State,
    tree: &ConceptTree,
    collection: Uuid,
    entries: Vec<ImageEntry>,
) -> Result<Vec<ImageEntry>, CatalogError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(entries.len());
    for mut entry in entries {
        let img = &mut entry.image;
        if let Err((field, message)) = validate_image(img) {
            return Err(CatalogError::InvalidImage { image_url: img.image_url.clone(), field, message });
        }
        if img.uuid.is_nil() {
            img.uuid = Uuid::new_v4();
        }
        if state.images.contains_key(&img.uuid) || !seen.insert(img.uuid) {
            return Err(CatalogError::DuplicateUuid(img.uuid));
        }
        img.collection = collection;
        let frame = img.frame();
        for loc in &mut entry.localizations {
            let id = tree.resolve(&loc.concept).map_err(|source| CatalogError::UnresolvableConcept {
                image_url: entry.image.image_url.clone(),
                concept: loc.concept.clone(),
                source,
            })?;
            loc.concept = tree.name(id).to_string();
            loc.bbox.validate(frame).map_err(|e| CatalogError::InvalidImage {
                image_url: entry.image.image_url.clone(),
                field: "bbox".into(),
                message: e.to_string(),
            })?;
            if loc.uuid.is_nil() {
                loc.uuid = Uuid::new_v4();
            }
            if state.localizations.contains_key(&loc.uuid) || !seen.insert(loc.uuid) {
                return Err(CatalogError::DuplicateUuid(loc.uuid));
            }
            loc.image = entry.image.uuid;
            loc.verification = VerificationState::Unverified;
            loc.verifier = None;
        }
        out.push(entry);
    }
    Ok(out)
}

/// Compiled form of a [`QueryFilter`].
struct Matcher<'f> {
    filter: &'f QueryFilter,
    concepts: Option<HashSet<String>>,
}

impl<'f> Matcher<'f> {
    fn new(filter: &'f QueryFilter, tree: &ConceptTree) -> Result<Self, CatalogError> {
        validate_filter(filter)?;
        let concepts = match &filter.concept {
            None => None,
            Some(c) => {
                let id = tree
                    .resolve(c)
                    .map_err(|source| CatalogError::UnresolvableFilter { concept: c.clone(), source })?;
                let ids = if filter.include_descendants { tree.descendants(id) } else { vec![id] };
                Some(ids.into_iter().map(|i| tree.name(i).to_lowercase()).collect())
            }
        };
        Ok(Self { filter, concepts })
    }

    fn image_matches(&self, state: &State, img: &ImageRecord) -> bool {
        let f = self.filter;
        if let Some(geo) = &f.geo {
            match (img.latitude, img.longitude) {
                (Some(lat), Some(lon)) if geo.contains(lat, lon) => {}
                _ => return false,
            }
        }
        if let Some((lo, hi)) = f.depth {
            match img.depth_m {
                Some(d) if d >= lo && d <= hi => {}
                _ => return false,
            }
        }
        if let Some(t) = &f.imaging_type {
            if !img.imaging_type.as_deref().is_some_and(|v| v.eq_ignore_ascii_case(t)) {
                return false;
            }
        }
        if let Some(c) = f.collection {
            if img.collection != c {
                return false;
            }
        }
        if let Some(who) = &f.contributor {
            let ok = state
                .collections
                .get(&img.collection)
                .is_some_and(|c| c.contributor_email.eq_ignore_ascii_case(who) || c.uuid.to_string() == *who);
            if !ok {
                return false;
            }
        }
        true
    }

    fn loc_matches(&self, loc: &Localization) -> bool {
        if let Some(set) = &self.concepts {
            if !set.contains(&loc.concept.to_lowercase()) {
                return false;
            }
        }
        if let Some(s) = self.filter.verification {
            if loc.verification != s {
                return false;
            }
        }
        true
    }

    /// Localization predicates narrow an image's boxes; an image survives
    /// them only if at least one box does.
    fn apply(&self, state: &State, id: Uuid) -> Option<ImageEntry> {
        let img = &state.images[&id];
        if !self.image_matches(state, img) {
            return None;
        }
        let mut entry = state.entry(id);
        if self.concepts.is_some() || self.filter.verification.is_some() {
            entry.localizations.retain(|l| self.loc_matches(l));
            if entry.localizations.is_empty() {
                return None;
            }
        }
        Some(entry)
    }
}

pub fn validate_filter(f: &QueryFilter) -> Result<(), CatalogError> {
    let bad = |field: &str, message: &str| {
        Err(CatalogError::InvalidFilter { field: field.into(), message: message.into() })
    };
    if !(1..=MAX_PAGE_SIZE).contains(&f.page_size) {
        return bad("page_size", "must be between 1 and 1000");
    }
    if f.page == 0 {
        return bad("page", "pages start at 1");
    }
    if let Some(g) = &f.geo {
        if !(g.min_lat <= g.max_lat && -90.0 <= g.min_lat && g.max_lat <= 90.0) {
            return bad("latitude", "need -90 <= minlat <= maxlat <= 90");
        }
        if !(g.min_lon <= g.max_lon && -180.0 <= g.min_lon && g.max_lon <= 180.0) {
            return bad("longitude", "need -180 <= minlon <= maxlon <= 180");
        }
    }
    if let Some((lo, hi)) = f.depth {
        if !(lo <= hi) {
            return bad("depth", "need mindepth <= maxdepth");
        }
    }
    Ok(())
}
