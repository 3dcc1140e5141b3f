use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::BoundingBox;

/// Required collection-level fields, with the label used in error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectionField {
    OwnerInstitution,
    RightsHolder,
    ContributorEmail,
    RecordType,
    Modified,
    Uuid,
    Url,
    DataFormat,
}

impl CollectionField {
    pub const REQUIRED: [CollectionField; 8] = [
        CollectionField::OwnerInstitution,
        CollectionField::RightsHolder,
        CollectionField::ContributorEmail,
        CollectionField::RecordType,
        CollectionField::Modified,
        CollectionField::Uuid,
        CollectionField::Url,
        CollectionField::DataFormat,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CollectionField::OwnerInstitution => "owner's institution",
            CollectionField::RightsHolder => "rights holder",
            CollectionField::ContributorEmail => "contributor's email",
            CollectionField::RecordType => "record type",
            CollectionField::Modified => "modified",
            CollectionField::Uuid => "UUID",
            CollectionField::Url => "URL",
            CollectionField::DataFormat => "data format",
        }
    }

    /// Key used in `.meta` sidecar files.
    pub fn key(self) -> &'static str {
        match self {
            CollectionField::OwnerInstitution => "owner_institution",
            CollectionField::RightsHolder => "rights_holder",
            CollectionField::ContributorEmail => "contributor_email",
            CollectionField::RecordType => "record_type",
            CollectionField::Modified => "modified",
            CollectionField::Uuid => "uuid",
            CollectionField::Url => "url",
            CollectionField::DataFormat => "data_format",
        }
    }
}

impl fmt::Display for CollectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub const RECORD_TYPE_IMAGES: &str = "images";

/// One upload unit with its Darwin Core collection metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub uuid: Uuid,
    pub owner_institution: String,
    /// Use the owner's institution when there is no separate rights holder.
    pub rights_holder: String,
    pub contributor_email: String,
    pub record_type: String,
    /// Upload date; reset by the catalog whenever the collection is stored.
    pub modified: DateTime<Utc>,
    pub url: String,
    pub data_format: String,

    // recommended
    pub bibliographic_citation: Option<String>,
    pub access_rights: Option<String>,
    pub basis_of_record: Option<String>,
    pub dataset_language: Option<String>,

    // suggested
    pub collection_code: Option<String>,
    pub collection_id: Option<String>,
    pub dataset_generalizations: Option<String>,
    pub dataset_name: Option<String>,
    pub dynamic_properties: Option<String>,
    pub information_withheld: Option<String>,
    pub institution_code: Option<String>,
    pub institution_id: Option<String>,
    pub references: Option<String>,
}

impl Collection {
    /// Minimal collection with every optional field unset.
    pub fn new(
        uuid: Uuid,
        owner_institution: impl Into<String>,
        contributor_email: impl Into<String>,
        url: impl Into<String>,
    ) -> Self {
        let owner = owner_institution.into();
        Self {
            uuid,
            rights_holder: owner.clone(),
            owner_institution: owner,
            contributor_email: contributor_email.into(),
            record_type: RECORD_TYPE_IMAGES.to_string(),
            modified: Utc::now(),
            url: url.into(),
            data_format: "CSV".to_string(),
            bibliographic_citation: None,
            access_rights: None,
            basis_of_record: None,
            dataset_language: None,
            collection_code: None,
            collection_id: None,
            dataset_generalizations: None,
            dataset_name: None,
            dynamic_properties: None,
            information_withheld: None,
            institution_code: None,
            institution_id: None,
            references: None,
        }
    }

    /// First required field that is missing or empty.
    pub fn missing_required(&self) -> Option<CollectionField> {
        let blank = |s: &str| s.trim().is_empty();
        CollectionField::REQUIRED.into_iter().find(|f| match f {
            CollectionField::OwnerInstitution => blank(&self.owner_institution),
            CollectionField::RightsHolder => blank(&self.rights_holder),
            CollectionField::ContributorEmail => blank(&self.contributor_email),
            CollectionField::RecordType => blank(&self.record_type),
            CollectionField::Modified => false,
            CollectionField::Uuid => self.uuid.is_nil(),
            CollectionField::Url => blank(&self.url),
            CollectionField::DataFormat => blank(&self.data_format),
        })
    }

    /// Optional fields in `.meta` order, paired with their keys.
    pub fn optional_fields(&self) -> [(&'static str, &Option<String>); 13] {
        [
            ("bibliographic_citation", &self.bibliographic_citation),
            ("access_rights", &self.access_rights),
            ("basis_of_record", &self.basis_of_record),
            ("dataset_language", &self.dataset_language),
            ("collection_code", &self.collection_code),
            ("collection_id", &self.collection_id),
            ("dataset_generalizations", &self.dataset_generalizations),
            ("dataset_name", &self.dataset_name),
            ("dynamic_properties", &self.dynamic_properties),
            ("information_withheld", &self.information_withheld),
            ("institution_code", &self.institution_code),
            ("institution_id", &self.institution_id),
            ("references", &self.references),
        ]
    }

    pub fn optional_field_mut(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key {
            "bibliographic_citation" => &mut self.bibliographic_citation,
            "access_rights" => &mut self.access_rights,
            "basis_of_record" => &mut self.basis_of_record,
            "dataset_language" => &mut self.dataset_language,
            "collection_code" => &mut self.collection_code,
            "collection_id" => &mut self.collection_id,
            "dataset_generalizations" => &mut self.dataset_generalizations,
            "dataset_name" => &mut self.dataset_name,
            "dynamic_properties" => &mut self.dynamic_properties,
            "information_withheld" => &mut self.information_withheld,
            "institution_code" => &mut self.institution_code,
            "institution_id" => &mut self.institution_id,
            "references" => &mut self.references,
            _ => return None,
        })
    }
}

/// Image metadata. Pixels stay with the owner; only the URL is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub uuid: Uuid,
    pub collection: Uuid,
    pub image_url: String,
    pub width_px: Option<u32>,
    pub height_px: Option<u32>,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub depth_m: Option<f64>,
    pub timestamp: Option<DateTime<Utc>>,
    pub imaging_type: Option<String>,
    pub observer: Option<String>,
    pub altitude_m: Option<f64>,
}

impl ImageRecord {
    pub fn new(image_url: impl Into<String>) -> Self {
        Self {
            uuid: Uuid::new_v4(),
            collection: Uuid::nil(),
            image_url: image_url.into(),
            width_px: None,
            height_px: None,
            latitude: None,
            longitude: None,
            depth_m: None,
            timestamp: None,
            imaging_type: None,
            observer: None,
            altitude_m: None,
        }
    }

    pub fn frame(&self) -> Option<(f64, f64)> {
        Some((f64::from(self.width_px?), f64::from(self.height_px?)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerificationState {
    Unverified,
    Verified,
    Rejected,
}

impl VerificationState {
    /// Review moves: unverified to either verdict, and re-review between
    /// verdicts. Nothing returns to unverified.
    pub fn can_transition(self, to: VerificationState) -> bool {
        use VerificationState::*;
        matches!((self, to), (Unverified, Verified) | (Unverified, Rejected) | (Verified, Rejected) | (Rejected, Verified))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerificationState::Unverified => "unverified",
            VerificationState::Verified => "verified",
            VerificationState::Rejected => "rejected",
        }
    }
}

impl fmt::Display for VerificationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerificationState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unverified" => Ok(VerificationState::Unverified),
            "verified" => Ok(VerificationState::Verified),
            "rejected" => Ok(VerificationState::Rejected),
            other => Err(format!("unknown verification state {other:?}")),
        }
    }
}

/// A bounding box tying one concept to a region of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub uuid: Uuid,
    pub image: Uuid,
    pub concept: String,
    pub alt_concept: Option<String>,
    pub bbox: BoundingBox,
    pub group_of: Option<bool>,
    pub occluded: Option<bool>,
    pub truncated: Option<bool>,
    pub observer: Option<String>,
    pub verification: VerificationState,
    pub verifier: Option<String>,
}

impl Localization {
    pub fn new(concept: impl Into<String>, bbox: BoundingBox) -> Self {
        Self {
            uuid: Uuid::new_v4(),
            image: Uuid::nil(),
            concept: concept.into(),
            alt_concept: None,
            bbox,
            group_of: None,
            occluded: None,
            truncated: None,
            observer: None,
            verification: VerificationState::Unverified,
            verifier: None,
        }
    }
}

/// An image together with its localizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image: ImageRecord,
    pub localizations: Vec<Localization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub localization: Uuid,
    pub from: VerificationState,
    pub to: VerificationState,
    pub verifier: String,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl GeoBox {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.min_lat..=self.max_lat).contains(&lat) && (self.min_lon..=self.max_lon).contains(&lon)
    }
}

pub const MAX_PAGE_SIZE: usize = 1000;
pub const DEFAULT_PAGE_SIZE: usize = 100;

/// Image query. Pages are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryFilter {
    pub concept: Option<String>,
    pub include_descendants: bool,
    pub geo: Option<GeoBox>,
    pub depth: Option<(f64, f64)>,
    pub imaging_type: Option<String>,
    pub collection: Option<Uuid>,
    pub contributor: Option<String>,
    pub verification: Option<VerificationState>,
    pub page: usize,
    pub page_size: usize,
}

impl Default for QueryFilter {
    fn default() -> Self {
        Self {
            concept: None,
            include_descendants: false,
            geo: None,
            depth: None,
            imaging_type: None,
            collection: None,
            contributor: None,
            verification: None,
            page: 1,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub items: Vec<ImageEntry>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
}
