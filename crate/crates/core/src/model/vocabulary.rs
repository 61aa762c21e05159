//! E55 type labels created at bootstrap and referenced by the workflows.

pub const SYSTEM_ACTOR: &str = "system";

// activity kinds
pub const BOOTSTRAP: &str = "bootstrap";
pub const ACCESSION: &str = "accession";
pub const REGISTRATION: &str = "registration";
pub const HOLDING_CURATION: &str = "holding curation";
pub const REGROUPING: &str = "regrouping";
pub const DIGITIZATION: &str = "digitization";
pub const PHOTOGRAPHY: &str = "photography";
pub const TRANSCRIPTION: &str = "transcription";
pub const REFERENCE_LINKING: &str = "reference linking";
pub const VERIFICATION: &str = "verification";
pub const TOSEC_INGEST: &str = "tosec ingest";
pub const PUBLICATION: &str = "publication";
pub const IMPORT: &str = "import";

// identifier and appellation types
pub const INVENTORY_ID: &str = "Inventory ID";
pub const TOSEC_NAME: &str = "TOSEC name";
pub const NAME: &str = "name";
pub const ADDRESS: &str = "address";
pub const FILE_PATH: &str = "file path";

// object types
pub const CASSETTE_SET: &str = "cassette set";
pub const MAGNETIC_TAPE: &str = "magnetic tape";
pub const PAPER_INLAY: &str = "paper inlay";
pub const OTHER_PART: &str = "accompanying material";
pub const TAPE_RECORDER: &str = "tape recorder";

// information object types
pub const RAW_AUDIO: &str = "raw audio";
pub const PHOTOGRAPH: &str = "photograph";
pub const TITLE: &str = "title";
pub const EXTERNAL_RESOURCE: &str = "external resource";
pub const SOFTWARE_IMAGE: &str = "software image";
pub const SIDE_A: &str = "side A";
pub const SIDE_B: &str = "side B";

// source kinds
pub const DONOR: &str = "donor";

// statement qualifiers
pub const TRANSCRIBED_FROM: &str = "transcribed-from";
pub const CONFIRMED_MATCH: &str = "confirmed-match";
pub const MISMATCH: &str = "mismatch";

/// Every term the bootstrap activity guarantees, in creation order.
pub const BOOTSTRAP_TERMS: &[&str] = &[
    BOOTSTRAP,
    ACCESSION,
    REGISTRATION,
    HOLDING_CURATION,
    REGROUPING,
    DIGITIZATION,
    PHOTOGRAPHY,
    TRANSCRIPTION,
    REFERENCE_LINKING,
    VERIFICATION,
    TOSEC_INGEST,
    PUBLICATION,
    IMPORT,
    INVENTORY_ID,
    TOSEC_NAME,
    NAME,
    ADDRESS,
    FILE_PATH,
    CASSETTE_SET,
    MAGNETIC_TAPE,
    PAPER_INLAY,
    OTHER_PART,
    TAPE_RECORDER,
    RAW_AUDIO,
    PHOTOGRAPH,
    TITLE,
    EXTERNAL_RESOURCE,
    SOFTWARE_IMAGE,
    SIDE_A,
    SIDE_B,
    DONOR,
    TRANSCRIBED_FROM,
    CONFIRMED_MATCH,
    MISMATCH,
];
