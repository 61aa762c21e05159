use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{parse_tosec, TosecError, TosecRecord};
use crate::error::CatalogError;
use crate::ledger::{Catalog, Committed};
use crate::model::vocabulary as v;
use crate::model::Iri;
use crate::workflows::Attribution;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error(transparent)]
    Parse(#[from] TosecError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::Parse(e) => e.code(),
            IngestError::Catalog(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TosecIngest {
    pub image: Iri,
    pub publication: Option<Iri>,
    pub record: TosecRecord,
}

/// Vocabulary labels classifying a record, one per field and flag, in order.
pub fn classification_labels(record: &TosecRecord) -> Vec<String> {
    let fields = record
        .positional_fields
        .iter()
        .map(|f| format!("{}:{}", f.kind.as_str(), f.raw));
    let flags = record.dump_flags.iter().map(|f| format!("flag:{f}"));
    fields.chain(flags).collect()
}

/// Catalogs one software image from its filename alone.
pub fn ingest_filename(
    cat: &mut Catalog,
    filename: &str,
    by: &Attribution,
) -> Result<Committed<TosecIngest>, IngestError> {
    let record = parse_tosec(filename)?;
    if cat
        .graph()
        .entities_with_literal(filename)
        .any(|e| e.class_code == "E42")
    {
        return Err(CatalogError::DuplicateIdentifier(filename.to_string()).into());
    }
    // exact label match only
    let publisher = cat
        .graph()
        .entities_with_literal(&record.publisher)
        .find(|e| e.class_code == "E39")
        .map(|e| e.iri.clone());
    let note = by.note.clone().unwrap_or_else(|| format!("ingest {filename}"));
    let req = crate::ledger::ActivityRequest::new(&by.operator, &cat.kind(v::TOSEC_INGEST)?, &by.timespan, note);
    let committed = cat.run_activity(req, |c, ctx| {
        let image = c.create_entity(ctx, "E73", None)?;
        let image_type = c.vocab(ctx, v::SOFTWARE_IMAGE)?;
        c.link(ctx, &image, "P2", &image_type)?;

        let name = c.create_entity(ctx, "E42", Some(filename))?;
        c.link(ctx, &image, "P1", &name)?;
        let name_type = c.vocab(ctx, v::TOSEC_NAME)?;
        c.link(ctx, &name, "P2", &name_type)?;

        let title = c.create_entity(ctx, "E41", Some(&record.title))?;
        c.link(ctx, &image, "P1", &title)?;

        for label in classification_labels(&record) {
            let t = c.vocab(ctx, &label)?;
            c.link(ctx, &image, "P2", &t)?;
        }

        let publication = if record.has_known_publisher() {
            let event = c.create_entity(ctx, "E65", None)?;
            let event_type = c.vocab(ctx, v::PUBLICATION)?;
            c.link(ctx, &event, "P2", &event_type)?;
            let actor = match &publisher {
                Some(iri) => iri.clone(),
                None => c.create_entity(ctx, "E39", Some(&record.publisher))?,
            };
            c.link(ctx, &event, "P14", &actor)?;
            let date = c.create_entity(ctx, "E52", Some(&record.date_timespan()))?;
            c.link(ctx, &event, "P4", &date)?;
            c.link(ctx, &event, "P94", &image)?;
            Some(event)
        } else {
            None
        };
        Ok(TosecIngest {
            image,
            publication,
            record: record.clone(),
        })
    })?;
    Ok(committed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub filename: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub ok: usize,
    pub ingested: Vec<Iri>,
    pub errors: Vec<BatchFailure>,
}

/// Ingests each name in its own activity. Failures are collected, not fatal.
pub fn ingest_batch<S: AsRef<str>>(cat: &mut Catalog, filenames: &[S], by: &Attribution) -> BatchSummary {
    let mut summary = BatchSummary::default();
    for name in filenames {
        let name = name.as_ref();
        match ingest_filename(cat, name, by) {
            Ok(done) => {
                summary.ok += 1;
                summary.ingested.push(done.value.image);
            }
            Err(e) => summary.errors.push(BatchFailure {
                filename: name.to_string(),
                code: e.code().to_string(),
                message: e.to_string(),
            }),
        }
    }
    summary
}
