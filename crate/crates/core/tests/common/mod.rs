//! Shared fixtures for the integration suites: seeded random sessions and
//! a grammar-driven TOSEC name generator.
#![allow(dead_code)]

use crmcat_core::ledger::ActivityRequest;
use crmcat_core::model::vocabulary as v;
use crmcat_core::tosec::{field_kind, DumpFlag, PositionalField, TosecRecord, FLAG_CODES};
use crmcat_core::workflows::*;
use crmcat_core::{tosec, Catalog, CatalogConfig, Iri, StatementId};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TS: &str = "2024-05-01T09:00/2024-05-01T17:00";

#[derive(Default)]
pub struct Pools {
    pub operators: Vec<Iri>,
    pub sets: Vec<Iri>,
    pub tapes: Vec<Iri>,
    pub inlays: Vec<Iri>,
    pub parts: Vec<Iri>,
    pub recorders: Vec<Iri>,
    pub photos: Vec<Iri>,
    pub titles: Vec<Iri>,
    pub binaries: Vec<Iri>,
}

/// A catalog driven by a seeded sequence of mixed operations.
pub struct Session {
    pub cat: Catalog,
    pub rng: ChaCha8Rng,
    pub pools: Pools,
    pub ops: usize,
    pub failures: usize,
    next_inventory: usize,
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [Iri]) -> Option<&'a Iri> {
    pool.choose(rng)
}

impl Session {
    pub fn new(seed: u64) -> Session {
        let mut cat = Catalog::deterministic(CatalogConfig::default()).expect("bootstrap");
        let op = register_operator(
            &mut cat,
            &RegisterOperatorSpec {
                name: "Volunteer 0".into(),
                operator: None,
                timespan: TS.into(),
            },
        )
        .expect("operator")
        .value;
        Session {
            cat,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pools: Pools {
                operators: vec![op],
                ..Pools::default()
            },
            ops: 0,
            failures: 0,
            next_inventory: 1,
        }
    }

    fn by(&mut self) -> Attribution {
        let op = pick(&mut self.rng, &self.pools.operators).expect("operator").clone();
        let day = self.rng.random_range(1..=28);
        Attribution::new(&op, format!("2024-06-{day:02}/2024-06-{day:02}"))
    }

    pub fn accession(&mut self) {
        let n = self.rng.random_range(1..=3);
        let mut parts = vec![PartSpec::new(PartKind::Tape)];
        for _ in 1..n {
            let kind = *[PartKind::Tape, PartKind::Inlay, PartKind::Other].choose(&mut self.rng).unwrap();
            parts.push(PartSpec::new(kind));
        }
        let source = self.rng.random_bool(0.4).then(|| SourceSpec {
            name: format!("Donor {}", self.rng.random_range(0..20)),
            address: self.rng.random_bool(0.5).then(|| "Main St 1".to_string()),
            kind: v::DONOR.into(),
        });
        let id = format!("FHKD-{:05}", self.next_inventory);
        self.next_inventory += 1;
        let by = self.by();
        let spec = CassetteAccessionSpec {
            inventory_id: id,
            parts: parts.clone(),
            source,
            by,
        };
        let done = accession_cassette(&mut self.cat, &spec).expect("accession").value;
        for (iri, part) in done.parts.iter().zip(&parts) {
            match part.kind {
                PartKind::Tape => self.pools.tapes.push(iri.clone()),
                PartKind::Inlay => self.pools.inlays.push(iri.clone()),
                PartKind::Other => {}
            }
            self.pools.parts.push(iri.clone());
        }
        self.pools.sets.push(done.set);
    }

    fn step(&mut self) -> Result<(), String> {
        let roll = self.rng.random_range(0..100);
        let by = self.by();
        let err = |e: crmcat_core::CatalogError| e.to_string();
        match roll {
            0..=17 => self.accession(),
            18..=21 => {
                let name = (self.rng.random_bool(0.5)).then(|| format!("Recorder {}", self.pools.recorders.len()));
                let iri = register_object(
                    &mut self.cat,
                    &RegisterObjectSpec {
                        type_label: v::TAPE_RECORDER.into(),
                        name,
                        by,
                    },
                )
                .map_err(err)?
                .value;
                self.pools.recorders.push(iri);
            }
            22..=23 => {
                let name = format!("Volunteer {}", self.pools.operators.len());
                let iri = register_operator(
                    &mut self.cat,
                    &RegisterOperatorSpec {
                        name,
                        operator: Some(by.operator.clone()),
                        timespan: by.timespan.clone(),
                    },
                )
                .map_err(err)?
                .value;
                self.pools.operators.push(iri);
            }
            24..=39 => {
                let (Some(tape), Some(recorder)) = (
                    pick(&mut self.rng, &self.pools.tapes).cloned(),
                    pick(&mut self.rng, &self.pools.recorders).cloned(),
                ) else {
                    return Ok(());
                };
                let n = self.rng.random_range(0..1000);
                let audio = record_digitization(
                    &mut self.cat,
                    &DigitizationSpec {
                        tape,
                        recorder,
                        file_path: format!("/captures/{n}.wav"),
                        storage_place: "nas01:/archive".into(),
                        by,
                    },
                )
                .map_err(err)?
                .value;
                self.pools.binaries.push(audio);
            }
            40..=47 => {
                let pool: Vec<Iri> = self.pools.inlays.iter().chain(&self.pools.sets).cloned().collect();
                let Some(subject) = pick(&mut self.rng, &pool).cloned() else {
                    return Ok(());
                };
                let photo = record_photograph(
                    &mut self.cat,
                    &PhotographSpec {
                        subject,
                        file_path: format!("/photos/{}.jpg", self.rng.random_range(0..1000)),
                        place: "nas01:/photos".into(),
                        by,
                    },
                )
                .map_err(err)?
                .value;
                self.pools.photos.push(photo);
            }
            48..=55 => {
                let Some(photo) = pick(&mut self.rng, &self.pools.photos).cloned() else {
                    return Ok(());
                };
                let n = self.rng.random_range(1..=3);
                let titles = (0..n)
                    .map(|i| InlayTitle {
                        side: if i % 2 == 0 { Side::A } else { Side::B },
                        title: ["Zorro", "Boulder Dash", "River Raid", "Fort Apocalypse"]
                            .choose(&mut self.rng)
                            .unwrap()
                            .to_string(),
                    })
                    .collect();
                let made = decompose_inlay(&mut self.cat, &DecomposeSpec { photo, titles, by })
                    .map_err(err)?
                    .value;
                self.pools.titles.extend(made);
            }
            56..=60 => {
                let Some(subject) = pick(&mut self.rng, &self.pools.titles).cloned() else {
                    return Ok(());
                };
                let n = self.rng.random_range(0..15);
                link_external_reference(
                    &mut self.cat,
                    &LinkSpec {
                        subject,
                        external_iri: format!("https://www.atarimania.com/game-{n}.html"),
                        relation: "game description".into(),
                        by,
                    },
                )
                .map_err(err)?;
            }
            61..=67 => {
                let (Some(binary), Some(title)) = (
                    pick(&mut self.rng, &self.pools.binaries).cloned(),
                    pick(&mut self.rng, &self.pools.titles).cloned(),
                ) else {
                    return Ok(());
                };
                let outcome = if self.rng.random_bool(0.7) { Outcome::Confirmed } else { Outcome::Mismatch };
                record_verification(
                    &mut self.cat,
                    &VerificationSpec {
                        binary,
                        title,
                        outcome,
                        by,
                    },
                )
                .map_err(err)?;
            }
            68..=70 => {
                if self.pools.tapes.is_empty() {
                    return Ok(());
                }
                let n = self.rng.random_range(1..=3.min(self.pools.tapes.len()));
                let members: Vec<Iri> = self.pools.tapes.choose_multiple(&mut self.rng, n).cloned().collect();
                create_holding(
                    &mut self.cat,
                    &HoldingSpec {
                        label: format!("Holding {}", self.ops),
                        members,
                        by,
                    },
                )
                .map_err(err)?;
            }
            71..=75 => {
                let Some(part) = pick(&mut self.rng, &self.pools.parts).cloned() else {
                    return Ok(());
                };
                let Some(to) = pick(&mut self.rng, &self.pools.sets).cloned() else {
                    return Ok(());
                };
                let g = self.cat.graph();
                let Some(from) = g
                    .in_statements(&part, Some("P106"))
                    .find(|s| g.entity(&s.subject).is_some_and(|e| e.class_code == "E22"))
                    .map(|s| s.subject.clone())
                else {
                    return Ok(());
                };
                if from == to {
                    return Ok(());
                }
                regroup_part(&mut self.cat, &RegroupSpec { part, from, to, by }).map_err(err)?;
            }
            76..=81 => self.retract_random(by)?,
            82..=85 => {
                // an activity that is opened, does some work and is abandoned
                let kind = self.cat.kind(v::ACCESSION).map_err(err)?;
                let mut ctx = self
                    .cat
                    .begin_activity(ActivityRequest::new(&by.operator, &kind, &by.timespan, "abandoned"))
                    .map_err(err)?;
                let e = self.cat.create_entity(&ctx, "E22", None).map_err(err)?;
                self.cat.link(&ctx, &ctx.activity_iri.clone(), "P16", &e).map_err(err)?;
                self.cat.abort_activity(&mut ctx).map_err(err)?;
            }
            86..=89 => {
                // rejected operations leave no trace
                let dup = self.pools.sets.len().max(1);
                let spec = CassetteAccessionSpec {
                    inventory_id: format!("FHKD-{dup:05}"),
                    parts: vec![PartSpec::new(PartKind::Tape)],
                    source: None,
                    by,
                };
                if accession_cassette(&mut self.cat, &spec).is_err() {
                    self.failures += 1;
                } else {
                    self.next_inventory = self.next_inventory.max(dup + 1);
                }
            }
            _ => {
                let (name, _) = tosec_name(&mut self.rng);
                match tosec::ingest_filename(&mut self.cat, &name, &by) {
                    Ok(done) => self.pools.binaries.push(done.value.image),
                    Err(_) => self.failures += 1,
                }
            }
        }
        Ok(())
    }

    /// Retracts a random live non-scaffold statement in its own activity.
    pub fn retract_random(&mut self, by: Attribution) -> Result<(), String> {
        let g = self.cat.graph();
        let scaffold: std::collections::HashSet<StatementId> =
            g.activities().iter().flat_map(|a| a.scaffold_statements.iter().copied()).collect();
        let live: Vec<StatementId> = g
            .live_statements()
            .filter(|s| !scaffold.contains(&s.id) && s.property != "P2")
            .map(|s| s.id)
            .collect();
        let Some(&id) = live.choose(&mut self.rng) else {
            return Ok(());
        };
        let kind = self.cat.kind(v::REGROUPING).map_err(|e| e.to_string())?;
        self.cat
            .run_activity(ActivityRequest::new(&by.operator, &kind, &by.timespan, "correct a mistaken statement"), |c, ctx| {
                c.retract_statement(ctx, id).map(|_| ())
            })
            .map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn run_ops(&mut self, n: usize) {
        for _ in 0..n {
            self.step().unwrap_or_else(|e| panic!("op {} failed: {e}", self.ops));
            self.ops += 1;
        }
    }

    /// Runs operations until the event log holds at least `events` records.
    pub fn run_until_events(&mut self, events: usize) {
        while self.cat.log_records().len() < events {
            self.run_ops(1);
        }
    }
}

const TITLE_WORDS: &[&str] = &[
    "Zorro", "Boulder", "Dash", "River", "Raid", "Fort", "Apocalypse", "Star", "Raiders", "Jumpman", "Junior",
    "Miner", "2049er", "Pitfall", "Ghost", "Chaser", "Blue", "Max", "Kennedy", "Approach",
];
const ARTICLES: &[&str] = &["The", "A", "Die", "Le"];
const PUBLISHERS: &[&str] = &["Parker Brothers", "Atari", "Synapse Software", "Activision", "Sierra On-Line", "Imagic"];
const FIELDS: &[&str] = &["US", "PAL", "NTSC", "en", "de-fr", "PD", "beta", "Side A", "Disk 1 of 2", "800XL", "joystick"];

/// A random name valid under the filename grammar, with its intended record.
pub fn tosec_name(rng: &mut ChaCha8Rng) -> (String, TosecRecord) {
    let words = rng.random_range(1..=3);
    let title = (0..words)
        .map(|_| *TITLE_WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ");
    let year = if rng.random_bool(0.1) {
        format!("19{}x", rng.random_range(7..=9))
    } else {
        rng.random_range(1977..=1995).to_string()
    };
    let date = match rng.random_range(0..4) {
        0 => format!("{year}-{:02}", rng.random_range(1..=12)),
        1 => format!("{year}-{:02}-{:02}", rng.random_range(1..=12), rng.random_range(1..=28)),
        2 => format!("{year}-xx-xx"),
        _ => year,
    };
    let fields = (0..rng.random_range(0..=3))
        .map(|_| {
            let raw = *FIELDS.choose(rng).unwrap();
            PositionalField {
                kind: field_kind(raw),
                raw: raw.into(),
            }
        })
        .collect();
    let flags = (0..rng.random_range(0..=2))
        .map(|_| {
            let code = *FLAG_CODES.choose(rng).unwrap();
            let argument = match (code, rng.random_range(0..3)) {
                ("!", _) | (_, 0) => None,
                (_, 1) => Some(rng.random_range(1..10).to_string()),
                _ => Some(["Fairlight", "PDX", "Ikari"].choose(rng).unwrap().to_string()),
            };
            DumpFlag {
                code: code.into(),
                argument,
            }
        })
        .collect();
    let record = TosecRecord {
        title,
        article_suffix: rng.random_bool(0.15).then(|| ARTICLES.choose(rng).unwrap().to_string()),
        version: rng.random_bool(0.15).then(|| format!("v1.{}", rng.random_range(0..10))),
        demo_marker: rng.random_bool(0.1).then(|| "demo".to_string()),
        date,
        publisher: if rng.random_bool(0.15) {
            "-".into()
        } else {
            PUBLISHERS.choose(rng).unwrap().to_string()
        },
        positional_fields: fields,
        dump_flags: flags,
        extension: ["bin", "atr", "cas", "xex", ""].choose(rng).unwrap().to_string(),
    };
    (record.to_string(), record)
}
