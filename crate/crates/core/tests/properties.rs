//! Store invariants checked over random sessions.

mod common;

use common::Session;
use crmcat_core::model::vocabulary as v;
use crmcat_core::model::SequentialIds;
use crmcat_core::serialization::{export_turtle, import_turtle, replay_records, ExportScope};
use crmcat_core::workflows::*;
use crmcat_core::{CatalogConfig, CatalogError};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn failed_activity_leaves_no_trace(seed in any::<u64>(), ops in 0usize..60, fault in 1usize..40) {
        let mut s = Session::new(seed);
        s.run_ops(ops);
        let before = s.cat.snapshot();
        let op = s.pools.operators[0].clone();
        s.cat.set_fault_at(Some(fault));
        let result = accession_cassette(&mut s.cat, &CassetteAccessionSpec {
            inventory_id: "FAULT-1".into(),
            parts: vec![PartSpec::new(PartKind::Tape), PartSpec::new(PartKind::Inlay)],
            source: Some(SourceSpec { name: "Donor".into(), address: Some("Elm St 2".into()), kind: v::DONOR.into() }),
            by: Attribution::new(&op, common::TS),
        });
        s.cat.set_fault_at(None);
        prop_assert!(!s.cat.is_open());
        match result {
            Err(CatalogError::FaultInjected(step)) => {
                prop_assert_eq!(step, fault);
                prop_assert_eq!(&*before, s.cat.graph());
            }
            Ok(done) => prop_assert!(s.cat.graph().entity(&done.value.set).is_some()),
            Err(other) => prop_assert!(false, "unexpected {other}"),
        }
        let replayed = replay_records(CatalogConfig::default(), s.cat.log_records().to_vec()).unwrap();
        prop_assert_eq!(replayed.catalog.graph(), s.cat.graph());
    }

    #[test]
    fn indexes_and_effect_counts_stay_consistent(seed in any::<u64>(), ops in 1usize..150) {
        let mut s = Session::new(seed);
        s.run_ops(ops);
        let g = s.cat.graph();
        prop_assert!(g.indexes_consistent());
        for a in g.activities() {
            let asserted = g
                .statements()
                .iter()
                .filter(|st| st.asserted_by == a.iri && !a.scaffold_statements.contains(&st.id))
                .count();
            let retracted = g.statements().iter().filter(|st| st.retracted_by.as_ref() == Some(&a.iri)).count();
            let created = g
                .entities()
                .filter(|e| e.created_by == a.iri && !a.scaffold_entities.contains(&e.iri))
                .count();
            prop_assert_eq!((a.statements_asserted, a.statements_retracted, a.entities_created), (asserted, retracted, created));
        }
    }

    #[test]
    fn truncated_log_recovers_a_committed_prefix(seed in any::<u64>(), ops in 1usize..80, cut in 0.0f64..1.0) {
        let mut s = Session::new(seed);
        s.run_ops(ops);
        let records = s.cat.log_records();
        let keep = (records.len() as f64 * cut) as usize;
        let replayed = replay_records(CatalogConfig::default(), records[..keep].to_vec()).unwrap();
        let partial = replayed.catalog.graph();
        let full = s.cat.graph();
        let n = partial.activities().len();
        prop_assert_eq!(partial.activities(), &full.activities()[..n]);
        for e in partial.entities() {
            prop_assert_eq!(Some(e), full.entity(&e.iri));
        }
        for st in partial.statements() {
            let later = full.statement(st.id).unwrap();
            prop_assert_eq!((&st.subject, &st.property, &st.object), (&later.subject, &later.property, &later.object));
        }
    }

    #[test]
    fn full_export_is_deterministic_and_lossless(seed in any::<u64>(), ops in 1usize..80) {
        let mut s = Session::new(seed);
        s.run_ops(ops);
        let ttl = export_turtle(s.cat.graph(), ExportScope::Full);
        prop_assert_eq!(&ttl, &export_turtle(s.cat.graph(), ExportScope::Full));
        let back = import_turtle(CatalogConfig::default(), &ttl, Box::new(SequentialIds::new(0)), common::TS).unwrap();
        prop_assert!(back.import_activity.is_none());
        prop_assert_eq!(back.catalog.graph(), s.cat.graph());
    }
}
