//! Physics-infused digital twin descriptions and rule-based matching of
//! technical systems to reusable control programs.
//!
//! Building automation relies on libraries of reusable control programs.
//! Selecting the right program for an installed technical system is usually
//! manual work: someone reads the system's design documentation and the
//! program descriptions and decides what fits. This crate automates that
//! decision by making the physical process a first-class part of both
//! descriptions:
//!
//! * [`vocab`] — namespaced identifiers and a class taxonomy with
//!   reflexive-transitive subclass reasoning,
//! * [`model`] — process variables, mechanisms, components, sensors,
//!   actuators, and design specifications,
//! * [`sdd`] — System Design Descriptions of concrete technical systems,
//! * [`cpd`] — Control Program Descriptions with their embedded abstract
//!   system designs,
//! * [`td`] — Thing Descriptions: digital-twin documents synthesized from
//!   system designs and carrying the process metadata needed for matching,
//! * [`matcher`] — the rule engine deciding which control programs fit
//!   which twins, with explainable per-rule reports,
//! * [`corpus`] — a deterministic generator for the bundled evaluation
//!   corpus of air-handling-unit twins,
//! * [`ablation`] — the harness measuring which thing-description metadata
//!   each successful match actually needs.
//!
//! The narrative guide lives in `book/`; its code snippets are compiled as
//! doc-tests of this crate.

pub mod ablation;
pub mod corpus;
pub mod matcher;
pub mod model;
pub mod report;
pub mod sdd;
pub mod td;
pub mod vocab;

pub mod cpd;

pub use matcher::{MatchConfig, MatchOutcome, MatchReport, Matcher};
pub use model::{Diagnostic, ProcessVariable, Severity};
pub use sdd::SystemDesign;
pub use td::{MetadataAspect, ThingDescription};
pub use vocab::{Iri, Taxonomy};

/// Compiles the book's code snippets as doc-tests so the guide can never
/// drift from the library.
#[cfg(doctest)]
mod booktest {
    macro_rules! booktest {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $path))]
            mod $name {}
        };
    }
    booktest!(taxonomy, "taxonomy.md");
    booktest!(system_designs, "system-designs.md");
    booktest!(control_programs, "control-programs.md");
    booktest!(thing_descriptions, "thing-descriptions.md");
    booktest!(matching, "matching.md");
    booktest!(corpus, "corpus.md");
}
