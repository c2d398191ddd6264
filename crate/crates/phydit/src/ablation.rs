//! Ablation harness: measures which thing-description metadata each
//! successful match actually needs.
//!
//! For every twin with a successful match and each of the ten metadata
//! aspects, the aspect is removed from the twin's thing description and the
//! commissioned program is re-matched. An aspect is *necessary* for a twin
//! when its removal loses that match. Twins are then grouped by their
//! necessary-aspect set and per-aspect necessity percentages are computed
//! over all successfully matched twins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{twin_id_of, CorpusBundle};
use crate::matcher::Matcher;
use crate::td::{self, MetadataAspect, ThingDescription};
use crate::vocab::Taxonomy;

/// Necessity of one metadata aspect across the successfully matched twins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectNecessity {
    pub aspect: MetadataAspect,
    /// Twins whose match is lost when this aspect is removed.
    pub necessary: usize,
    /// Integer percentage of `necessary` over the report basis.
    pub percent: u32,
    /// Which groups (in report order) require this aspect.
    pub groups: Vec<bool>,
}

/// One necessity group: twins sharing the same necessary-aspect set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectGroup {
    pub label: String,
    pub twins: Vec<String>,
    pub aspects: Vec<MetadataAspect>,
}

/// The full ablation report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationReport {
    /// Number of successfully matched twins the percentages refer to.
    pub basis: usize,
    pub groups: Vec<AspectGroup>,
    pub aspects: Vec<AspectNecessity>,
}

#[derive(Debug, Error)]
pub enum AblationError {
    #[error("twin `{twin}`: matches {found:?} but ground truth expects {expected:?}")]
    GroundTruthMismatch {
        twin: String,
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("twin `{twin}`: {source}")]
    Synthesis {
        twin: String,
        source: td::TdError,
    },
    #[error("control program `{cpd}`: {source}")]
    Cpd {
        cpd: String,
        source: crate::cpd::CpdError,
    },
}

/// Integer percentage with deterministic tie handling: exact halves round
/// down, except for super-majorities (count above three quarters of the
/// basis), which round up.
pub fn necessity_percent(count: usize, basis: usize) -> u32 {
    if basis == 0 {
        return 0;
    }
    let whole = (100 * count / basis) as u32;
    let remainder = 100 * count % basis;
    if 2 * remainder > basis || (2 * remainder == basis && 4 * count > 3 * basis) {
        whole + 1
    } else {
        whole
    }
}

/// Runs the ablation study over a corpus bundle. As a precondition the
/// plain (un-ablated) matches must reproduce the bundle's ground truth;
/// a mismatch aborts with an error.
pub fn ablation_study(
    bundle: &CorpusBundle,
    taxonomy: &Taxonomy,
) -> Result<AblationReport, AblationError> {
    let matcher = Matcher::new(taxonomy);

    let tds: Vec<ThingDescription> = bundle
        .sdds
        .iter()
        .map(|sdd| {
            td::synthesize(sdd, taxonomy).map_err(|source| AblationError::Synthesis {
                twin: sdd.id.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    let cpds: Vec<_> = bundle
        .cpds
        .iter()
        .map(|c| {
            c.canonicalize(taxonomy).map_err(|source| AblationError::Cpd {
                cpd: c.id.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    // Precondition: the corpus reproduces its ground truth.
    let matrix = matcher.match_all(&tds, &cpds);
    for summary in &matrix.summaries {
        let truth = &bundle.ground_truth.twins[twin_id_of(&summary.td_id)];
        let mut found = summary.matched.clone();
        found.sort();
        if found != truth.expected {
            return Err(AblationError::GroundTruthMismatch {
                twin: summary.td_id.clone(),
                found,
                expected: truth.expected.clone(),
            });
        }
    }

    // Per-twin necessary-aspect sets.
    let mut necessary_sets: BTreeMap<String, Vec<MetadataAspect>> = BTreeMap::new();
    for td_doc in &tds {
        let twin_id = twin_id_of(&td_doc.id).to_string();
        let truth = &bundle.ground_truth.twins[&twin_id];
        let Some(correct_id) = &truth.correct else {
            continue;
        };
        let correct = cpds
            .iter()
            .find(|c| &c.id == correct_id)
            .expect("ground truth references a library program");
        let mut necessary = Vec::new();
        for aspect in MetadataAspect::ALL {
            let ablated = td::ablate(td_doc, aspect);
            if !matcher.match_pair(&ablated, correct).overall {
                necessary.push(aspect);
            }
        }
        necessary_sets.insert(twin_id, necessary);
    }

    let basis = necessary_sets.len();

    // Group twins by necessary-aspect set; label groups A, B, ... by
    // ascending set size (ties broken by the sets' aspect order).
    let mut by_set: BTreeMap<Vec<MetadataAspect>, Vec<String>> = BTreeMap::new();
    for (twin, set) in &necessary_sets {
        by_set.entry(set.clone()).or_default().push(twin.clone());
    }
    let mut keyed: Vec<(Vec<MetadataAspect>, Vec<String>)> = by_set.into_iter().collect();
    keyed.sort_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let groups: Vec<AspectGroup> = keyed
        .into_iter()
        .enumerate()
        .map(|(i, (aspects, mut twins))| {
            twins.sort();
            AspectGroup {
                label: char::from(b'A' + i as u8).to_string(),
                twins,
                aspects,
            }
        })
        .collect();

    let aspects = MetadataAspect::ALL
        .into_iter()
        .map(|aspect| {
            let necessary = necessary_sets
                .values()
                .filter(|set| set.contains(&aspect))
                .count();
            AspectNecessity {
                aspect,
                necessary,
                percent: necessity_percent(necessary, basis),
                groups: groups
                    .iter()
                    .map(|g| g.aspects.contains(&aspect))
                    .collect(),
            }
        })
        .collect();

    Ok(AblationReport {
        basis,
        groups,
        aspects,
    })
}

impl AblationReport {
    pub fn aspect(&self, aspect: MetadataAspect) -> &AspectNecessity {
        self.aspects
            .iter()
            .find(|a| a.aspect == aspect)
            .expect("all aspects present")
    }

    pub fn group(&self, label: &str) -> Option<&AspectGroup> {
        self.groups.iter().find(|g| g.label == label)
    }

    /// Renders the report as a fixed-width table: one row per aspect with
    /// its necessity percentage, one column per group with a bullet where
    /// the group requires the aspect.
    pub fn render_table(&self) -> String {
        let label_width = MetadataAspect::ALL
            .iter()
            .map(|a| a.label().len())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let header: Vec<String> = self
            .groups
            .iter()
            .map(|g| format!("{} ({})", g.label, g.twins.len()))
            .collect();
        out.push_str(&format!(
            "{:<label_width$}  {:>5}  {:>4}  {}\n",
            "TD metadata aspect",
            "nec.",
            "%",
            header.join("  ")
        ));
        let rule_width = label_width + 13 + header.iter().map(|h| h.len() + 2).sum::<usize>();
        out.push_str(&"-".repeat(rule_width));
        out.push('\n');
        for row in &self.aspects {
            let marks: Vec<String> = row
                .groups
                .iter()
                .zip(&self.groups)
                .map(|(required, g)| {
                    let width = format!("{} ({})", g.label, g.twins.len()).len();
                    format!("{:^width$}", if *required { "*" } else { "" })
                })
                .collect();
            out.push_str(&format!(
                "{:<label_width$}  {:>2}/{:>2}  {:>3}%  {}\n",
                row.aspect.label(),
                row.necessary,
                self.basis,
                row.percent,
                marks.join("  ")
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn percent_convention_handles_halves() {
        assert_eq!(necessity_percent(32, 32), 100);
        assert_eq!(necessity_percent(28, 32), 88);
        assert_eq!(necessity_percent(20, 32), 62);
        assert_eq!(necessity_percent(12, 32), 37);
        assert_eq!(necessity_percent(4, 32), 12);
        assert_eq!(necessity_percent(0, 32), 0);
        assert_eq!(necessity_percent(1, 3), 33);
        assert_eq!(necessity_percent(2, 3), 67);
    }

    #[test]
    fn study_reproduces_reference_table() {
        let bundle = corpus::generate(corpus::DEFAULT_SEED);
        let report = ablation_study(&bundle, Taxonomy::shipped()).unwrap();
        assert_eq!(report.basis, 32);

        let sizes: Vec<(String, usize)> = report
            .groups
            .iter()
            .map(|g| (g.label.clone(), g.twins.len()))
            .collect();
        assert_eq!(
            sizes,
            vec![
                ("A".to_string(), 4),
                ("B".to_string(), 8),
                ("C".to_string(), 16),
                ("D".to_string(), 4)
            ]
        );

        let expect = [
            (MetadataAspect::SystemType, 100),
            (MetadataAspect::ProcessType, 88),
            (MetadataAspect::SensorType, 37),
            (MetadataAspect::ObservedVariable, 62),
            (MetadataAspect::PropertyComponentPosition, 12),
            (MetadataAspect::ActuatorType, 100),
            (MetadataAspect::ManipulatedVariable, 62),
            (MetadataAspect::AffectedVariable, 62),
            (MetadataAspect::ActionComponentPosition, 62),
            (MetadataAspect::DesignParameters, 12),
        ];
        for (aspect, percent) in expect {
            assert_eq!(report.aspect(aspect).percent, percent, "{aspect}");
        }
    }

    #[test]
    fn table_renders_with_bullets() {
        let bundle = corpus::generate(corpus::DEFAULT_SEED);
        let report = ablation_study(&bundle, Taxonomy::shipped()).unwrap();
        let table = report.render_table();
        assert!(table.contains("A (4)"));
        assert!(table.contains("C (16)"));
        assert!(table.contains("100%"));
    }
}
