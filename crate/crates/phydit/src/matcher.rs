//! The rule engine deciding whether a control program fits a technical
//! system, working purely on the system's thing description.
//!
//! Six verdicts make up a match, and the overall result is their
//! conjunction:
//!
//! 1. **system compatible** — some ASD system class is a subclass
//!    (reflexively) of the thing's `@type`,
//! 2. **process compatible** — that ASD's managed process class is a
//!    subclass of the thing's managed process; vacuously true when the ASD
//!    declares no process,
//! 3. **input compatible** — every program input binds injectively to a
//!    property affordance satisfying the sensor-class and observed-variable
//!    requirements its ASD sensor states,
//! 4. **output compatible** — every program output binds injectively to an
//!    action affordance satisfying the actuator-class, manipulated- and
//!    affected-variable requirements,
//! 5. **action coverage** — dually, every action affordance of the thing is
//!    covered by some compatible program output, so a program is never
//!    chosen that drives only a subset of the actuation interfaces,
//! 6. **spec compatible** — every program parameter finds an equivalent
//!    specified variable among the thing's design specifications, carrying
//!    at least one bound value.
//!
//! Requirements are closed-world on the thing side: whatever an ASD states
//! must be present and compatible in the thing description; metadata the
//! ASD does not state is unconstrained. Units are never compared.
//!
//! Binding is resolved as maximum bipartite matching over the pairwise
//! compatibility graph; a rule holds iff a perfect matching exists on the
//! program side (and on the thing side for action coverage).

use serde::{Deserialize, Serialize};

use crate::cpd::ControlProgramDesc;
use crate::model::ProcessVariable;
use crate::sdd::SystemDesign;
use crate::td::ThingDescription;
use crate::vocab::{Iri, Taxonomy};

/// Matcher knobs. `compare_component_context` enables the extension of
/// variable equivalence that also compares the component and mechanism a
/// variable is related to (when both sides carry them).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchConfig {
    pub compare_component_context: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            compare_component_context: true,
        }
    }
}

/// Why a rule failed, naming the first unsatisfied requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleFailure {
    pub rule: String,
    pub message: String,
}

/// IO and parameter bindings recorded for a (thing, program) pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    /// program input id -> property affordance name
    pub inputs: Vec<(String, String)>,
    /// program output id -> action affordance name
    pub outputs: Vec<(String, String)>,
    /// program parameter id -> specification name
    pub parameters: Vec<(String, String)>,
}

/// Per-rule verdicts and overall compatibility for one (thing description,
/// control program description) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub td_id: String,
    pub cpd_id: String,
    /// Id of the ASD whose evaluation this report shows (programs may
    /// declare several design variants; the best one is reported).
    pub asd_id: Option<String>,
    pub system_compatible: bool,
    pub process_compatible: bool,
    pub input_compatible: bool,
    pub output_compatible: bool,
    pub action_coverage: bool,
    pub spec_compatible: bool,
    pub overall: bool,
    pub bindings: Bindings,
    pub failure_reasons: Vec<RuleFailure>,
}

/// Classification of a thing's matches across a program library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchOutcome {
    Unique,
    Multiple,
    None,
}

/// Per-thing summary: which programs matched, most specific first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdSummary {
    pub td_id: String,
    pub outcome: MatchOutcome,
    pub matched: Vec<String>,
}

/// All pairwise reports (thing-major order) plus per-thing summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchMatrix {
    pub reports: Vec<MatchReport>,
    pub summaries: Vec<TdSummary>,
}

impl MatchMatrix {
    pub fn summary_for(&self, td_id: &str) -> Option<&TdSummary> {
        self.summaries.iter().find(|s| s.td_id == td_id)
    }
}

/// The rule engine. Pure and stateless: the same inputs always produce the
/// same report, and a matcher may be shared freely across threads.
pub struct Matcher<'t> {
    taxonomy: &'t Taxonomy,
    config: MatchConfig,
}

struct AsdEvaluation {
    asd_id: String,
    system: bool,
    process: bool,
    inputs: bool,
    outputs: bool,
    coverage: bool,
    specs: bool,
    bindings: Bindings,
    failures: Vec<RuleFailure>,
    depth: usize,
}

impl AsdEvaluation {
    fn passed(&self) -> usize {
        [
            self.system,
            self.process,
            self.inputs,
            self.outputs,
            self.coverage,
            self.specs,
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }

    fn overall(&self) -> bool {
        self.passed() == 6
    }
}

impl<'t> Matcher<'t> {
    pub fn new(taxonomy: &'t Taxonomy) -> Self {
        Self {
            taxonomy,
            config: MatchConfig::default(),
        }
    }

    pub fn with_config(taxonomy: &'t Taxonomy, config: MatchConfig) -> Self {
        Self { taxonomy, config }
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        self.taxonomy
    }

    /// Subclass check that treats unregistered classes as unrelated, so the
    /// matcher stays total.
    fn subclass(&self, sub: &Iri, sup: &Iri) -> bool {
        self.taxonomy.subclass_of(sub, sup).unwrap_or(false)
    }

    fn related_either_way(&self, a: &Iri, b: &Iri) -> bool {
        self.subclass(a, b) || self.subclass(b, a)
    }

    /// Variable equivalence: same stuff, same quantity kind, and process
    /// positions equal or both absent. Units are never compared. With the
    /// component-context extension enabled, components and mechanisms must
    /// be subclass-related (in either direction) when both sides carry
    /// them.
    pub fn equivalent(&self, a: &ProcessVariable, b: &ProcessVariable) -> bool {
        if a.stuff != b.stuff || a.quantity_kind != b.quantity_kind || a.position != b.position {
            return false;
        }
        if self.config.compare_component_context {
            let components_ok = match (
                a.at_component.as_ref().and_then(|c| c.as_class()),
                b.at_component.as_ref().and_then(|c| c.as_class()),
            ) {
                (Some(x), Some(y)) => self.related_either_way(x, y),
                _ => true,
            };
            let mechanisms_ok = match (
                a.mechanism.as_ref().and_then(|m| m.as_class()),
                b.mechanism.as_ref().and_then(|m| m.as_class()),
            ) {
                (Some(x), Some(y)) => self.related_either_way(x, y),
                _ => true,
            };
            return components_ok && mechanisms_ok;
        }
        true
    }

    // -- individual rules (any-ASD semantics) --------------------------------

    pub fn is_system_compatible(&self, cpd: &ControlProgramDesc, td: &ThingDescription) -> bool {
        cpd.asds.iter().any(|asd| self.system_rule(asd, td).0)
    }

    pub fn is_process_compatible(&self, cpd: &ControlProgramDesc, td: &ThingDescription) -> bool {
        cpd.asds.iter().any(|asd| self.process_rule(asd, td).0)
    }

    pub fn is_input_compatible(
        &self,
        cpd: &ControlProgramDesc,
        td: &ThingDescription,
    ) -> (bool, Vec<(String, String)>) {
        for asd in &cpd.asds {
            let (ok, bindings, _) = self.input_rule(cpd, asd, td);
            if ok {
                return (true, bindings);
            }
        }
        (false, Vec::new())
    }

    pub fn is_output_compatible(
        &self,
        cpd: &ControlProgramDesc,
        td: &ThingDescription,
    ) -> (bool, Vec<(String, String)>) {
        for asd in &cpd.asds {
            let (ok, bindings, _) = self.output_rule(cpd, asd, td);
            if ok {
                return (true, bindings);
            }
        }
        (false, Vec::new())
    }

    pub fn has_action_coverage(&self, cpd: &ControlProgramDesc, td: &ThingDescription) -> bool {
        cpd.asds.iter().any(|asd| self.coverage_rule(cpd, asd, td).0)
    }

    pub fn is_spec_compatible(
        &self,
        cpd: &ControlProgramDesc,
        td: &ThingDescription,
    ) -> (bool, Vec<(String, String)>) {
        let (ok, bindings, _) = self.spec_rule(cpd, td);
        (ok, bindings)
    }

    // -- rule bodies ---------------------------------------------------------

    fn system_rule(&self, asd: &SystemDesign, td: &ThingDescription) -> (bool, Option<RuleFailure>) {
        match &td.thing_class {
            Some(thing_class) => {
                if self.subclass(&asd.system_class, thing_class) {
                    (true, None)
                } else {
                    (
                        false,
                        Some(RuleFailure {
                            rule: "system".into(),
                            message: format!(
                                "ASD system class `{}` is not a subclass of thing type `{}`",
                                asd.system_class, thing_class
                            ),
                        }),
                    )
                }
            }
            None => (
                false,
                Some(RuleFailure {
                    rule: "system".into(),
                    message: "thing description carries no `@type`".into(),
                }),
            ),
        }
    }

    fn process_rule(&self, asd: &SystemDesign, td: &ThingDescription) -> (bool, Option<RuleFailure>) {
        let Some(process) = &asd.manages else {
            // The ASD states no process, so nothing is required.
            return (true, None);
        };
        match &td.manages_class {
            Some(managed) => {
                if self.subclass(&process.class, managed) {
                    (true, None)
                } else {
                    (
                        false,
                        Some(RuleFailure {
                            rule: "process".into(),
                            message: format!(
                                "ASD process `{}` is not a subclass of managed process `{}`",
                                process.class, managed
                            ),
                        }),
                    )
                }
            }
            None => (
                false,
                Some(RuleFailure {
                    rule: "process".into(),
                    message: format!(
                        "ASD requires process `{}` but the thing description states none",
                        process.class
                    ),
                }),
            ),
        }
    }

    /// Does the thing's property affordance satisfy everything the ASD
    /// sensor states?
    fn input_edge(&self, sensor: &crate::model::Sensor, prop: &crate::td::PropertyAffordance) -> bool {
        if let Some(wanted) = &sensor.class {
            match &prop.sensor_class {
                Some(offered) => {
                    if !self.subclass(wanted, offered) {
                        return false;
                    }
                }
                None => return false,
            }
        }
        if let Some(wanted) = &sensor.observes {
            match &prop.observes {
                Some(offered) => {
                    if !self.equivalent(wanted, offered) {
                        return false;
                    }
                }
                None => return false,
            }
        }
        true
    }

    fn input_rule(
        &self,
        cpd: &ControlProgramDesc,
        asd: &SystemDesign,
        td: &ThingDescription,
    ) -> (bool, Vec<(String, String)>, Option<RuleFailure>) {
        if cpd.inputs.is_empty() {
            return (true, Vec::new(), None);
        }
        let props: Vec<(&String, &crate::td::PropertyAffordance)> = td.properties.iter().collect();
        let mut adjacency = Vec::with_capacity(cpd.inputs.len());
        for input in &cpd.inputs {
            let Some(sensor) = asd.sensor(&input.intended_for) else {
                return (
                    false,
                    Vec::new(),
                    Some(RuleFailure {
                        rule: "input".into(),
                        message: format!(
                            "input `{}` references sensor `{}` absent from ASD `{}`",
                            input.id, input.intended_for, asd.id
                        ),
                    }),
                );
            };
            let edges: Vec<usize> = props
                .iter()
                .enumerate()
                .filter(|(_, (_, p))| self.input_edge(sensor, p))
                .map(|(j, _)| j)
                .collect();
            if edges.is_empty() {
                return (
                    false,
                    Vec::new(),
                    Some(RuleFailure {
                        rule: "input".into(),
                        message: format!(
                            "input `{}` (sensor `{}`) finds no compatible property affordance",
                            input.id, input.intended_for
                        ),
                    }),
                );
            }
            adjacency.push(edges);
        }
        let assignment = maximum_matching(&adjacency, props.len());
        if assignment.iter().all(Option::is_some) {
            let bindings = cpd
                .inputs
                .iter()
                .zip(&assignment)
                .map(|(input, slot)| (input.id.clone(), props[slot.unwrap()].0.clone()))
                .collect();
            (true, bindings, None)
        } else {
            (
                false,
                Vec::new(),
                Some(RuleFailure {
                    rule: "input".into(),
                    message: "inputs cannot be bound injectively to property affordances".into(),
                }),
            )
        }
    }

    /// Does the thing's action affordance satisfy everything the ASD
    /// actuator states?
    fn output_edge(
        &self,
        actuator: &crate::model::Actuator,
        action: &crate::td::ActionAffordance,
    ) -> bool {
        if let Some(wanted) = &actuator.class {
            match &action.actuator_class {
                Some(offered) => {
                    if !self.subclass(wanted, offered) {
                        return false;
                    }
                }
                None => return false,
            }
        }
        if let Some(wanted) = &actuator.manipulates {
            match &action.manipulates {
                Some(offered) => {
                    if !self.equivalent(wanted, offered) {
                        return false;
                    }
                }
                None => return false,
            }
        }
        for wanted in &actuator.affects {
            if !action.affects.iter().any(|offered| self.equivalent(wanted, offered)) {
                return false;
            }
        }
        true
    }

    fn output_adjacency(
        &self,
        cpd: &ControlProgramDesc,
        asd: &SystemDesign,
        td: &ThingDescription,
    ) -> Result<Vec<Vec<usize>>, RuleFailure> {
        let actions: Vec<&crate::td::ActionAffordance> = td.actions.values().collect();
        let mut adjacency = Vec::with_capacity(cpd.outputs.len());
        for output in &cpd.outputs {
            let Some(actuator) = asd.actuator(&output.intended_for) else {
                return Err(RuleFailure {
                    rule: "output".into(),
                    message: format!(
                        "output `{}` references actuator `{}` absent from ASD `{}`",
                        output.id, output.intended_for, asd.id
                    ),
                });
            };
            adjacency.push(
                actions
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| self.output_edge(actuator, a))
                    .map(|(j, _)| j)
                    .collect(),
            );
        }
        Ok(adjacency)
    }

    fn output_rule(
        &self,
        cpd: &ControlProgramDesc,
        asd: &SystemDesign,
        td: &ThingDescription,
    ) -> (bool, Vec<(String, String)>, Option<RuleFailure>) {
        if cpd.outputs.is_empty() {
            return (true, Vec::new(), None);
        }
        let adjacency = match self.output_adjacency(cpd, asd, td) {
            Ok(a) => a,
            Err(failure) => return (false, Vec::new(), Some(failure)),
        };
        if let Some(i) = adjacency.iter().position(Vec::is_empty) {
            return (
                false,
                Vec::new(),
                Some(RuleFailure {
                    rule: "output".into(),
                    message: format!(
                        "output `{}` (actuator `{}`) finds no compatible action affordance",
                        cpd.outputs[i].id, cpd.outputs[i].intended_for
                    ),
                }),
            );
        }
        let action_names: Vec<&String> = td.actions.keys().collect();
        let assignment = maximum_matching(&adjacency, action_names.len());
        if assignment.iter().all(Option::is_some) {
            let bindings = cpd
                .outputs
                .iter()
                .zip(&assignment)
                .map(|(output, slot)| (output.id.clone(), action_names[slot.unwrap()].clone()))
                .collect();
            (true, bindings, None)
        } else {
            (
                false,
                Vec::new(),
                Some(RuleFailure {
                    rule: "output".into(),
                    message: "outputs cannot be bound injectively to action affordances".into(),
                }),
            )
        }
    }

    fn coverage_rule(
        &self,
        cpd: &ControlProgramDesc,
        asd: &SystemDesign,
        td: &ThingDescription,
    ) -> (bool, Option<RuleFailure>) {
        if td.actions.is_empty() {
            return (true, None);
        }
        let adjacency = match self.output_adjacency(cpd, asd, td) {
            Ok(a) => a,
            Err(failure) => return (false, Some(failure)),
        };
        // Transpose: one row per thing action, columns are program outputs.
        let mut transposed = vec![Vec::new(); td.actions.len()];
        for (i, edges) in adjacency.iter().enumerate() {
            for &j in edges {
                transposed[j].push(i);
            }
        }
        if let Some(j) = transposed.iter().position(Vec::is_empty) {
            let name = td.actions.keys().nth(j).expect("index in range");
            return (
                false,
                Some(RuleFailure {
                    rule: "coverage".into(),
                    message: format!(
                        "thing action `{name}` is not covered by any program output"
                    ),
                }),
            );
        }
        let assignment = maximum_matching(&transposed, cpd.outputs.len());
        if assignment.iter().all(Option::is_some) {
            (true, None)
        } else {
            (
                false,
                Some(RuleFailure {
                    rule: "coverage".into(),
                    message: "thing actions cannot all be covered injectively by program outputs"
                        .into(),
                }),
            )
        }
    }

    fn spec_rule(
        &self,
        cpd: &ControlProgramDesc,
        td: &ThingDescription,
    ) -> (bool, Vec<(String, String)>, Option<RuleFailure>) {
        let mut bindings = Vec::new();
        for parameter in &cpd.parameters {
            let wanted = &parameter.specified_by.specified_variable;
            let found = td.specifications.iter().find(|(_, spec)| {
                spec.has_bound_value() && self.equivalent(wanted, &spec.specified_variable)
            });
            match found {
                Some((name, _)) => bindings.push((parameter.id.clone(), name.clone())),
                None => {
                    return (
                        false,
                        Vec::new(),
                        Some(RuleFailure {
                            rule: "spec".into(),
                            message: format!(
                                "parameter `{}` finds no design specification with an equivalent variable and a bound value",
                                parameter.id
                            ),
                        }),
                    )
                }
            }
        }
        (true, bindings, None)
    }

    fn evaluate_asd(
        &self,
        cpd: &ControlProgramDesc,
        asd: &SystemDesign,
        td: &ThingDescription,
    ) -> AsdEvaluation {
        let mut failures = Vec::new();
        let (system, f) = self.system_rule(asd, td);
        failures.extend(f);
        let (process, f) = self.process_rule(asd, td);
        failures.extend(f);
        let (inputs, input_bindings, f) = self.input_rule(cpd, asd, td);
        failures.extend(f);
        let (outputs, output_bindings, f) = self.output_rule(cpd, asd, td);
        failures.extend(f);
        let (coverage, f) = self.coverage_rule(cpd, asd, td);
        failures.extend(f);
        let (specs, spec_bindings, f) = self.spec_rule(cpd, td);
        failures.extend(f);

        AsdEvaluation {
            asd_id: asd.id.clone(),
            system,
            process,
            inputs,
            outputs,
            coverage,
            specs,
            bindings: Bindings {
                inputs: input_bindings,
                outputs: output_bindings,
                parameters: spec_bindings,
            },
            failures,
            depth: self
                .taxonomy
                .specificity_depth(&asd.system_class)
                .unwrap_or(0),
        }
    }

    /// Evaluates all six rules for one pair. When the program declares
    /// several ASDs, the first one satisfying every rule is reported;
    /// otherwise the one passing the most rules.
    pub fn match_pair(&self, td: &ThingDescription, cpd: &ControlProgramDesc) -> MatchReport {
        let mut best: Option<AsdEvaluation> = None;
        for asd in &cpd.asds {
            let eval = self.evaluate_asd(cpd, asd, td);
            if eval.overall() {
                best = Some(eval);
                break;
            }
            match &best {
                Some(current) if current.passed() >= eval.passed() => {}
                _ => best = Some(eval),
            }
        }
        let eval = best.unwrap_or(AsdEvaluation {
            asd_id: String::new(),
            system: false,
            process: false,
            inputs: false,
            outputs: false,
            coverage: false,
            specs: false,
            bindings: Bindings::default(),
            failures: vec![RuleFailure {
                rule: "system".into(),
                message: "control program declares no abstract system design".into(),
            }],
            depth: 0,
        });
        let overall = eval.overall();
        MatchReport {
            td_id: td.id.clone(),
            cpd_id: cpd.id.clone(),
            asd_id: (!eval.asd_id.is_empty()).then(|| eval.asd_id.clone()),
            system_compatible: eval.system,
            process_compatible: eval.process,
            input_compatible: eval.inputs,
            output_compatible: eval.outputs,
            action_coverage: eval.coverage,
            spec_compatible: eval.specs,
            overall,
            bindings: if overall {
                eval.bindings
            } else {
                Bindings::default()
            },
            failure_reasons: eval.failures,
        }
    }

    /// Matches every thing description against every control program.
    /// Iteration order follows the argument order, so the result is
    /// deterministic; multi-matches are ranked by the taxonomic specificity
    /// of the matching ASD system class (deeper first), then by program id.
    pub fn match_all(
        &self,
        tds: &[ThingDescription],
        cpds: &[ControlProgramDesc],
    ) -> MatchMatrix {
        let mut reports = Vec::with_capacity(tds.len() * cpds.len());
        let mut summaries = Vec::with_capacity(tds.len());
        for td in tds {
            let mut matched: Vec<(usize, String)> = Vec::new();
            for cpd in cpds {
                let report = self.match_pair(td, cpd);
                if report.overall {
                    let depth = report
                        .asd_id
                        .as_ref()
                        .and_then(|asd_id| {
                            cpd.asds
                                .iter()
                                .find(|a| &a.id == asd_id)
                                .map(|a| self.taxonomy.specificity_depth(&a.system_class).unwrap_or(0))
                        })
                        .unwrap_or(0);
                    matched.push((depth, cpd.id.clone()));
                }
                reports.push(report);
            }
            matched.sort_by(|(da, ia), (db, ib)| db.cmp(da).then_with(|| ia.cmp(ib)));
            let outcome = match matched.len() {
                0 => MatchOutcome::None,
                1 => MatchOutcome::Unique,
                _ => MatchOutcome::Multiple,
            };
            summaries.push(TdSummary {
                td_id: td.id.clone(),
                outcome,
                matched: matched.into_iter().map(|(_, id)| id).collect(),
            });
        }
        MatchMatrix { reports, summaries }
    }
}

/// Maximum bipartite matching by augmenting paths (Kuhn's algorithm).
/// `adjacency[i]` lists the right-side nodes left node `i` may take.
/// Returns, per left node, the right node it was assigned. Deterministic:
/// left nodes are processed in order and edges in the given order.
pub(crate) fn maximum_matching(adjacency: &[Vec<usize>], right_len: usize) -> Vec<Option<usize>> {
    let mut right_owner: Vec<Option<usize>> = vec![None; right_len];

    fn try_assign(
        left: usize,
        adjacency: &[Vec<usize>],
        visited: &mut [bool],
        right_owner: &mut [Option<usize>],
    ) -> bool {
        for &r in &adjacency[left] {
            if visited[r] {
                continue;
            }
            visited[r] = true;
            match right_owner[r] {
                None => {
                    right_owner[r] = Some(left);
                    return true;
                }
                Some(other) => {
                    if try_assign(other, adjacency, visited, right_owner) {
                        right_owner[r] = Some(left);
                        return true;
                    }
                }
            }
        }
        false
    }

    for left in 0..adjacency.len() {
        let mut visited = vec![false; right_len];
        try_assign(left, adjacency, &mut visited, &mut right_owner);
    }

    let mut assignment = vec![None; adjacency.len()];
    for (r, owner) in right_owner.iter().enumerate() {
        if let Some(l) = *owner {
            assignment[l] = Some(r);
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Actuator, ComponentRef, Sensor};
    use crate::td::{ActionAffordance, PropertyAffordance};
    use crate::vocab::Iri;
    use indexmap::IndexMap;

    fn iri(s: &str) -> Iri {
        Iri::parse(s).unwrap()
    }

    fn var(stuff: &str, qk: &str) -> ProcessVariable {
        ProcessVariable::new(iri(stuff), iri(qk))
    }

    fn matcher() -> Matcher<'static> {
        Matcher::new(Taxonomy::shipped())
    }

    fn empty_td(class: &str) -> ThingDescription {
        ThingDescription {
            id: "urn:test:td".into(),
            title: "test".into(),
            thing_class: Some(iri(class)),
            manages_class: None,
            base_url: None,
            system_model_url: None,
            simulation_model_url: None,
            specifications: IndexMap::new(),
            properties: IndexMap::new(),
            actions: IndexMap::new(),
            events: IndexMap::new(),
        }
    }

    fn asd(class: &str) -> SystemDesign {
        SystemDesign {
            id: "urn:test:asd".into(),
            title: "asd".into(),
            system_class: iri(class),
            manages: None,
            components: Vec::new(),
            sensors: Vec::new(),
            actuators: Vec::new(),
            specifications: Vec::new(),
            simulation_model_url: None,
        }
    }

    fn cpd_with_asd(asd: SystemDesign) -> ControlProgramDesc {
        ControlProgramDesc {
            id: "urn:test:cp".into(),
            title: "cp".into(),
            asds: vec![asd],
            inputs: Vec::new(),
            outputs: Vec::new(),
            parameters: Vec::new(),
        }
    }

    #[test]
    fn equivalent_ignores_units() {
        let m = matcher();
        let a = var("brick:Water", "qudt:VolumeFlowRate")
            .with_unit(iri("qudt:L-PER-MIN"))
            .with_position(iri("elem:inlet"));
        let b = var("brick:Water", "qudt:VolumeFlowRate")
            .with_unit(iri("qudt:M3-PER-HR"))
            .with_position(iri("elem:inlet"));
        assert!(m.equivalent(&a, &b));
    }

    #[test]
    fn equivalent_is_reflexive() {
        let m = matcher();
        let a = var("brick:Air", "qudt:Temperature").with_position(iri("elem:supply"));
        assert!(m.equivalent(&a, &a));
    }

    #[test]
    fn equivalent_rejects_stuff_mismatch() {
        let m = matcher();
        let a = var("brick:Water", "qudt:VolumeFlowRate");
        let b = var("brick:Fuel", "qudt:VolumeFlowRate");
        assert!(!m.equivalent(&a, &b));
    }

    #[test]
    fn equivalent_requires_positions_equal_or_both_absent() {
        let m = matcher();
        let plain = var("brick:Air", "qudt:Temperature");
        let placed = var("brick:Air", "qudt:Temperature").with_position(iri("elem:supply"));
        assert!(m.equivalent(&plain, &plain));
        assert!(!m.equivalent(&plain, &placed));
        assert!(!m.equivalent(&placed, &plain));
    }

    #[test]
    fn equivalent_component_extension_compares_when_both_present() {
        let taxonomy = Taxonomy::shipped();
        let with = Matcher::new(taxonomy);
        let without = Matcher::with_config(
            taxonomy,
            MatchConfig {
                compare_component_context: false,
            },
        );
        let at_coil = var("brick:Air", "qudt:Temperature")
            .at_component(ComponentRef::Class(iri("hvac:HeatingCoil")));
        let at_fan = var("brick:Air", "qudt:Temperature")
            .at_component(ComponentRef::Class(iri("hvac:SupplyFan")));
        let bare = var("brick:Air", "qudt:Temperature");
        assert!(!with.equivalent(&at_coil, &at_fan));
        assert!(with.equivalent(&at_coil, &bare));
        assert!(without.equivalent(&at_coil, &at_fan));
        // Subclass relation in either direction is accepted.
        let at_exchanger = var("brick:Air", "qudt:Temperature")
            .at_component(ComponentRef::Class(iri("hvac:HeatExchanger")));
        assert!(with.equivalent(&at_coil, &at_exchanger));
        assert!(with.equivalent(&at_exchanger, &at_coil));
    }

    #[test]
    fn system_rule_accepts_same_and_more_specific_asd() {
        let m = matcher();
        let td_ahu = empty_td("hvac:AirHandlingUnit");
        assert!(m.is_system_compatible(&cpd_with_asd(asd("hvac:AirHandlingUnit")), &td_ahu));

        let td_boiler = empty_td("brick:Boiler");
        assert!(m.is_system_compatible(&cpd_with_asd(asd("hvac:CondensingBoiler")), &td_boiler));
        assert!(!m.is_system_compatible(&cpd_with_asd(asd("brick:Boiler")), &td_ahu));
    }

    #[test]
    fn process_rule_is_vacuous_without_asd_process() {
        let m = matcher();
        let mut td = empty_td("hvac:AirHandlingUnit");
        td.manages_class = Some(iri("hvac:AirConditioning"));

        let plain = cpd_with_asd(asd("hvac:AirHandlingUnit"));
        assert!(m.is_process_compatible(&plain, &td));

        let mut with_process = asd("hvac:AirHandlingUnit");
        with_process.manages = Some(crate::model::PhysicalProcess {
            class: iri("hvac:AirDistribution"),
            mechanisms: Vec::new(),
        });
        assert!(m.is_process_compatible(&cpd_with_asd(with_process.clone()), &td));

        let mut mismatched = asd("hvac:AirHandlingUnit");
        mismatched.manages = Some(crate::model::PhysicalProcess {
            class: iri("hvac:Combustion"),
            mechanisms: Vec::new(),
        });
        assert!(!m.is_process_compatible(&cpd_with_asd(mismatched), &td));
    }

    fn td_with_property(name: &str, prop: PropertyAffordance) -> ThingDescription {
        let mut td = empty_td("brick:Boiler");
        td.properties.insert(name.to_string(), prop);
        td
    }

    #[test]
    fn input_rule_binds_water_temperature_at_boiler_tube() {
        let m = matcher();
        let mut design = asd("brick:Boiler");
        design.sensors.push(Sensor {
            id: "water-temp".into(),
            class: None,
            observes: Some(
                var("brick:Water", "qudt:Temperature")
                    .at_component(ComponentRef::Class(iri("hvac:BoilerTube"))),
            ),
        });
        let mut cpd = cpd_with_asd(design);
        cpd.inputs.push(crate::cpd::CpInput {
            id: "in-water-temp".into(),
            intended_for: "water-temp".into(),
        });

        let td = td_with_property(
            "water-outlet-temp",
            PropertyAffordance {
                sensor_class: Some(iri("brick:TemperatureSensor")),
                observes: Some(
                    var("brick:Water", "qudt:Temperature")
                        .at_component(ComponentRef::Class(iri("hvac:BoilerTube"))),
                ),
                ..Default::default()
            },
        );
        let (ok, bindings) = m.is_input_compatible(&cpd, &td);
        assert!(ok);
        assert_eq!(
            bindings,
            vec![("in-water-temp".to_string(), "water-outlet-temp".to_string())]
        );

        // Same program against an affordance stripped of its observed
        // variable: the stated requirement can no longer be checked.
        let bare = td_with_property(
            "water-outlet-temp",
            PropertyAffordance {
                sensor_class: Some(iri("brick:TemperatureSensor")),
                ..Default::default()
            },
        );
        let (ok, _) = m.is_input_compatible(&cpd, &bare);
        assert!(!ok);
    }

    #[test]
    fn input_rule_is_vacuous_with_no_inputs() {
        let m = matcher();
        let cpd = cpd_with_asd(asd("brick:Boiler"));
        let (ok, bindings) = m.is_input_compatible(&cpd, &empty_td("brick:Boiler"));
        assert!(ok);
        assert!(bindings.is_empty());
    }

    fn output_fixture(
        cpd_manipulates: ProcessVariable,
        td_manipulates: ProcessVariable,
    ) -> (ControlProgramDesc, ThingDescription) {
        let mut design = asd("brick:Boiler");
        design.actuators.push(Actuator {
            id: "fan-drive".into(),
            class: Some(iri("hvac:FanSpeedDrive")),
            manipulates: Some(cpd_manipulates),
            affects: Vec::new(),
            related_mechanism: None,
        });
        let mut cpd = cpd_with_asd(design);
        cpd.outputs.push(crate::cpd::CpOutput {
            id: "out-fan".into(),
            intended_for: "fan-drive".into(),
        });

        let mut td = empty_td("brick:Boiler");
        td.actions.insert(
            "blower".into(),
            ActionAffordance {
                actuator_class: Some(iri("hvac:FanSpeedDrive")),
                manipulates: Some(td_manipulates),
                mechanism_class: Some(iri("hvac:Combustion")),
                ..Default::default()
            },
        );
        (cpd, td)
    }

    #[test]
    fn output_rule_binds_fan_drive_influencing_air_flow() {
        let m = matcher();
        let (cpd, td) = output_fixture(
            var("brick:Air", "qudt:VolumeFlowRate"),
            var("brick:Air", "qudt:VolumeFlowRate"),
        );
        let (ok, bindings) = m.is_output_compatible(&cpd, &td);
        assert!(ok);
        assert_eq!(bindings, vec![("out-fan".to_string(), "blower".to_string())]);
    }

    #[test]
    fn output_rule_rejects_manipulated_stuff_mismatch() {
        let m = matcher();
        let (cpd, td) = output_fixture(
            var("brick:Air", "qudt:VolumeFlowRate"),
            var("brick:Water", "qudt:VolumeFlowRate"),
        );
        let (ok, _) = m.is_output_compatible(&cpd, &td);
        assert!(!ok);
    }

    #[test]
    fn output_rule_is_vacuous_with_no_outputs() {
        let m = matcher();
        let cpd = cpd_with_asd(asd("brick:Boiler"));
        let (ok, _) = m.is_output_compatible(&cpd, &empty_td("brick:Boiler"));
        assert!(ok);
    }

    #[test]
    fn action_coverage_requires_every_action_covered() {
        let m = matcher();
        let (cpd, mut td) = output_fixture(
            var("brick:Air", "qudt:VolumeFlowRate"),
            var("brick:Air", "qudt:VolumeFlowRate"),
        );
        assert!(m.has_action_coverage(&cpd, &td));

        // A second, unrelated action leaves one interface uncovered.
        td.actions.insert(
            "fuel-valve".into(),
            ActionAffordance {
                actuator_class: Some(iri("brick:Valve")),
                manipulates: Some(var("brick:Fuel", "qudt:VolumeFlowRate")),
                ..Default::default()
            },
        );
        assert!(!m.has_action_coverage(&cpd, &td));
    }

    #[test]
    fn action_coverage_is_vacuous_for_actionless_thing() {
        let m = matcher();
        let cpd = cpd_with_asd(asd("brick:Boiler"));
        assert!(m.has_action_coverage(&cpd, &empty_td("brick:Boiler")));
    }

    #[test]
    fn spec_rule_requires_equivalent_variable_with_bound_value() {
        let m = matcher();
        let mut cpd = cpd_with_asd(asd("brick:Boiler"));
        cpd.parameters.push(crate::cpd::CpParameter {
            id: "min-water-flow".into(),
            specified_by: crate::model::DesignSpecification {
                id: "req".into(),
                specified_variable: var("brick:Water", "qudt:VolumeFlowRate"),
                min_value: None,
                max_value: None,
                nominal_value: None,
            },
        });

        let mut td = empty_td("brick:Boiler");
        let (ok, _) = m.is_spec_compatible(&cpd, &td);
        assert!(!ok, "no specification present");

        td.specifications.insert(
            "min-water-flowrate".into(),
            crate::model::DesignSpecification {
                id: "min-water-flowrate".into(),
                specified_variable: var("brick:Water", "qudt:VolumeFlowRate")
                    .with_unit(iri("qudt:L-PER-MIN")),
                min_value: Some(50.0),
                max_value: None,
                nominal_value: None,
            },
        );
        let (ok, bindings) = m.is_spec_compatible(&cpd, &td);
        assert!(ok);
        assert_eq!(
            bindings,
            vec![("min-water-flow".to_string(), "min-water-flowrate".to_string())]
        );
    }

    #[test]
    fn spec_rule_is_vacuous_without_parameters() {
        let m = matcher();
        let cpd = cpd_with_asd(asd("brick:Boiler"));
        let (ok, _) = m.is_spec_compatible(&cpd, &empty_td("brick:Boiler"));
        assert!(ok);
    }

    #[test]
    fn empty_program_matches_actionless_thing_of_compatible_type() {
        let m = matcher();
        let cpd = cpd_with_asd(asd("brick:Boiler"));
        let report = m.match_pair(&empty_td("brick:Boiler"), &cpd);
        assert!(report.overall);
        assert!(report.failure_reasons.is_empty());
    }

    #[test]
    fn report_overall_is_conjunction_and_names_failures() {
        let m = matcher();
        let cpd = cpd_with_asd(asd("brick:Boiler"));
        let report = m.match_pair(&empty_td("hvac:AirHandlingUnit"), &cpd);
        assert!(!report.overall);
        assert!(!report.system_compatible);
        assert!(report.process_compatible);
        assert_eq!(report.failure_reasons.len(), 1);
        assert_eq!(report.failure_reasons[0].rule, "system");
    }

    #[test]
    fn match_all_classifies_outcomes() {
        let m = matcher();
        let td = empty_td("brick:Boiler");
        let compatible = cpd_with_asd(asd("brick:Boiler"));
        let incompatible = cpd_with_asd(asd("hvac:AirHandlingUnit"));

        let matrix = m.match_all(std::slice::from_ref(&td), &[]);
        assert_eq!(matrix.summaries[0].outcome, MatchOutcome::None);

        let matrix = m.match_all(
            std::slice::from_ref(&td),
            &[compatible.clone(), incompatible.clone()],
        );
        assert_eq!(matrix.summaries[0].outcome, MatchOutcome::Unique);
        assert_eq!(matrix.summaries[0].matched, vec!["urn:test:cp".to_string()]);
        assert_eq!(matrix.reports.len(), 2);
    }

    #[test]
    fn multi_match_ranks_more_specific_asd_first() {
        let m = matcher();
        let td = empty_td("brick:Boiler");
        let mut general = cpd_with_asd(asd("brick:Boiler"));
        general.id = "urn:test:cp-general".into();
        let mut specific = cpd_with_asd(asd("hvac:CondensingBoiler"));
        specific.id = "urn:test:cp-specific".into();

        let matrix = m.match_all(std::slice::from_ref(&td), &[general, specific]);
        assert_eq!(matrix.summaries[0].outcome, MatchOutcome::Multiple);
        assert_eq!(
            matrix.summaries[0].matched,
            vec![
                "urn:test:cp-specific".to_string(),
                "urn:test:cp-general".to_string()
            ]
        );
    }

    #[test]
    fn maximum_matching_handles_augmenting_paths() {
        // left 0 -> {0}, left 1 -> {0, 1}: naive greedy would starve left 0.
        let assignment = maximum_matching(&[vec![0], vec![0, 1]], 2);
        assert_eq!(assignment, vec![Some(0), Some(1)]);

        let starved = maximum_matching(&[vec![0], vec![0]], 1);
        assert_eq!(starved.iter().filter(|a| a.is_some()).count(), 1);
    }
}
