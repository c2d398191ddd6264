//! System Design Descriptions: the machine-readable description of one
//! concrete technical system (components, topology, sensors, actuators,
//! design specifications, and the managed physical process).
//!
//! The JSON document format is described in `schemas/sdd.schema.json`; the
//! shapes accepted here are the normative ones.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    Actuator, Component, ComponentRef, DesignSpecification, Diagnostic, MechanismRef,
    PhysicalMechanism, PhysicalProcess, Port, ProcessVariable, Sensor,
};
use crate::vocab::{Iri, Taxonomy, Typed};

/// A parsed system design description.
///
/// `manages` is mandatory for concrete system designs but may be absent in
/// the abstract system design embedded in a control program description;
/// [`validate`] distinguishes the two via [`Strictness`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDesign {
    pub id: String,
    pub title: String,
    pub system_class: Iri,
    pub manages: Option<PhysicalProcess>,
    pub components: Vec<Component>,
    pub sensors: Vec<Sensor>,
    pub actuators: Vec<Actuator>,
    pub specifications: Vec<DesignSpecification>,
    pub simulation_model_url: Option<String>,
}

impl Typed for SystemDesign {
    fn declared_class(&self) -> Option<&Iri> {
        Some(&self.system_class)
    }
}

#[derive(Debug, Error)]
pub enum SddError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{path}: dangling reference to {kind} `{id}`")]
    Dangling {
        path: String,
        kind: &'static str,
        id: String,
    },
    #[error("{path}: duplicate {kind} id `{id}`")]
    DuplicateId {
        path: String,
        kind: &'static str,
        id: String,
    },
    #[error("mechanism `{mechanism}` is managed by more than one component ({})", components.join(", "))]
    AmbiguousMechanism {
        mechanism: String,
        components: Vec<String>,
    },
    #[error("{path}: {source}")]
    UnknownIri {
        path: String,
        source: crate::vocab::TaxonomyError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Validation mode: `Strict` for concrete system designs, `Relaxed` for the
/// abstract system design inside a control program description (process,
/// sensor/actuator classes, observed/manipulated variables, and
/// specification values become optional there).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Strict,
    Relaxed,
}

// ---------------------------------------------------------------------------
// document layer
// ---------------------------------------------------------------------------

/// A component or mechanism reference as it appears in a document: either a
/// local id string or an explicit `{"@type": "prefix:Class"}` object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RefDoc {
    Typed {
        #[serde(rename = "@type")]
        class: Iri,
    },
    Local(String),
}

impl RefDoc {
    fn to_component_ref(&self) -> ComponentRef {
        match self {
            RefDoc::Typed { class } => ComponentRef::Class(class.clone()),
            RefDoc::Local(id) => ComponentRef::Local(id.clone()),
        }
    }

    fn to_mechanism_ref(&self) -> MechanismRef {
        match self {
            RefDoc::Typed { class } => MechanismRef::Class(class.clone()),
            RefDoc::Local(id) => MechanismRef::Local(id.clone()),
        }
    }

    fn from_component_ref(r: &ComponentRef) -> Self {
        match r {
            ComponentRef::Class(c) => RefDoc::Typed { class: c.clone() },
            ComponentRef::Local(id) => RefDoc::Local(id.clone()),
        }
    }

    fn from_mechanism_ref(r: &MechanismRef) -> Self {
        match r {
            MechanismRef::Class(c) => RefDoc::Typed { class: c.clone() },
            MechanismRef::Local(id) => RefDoc::Local(id.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct VariableDoc {
    stuff: Iri,
    #[serde(rename = "quantityKind")]
    quantity_kind: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<Iri>,
    #[serde(
        rename = "atComponent",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    at_component: Option<RefDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mechanism: Option<RefDoc>,
}

impl VariableDoc {
    pub(crate) fn into_variable(self) -> ProcessVariable {
        ProcessVariable {
            stuff: self.stuff,
            quantity_kind: self.quantity_kind,
            unit: self.unit,
            position: self.position,
            at_component: self.at_component.as_ref().map(RefDoc::to_component_ref),
            mechanism: self.mechanism.as_ref().map(RefDoc::to_mechanism_ref),
        }
    }

    pub(crate) fn from_variable(v: &ProcessVariable) -> Self {
        Self {
            stuff: v.stuff.clone(),
            quantity_kind: v.quantity_kind.clone(),
            unit: v.unit.clone(),
            position: v.position.clone(),
            at_component: v.at_component.as_ref().map(RefDoc::from_component_ref),
            mechanism: v.mechanism.as_ref().map(RefDoc::from_mechanism_ref),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SpecificationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(rename = "specifiedVariable")]
    specified_variable: VariableDoc,
    #[serde(rename = "hasMinValue", default, skip_serializing_if = "Option::is_none")]
    min_value: Option<f64>,
    #[serde(rename = "hasMaxValue", default, skip_serializing_if = "Option::is_none")]
    max_value: Option<f64>,
    #[serde(
        rename = "hasNominalValue",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    nominal_value: Option<f64>,
}

impl SpecificationDoc {
    pub(crate) fn into_specification(self, fallback_id: String) -> DesignSpecification {
        DesignSpecification {
            id: self.id.unwrap_or(fallback_id),
            specified_variable: self.specified_variable.into_variable(),
            min_value: self.min_value,
            max_value: self.max_value,
            nominal_value: self.nominal_value,
        }
    }

    pub(crate) fn from_specification(s: &DesignSpecification, with_id: bool) -> Self {
        Self {
            id: with_id.then(|| s.id.clone()),
            specified_variable: VariableDoc::from_variable(&s.specified_variable),
            min_value: s.min_value,
            max_value: s.max_value,
            nominal_value: s.nominal_value,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PortDoc {
    id: String,
    class: Iri,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComponentDoc {
    id: String,
    class: Iri,
    #[serde(rename = "partOf", default, skip_serializing_if = "Option::is_none")]
    part_of: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ports: Vec<PortDoc>,
    #[serde(
        rename = "managesMechanism",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    manages_mechanism: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SensorDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observes: Option<VariableDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ActuatorDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manipulates: Option<VariableDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    affects: Vec<VariableDoc>,
    #[serde(
        rename = "relatedMechanism",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    related_mechanism: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MechanismDoc {
    id: String,
    class: Iri,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProcessDoc {
    class: Iri,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    mechanisms: Vec<MechanismDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SddDoc {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(rename = "systemClass")]
    system_class: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    manages: Option<ProcessDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sensors: Vec<SensorDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    actuators: Vec<ActuatorDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    specifications: Vec<SpecificationDoc>,
    #[serde(
        rename = "simulationModel",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    simulation_model_url: Option<String>,
}

// ---------------------------------------------------------------------------
// parse / serialize
// ---------------------------------------------------------------------------

/// Parses and resolves a system design description from JSON bytes.
///
/// All intra-document references (component `partOf`, `managesMechanism`,
/// variable `atComponent` / `mechanism` ids) are checked here; taxonomy
/// membership is checked later by [`validate`].
pub fn parse(bytes: &[u8]) -> Result<SystemDesign, SddError> {
    let doc: SddDoc =
        serde_json::from_slice(bytes).map_err(|e| SddError::Schema(e.to_string()))?;
    build(doc)
}

pub fn parse_str(text: &str) -> Result<SystemDesign, SddError> {
    parse(text.as_bytes())
}

pub(crate) fn build(doc: SddDoc) -> Result<SystemDesign, SddError> {
    let sdd = SystemDesign {
        id: doc.id,
        title: doc.title,
        system_class: doc.system_class,
        manages: doc.manages.map(|p| PhysicalProcess {
            class: p.class,
            mechanisms: p
                .mechanisms
                .into_iter()
                .map(|m| PhysicalMechanism {
                    id: m.id,
                    class: m.class,
                })
                .collect(),
        }),
        components: doc
            .components
            .into_iter()
            .map(|c| Component {
                id: c.id,
                class: c.class,
                part_of: c.part_of,
                ports: c
                    .ports
                    .into_iter()
                    .map(|p| Port {
                        id: p.id,
                        class: p.class,
                    })
                    .collect(),
                manages_mechanism: c.manages_mechanism,
            })
            .collect(),
        sensors: doc
            .sensors
            .into_iter()
            .map(|s| Sensor {
                id: s.id,
                class: s.class,
                observes: s.observes.map(VariableDoc::into_variable),
            })
            .collect(),
        actuators: doc
            .actuators
            .into_iter()
            .map(|a| Actuator {
                id: a.id,
                class: a.class,
                manipulates: a.manipulates.map(VariableDoc::into_variable),
                affects: a
                    .affects
                    .into_iter()
                    .map(VariableDoc::into_variable)
                    .collect(),
                related_mechanism: a.related_mechanism,
            })
            .collect(),
        specifications: doc
            .specifications
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.into_specification(format!("spec-{i}")))
            .collect(),
        simulation_model_url: doc.simulation_model_url,
    };
    check_references(&sdd)?;
    Ok(sdd)
}

fn check_references(sdd: &SystemDesign) -> Result<(), SddError> {
    let mut component_ids = std::collections::BTreeSet::new();
    for c in &sdd.components {
        if !component_ids.insert(c.id.as_str()) {
            return Err(SddError::DuplicateId {
                path: "components".into(),
                kind: "component",
                id: c.id.clone(),
            });
        }
    }
    let mut mechanism_ids = std::collections::BTreeSet::new();
    if let Some(process) = &sdd.manages {
        for m in &process.mechanisms {
            if !mechanism_ids.insert(m.id.as_str()) {
                return Err(SddError::DuplicateId {
                    path: "manages.mechanisms".into(),
                    kind: "mechanism",
                    id: m.id.clone(),
                });
            }
        }
    }
    for (kind, ids) in [
        ("sensor", sdd.sensors.iter().map(|s| &s.id).collect::<Vec<_>>()),
        ("actuator", sdd.actuators.iter().map(|a| &a.id).collect()),
        ("specification", sdd.specifications.iter().map(|s| &s.id).collect()),
    ] {
        let mut seen = std::collections::BTreeSet::new();
        for id in ids {
            if !seen.insert(id.as_str()) {
                return Err(SddError::DuplicateId {
                    path: format!("{kind}s"),
                    kind: match kind {
                        "sensor" => "sensor",
                        "actuator" => "actuator",
                        _ => "specification",
                    },
                    id: id.clone(),
                });
            }
        }
    }

    let check_variable = |path: String, v: &ProcessVariable| -> Result<(), SddError> {
        if let Some(ComponentRef::Local(id)) = &v.at_component {
            if !component_ids.contains(id.as_str()) {
                return Err(SddError::Dangling {
                    path: format!("{path}.atComponent"),
                    kind: "component",
                    id: id.clone(),
                });
            }
        }
        if let Some(MechanismRef::Local(id)) = &v.mechanism {
            if !mechanism_ids.contains(id.as_str()) {
                return Err(SddError::Dangling {
                    path: format!("{path}.mechanism"),
                    kind: "mechanism",
                    id: id.clone(),
                });
            }
        }
        Ok(())
    };

    for (i, c) in sdd.components.iter().enumerate() {
        if let Some(parent) = &c.part_of {
            if !component_ids.contains(parent.as_str()) {
                return Err(SddError::Dangling {
                    path: format!("components[{i}].partOf"),
                    kind: "component",
                    id: parent.clone(),
                });
            }
        }
        if let Some(m) = &c.manages_mechanism {
            if !mechanism_ids.contains(m.as_str()) {
                return Err(SddError::Dangling {
                    path: format!("components[{i}].managesMechanism"),
                    kind: "mechanism",
                    id: m.clone(),
                });
            }
        }
    }
    for (i, s) in sdd.sensors.iter().enumerate() {
        if let Some(v) = &s.observes {
            check_variable(format!("sensors[{i}].observes"), v)?;
        }
    }
    for (i, a) in sdd.actuators.iter().enumerate() {
        if let Some(v) = &a.manipulates {
            check_variable(format!("actuators[{i}].manipulates"), v)?;
        }
        for (j, v) in a.affects.iter().enumerate() {
            check_variable(format!("actuators[{i}].affects[{j}]"), v)?;
        }
        if let Some(m) = &a.related_mechanism {
            if !mechanism_ids.contains(m.as_str()) {
                return Err(SddError::Dangling {
                    path: format!("actuators[{i}].relatedMechanism"),
                    kind: "mechanism",
                    id: m.clone(),
                });
            }
        }
    }
    for (i, s) in sdd.specifications.iter().enumerate() {
        check_variable(
            format!("specifications[{i}].specifiedVariable"),
            &s.specified_variable,
        )?;
    }
    Ok(())
}

pub(crate) fn to_doc(sdd: &SystemDesign) -> SddDoc {
    SddDoc {
        id: sdd.id.clone(),
        title: sdd.title.clone(),
        system_class: sdd.system_class.clone(),
        manages: sdd.manages.as_ref().map(|p| ProcessDoc {
            class: p.class.clone(),
            mechanisms: p
                .mechanisms
                .iter()
                .map(|m| MechanismDoc {
                    id: m.id.clone(),
                    class: m.class.clone(),
                })
                .collect(),
        }),
        components: sdd
            .components
            .iter()
            .map(|c| ComponentDoc {
                id: c.id.clone(),
                class: c.class.clone(),
                part_of: c.part_of.clone(),
                ports: c
                    .ports
                    .iter()
                    .map(|p| PortDoc {
                        id: p.id.clone(),
                        class: p.class.clone(),
                    })
                    .collect(),
                manages_mechanism: c.manages_mechanism.clone(),
            })
            .collect(),
        sensors: sdd
            .sensors
            .iter()
            .map(|s| SensorDoc {
                id: s.id.clone(),
                class: s.class.clone(),
                observes: s.observes.as_ref().map(VariableDoc::from_variable),
            })
            .collect(),
        actuators: sdd
            .actuators
            .iter()
            .map(|a| ActuatorDoc {
                id: a.id.clone(),
                class: a.class.clone(),
                manipulates: a.manipulates.as_ref().map(VariableDoc::from_variable),
                affects: a.affects.iter().map(VariableDoc::from_variable).collect(),
                related_mechanism: a.related_mechanism.clone(),
            })
            .collect(),
        specifications: sdd
            .specifications
            .iter()
            .map(|s| SpecificationDoc::from_specification(s, true))
            .collect(),
        simulation_model_url: sdd.simulation_model_url.clone(),
    }
}

/// Serializes a system design back to its JSON document form. Key order is
/// deterministic, so identical designs serialize to identical bytes.
pub fn serialize(sdd: &SystemDesign) -> String {
    let value = serde_json::to_value(to_doc(sdd)).expect("sdd serializes");
    let mut text = serde_json::to_string_pretty(&normalize_numbers(value)).expect("valid json");
    text.push('\n');
    text
}

/// Rewrites float values that are exact integers into JSON integers, so
/// that e.g. a minimum value of 50 prints as `50` rather than `50.0`.
pub(crate) fn normalize_numbers(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.as_i64().is_none() && n.as_u64().is_none() && f.fract() == 0.0
                    && f.abs() < i64::MAX as f64
                {
                    return Value::Number((f as i64).into());
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, normalize_numbers(v)))
                .collect(),
        ),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// inference and canonicalization
// ---------------------------------------------------------------------------

impl SystemDesign {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn sensor(&self, id: &str) -> Option<&Sensor> {
        self.sensors.iter().find(|s| s.id == id)
    }

    pub fn actuator(&self, id: &str) -> Option<&Actuator> {
        self.actuators.iter().find(|a| a.id == id)
    }

    pub fn mechanism(&self, id: &str) -> Option<&PhysicalMechanism> {
        self.manages
            .as_ref()
            .and_then(|p| p.mechanisms.iter().find(|m| m.id == id))
    }

    /// Components that manage the referenced mechanism (by id, or by class
    /// when the reference is already class-level).
    fn managers_of(&self, mechanism: &MechanismRef) -> Vec<&Component> {
        self.components
            .iter()
            .filter(|c| match (&c.manages_mechanism, mechanism) {
                (Some(managed), MechanismRef::Local(id)) => managed == id,
                (Some(managed), MechanismRef::Class(class)) => self
                    .mechanism(managed)
                    .is_some_and(|m| &m.class == class),
                (None, _) => false,
            })
            .collect()
    }

    /// Resolves the component a variable applies to. An explicit
    /// `at_component` wins; otherwise, when the variable's mechanism is
    /// managed by exactly one component, that component is inferred. A
    /// mechanism managed by several components is an ambiguity error.
    pub fn infer_component(
        &self,
        variable: &ProcessVariable,
    ) -> Result<Option<ComponentRef>, SddError> {
        if let Some(explicit) = &variable.at_component {
            return Ok(Some(explicit.clone()));
        }
        let Some(mechanism) = &variable.mechanism else {
            return Ok(None);
        };
        let managers = self.managers_of(mechanism);
        match managers.as_slice() {
            [] => Ok(None),
            [only] => Ok(Some(ComponentRef::Local(only.id.clone()))),
            many => Err(SddError::AmbiguousMechanism {
                mechanism: match mechanism {
                    MechanismRef::Local(id) => id.clone(),
                    MechanismRef::Class(c) => c.to_string(),
                },
                components: many.iter().map(|c| c.id.clone()).collect(),
            }),
        }
    }

    /// Canonical form of a variable: every IRI checked against the
    /// taxonomy, local component/mechanism references resolved to domain
    /// classes, and the inferred component filled in. Idempotent.
    pub fn canonicalize_variable(
        &self,
        variable: &ProcessVariable,
        taxonomy: &Taxonomy,
    ) -> Result<ProcessVariable, SddError> {
        let check = |what: &str, iri: &Iri| -> Result<(), SddError> {
            if taxonomy.contains(iri) {
                Ok(())
            } else {
                Err(SddError::UnknownIri {
                    path: what.to_string(),
                    source: crate::vocab::TaxonomyError::UnknownClass { iri: iri.clone() },
                })
            }
        };
        check("stuff", &variable.stuff)?;
        check("quantityKind", &variable.quantity_kind)?;
        if let Some(unit) = &variable.unit {
            check("unit", unit)?;
        }
        if let Some(position) = &variable.position {
            check("position", position)?;
        }

        let at_component = match self.infer_component(variable)? {
            Some(ComponentRef::Local(id)) => {
                let component = self.component(&id).ok_or(SddError::Dangling {
                    path: "atComponent".into(),
                    kind: "component",
                    id: id.clone(),
                })?;
                check("atComponent", &component.class)?;
                Some(ComponentRef::Class(component.class.clone()))
            }
            Some(ComponentRef::Class(class)) => {
                check("atComponent", &class)?;
                Some(ComponentRef::Class(class))
            }
            None => None,
        };

        let mechanism = match &variable.mechanism {
            Some(MechanismRef::Local(id)) => {
                let mechanism = self.mechanism(id).ok_or(SddError::Dangling {
                    path: "mechanism".into(),
                    kind: "mechanism",
                    id: id.clone(),
                })?;
                check("mechanism", &mechanism.class)?;
                Some(MechanismRef::Class(mechanism.class.clone()))
            }
            Some(MechanismRef::Class(class)) => {
                check("mechanism", class)?;
                Some(MechanismRef::Class(class.clone()))
            }
            None => None,
        };

        Ok(ProcessVariable {
            stuff: variable.stuff.clone(),
            quantity_kind: variable.quantity_kind.clone(),
            unit: variable.unit.clone(),
            position: variable.position.clone(),
            at_component,
            mechanism,
        })
    }

    /// Canonicalizes every variable in the design. Ambiguous component
    /// inference and unregistered IRIs propagate as errors.
    pub fn canonicalize(&self, taxonomy: &Taxonomy) -> Result<SystemDesign, SddError> {
        let mut out = self.clone();
        for sensor in &mut out.sensors {
            if let Some(v) = &sensor.observes {
                sensor.observes = Some(self.canonicalize_variable(v, taxonomy)?);
            }
        }
        for actuator in &mut out.actuators {
            if let Some(v) = &actuator.manipulates {
                actuator.manipulates = Some(self.canonicalize_variable(v, taxonomy)?);
            }
            let affects = actuator
                .affects
                .iter()
                .map(|v| self.canonicalize_variable(v, taxonomy))
                .collect::<Result<Vec<_>, _>>()?;
            actuator.affects = affects;
        }
        for spec in &mut out.specifications {
            spec.specified_variable =
                self.canonicalize_variable(&spec.specified_variable, taxonomy)?;
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

/// Checks the design invariants against a taxonomy and returns one
/// diagnostic per violation. An empty list means the design is valid.
pub fn validate(sdd: &SystemDesign, taxonomy: &Taxonomy, mode: Strictness) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let strict = mode == Strictness::Strict;

    let check_class = |out: &mut Vec<Diagnostic>, path: String, iri: &Iri| {
        if !taxonomy.contains(iri) {
            out.push(Diagnostic::error(
                path,
                format!("class `{iri}` is not registered in the taxonomy"),
            ));
        }
    };

    check_class(&mut out, "systemClass".into(), &sdd.system_class);

    match &sdd.manages {
        Some(process) => {
            check_class(&mut out, "manages.class".into(), &process.class);
            for (i, m) in process.mechanisms.iter().enumerate() {
                check_class(&mut out, format!("manages.mechanisms[{i}].class"), &m.class);
            }
        }
        None if strict => out.push(Diagnostic::error(
            "manages",
            "a concrete system design must state the managed physical process",
        )),
        None => {}
    }

    // part_of must form a forest (no cycles).
    for c in &sdd.components {
        let mut seen = vec![c.id.as_str()];
        let mut cursor = c.part_of.as_deref();
        while let Some(parent) = cursor {
            if seen.contains(&parent) {
                out.push(Diagnostic::error(
                    format!("components[{}].partOf", seen[0]),
                    format!("partOf cycle through `{parent}`"),
                ));
                break;
            }
            seen.push(parent);
            cursor = sdd.component(parent).and_then(|p| p.part_of.as_deref());
        }
    }

    for (i, c) in sdd.components.iter().enumerate() {
        check_class(&mut out, format!("components[{i}].class"), &c.class);
        for (j, p) in c.ports.iter().enumerate() {
            check_class(&mut out, format!("components[{i}].ports[{j}].class"), &p.class);
        }
    }

    let check_variable = |out: &mut Vec<Diagnostic>, path: &str, v: &ProcessVariable| {
        match sdd.canonicalize_variable(v, taxonomy) {
            Ok(_) => {}
            Err(e) => out.push(Diagnostic::error(path.to_string(), e.to_string())),
        }
        if let Some(m) = &v.mechanism {
            if sdd.managers_of(m).is_empty() {
                let name = match m {
                    MechanismRef::Local(id) => id.clone(),
                    MechanismRef::Class(c) => c.to_string(),
                };
                out.push(Diagnostic::warning(
                    path.to_string(),
                    format!("mechanism `{name}` is not managed by any component"),
                ));
            }
        }
    };

    for (i, s) in sdd.sensors.iter().enumerate() {
        match &s.class {
            Some(class) => check_class(&mut out, format!("sensors[{i}].class"), class),
            None if strict => out.push(Diagnostic::error(
                format!("sensors[{i}].class"),
                "sensor must declare its class",
            )),
            None => {}
        }
        match &s.observes {
            Some(v) => check_variable(&mut out, &format!("sensors[{i}].observes"), v),
            None if strict => out.push(Diagnostic::error(
                format!("sensors[{i}].observes"),
                "sensor must state the observed process variable",
            )),
            None => {}
        }
    }

    for (i, a) in sdd.actuators.iter().enumerate() {
        match &a.class {
            Some(class) => check_class(&mut out, format!("actuators[{i}].class"), class),
            None if strict => out.push(Diagnostic::error(
                format!("actuators[{i}].class"),
                "actuator must declare its class",
            )),
            None => {}
        }
        match &a.manipulates {
            Some(v) => check_variable(&mut out, &format!("actuators[{i}].manipulates"), v),
            None if strict => out.push(Diagnostic::error(
                format!("actuators[{i}].manipulates"),
                "actuator must state the manipulated process variable",
            )),
            None => {}
        }
        for (j, v) in a.affects.iter().enumerate() {
            check_variable(&mut out, &format!("actuators[{i}].affects[{j}]"), v);
        }
    }

    for (i, s) in sdd.specifications.iter().enumerate() {
        check_variable(
            &mut out,
            &format!("specifications[{i}].specifiedVariable"),
            &s.specified_variable,
        );
        if strict && !s.has_bound_value() {
            out.push(Diagnostic::error(
                format!("specifications[{i}]"),
                "a concrete design specification must carry at least one bound value",
            ));
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::Taxonomy;

    pub(crate) const BOILER_SDD: &str = include_str!("../tests/fixtures/boiler-sdd.json");

    fn iri(s: &str) -> Iri {
        Iri::parse(s).unwrap()
    }

    #[test]
    fn boiler_fixture_parses_with_listing_content() {
        let sdd = parse_str(BOILER_SDD).unwrap();
        assert_eq!(sdd.system_class, iri("brick:Boiler"));
        assert_eq!(
            sdd.manages.as_ref().unwrap().class,
            iri("hvac:EnergyConversion")
        );
        let valve = sdd.actuator("fuel-valve-actuation").unwrap();
        let manipulates = valve.manipulates.as_ref().unwrap();
        assert_eq!(manipulates.stuff, iri("brick:Fuel"));
        assert_eq!(manipulates.quantity_kind, iri("qudt:VolumeFlowRate"));
        assert_eq!(manipulates.position.as_ref().unwrap(), &iri("elem:inlet"));
        let sensor = sdd.sensor("water-outlet-temp").unwrap();
        assert_eq!(
            sensor.observes.as_ref().unwrap().stuff,
            iri("brick:Water")
        );
        let spec = &sdd.specifications[0];
        assert_eq!(spec.id, "min-water-flowrate");
        assert_eq!(spec.min_value, Some(50.0));
    }

    #[test]
    fn minimal_sdd_parses_with_empty_lists() {
        let text = r#"{"id": "urn:x", "title": "bare", "systemClass": "brick:Boiler"}"#;
        let sdd = parse_str(text).unwrap();
        assert!(sdd.components.is_empty());
        assert!(sdd.sensors.is_empty());
        assert!(sdd.actuators.is_empty());
        assert!(sdd.specifications.is_empty());
    }

    #[test]
    fn dangling_variable_reference_is_a_parse_error() {
        let text = r#"{
            "id": "urn:x", "title": "broken", "systemClass": "brick:Boiler",
            "sensors": [{"id": "s1", "class": "brick:TemperatureSensor",
                         "observes": {"stuff": "brick:Water", "quantityKind": "qudt:Temperature",
                                      "atComponent": "nope"}}]
        }"#;
        assert!(matches!(
            parse_str(text),
            Err(SddError::Dangling { kind: "component", .. })
        ));
    }

    #[test]
    fn malformed_json_is_a_schema_error() {
        assert!(matches!(parse(b"{"), Err(SddError::Schema(_))));
    }

    #[test]
    fn boiler_fixture_validates_clean() {
        let sdd = parse_str(BOILER_SDD).unwrap();
        let diags = validate(&sdd, Taxonomy::shipped(), Strictness::Strict);
        assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
    }

    #[test]
    fn sensor_missing_observes_yields_one_diagnostic() {
        let text = r#"{
            "id": "urn:x", "title": "t", "systemClass": "brick:Boiler",
            "manages": {"class": "hvac:EnergyConversion"},
            "sensors": [{"id": "s1", "class": "brick:TemperatureSensor"}]
        }"#;
        let sdd = parse_str(text).unwrap();
        let diags = validate(&sdd, Taxonomy::shipped(), Strictness::Strict);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert_eq!(diags[0].path, "sensors[0].observes");
    }

    #[test]
    fn unmanaged_mechanism_yields_warning() {
        let text = r#"{
            "id": "urn:x", "title": "t", "systemClass": "brick:Boiler",
            "manages": {"class": "hvac:EnergyConversion",
                        "mechanisms": [{"id": "combustion", "class": "hvac:Combustion"}]},
            "actuators": [{"id": "a1", "class": "brick:Valve",
                           "manipulates": {"stuff": "brick:Fuel",
                                           "quantityKind": "qudt:VolumeFlowRate",
                                           "mechanism": "combustion"}}]
        }"#;
        let sdd = parse_str(text).unwrap();
        let diags = validate(&sdd, Taxonomy::shipped(), Strictness::Strict);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, crate::model::Severity::Warning);
    }

    #[test]
    fn infer_component_resolves_unique_manager() {
        let sdd = parse_str(BOILER_SDD).unwrap();
        let valve = sdd.actuator("fuel-valve-actuation").unwrap();
        let inferred = sdd
            .infer_component(valve.manipulates.as_ref().unwrap())
            .unwrap();
        assert_eq!(inferred, Some(ComponentRef::Local("burner".into())));
    }

    #[test]
    fn infer_component_keeps_explicit_reference() {
        let sdd = parse_str(BOILER_SDD).unwrap();
        let v = ProcessVariable::new(iri("brick:Water"), iri("qudt:Temperature"))
            .at_component(ComponentRef::Local("boiler-tube".into()));
        assert_eq!(
            sdd.infer_component(&v).unwrap(),
            Some(ComponentRef::Local("boiler-tube".into()))
        );
    }

    #[test]
    fn infer_component_rejects_ambiguous_manager() {
        let text = r#"{
            "id": "urn:x", "title": "t", "systemClass": "brick:Boiler",
            "manages": {"class": "hvac:EnergyConversion",
                        "mechanisms": [{"id": "combustion", "class": "hvac:Combustion"}]},
            "components": [
                {"id": "burner-a", "class": "hvac:Burner", "managesMechanism": "combustion"},
                {"id": "burner-b", "class": "hvac:Burner", "managesMechanism": "combustion"}
            ]
        }"#;
        let sdd = parse_str(text).unwrap();
        let v = ProcessVariable::new(iri("brick:Fuel"), iri("qudt:VolumeFlowRate"))
            .with_mechanism(MechanismRef::Local("combustion".into()));
        assert!(matches!(
            sdd.infer_component(&v),
            Err(SddError::AmbiguousMechanism { .. })
        ));
    }

    #[test]
    fn canonicalize_variable_is_idempotent_and_fills_component() {
        let sdd = parse_str(BOILER_SDD).unwrap();
        let taxonomy = Taxonomy::shipped();
        let valve = sdd.actuator("fuel-valve-actuation").unwrap();
        let once = sdd
            .canonicalize_variable(valve.manipulates.as_ref().unwrap(), taxonomy)
            .unwrap();
        assert_eq!(
            once.at_component,
            Some(ComponentRef::Class(iri("hvac:Burner")))
        );
        let twice = sdd.canonicalize_variable(&once, taxonomy).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn canonicalize_rejects_unknown_iri() {
        let sdd = parse_str(BOILER_SDD).unwrap();
        let v = ProcessVariable::new(iri("nope:Thing"), iri("qudt:Temperature"));
        assert!(matches!(
            sdd.canonicalize_variable(&v, Taxonomy::shipped()),
            Err(SddError::UnknownIri { .. })
        ));
    }

    #[test]
    fn parse_serialize_round_trip_is_stable() {
        let first = parse_str(BOILER_SDD).unwrap();
        let text = serialize(&first);
        let second = parse_str(&text).unwrap();
        assert_eq!(first, second);
        assert_eq!(text, serialize(&second));
    }
}
