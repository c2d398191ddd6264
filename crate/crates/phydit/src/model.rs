//! Core domain types shared by system designs, control program
//! descriptions, and thing descriptions: physical processes and mechanisms,
//! process variables, components, sensors, actuators, and design
//! specifications.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab::{Iri, Typed};

/// Reference to a component, either by local id (inside a design document)
/// or by its domain class (the form used in thing descriptions and by the
/// matcher). Canonicalization turns `Local` into `Class`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentRef {
    Class(Iri),
    Local(String),
}

impl ComponentRef {
    pub fn as_class(&self) -> Option<&Iri> {
        match self {
            ComponentRef::Class(iri) => Some(iri),
            ComponentRef::Local(_) => None,
        }
    }

    pub fn as_local(&self) -> Option<&str> {
        match self {
            ComponentRef::Local(id) => Some(id),
            ComponentRef::Class(_) => None,
        }
    }
}

/// Reference to a physical mechanism, by local id or by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MechanismRef {
    Class(Iri),
    Local(String),
}

impl MechanismRef {
    pub fn as_class(&self) -> Option<&Iri> {
        match self {
            MechanismRef::Class(iri) => Some(iri),
            MechanismRef::Local(_) => None,
        }
    }

    pub fn as_local(&self) -> Option<&str> {
        match self {
            MechanismRef::Local(id) => Some(id),
            MechanismRef::Class(_) => None,
        }
    }
}

/// A state descriptor of a physical mechanism: what stuff, which quantity
/// kind, and optionally where in the process it applies.
///
/// `stuff` and `quantity_kind` are always present; everything else may be
/// absent. Units are carried for documentation but never compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessVariable {
    pub stuff: Iri,
    pub quantity_kind: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_component: Option<ComponentRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismRef>,
}

impl ProcessVariable {
    pub fn new(stuff: Iri, quantity_kind: Iri) -> Self {
        Self {
            stuff,
            quantity_kind,
            unit: None,
            position: None,
            at_component: None,
            mechanism: None,
        }
    }

    pub fn with_unit(mut self, unit: Iri) -> Self {
        self.unit = Some(unit);
        self
    }

    pub fn with_position(mut self, position: Iri) -> Self {
        self.position = Some(position);
        self
    }

    pub fn at_component(mut self, component: ComponentRef) -> Self {
        self.at_component = Some(component);
        self
    }

    pub fn with_mechanism(mut self, mechanism: MechanismRef) -> Self {
        self.mechanism = Some(mechanism);
        self
    }
}

/// A physical mechanism (e.g. combustion, heat exchange) that is part of a
/// physical process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalMechanism {
    pub id: String,
    pub class: Iri,
}

/// The physical process a system manages, described as a set of mechanisms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalProcess {
    pub class: Iri,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mechanisms: Vec<PhysicalMechanism>,
}

/// A connection point of a component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub id: String,
    pub class: Iri,
}

/// A part of a technical system. `part_of` references another component id
/// (absent means the component hangs directly off the system) and
/// `manages_mechanism` references a mechanism id of the owning document's
/// physical process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub class: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part_of: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ports: Vec<Port>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manages_mechanism: Option<String>,
}

/// A sensor observing a process variable.
///
/// In a concrete system design both the class and the observed variable are
/// mandatory (strict validation enforces this). In the abstract system
/// design embedded in a control program description either may be omitted,
/// in which case the matcher imposes no corresponding requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observes: Option<ProcessVariable>,
}

impl Typed for Sensor {
    fn declared_class(&self) -> Option<&Iri> {
        self.class.as_ref()
    }
}

/// An actuator, linked to the variable it directly manipulates and the
/// downstream variables it affects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actuator {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manipulates: Option<ProcessVariable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub affects: Vec<ProcessVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub related_mechanism: Option<String>,
}

impl Typed for Actuator {
    fn declared_class(&self) -> Option<&Iri> {
        self.class.as_ref()
    }
}

/// Bounds or a nominal value for a process variable, stated by the system
/// designer (with values) or required by a control program (value-free).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpecification {
    pub id: String,
    pub specified_variable: ProcessVariable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_value: Option<f64>,
}

impl DesignSpecification {
    pub fn has_bound_value(&self) -> bool {
        self.min_value.is_some() || self.max_value.is_some() || self.nominal_value.is_some()
    }
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One validation finding, pointing into the document via a JSON-ish path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("mechanism `{mechanism}` is managed by more than one component ({} )", components.join(", "))]
    AmbiguousMechanism {
        mechanism: String,
        components: Vec<String>,
    },
    #[error("dangling reference to {kind} `{id}`")]
    DanglingReference { kind: &'static str, id: String },
    #[error(transparent)]
    Taxonomy(#[from] crate::vocab::TaxonomyError),
}
