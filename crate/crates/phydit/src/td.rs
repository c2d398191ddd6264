//! Thing Descriptions: the digital-twin document of a technical system,
//! with property/action/event affordances carrying the process metadata
//! the matcher needs.
//!
//! A thing description is either synthesized from a system design
//! ([`synthesize`]) or parsed from its JSON profile ([`parse`]). The
//! profile follows the WoT TD layout but is consumed directly — no JSON-LD
//! processing happens; `@context` is a fixed profile identifier.

use indexmap::IndexMap;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{ComponentRef, DesignSpecification, MechanismRef, ProcessVariable};
use crate::sdd::{SddError, SystemDesign};
use crate::vocab::{Iri, Taxonomy, Typed};

/// The fixed `@context` identifier emitted by the serializer.
pub const TD_CONTEXT: &str = "https://w3id.org/phydit/td-context/v1";

/// An interaction form (protocol binding target). Carried, never invoked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    pub href: String,
}

/// A readable interaction point, corresponding to a sensor of the system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyAffordance {
    pub title: Option<String>,
    pub sensor_class: Option<Iri>,
    pub observes: Option<ProcessVariable>,
    pub forms: Vec<Form>,
}

impl Typed for PropertyAffordance {
    fn declared_class(&self) -> Option<&Iri> {
        self.sensor_class.as_ref()
    }
}

/// An invokable interaction point, corresponding to an actuator.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionAffordance {
    pub title: Option<String>,
    pub actuator_class: Option<Iri>,
    pub manipulates: Option<ProcessVariable>,
    pub affects: Vec<ProcessVariable>,
    pub mechanism_class: Option<Iri>,
    pub component_class: Option<Iri>,
    pub forms: Vec<Form>,
}

impl Typed for ActionAffordance {
    fn declared_class(&self) -> Option<&Iri> {
        self.actuator_class.as_ref()
    }
}

/// A subscribable event. Events never participate in matching.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventAffordance {
    pub title: Option<String>,
    pub forms: Vec<Form>,
}

/// A physics-infused thing description.
#[derive(Debug, Clone, PartialEq)]
pub struct ThingDescription {
    pub id: String,
    pub title: String,
    /// The `@type` of the thing; absent only after ablation or in partial
    /// hand-written documents (the matcher then fails the system rule).
    pub thing_class: Option<Iri>,
    pub manages_class: Option<Iri>,
    pub base_url: Option<String>,
    pub system_model_url: Option<String>,
    pub simulation_model_url: Option<String>,
    pub specifications: IndexMap<String, DesignSpecification>,
    pub properties: IndexMap<String, PropertyAffordance>,
    pub actions: IndexMap<String, ActionAffordance>,
    pub events: IndexMap<String, EventAffordance>,
}

impl Typed for ThingDescription {
    fn declared_class(&self) -> Option<&Iri> {
        self.thing_class.as_ref()
    }
}

#[derive(Debug, Error)]
pub enum TdError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("thing description has no `@type`")]
    MissingType,
    #[error("{path}: expected {expected}")]
    Shape { path: String, expected: &'static str },
    #[error("synthesis failed: {0}")]
    Synthesis(#[from] SddError),
}

/// One of the ten metadata aspects that can be removed from a thing
/// description for the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetadataAspect {
    SystemType,
    ProcessType,
    SensorType,
    ObservedVariable,
    PropertyComponentPosition,
    ActuatorType,
    ManipulatedVariable,
    AffectedVariable,
    ActionComponentPosition,
    DesignParameters,
}

impl MetadataAspect {
    pub const ALL: [MetadataAspect; 10] = [
        MetadataAspect::SystemType,
        MetadataAspect::ProcessType,
        MetadataAspect::SensorType,
        MetadataAspect::ObservedVariable,
        MetadataAspect::PropertyComponentPosition,
        MetadataAspect::ActuatorType,
        MetadataAspect::ManipulatedVariable,
        MetadataAspect::AffectedVariable,
        MetadataAspect::ActionComponentPosition,
        MetadataAspect::DesignParameters,
    ];

    /// Stable kebab-case tag, used on the command line and in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            MetadataAspect::SystemType => "system-type",
            MetadataAspect::ProcessType => "process-type",
            MetadataAspect::SensorType => "sensor-type",
            MetadataAspect::ObservedVariable => "observed-variable",
            MetadataAspect::PropertyComponentPosition => "property-component-position",
            MetadataAspect::ActuatorType => "actuator-type",
            MetadataAspect::ManipulatedVariable => "manipulated-variable",
            MetadataAspect::AffectedVariable => "affected-variable",
            MetadataAspect::ActionComponentPosition => "action-component-position",
            MetadataAspect::DesignParameters => "design-parameters",
        }
    }

    /// Row label in the style of the ablation report.
    pub fn label(&self) -> &'static str {
        match self {
            MetadataAspect::SystemType => "General: system type",
            MetadataAspect::ProcessType => "General: physical process type",
            MetadataAspect::SensorType => "Property: sensor type",
            MetadataAspect::ObservedVariable => "Property: observed variable",
            MetadataAspect::PropertyComponentPosition => "Property: component and position",
            MetadataAspect::ActuatorType => "Action: actuator type",
            MetadataAspect::ManipulatedVariable => "Action: manipulated variable",
            MetadataAspect::AffectedVariable => "Action: affected variable",
            MetadataAspect::ActionComponentPosition => "Action: component and position",
            MetadataAspect::DesignParameters => "General: design parameters",
        }
    }
}

impl std::fmt::Display for MetadataAspect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error)]
#[error("unknown metadata aspect `{0}`")]
pub struct UnknownAspect(String);

impl std::str::FromStr for MetadataAspect {
    type Err = UnknownAspect;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetadataAspect::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| UnknownAspect(s.to_string()))
    }
}

// ---------------------------------------------------------------------------
// synthesis
// ---------------------------------------------------------------------------

/// Synthesizes the physics-infused thing description of a system design:
/// one property affordance per sensor, one action affordance per actuator,
/// specifications copied, and component context rendered as domain classes
/// (inferring the component from the managed mechanism where possible).
///
/// The design is expected to validate cleanly in strict mode; component
/// inference ambiguities and unregistered IRIs surface as errors.
pub fn synthesize(sdd: &SystemDesign, taxonomy: &Taxonomy) -> Result<ThingDescription, TdError> {
    let canonical = sdd.canonicalize(taxonomy)?;

    let mut specifications = IndexMap::new();
    for spec in &canonical.specifications {
        specifications.insert(spec.id.clone(), spec.clone());
    }

    let mut properties = IndexMap::new();
    for sensor in &canonical.sensors {
        properties.insert(
            sensor.id.clone(),
            PropertyAffordance {
                title: None,
                sensor_class: sensor.class.clone(),
                observes: sensor.observes.clone(),
                forms: vec![Form {
                    href: format!("/sensors/{}", sensor.id),
                }],
            },
        );
    }

    let mut actions = IndexMap::new();
    for actuator in &canonical.actuators {
        // The related mechanism comes from the actuator itself or from the
        // manipulated variable; the component is the mechanism's manager.
        let mechanism_id = actuator.related_mechanism.clone().or_else(|| {
            sdd.actuator(&actuator.id)
                .and_then(|a| a.manipulates.as_ref())
                .and_then(|v| v.mechanism.as_ref())
                .and_then(|m| m.as_local().map(String::from))
        });
        let (mechanism_class, component_class) = match mechanism_id {
            Some(id) => {
                let mech = sdd.mechanism(&id).map(|m| m.class.clone());
                let probe = ProcessVariable::new(
                    Iri::new("pdt", "Stuff"),
                    Iri::new("qudt", "QuantityKind"),
                )
                .with_mechanism(MechanismRef::Local(id));
                let manager = sdd.infer_component(&probe).map_err(TdError::Synthesis)?;
                let component = match manager {
                    Some(ComponentRef::Local(cid)) => {
                        sdd.component(&cid).map(|c| c.class.clone())
                    }
                    Some(ComponentRef::Class(class)) => Some(class),
                    None => None,
                };
                (mech, component)
            }
            None => (None, None),
        };

        actions.insert(
            actuator.id.clone(),
            ActionAffordance {
                title: None,
                actuator_class: actuator.class.clone(),
                manipulates: actuator.manipulates.clone(),
                affects: actuator.affects.clone(),
                mechanism_class,
                component_class,
                forms: vec![Form {
                    href: format!("/actuators/{}", actuator.id),
                }],
            },
        );
    }

    Ok(ThingDescription {
        id: canonical.id.clone(),
        title: canonical.title.clone(),
        thing_class: Some(canonical.system_class.clone()),
        manages_class: canonical.manages.as_ref().map(|p| p.class.clone()),
        base_url: None,
        system_model_url: Some("/model/sdd".to_string()),
        simulation_model_url: canonical.simulation_model_url.clone(),
        specifications,
        properties,
        actions,
        events: IndexMap::new(),
    })
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

fn typed_ref(class: &Iri) -> Value {
    let mut m = Map::new();
    m.insert("@type".into(), Value::String(class.to_string()));
    Value::Object(m)
}

fn variable_value(v: &ProcessVariable) -> Value {
    let mut m = Map::new();
    m.insert("stuff".into(), Value::String(v.stuff.to_string()));
    m.insert(
        "quantityKind".into(),
        Value::String(v.quantity_kind.to_string()),
    );
    if let Some(unit) = &v.unit {
        m.insert("unit".into(), Value::String(unit.to_string()));
    }
    if let Some(position) = &v.position {
        m.insert("position".into(), Value::String(position.to_string()));
    }
    match &v.at_component {
        Some(ComponentRef::Class(class)) => {
            m.insert("atComponent".into(), typed_ref(class));
        }
        Some(ComponentRef::Local(id)) => {
            m.insert("atComponent".into(), Value::String(id.clone()));
        }
        None => {}
    }
    match &v.mechanism {
        Some(MechanismRef::Class(class)) => {
            m.insert("mechanism".into(), typed_ref(class));
        }
        Some(MechanismRef::Local(id)) => {
            m.insert("mechanism".into(), Value::String(id.clone()));
        }
        None => {}
    }
    Value::Object(m)
}

fn forms_value(forms: &[Form]) -> Value {
    Value::Array(
        forms
            .iter()
            .map(|f| {
                let mut m = Map::new();
                m.insert("href".into(), Value::String(f.href.clone()));
                Value::Object(m)
            })
            .collect(),
    )
}

/// Serializes a thing description to its JSON profile with deterministic
/// key order; serializing the same description twice yields identical
/// bytes. Prefixed names stay in curie form.
pub fn serialize(td: &ThingDescription) -> String {
    let mut root = Map::new();
    root.insert("@context".into(), Value::String(TD_CONTEXT.into()));
    root.insert("@id".into(), Value::String(td.id.clone()));
    root.insert("title".into(), Value::String(td.title.clone()));
    if let Some(class) = &td.thing_class {
        root.insert("@type".into(), Value::String(class.to_string()));
    }
    if let Some(base) = &td.base_url {
        root.insert("base".into(), Value::String(base.clone()));
    }
    if let Some(manages) = &td.manages_class {
        root.insert("manages".into(), typed_ref(manages));
    }
    if let Some(url) = &td.system_model_url {
        root.insert("systemModel".into(), Value::String(url.clone()));
    }
    if let Some(url) = &td.simulation_model_url {
        root.insert("simulationModel".into(), Value::String(url.clone()));
    }

    let mut specification = Map::new();
    for (name, spec) in &td.specifications {
        let mut m = Map::new();
        m.insert(
            "specifiedVariable".into(),
            variable_value(&spec.specified_variable),
        );
        if let Some(v) = spec.min_value {
            m.insert("hasMinValue".into(), number(v));
        }
        if let Some(v) = spec.max_value {
            m.insert("hasMaxValue".into(), number(v));
        }
        if let Some(v) = spec.nominal_value {
            m.insert("hasNominalValue".into(), number(v));
        }
        specification.insert(name.clone(), Value::Object(m));
    }
    root.insert("specification".into(), Value::Object(specification));

    let mut properties = Map::new();
    for (name, p) in &td.properties {
        let mut m = Map::new();
        if let Some(title) = &p.title {
            m.insert("title".into(), Value::String(title.clone()));
        }
        if let Some(class) = &p.sensor_class {
            m.insert("sensor".into(), typed_ref(class));
        }
        if let Some(v) = &p.observes {
            m.insert("observes".into(), variable_value(v));
        }
        if !p.forms.is_empty() {
            m.insert("forms".into(), forms_value(&p.forms));
        }
        properties.insert(name.clone(), Value::Object(m));
    }
    root.insert("properties".into(), Value::Object(properties));

    let mut actions = Map::new();
    for (name, a) in &td.actions {
        let mut m = Map::new();
        if let Some(title) = &a.title {
            m.insert("title".into(), Value::String(title.clone()));
        }
        if let Some(class) = &a.actuator_class {
            m.insert("actuator".into(), typed_ref(class));
        }
        if let Some(class) = &a.mechanism_class {
            m.insert("mechanism".into(), typed_ref(class));
        }
        if let Some(class) = &a.component_class {
            m.insert("component".into(), typed_ref(class));
        }
        if let Some(v) = &a.manipulates {
            m.insert("manipulates".into(), variable_value(v));
        }
        if !a.affects.is_empty() {
            m.insert(
                "affects".into(),
                Value::Array(a.affects.iter().map(variable_value).collect()),
            );
        }
        if !a.forms.is_empty() {
            m.insert("forms".into(), forms_value(&a.forms));
        }
        actions.insert(name.clone(), Value::Object(m));
    }
    root.insert("actions".into(), Value::Object(actions));

    let mut events = Map::new();
    for (name, e) in &td.events {
        let mut m = Map::new();
        if let Some(title) = &e.title {
            m.insert("title".into(), Value::String(title.clone()));
        }
        if !e.forms.is_empty() {
            m.insert("forms".into(), forms_value(&e.forms));
        }
        events.insert(name.clone(), Value::Object(m));
    }
    root.insert("events".into(), Value::Object(events));

    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("valid json");
    text.push('\n');
    text
}

fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < i64::MAX as f64 {
        Value::Number((v as i64).into())
    } else {
        serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

/// Parses a thing description from its JSON profile. Tolerant of absent
/// optional metadata; unknown keys are ignored. `relatedTo` is accepted as
/// an alias for `mechanism` on action affordances.
pub fn parse(bytes: &[u8]) -> Result<ThingDescription, TdError> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| TdError::Json(e.to_string()))?;
    let root = value.as_object().ok_or(TdError::Shape {
        path: "$".into(),
        expected: "object",
    })?;

    let thing_class = match root.get("@type") {
        Some(Value::String(s)) => Some(parse_iri(s, "@type")?),
        Some(_) => {
            return Err(TdError::Shape {
                path: "@type".into(),
                expected: "string",
            })
        }
        None => return Err(TdError::MissingType),
    };

    let id = string_at(root, "@id").unwrap_or_default();
    let title = string_at(root, "title").unwrap_or_default();
    let manages_class = match root.get("manages") {
        Some(v) => Some(typed_ref_class(v, "manages")?),
        None => None,
    };

    let mut specifications = IndexMap::new();
    if let Some(Value::Object(map)) = root.get("specification") {
        for (name, entry) in map {
            let obj = entry.as_object().ok_or(TdError::Shape {
                path: format!("specification.{name}"),
                expected: "object",
            })?;
            let variable = obj.get("specifiedVariable").ok_or(TdError::Shape {
                path: format!("specification.{name}.specifiedVariable"),
                expected: "variable object",
            })?;
            specifications.insert(
                name.clone(),
                DesignSpecification {
                    id: name.clone(),
                    specified_variable: parse_variable(
                        variable,
                        &format!("specification.{name}.specifiedVariable"),
                    )?,
                    min_value: float_at(obj, "hasMinValue"),
                    max_value: float_at(obj, "hasMaxValue"),
                    nominal_value: float_at(obj, "hasNominalValue"),
                },
            );
        }
    }

    let mut properties = IndexMap::new();
    if let Some(Value::Object(map)) = root.get("properties") {
        for (name, entry) in map {
            let obj = entry.as_object().ok_or(TdError::Shape {
                path: format!("properties.{name}"),
                expected: "object",
            })?;
            properties.insert(
                name.clone(),
                PropertyAffordance {
                    title: string_at(obj, "title"),
                    sensor_class: optional_typed_ref(obj, "sensor", name)?,
                    observes: match obj.get("observes") {
                        Some(v) => Some(parse_variable(v, &format!("properties.{name}.observes"))?),
                        None => None,
                    },
                    forms: parse_forms(obj),
                },
            );
        }
    }

    let mut actions = IndexMap::new();
    if let Some(Value::Object(map)) = root.get("actions") {
        for (name, entry) in map {
            let obj = entry.as_object().ok_or(TdError::Shape {
                path: format!("actions.{name}"),
                expected: "object",
            })?;
            let mechanism_class = match optional_typed_ref(obj, "mechanism", name)? {
                Some(c) => Some(c),
                None => optional_typed_ref(obj, "relatedTo", name)?,
            };
            let affects = match obj.get("affects") {
                None => Vec::new(),
                Some(Value::Array(items)) => items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| parse_variable(v, &format!("actions.{name}.affects[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
                Some(single) => {
                    vec![parse_variable(single, &format!("actions.{name}.affects"))?]
                }
            };
            actions.insert(
                name.clone(),
                ActionAffordance {
                    title: string_at(obj, "title"),
                    actuator_class: optional_typed_ref(obj, "actuator", name)?,
                    manipulates: match obj.get("manipulates") {
                        Some(v) => {
                            Some(parse_variable(v, &format!("actions.{name}.manipulates"))?)
                        }
                        None => None,
                    },
                    affects,
                    mechanism_class,
                    component_class: optional_typed_ref(obj, "component", name)?,
                    forms: parse_forms(obj),
                },
            );
        }
    }

    let mut events = IndexMap::new();
    if let Some(Value::Object(map)) = root.get("events") {
        for (name, entry) in map {
            let obj = entry.as_object().ok_or(TdError::Shape {
                path: format!("events.{name}"),
                expected: "object",
            })?;
            events.insert(
                name.clone(),
                EventAffordance {
                    title: string_at(obj, "title"),
                    forms: parse_forms(obj),
                },
            );
        }
    }

    Ok(ThingDescription {
        id,
        title,
        thing_class,
        manages_class,
        base_url: string_at(root, "base"),
        system_model_url: string_at(root, "systemModel"),
        simulation_model_url: string_at(root, "simulationModel"),
        specifications,
        properties,
        actions,
        events,
    })
}

pub fn parse_str(text: &str) -> Result<ThingDescription, TdError> {
    parse(text.as_bytes())
}

fn parse_iri(s: &str, path: &str) -> Result<Iri, TdError> {
    Iri::parse(s).map_err(|_| TdError::Shape {
        path: path.to_string(),
        expected: "curie `prefix:local`",
    })
}

fn string_at(obj: &Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key).and_then(Value::as_str).map(String::from)
}

fn float_at(obj: &Map<String, Value>, key: &str) -> Option<f64> {
    obj.get(key).and_then(Value::as_f64)
}

fn typed_ref_class(value: &Value, path: &str) -> Result<Iri, TdError> {
    match value {
        Value::Object(m) => match m.get("@type").and_then(Value::as_str) {
            Some(s) => parse_iri(s, path),
            None => Err(TdError::Shape {
                path: path.to_string(),
                expected: "`{\"@type\": ...}` object",
            }),
        },
        Value::String(s) => parse_iri(s, path),
        _ => Err(TdError::Shape {
            path: path.to_string(),
            expected: "typed reference",
        }),
    }
}

fn optional_typed_ref(
    obj: &Map<String, Value>,
    key: &str,
    affordance: &str,
) -> Result<Option<Iri>, TdError> {
    match obj.get(key) {
        // Hand-written documents sometimes use a bare `@type` on the value
        // itself (plain WoT style); such entries carry no domain class.
        Some(v) => match typed_ref_class(v, &format!("{affordance}.{key}")) {
            Ok(class) => Ok(Some(class)),
            Err(e) => Err(e),
        },
        None => Ok(None),
    }
}

fn parse_forms(obj: &Map<String, Value>) -> Vec<Form> {
    match obj.get("forms") {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|item| {
                item.as_object()
                    .and_then(|m| m.get("href"))
                    .and_then(Value::as_str)
                    .map(|href| Form {
                        href: href.to_string(),
                    })
            })
            .collect(),
        _ => Vec::new(),
    }
}

fn parse_variable(value: &Value, path: &str) -> Result<ProcessVariable, TdError> {
    let obj = value.as_object().ok_or(TdError::Shape {
        path: path.to_string(),
        expected: "variable object",
    })?;
    let stuff = match obj.get("stuff").and_then(Value::as_str) {
        Some(s) => parse_iri(s, &format!("{path}.stuff"))?,
        None => {
            return Err(TdError::Shape {
                path: format!("{path}.stuff"),
                expected: "curie string",
            })
        }
    };
    let quantity_kind = match obj.get("quantityKind").and_then(Value::as_str) {
        Some(s) => parse_iri(s, &format!("{path}.quantityKind"))?,
        None => {
            return Err(TdError::Shape {
                path: format!("{path}.quantityKind"),
                expected: "curie string",
            })
        }
    };
    let unit = match obj.get("unit").and_then(Value::as_str) {
        Some(s) => Some(parse_iri(s, &format!("{path}.unit"))?),
        None => None,
    };
    let position = match obj.get("position").and_then(Value::as_str) {
        Some(s) => Some(parse_iri(s, &format!("{path}.position"))?),
        None => None,
    };
    let at_component = match obj.get("atComponent") {
        Some(v) => Some(ComponentRef::Class(typed_ref_class(
            v,
            &format!("{path}.atComponent"),
        )?)),
        None => None,
    };
    let mechanism = match obj.get("mechanism") {
        Some(v) => Some(MechanismRef::Class(typed_ref_class(
            v,
            &format!("{path}.mechanism"),
        )?)),
        None => None,
    };
    Ok(ProcessVariable {
        stuff,
        quantity_kind,
        unit,
        position,
        at_component,
        mechanism,
    })
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

/// Returns a copy of the thing description with one metadata aspect removed
/// everywhere it occurs. Idempotent per aspect and commutative across
/// aspects.
pub fn ablate(td: &ThingDescription, aspect: MetadataAspect) -> ThingDescription {
    let mut out = td.clone();
    match aspect {
        MetadataAspect::SystemType => out.thing_class = None,
        MetadataAspect::ProcessType => out.manages_class = None,
        MetadataAspect::SensorType => {
            for p in out.properties.values_mut() {
                p.sensor_class = None;
            }
        }
        MetadataAspect::ObservedVariable => {
            for p in out.properties.values_mut() {
                p.observes = None;
            }
        }
        MetadataAspect::PropertyComponentPosition => {
            for p in out.properties.values_mut() {
                if let Some(v) = &mut p.observes {
                    v.position = None;
                    v.at_component = None;
                }
            }
        }
        MetadataAspect::ActuatorType => {
            for a in out.actions.values_mut() {
                a.actuator_class = None;
            }
        }
        MetadataAspect::ManipulatedVariable => {
            for a in out.actions.values_mut() {
                a.manipulates = None;
            }
        }
        MetadataAspect::AffectedVariable => {
            for a in out.actions.values_mut() {
                a.affects.clear();
            }
        }
        MetadataAspect::ActionComponentPosition => {
            for a in out.actions.values_mut() {
                a.component_class = None;
                if let Some(v) = &mut a.manipulates {
                    v.position = None;
                    v.at_component = None;
                }
                for v in &mut a.affects {
                    v.position = None;
                    v.at_component = None;
                }
            }
        }
        MetadataAspect::DesignParameters => out.specifications.clear(),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdd;

    const BOILER_SDD: &str = include_str!("../tests/fixtures/boiler-sdd.json");
    const PLAIN_BOILER_TD: &str = include_str!("../tests/fixtures/plain-boiler-td.json");

    fn iri(s: &str) -> Iri {
        Iri::parse(s).unwrap()
    }

    fn boiler_td() -> ThingDescription {
        let sdd = sdd::parse_str(BOILER_SDD).unwrap();
        synthesize(&sdd, Taxonomy::shipped()).unwrap()
    }

    #[test]
    fn boiler_synthesis_carries_listing_metadata() {
        let td = boiler_td();
        assert_eq!(td.thing_class.as_ref().unwrap(), &iri("brick:Boiler"));
        assert_eq!(
            td.manages_class.as_ref().unwrap(),
            &iri("hvac:EnergyConversion")
        );

        let action = &td.actions["fuel-valve-actuation"];
        let manipulates = action.manipulates.as_ref().unwrap();
        assert_eq!(manipulates.stuff, iri("brick:Fuel"));
        assert_eq!(manipulates.quantity_kind, iri("qudt:VolumeFlowRate"));
        assert_eq!(manipulates.position.as_ref().unwrap(), &iri("elem:inlet"));
        // atComponent is inferred from the mechanism's managing component.
        assert_eq!(
            manipulates.at_component,
            Some(ComponentRef::Class(iri("hvac:Burner")))
        );
        assert_eq!(
            action.affects[0].at_component,
            Some(ComponentRef::Class(iri("hvac:BoilerTube")))
        );
        assert_eq!(action.affects[0].stuff, iri("brick:Water"));
        assert_eq!(
            action.mechanism_class.as_ref().unwrap(),
            &iri("hvac:Combustion")
        );
        assert_eq!(
            action.component_class.as_ref().unwrap(),
            &iri("hvac:Burner")
        );

        let spec = &td.specifications["min-water-flowrate"];
        assert_eq!(spec.min_value, Some(50.0));
        assert_eq!(spec.specified_variable.unit.as_ref().unwrap(), &iri("qudt:L-PER-MIN"));
    }

    #[test]
    fn sensorless_design_synthesizes_empty_properties() {
        let text = r#"{
            "id": "urn:x", "title": "t", "systemClass": "brick:Boiler",
            "manages": {"class": "hvac:EnergyConversion"}
        }"#;
        let sdd = sdd::parse_str(text).unwrap();
        let td = synthesize(&sdd, Taxonomy::shipped()).unwrap();
        assert!(td.properties.is_empty());
        assert!(serialize(&td).contains("\"properties\": {}"));
    }

    #[test]
    fn serialization_contains_manages_and_is_deterministic() {
        let td = boiler_td();
        let a = serialize(&td);
        let b = serialize(&td);
        assert_eq!(a, b);
        assert!(a.contains(r#""manages": {"#));
        assert!(a.contains(r#""@type": "hvac:EnergyConversion""#));
        assert!(a.contains(r#""hasMinValue": 50"#));
    }

    #[test]
    fn serialize_parse_round_trip_is_identity() {
        let td = boiler_td();
        let parsed = parse_str(&serialize(&td)).unwrap();
        assert_eq!(td, parsed);
    }

    #[test]
    fn plain_td_without_physics_metadata_parses() {
        let td = parse_str(PLAIN_BOILER_TD).unwrap();
        assert_eq!(td.thing_class.as_ref().unwrap(), &iri("brick:Boiler"));
        let prop = &td.properties["water-out-temp"];
        assert!(prop.observes.is_none());
        assert!(prop.sensor_class.is_none());
        assert_eq!(prop.forms[0].href, "/sensors/twout");
        assert!(td.events.contains_key("high-temperature-alarm"));
    }

    #[test]
    fn related_to_is_accepted_as_mechanism_alias() {
        let text = r#"{
            "@context": "https://w3id.org/phydit/td-context/v1",
            "@id": "urn:x", "title": "t", "@type": "brick:Boiler",
            "actions": {
                "fuel-valve-actuation": {
                    "actuator": {"@type": "brick:Valve"},
                    "relatedTo": {"@type": "hvac:Combustion"}
                }
            }
        }"#;
        let td = parse_str(text).unwrap();
        assert_eq!(
            td.actions["fuel-valve-actuation"].mechanism_class,
            Some(iri("hvac:Combustion"))
        );
        // The serializer re-emits the canonical key.
        assert!(serialize(&td).contains("\"mechanism\""));
    }

    #[test]
    fn affects_accepts_object_and_array_forms() {
        let object_form = r#"{
            "@id": "urn:x", "title": "t", "@type": "brick:Boiler",
            "actions": {"a": {"affects": {"stuff": "brick:Water", "quantityKind": "qudt:Temperature"}}}
        }"#;
        let array_form = r#"{
            "@id": "urn:x", "title": "t", "@type": "brick:Boiler",
            "actions": {"a": {"affects": [{"stuff": "brick:Water", "quantityKind": "qudt:Temperature"}]}}
        }"#;
        let a = parse_str(object_form).unwrap();
        let b = parse_str(array_form).unwrap();
        assert_eq!(a.actions["a"].affects, b.actions["a"].affects);
        assert_eq!(a.actions["a"].affects.len(), 1);
    }

    #[test]
    fn missing_type_is_rejected() {
        let text = r#"{"@id": "urn:x", "title": "t"}"#;
        assert!(matches!(parse_str(text), Err(TdError::MissingType)));
    }

    #[test]
    fn ablation_removes_fields_and_is_idempotent() {
        let td = boiler_td();
        let no_obs = ablate(&td, MetadataAspect::ObservedVariable);
        assert!(no_obs.properties.values().all(|p| p.observes.is_none()));
        assert_eq!(ablate(&no_obs, MetadataAspect::ObservedVariable), no_obs);

        let no_spec = ablate(&td, MetadataAspect::DesignParameters);
        assert!(no_spec.specifications.is_empty());
    }

    #[test]
    fn ablation_commutes_across_aspects() {
        let td = boiler_td();
        for a in MetadataAspect::ALL {
            for b in MetadataAspect::ALL {
                let ab = ablate(&ablate(&td, a), b);
                let ba = ablate(&ablate(&td, b), a);
                assert_eq!(ab, ba, "aspects {a} and {b} do not commute");
            }
        }
    }

    #[test]
    fn aspect_tags_round_trip_and_reject_unknown() {
        for aspect in MetadataAspect::ALL {
            assert_eq!(aspect.tag().parse::<MetadataAspect>().unwrap(), aspect);
        }
        assert!("flux-capacitor".parse::<MetadataAspect>().is_err());
    }
}
