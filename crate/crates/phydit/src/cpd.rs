//! Control Program Descriptions: the description of a reusable control
//! program — its inputs, outputs, and parameters — together with the
//! abstract system design (ASD) it was conceived for.
//!
//! The ASD is a first-class, stereotypical system design: it uses the same
//! document shape as a concrete system design but is validated in relaxed
//! mode, so sensor/actuator classes, observed variables, the managed
//! process, and specification values may all be omitted. Whatever the ASD
//! states becomes a requirement for the matcher; whatever it omits is left
//! unconstrained.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DesignSpecification, Diagnostic};
use crate::sdd::{self, SddError, Strictness, SystemDesign};
use crate::vocab::Taxonomy;

/// A control program input, wired at match time to a property affordance
/// of a thing description. `intended_for` names a sensor in the ASD.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpInput {
    pub id: String,
    pub intended_for: String,
}

/// A control program output; `intended_for` names an actuator in the ASD.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpOutput {
    pub id: String,
    pub intended_for: String,
}

/// An operational parameter the program needs from the technical system's
/// design data, expressed as a value-free design specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpParameter {
    pub id: String,
    pub specified_by: DesignSpecification,
}

/// A parsed control program description. A program may declare several
/// ASDs (design variants); a technical system is compatible when any one
/// of them satisfies all rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProgramDesc {
    pub id: String,
    pub title: String,
    pub asds: Vec<SystemDesign>,
    pub inputs: Vec<CpInput>,
    pub outputs: Vec<CpOutput>,
    pub parameters: Vec<CpParameter>,
}

#[derive(Debug, Error)]
pub enum CpdError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("control program description declares no abstract system design")]
    MissingAsd,
    #[error("{io} `{id}` references {kind} `{target}` which exists in no abstract system design")]
    DanglingIo {
        io: &'static str,
        id: String,
        kind: &'static str,
        target: String,
    },
    #[error("embedded abstract system design: {0}")]
    Asd(#[from] SddError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// document layer
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

#[derive(Debug, Serialize, Deserialize)]
struct IoDoc {
    id: String,
    #[serde(rename = "intendedFor")]
    intended_for: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParameterDoc {
    id: String,
    #[serde(rename = "specifiedBy")]
    specified_by: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct CpdDoc {
    id: String,
    #[serde(default)]
    title: String,
    asd: OneOrMany<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<IoDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    outputs: Vec<IoDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    parameters: Vec<ParameterDoc>,
}

/// Parses and resolves a control program description from JSON bytes.
pub fn parse(bytes: &[u8]) -> Result<ControlProgramDesc, CpdError> {
    let doc: CpdDoc =
        serde_json::from_slice(bytes).map_err(|e| CpdError::Schema(e.to_string()))?;

    let asd_values = match doc.asd {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(vs) => vs,
    };
    if asd_values.is_empty() {
        return Err(CpdError::MissingAsd);
    }
    let asds = asd_values
        .into_iter()
        .map(|v| {
            let text = serde_json::to_string(&v).expect("value serializes");
            sdd::parse_str(&text)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let parameters = doc
        .parameters
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let spec: crate::sdd::SpecificationDoc =
                serde_json::from_value(p.specified_by)
                    .map_err(|e| CpdError::Schema(format!("parameters[{i}].specifiedBy: {e}")))?;
            Ok(CpParameter {
                id: p.id.clone(),
                specified_by: spec.into_specification(format!("{}-requirement", p.id)),
            })
        })
        .collect::<Result<Vec<_>, CpdError>>()?;

    let cpd = ControlProgramDesc {
        id: doc.id,
        title: doc.title,
        asds,
        inputs: doc
            .inputs
            .into_iter()
            .map(|io| CpInput {
                id: io.id,
                intended_for: io.intended_for,
            })
            .collect(),
        outputs: doc
            .outputs
            .into_iter()
            .map(|io| CpOutput {
                id: io.id,
                intended_for: io.intended_for,
            })
            .collect(),
        parameters,
    };
    check_io_references(&cpd)?;
    Ok(cpd)
}

pub fn parse_str(text: &str) -> Result<ControlProgramDesc, CpdError> {
    parse(text.as_bytes())
}

fn check_io_references(cpd: &ControlProgramDesc) -> Result<(), CpdError> {
    for input in &cpd.inputs {
        if !cpd
            .asds
            .iter()
            .any(|asd| asd.sensor(&input.intended_for).is_some())
        {
            return Err(CpdError::DanglingIo {
                io: "input",
                id: input.id.clone(),
                kind: "sensor",
                target: input.intended_for.clone(),
            });
        }
    }
    for output in &cpd.outputs {
        if !cpd
            .asds
            .iter()
            .any(|asd| asd.actuator(&output.intended_for).is_some())
        {
            return Err(CpdError::DanglingIo {
                io: "output",
                id: output.id.clone(),
                kind: "actuator",
                target: output.intended_for.clone(),
            });
        }
    }
    Ok(())
}

/// Serializes a control program description to its JSON document form with
/// deterministic key order.
pub fn serialize(cpd: &ControlProgramDesc) -> String {
    let mut root = serde_json::Map::new();
    root.insert("id".into(), cpd.id.clone().into());
    root.insert("title".into(), cpd.title.clone().into());
    let asd_values: Vec<serde_json::Value> = cpd
        .asds
        .iter()
        .map(|asd| serde_json::to_value(sdd::to_doc(asd)).expect("asd serializes"))
        .collect();
    if asd_values.len() == 1 {
        root.insert("asd".into(), asd_values.into_iter().next().unwrap());
    } else {
        root.insert("asd".into(), asd_values.into());
    }
    if !cpd.inputs.is_empty() {
        root.insert(
            "inputs".into(),
            cpd.inputs
                .iter()
                .map(|io| {
                    serde_json::json!({"id": io.id, "intendedFor": io.intended_for})
                })
                .collect::<Vec<_>>()
                .into(),
        );
    }
    if !cpd.outputs.is_empty() {
        root.insert(
            "outputs".into(),
            cpd.outputs
                .iter()
                .map(|io| {
                    serde_json::json!({"id": io.id, "intendedFor": io.intended_for})
                })
                .collect::<Vec<_>>()
                .into(),
        );
    }
    if !cpd.parameters.is_empty() {
        root.insert(
            "parameters".into(),
            cpd.parameters
                .iter()
                .map(|p| {
                    let spec = crate::sdd::SpecificationDoc::from_specification(
                        &p.specified_by,
                        true,
                    );
                    serde_json::json!({
                        "id": p.id,
                        "specifiedBy": serde_json::to_value(spec).expect("spec serializes"),
                    })
                })
                .collect::<Vec<_>>()
                .into(),
        );
    }
    let mut text = serde_json::to_string_pretty(&sdd::normalize_numbers(
        serde_json::Value::Object(root),
    ))
    .expect("valid json");
    text.push('\n');
    text
}

impl ControlProgramDesc {
    /// Canonicalizes every ASD and parameter variable. Parameter variables
    /// with document-local references are resolved against the first ASD
    /// that knows them.
    pub fn canonicalize(&self, taxonomy: &Taxonomy) -> Result<ControlProgramDesc, CpdError> {
        let mut out = self.clone();
        out.asds = self
            .asds
            .iter()
            .map(|asd| asd.canonicalize(taxonomy))
            .collect::<Result<Vec<_>, _>>()?;
        for parameter in &mut out.parameters {
            let mut last_err = None;
            let mut resolved = None;
            for asd in &self.asds {
                match asd.canonicalize_variable(&parameter.specified_by.specified_variable, taxonomy)
                {
                    Ok(v) => {
                        resolved = Some(v);
                        break;
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            match (resolved, last_err) {
                (Some(v), _) => parameter.specified_by.specified_variable = v,
                (None, Some(e)) => return Err(CpdError::Asd(e)),
                (None, None) => {}
            }
        }
        Ok(out)
    }
}

/// Validates a control program description: each ASD is checked in relaxed
/// mode and parameter variables must canonicalize.
pub fn validate(cpd: &ControlProgramDesc, taxonomy: &Taxonomy) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, asd) in cpd.asds.iter().enumerate() {
        for diag in sdd::validate(asd, taxonomy, Strictness::Relaxed) {
            out.push(Diagnostic {
                severity: diag.severity,
                path: format!("asd[{i}].{}", diag.path),
                message: diag.message,
            });
        }
    }
    for (i, parameter) in cpd.parameters.iter().enumerate() {
        let canonicalizable = cpd.asds.iter().any(|asd| {
            asd.canonicalize_variable(&parameter.specified_by.specified_variable, taxonomy)
                .is_ok()
        });
        if !canonicalizable {
            out.push(Diagnostic::error(
                format!("parameters[{i}].specifiedBy.specifiedVariable"),
                "parameter variable does not canonicalize against any ASD",
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMBUSTION_CPD: &str = include_str!("../tests/fixtures/combustion-cpd.json");

    #[test]
    fn combustion_control_fixture_parses_with_one_parameter() {
        let cpd = parse_str(COMBUSTION_CPD).unwrap();
        assert_eq!(cpd.parameters.len(), 1);
        let p = &cpd.parameters[0];
        assert_eq!(p.id, "min-air-flowrate");
        assert!(!p.specified_by.has_bound_value());
        assert_eq!(cpd.asds.len(), 1);
        assert_eq!(cpd.asds[0].system_class, crate::vocab::Iri::new("brick", "Boiler"));
        let diags = validate(&cpd, Taxonomy::shipped());
        assert!(diags.is_empty(), "unexpected diagnostics: {diags:?}");
    }

    #[test]
    fn degenerate_cpd_without_ios_is_valid() {
        let text = r#"{
            "id": "urn:phydit:cp-null", "title": "does nothing",
            "asd": {"id": "urn:phydit:asd-null", "title": "any boiler", "systemClass": "brick:Boiler"}
        }"#;
        let cpd = parse_str(text).unwrap();
        assert!(cpd.inputs.is_empty());
        assert!(cpd.outputs.is_empty());
        assert!(cpd.parameters.is_empty());
    }

    #[test]
    fn output_referencing_missing_actuator_is_rejected() {
        let text = r#"{
            "id": "urn:phydit:cp-broken", "title": "broken",
            "asd": {"id": "urn:phydit:asd-x", "title": "x", "systemClass": "brick:Boiler"},
            "outputs": [{"id": "out-1", "intendedFor": "nonexistent"}]
        }"#;
        assert!(matches!(
            parse_str(text),
            Err(CpdError::DanglingIo { io: "output", .. })
        ));
    }

    #[test]
    fn asd_accepts_array_form() {
        let text = r#"{
            "id": "urn:phydit:cp-variants", "title": "two variants",
            "asd": [
                {"id": "urn:phydit:asd-a", "title": "a", "systemClass": "brick:Boiler"},
                {"id": "urn:phydit:asd-b", "title": "b", "systemClass": "hvac:CondensingBoiler"}
            ]
        }"#;
        let cpd = parse_str(text).unwrap();
        assert_eq!(cpd.asds.len(), 2);
    }

    #[test]
    fn parse_serialize_round_trip_is_stable() {
        let first = parse_str(COMBUSTION_CPD).unwrap();
        let text = serialize(&first);
        let second = parse_str(&text).unwrap();
        assert_eq!(first, second);
        assert_eq!(text, serialize(&second));
    }
}
