//! Deterministic generator for the bundled evaluation corpus: a fleet of
//! 34 air-handling-unit system designs, a library of eleven control program
//! descriptions (eight AHU programs plus three functionally close
//! near-misses for ventilation, fan-coil, and VAV units), and a
//! ground-truth file.
//!
//! The corpus is synthetic but engineered to fixed headline results: with
//! any seed, matching the 34 twins against the library yields 31 uniquely
//! and correctly matched twins, one twin matched by two programs, and two
//! twins matched by none. The 32 twins with a successful match fall into
//! four necessity groups (A/B/C/D of sizes 4/8/16/4) that differ in which
//! thing-description metadata their match depends on; see [`crate::ablation`].
//! The seed only shuffles cosmetic variation (ids, titles, units, extra
//! sensors, events, and specification values), so no two generated units
//! are exactly the same.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpd::{self, ControlProgramDesc, CpInput, CpOutput, CpParameter};
use crate::model::{
    Actuator, Component, ComponentRef, DesignSpecification, PhysicalMechanism, PhysicalProcess,
    Port, ProcessVariable, Sensor,
};
use crate::sdd::{self, SystemDesign};
use crate::vocab::Iri;

/// Seed used for the bundled reference corpus.
pub const DEFAULT_SEED: u64 = 42;

/// Everything the generator produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusBundle {
    pub sdds: Vec<SystemDesign>,
    pub cpds: Vec<ControlProgramDesc>,
    pub ground_truth: GroundTruth,
}

/// Ground-truth labels for one twin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinTruth {
    /// Document id of the twin's system design (and thing description).
    pub sdd_id: String,
    /// Necessity group (A-D); absent for the twins that match no program.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Program ids expected to match, sorted lexicographically.
    pub expected: Vec<String>,
    /// The program the twin was actually commissioned with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<String>,
}

/// Ground truth for the whole corpus, keyed by twin id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub twins: BTreeMap<String, TwinTruth>,
    /// Necessity groups and their member twin ids.
    pub groups: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("ground truth: {0}")]
    GroundTruth(#[from] serde_json::Error),
    #[error("system design {path}: {source}")]
    Sdd {
        path: String,
        source: sdd::SddError,
    },
    #[error("control program {path}: {source}")]
    Cpd {
        path: String,
        source: cpd::CpdError,
    },
}

fn iri(s: &str) -> Iri {
    Iri::parse(s).expect("corpus curie is well-formed")
}

fn air(qk: &str) -> ProcessVariable {
    ProcessVariable::new(iri("brick:Air"), iri(qk))
}

fn water(qk: &str) -> ProcessVariable {
    ProcessVariable::new(iri("brick:Water"), iri(qk))
}

// ---------------------------------------------------------------------------
// sensor and actuator kits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SensorKind {
    SupplyTemp,
    DuctPressure,
    SupplyFlow,
    ReturnCo2,
    ExhaustHumidity,
    SupplyHumidity,
    // cosmetic extras drawn by the rng
    ZoneCo2,
    ReturnHumidity,
}

impl SensorKind {
    fn id(self) -> &'static str {
        match self {
            SensorKind::SupplyTemp => "supply-air-temp",
            SensorKind::DuctPressure => "duct-static-pressure",
            SensorKind::SupplyFlow => "supply-air-flow",
            SensorKind::ReturnCo2 => "return-air-co2",
            SensorKind::ExhaustHumidity => "exhaust-air-humidity",
            SensorKind::SupplyHumidity => "supply-air-humidity",
            SensorKind::ZoneCo2 => "zone-co2",
            SensorKind::ReturnHumidity => "return-air-humidity",
        }
    }

    fn class(self) -> &'static str {
        match self {
            SensorKind::SupplyTemp => "brick:TemperatureSensor",
            SensorKind::DuctPressure => "brick:PressureSensor",
            SensorKind::SupplyFlow => "brick:FlowSensor",
            SensorKind::ReturnCo2 | SensorKind::ZoneCo2 => "brick:CO2Sensor",
            SensorKind::ExhaustHumidity
            | SensorKind::SupplyHumidity
            | SensorKind::ReturnHumidity => "brick:HumiditySensor",
        }
    }

    /// The observed variable without unit or placement context.
    fn variable(self) -> ProcessVariable {
        match self {
            SensorKind::SupplyTemp => air("qudt:Temperature"),
            SensorKind::DuctPressure => air("qudt:Pressure"),
            SensorKind::SupplyFlow => air("qudt:VolumeFlowRate"),
            SensorKind::ReturnCo2 | SensorKind::ZoneCo2 => air("qudt:Concentration"),
            SensorKind::ExhaustHumidity
            | SensorKind::SupplyHumidity
            | SensorKind::ReturnHumidity => air("qudt:RelativeHumidity"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ActuatorKind {
    Fan,
    HeatingValve,
    /// The heating valve sits in the heat-exchanger outlet instead of the
    /// inlet; no program in the library expects this placement.
    OutletHeatingValve,
    CoolingValve,
    Damper,
    HeatWheel,
    HumidifierValve,
}

struct ActuatorKit {
    actuator_id: &'static str,
    actuator_class: &'static str,
    mechanism_id: &'static str,
    mechanism_class: &'static str,
    component_id: &'static str,
    component_class: &'static str,
    manipulates: ProcessVariable,
    affects: Vec<ProcessVariable>,
}

impl ActuatorKind {
    fn kit(self) -> ActuatorKit {
        let supply = iri("elem:supply");
        let inlet = iri("elem:inlet");
        let mixed = iri("elem:mixed");
        match self {
            ActuatorKind::Fan => ActuatorKit {
                actuator_id: "supply-fan-drive",
                actuator_class: "hvac:FanSpeedDrive",
                mechanism_id: "air-flow",
                mechanism_class: "hvac:AirFlow",
                component_id: "supply-fan",
                component_class: "hvac:SupplyFan",
                manipulates: air("qudt:VolumeFlowRate")
                    .with_unit(iri("qudt:M3-PER-HR"))
                    .with_position(supply.clone()),
                affects: vec![air("qudt:Pressure").with_position(supply)],
            },
            ActuatorKind::HeatingValve | ActuatorKind::OutletHeatingValve => ActuatorKit {
                actuator_id: "heating-valve",
                actuator_class: "hvac:HeatingValveActuator",
                mechanism_id: "heating-exchange",
                mechanism_class: "hvac:HeatExchange",
                component_id: "heating-coil",
                component_class: "hvac:HeatingCoil",
                manipulates: water("qudt:VolumeFlowRate")
                    .with_unit(iri("qudt:L-PER-MIN"))
                    .with_position(if self == ActuatorKind::OutletHeatingValve {
                        iri("elem:outlet")
                    } else {
                        inlet
                    }),
                affects: vec![air("qudt:Temperature").with_position(supply)],
            },
            ActuatorKind::CoolingValve => ActuatorKit {
                actuator_id: "cooling-valve",
                actuator_class: "hvac:CoolingValveActuator",
                mechanism_id: "cooling-exchange",
                mechanism_class: "hvac:HeatExchange",
                component_id: "cooling-coil",
                component_class: "hvac:CoolingCoil",
                manipulates: water("qudt:VolumeFlowRate")
                    .with_unit(iri("qudt:L-PER-MIN"))
                    .with_position(inlet),
                affects: vec![air("qudt:Temperature").with_position(supply)],
            },
            ActuatorKind::Damper => ActuatorKit {
                actuator_id: "outside-air-damper-drive",
                actuator_class: "hvac:DamperActuator",
                mechanism_id: "air-mixing",
                mechanism_class: "hvac:AirMixing",
                component_id: "mixing-box",
                component_class: "hvac:MixingBox",
                manipulates: air("qudt:VolumeFlowRate").with_position(mixed.clone()),
                affects: vec![air("qudt:Temperature").with_position(mixed)],
            },
            ActuatorKind::HeatWheel => ActuatorKit {
                actuator_id: "heat-wheel-drive",
                actuator_class: "hvac:HeatWheelDrive",
                mechanism_id: "heat-recovery",
                mechanism_class: "hvac:HeatRecovery",
                component_id: "heat-recovery-wheel",
                component_class: "hvac:HeatRecoveryWheel",
                manipulates: air("qudt:Temperature").with_position(supply.clone()),
                affects: vec![air("qudt:RelativeHumidity").with_position(supply)],
            },
            ActuatorKind::HumidifierValve => ActuatorKit {
                actuator_id: "humidifier-valve",
                actuator_class: "hvac:HumidifierValveActuator",
                mechanism_id: "humidification",
                mechanism_class: "hvac:Humidification",
                component_id: "humidifier",
                component_class: "hvac:Humidifier",
                manipulates: water("qudt:VolumeFlowRate")
                    .with_unit(iri("qudt:L-PER-MIN"))
                    .with_position(inlet),
                affects: vec![air("qudt:RelativeHumidity").with_position(supply)],
            },
        }
    }
}

// ---------------------------------------------------------------------------
// control program library
// ---------------------------------------------------------------------------

/// How a program's ASD states its IO requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IoStyle {
    /// Sensor and actuator classes only (groups A and B).
    ClassOnly,
    /// Process variables, no sensor classes (group C).
    Variables,
    /// Process variables with position and component context, plus design
    /// parameters (group D).
    VariablesInContext,
}

struct CpDef {
    key: &'static str,
    title: &'static str,
    group: Option<char>,
    system_class: &'static str,
    process: Option<&'static str>,
    style: IoStyle,
    sensors: &'static [SensorKind],
    actuators: &'static [ActuatorKind],
    with_parameter: bool,
}

const CP_DEFS: [CpDef; 11] = [
    CpDef {
        key: "cp-supply-fan-basic",
        title: "Constant-volume supply fan control",
        group: Some('A'),
        system_class: "hvac:AirHandlingUnit",
        process: None,
        style: IoStyle::ClassOnly,
        sensors: &[SensorKind::SupplyTemp],
        actuators: &[ActuatorKind::Fan],
        with_parameter: false,
    },
    CpDef {
        key: "cp-economizer-ventilation",
        title: "Economizer ventilation with CO2 override",
        group: Some('B'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirDistribution"),
        style: IoStyle::ClassOnly,
        sensors: &[SensorKind::SupplyTemp, SensorKind::ReturnCo2],
        actuators: &[ActuatorKind::Fan, ActuatorKind::Damper],
        with_parameter: false,
    },
    CpDef {
        key: "cp-heat-recovery-ventilation",
        title: "Ventilation with rotary heat recovery",
        group: Some('B'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirDistribution"),
        style: IoStyle::ClassOnly,
        sensors: &[SensorKind::SupplyTemp, SensorKind::ExhaustHumidity],
        actuators: &[ActuatorKind::Fan, ActuatorKind::HeatWheel],
        with_parameter: false,
    },
    CpDef {
        key: "cp-heating-coil-temperature",
        title: "Supply temperature control with heating coil",
        group: Some('C'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirConditioning"),
        style: IoStyle::Variables,
        sensors: &[SensorKind::SupplyTemp],
        actuators: &[ActuatorKind::Fan, ActuatorKind::HeatingValve],
        with_parameter: false,
    },
    CpDef {
        key: "cp-heat-cool-pressure-reset",
        title: "Heating/cooling sequence with duct pressure reset",
        group: Some('C'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirConditioning"),
        style: IoStyle::Variables,
        sensors: &[SensorKind::SupplyTemp, SensorKind::DuctPressure],
        actuators: &[
            ActuatorKind::Fan,
            ActuatorKind::HeatingValve,
            ActuatorKind::CoolingValve,
        ],
        with_parameter: false,
    },
    CpDef {
        key: "cp-heat-cool-flow-tracking",
        title: "Heating/cooling sequence with airflow tracking",
        group: Some('C'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirConditioning"),
        style: IoStyle::Variables,
        sensors: &[SensorKind::SupplyTemp, SensorKind::SupplyFlow],
        actuators: &[
            ActuatorKind::Fan,
            ActuatorKind::HeatingValve,
            ActuatorKind::CoolingValve,
        ],
        with_parameter: false,
    },
    CpDef {
        key: "cp-economizer-heating",
        title: "Economizer with heating coil sequence",
        group: Some('C'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirDistribution"),
        style: IoStyle::Variables,
        sensors: &[SensorKind::SupplyTemp, SensorKind::ReturnCo2],
        actuators: &[
            ActuatorKind::Fan,
            ActuatorKind::Damper,
            ActuatorKind::HeatingValve,
        ],
        with_parameter: false,
    },
    CpDef {
        key: "cp-humidified-heating",
        title: "Heating with steam humidification",
        group: Some('D'),
        system_class: "hvac:AirHandlingUnit",
        process: Some("hvac:AirConditioning"),
        style: IoStyle::VariablesInContext,
        sensors: &[SensorKind::SupplyTemp, SensorKind::SupplyHumidity],
        actuators: &[
            ActuatorKind::Fan,
            ActuatorKind::HeatingValve,
            ActuatorKind::HumidifierValve,
        ],
        with_parameter: true,
    },
    CpDef {
        key: "cp-ventilation-unit",
        title: "Ventilation unit supply control",
        group: None,
        system_class: "hvac:VentilationUnit",
        process: Some("hvac:AirDistribution"),
        style: IoStyle::ClassOnly,
        sensors: &[SensorKind::SupplyTemp],
        actuators: &[ActuatorKind::Fan],
        with_parameter: false,
    },
    CpDef {
        key: "cp-fan-coil-unit",
        title: "Fan-coil room temperature control",
        group: None,
        system_class: "hvac:FanCoilUnit",
        process: Some("hvac:AirConditioning"),
        style: IoStyle::ClassOnly,
        sensors: &[SensorKind::SupplyTemp],
        actuators: &[ActuatorKind::Fan, ActuatorKind::HeatingValve],
        with_parameter: false,
    },
    CpDef {
        key: "cp-vav-box",
        title: "Variable-air-volume box airflow control",
        group: None,
        system_class: "hvac:VariableAirVolumeBox",
        process: Some("hvac:AirDistribution"),
        style: IoStyle::ClassOnly,
        sensors: &[SensorKind::SupplyFlow],
        actuators: &[ActuatorKind::Damper],
        with_parameter: false,
    },
];

/// Index of the two programs involved in the engineered double match.
const DOUBLE_PRIMARY: usize = 4; // cp-heat-cool-pressure-reset
const DOUBLE_SECONDARY: usize = 5; // cp-heat-cool-flow-tracking

fn supply_duct_context(v: ProcessVariable, component: ComponentRef) -> ProcessVariable {
    v.with_position(iri("elem:supply")).at_component(component)
}

fn cp_urn(key: &str) -> String {
    format!("urn:phydit:{key}")
}

fn build_cpd(def: &CpDef) -> ControlProgramDesc {
    let mut asd = SystemDesign {
        id: format!("urn:phydit:asd-{}", def.key.trim_start_matches("cp-")),
        title: format!("Stereotypical system for {}", def.title),
        system_class: iri(def.system_class),
        manages: def.process.map(|p| PhysicalProcess {
            class: iri(p),
            mechanisms: Vec::new(),
        }),
        components: Vec::new(),
        sensors: Vec::new(),
        actuators: Vec::new(),
        specifications: Vec::new(),
        simulation_model_url: None,
    };

    let mut inputs = Vec::new();
    for kind in def.sensors {
        let sensor = match def.style {
            IoStyle::ClassOnly => Sensor {
                id: kind.id().into(),
                class: Some(iri(kind.class())),
                observes: None,
            },
            IoStyle::Variables => Sensor {
                id: kind.id().into(),
                class: None,
                observes: Some(kind.variable()),
            },
            IoStyle::VariablesInContext => Sensor {
                id: kind.id().into(),
                class: None,
                observes: Some(supply_duct_context(
                    kind.variable(),
                    ComponentRef::Class(iri("hvac:SupplyDuct")),
                )),
            },
        };
        inputs.push(CpInput {
            id: format!("in-{}", kind.id()),
            intended_for: sensor.id.clone(),
        });
        asd.sensors.push(sensor);
    }

    let mut outputs = Vec::new();
    for kind in def.actuators {
        let kit = kind.kit();
        let actuator = match def.style {
            IoStyle::ClassOnly => Actuator {
                id: kit.actuator_id.into(),
                class: Some(iri(kit.actuator_class)),
                manipulates: None,
                affects: Vec::new(),
                related_mechanism: None,
            },
            IoStyle::Variables | IoStyle::VariablesInContext => Actuator {
                id: kit.actuator_id.into(),
                class: Some(iri(kit.actuator_class)),
                manipulates: Some(kit.manipulates.clone()),
                affects: kit.affects.clone(),
                related_mechanism: None,
            },
        };
        outputs.push(CpOutput {
            id: format!("out-{}", kit.actuator_id),
            intended_for: actuator.id.clone(),
        });
        asd.actuators.push(actuator);
    }

    let parameters = if def.with_parameter {
        vec![CpParameter {
            id: "min-outdoor-airflow".into(),
            specified_by: DesignSpecification {
                id: "req-min-outdoor-airflow".into(),
                specified_variable: air("qudt:VolumeFlowRate"),
                min_value: None,
                max_value: None,
                nominal_value: None,
            },
        }]
    } else {
        Vec::new()
    };

    ControlProgramDesc {
        id: cp_urn(def.key),
        title: def.title.into(),
        asds: vec![asd],
        inputs,
        outputs,
        parameters,
    }
}

// ---------------------------------------------------------------------------
// twin construction
// ---------------------------------------------------------------------------

struct TwinPlan {
    /// Index into `CP_DEFS` of the commissioned program; `None` for the
    /// two twins whose valve placement no program expects.
    correct: Option<usize>,
    /// Extra program expected to match as well (the double match).
    also_matches: Option<usize>,
    sensors: Vec<SensorKind>,
    actuators: Vec<ActuatorKind>,
    in_context: bool,
}

fn twin_plans() -> Vec<TwinPlan> {
    let mut plans = Vec::with_capacity(34);
    // Four twins per commissioned program.
    for (idx, def) in CP_DEFS.iter().enumerate().take(8) {
        for variant in 0..4 {
            let mut sensors: Vec<SensorKind> = def.sensors.to_vec();
            let mut also_matches = None;
            // One pressure-reset unit also carries an airflow station, which
            // satisfies the flow-tracking program as well.
            if idx == DOUBLE_PRIMARY && variant == 3 {
                sensors.push(SensorKind::SupplyFlow);
                also_matches = Some(DOUBLE_SECONDARY);
            }
            plans.push(TwinPlan {
                correct: Some(idx),
                also_matches,
                sensors,
                actuators: def.actuators.to_vec(),
                in_context: def.style == IoStyle::VariablesInContext,
            });
        }
    }
    // Two twins with the heating valve in the heat-exchanger outlet.
    plans.push(TwinPlan {
        correct: None,
        also_matches: None,
        sensors: vec![SensorKind::SupplyTemp],
        actuators: vec![ActuatorKind::Fan, ActuatorKind::OutletHeatingValve],
        in_context: false,
    });
    plans.push(TwinPlan {
        correct: None,
        also_matches: None,
        sensors: vec![SensorKind::SupplyTemp, SensorKind::DuctPressure],
        actuators: vec![
            ActuatorKind::Fan,
            ActuatorKind::OutletHeatingValve,
            ActuatorKind::CoolingValve,
        ],
        in_context: false,
    });
    plans
}

const BUILDINGS: [&str; 8] = [
    "north wing",
    "south wing",
    "east wing",
    "west wing",
    "atrium",
    "annex",
    "lab block",
    "office tower",
];

const EVENT_POOL: [&str; 3] = ["filter-alarm", "frost-alarm", "fan-fault"];

fn build_twin(plan: &TwinPlan, twin_no: usize, rng: &mut ChaCha8Rng) -> SystemDesign {
    let twin_id = format!("ahu-{twin_no:02}");
    let building = BUILDINGS[rng.random_range(0..BUILDINGS.len())];
    let level = rng.random_range(1..=8);
    let temp_unit = if rng.random_bool(0.3) {
        "qudt:DEG_F"
    } else {
        "qudt:DEG_C"
    };

    let mut mechanisms = Vec::new();
    let mut components = Vec::new();
    let mut actuators = Vec::new();
    for kind in &plan.actuators {
        let kit = kind.kit();
        mechanisms.push(PhysicalMechanism {
            id: kit.mechanism_id.into(),
            class: iri(kit.mechanism_class),
        });
        let ports = if *kind == ActuatorKind::Fan {
            vec![Port {
                id: "discharge".into(),
                class: iri("hvac:FlowTerminal"),
            }]
        } else {
            Vec::new()
        };
        components.push(Component {
            id: kit.component_id.into(),
            class: iri(kit.component_class),
            part_of: None,
            ports,
            manages_mechanism: Some(kit.mechanism_id.into()),
        });
        if *kind == ActuatorKind::Damper {
            components.push(Component {
                id: "outside-air-damper".into(),
                class: iri("hvac:OutsideAirDamper"),
                part_of: Some("mixing-box".into()),
                ports: Vec::new(),
                manages_mechanism: None,
            });
        }
        actuators.push(Actuator {
            id: kit.actuator_id.into(),
            class: Some(iri(kit.actuator_class)),
            manipulates: Some(kit.manipulates.clone()),
            affects: kit.affects.clone(),
            related_mechanism: Some(kit.mechanism_id.into()),
        });
    }

    if plan.in_context {
        components.push(Component {
            id: "supply-duct".into(),
            class: iri("hvac:SupplyDuct"),
            part_of: None,
            ports: Vec::new(),
            manages_mechanism: None,
        });
    }
    if rng.random_bool(0.5) {
        components.push(Component {
            id: "intake-filter".into(),
            class: iri("hvac:Filter"),
            part_of: None,
            ports: Vec::new(),
            manages_mechanism: None,
        });
    }

    let mut sensors = Vec::new();
    let mut sensor_kinds = plan.sensors.clone();
    // Cosmetic extra sensors; property affordances beyond a program's
    // inputs never hurt a match.
    for extra in [SensorKind::ZoneCo2, SensorKind::ReturnHumidity] {
        if rng.random_bool(0.4) && !sensor_kinds.contains(&extra) {
            sensor_kinds.push(extra);
        }
    }
    for kind in &sensor_kinds {
        let mut variable = kind.variable();
        if variable.quantity_kind == iri("qudt:Temperature") {
            variable = variable.with_unit(iri(temp_unit));
        } else if variable.quantity_kind == iri("qudt:Pressure") {
            variable = variable.with_unit(iri("qudt:PA"));
        } else if variable.quantity_kind == iri("qudt:VolumeFlowRate") {
            variable = variable.with_unit(iri("qudt:M3-PER-HR"));
        } else if variable.quantity_kind == iri("qudt:RelativeHumidity") {
            variable = variable.with_unit(iri("qudt:PERCENT"));
        } else if variable.quantity_kind == iri("qudt:Concentration") {
            variable = variable.with_unit(iri("qudt:PPM"));
        }
        // Group-D twins document where along the process their key
        // variables are observed; the extras stay context-free.
        if plan.in_context
            && matches!(kind, SensorKind::SupplyTemp | SensorKind::SupplyHumidity)
        {
            variable = supply_duct_context(variable, ComponentRef::Local("supply-duct".into()));
        }
        sensors.push(Sensor {
            id: kind.id().into(),
            class: Some(iri(kind.class())),
            observes: Some(variable),
        });
    }

    let mut specifications = vec![DesignSpecification {
        id: "design-airflow".into(),
        specified_variable: air("qudt:VolumeFlowRate").with_unit(iri("qudt:M3-PER-HR")),
        min_value: None,
        max_value: None,
        nominal_value: Some(f64::from(rng.random_range(20..=120) * 100)),
    }];
    if plan.in_context {
        specifications.push(DesignSpecification {
            id: "min-outdoor-airflow".into(),
            specified_variable: air("qudt:VolumeFlowRate").with_unit(iri("qudt:M3-PER-HR")),
            min_value: Some(f64::from(rng.random_range(16..=40) * 50)),
            max_value: None,
            nominal_value: None,
        });
    }
    if rng.random_bool(0.5) {
        specifications.push(DesignSpecification {
            id: "design-supply-temp".into(),
            specified_variable: air("qudt:Temperature").with_unit(iri("qudt:DEG_C")),
            min_value: None,
            max_value: None,
            nominal_value: Some(14.0 + f64::from(rng.random_range(0..=12)) * 0.5),
        });
    }

    SystemDesign {
        id: format!("urn:phydit:{twin_id}"),
        title: format!("AHU {twin_no:02} — {building}, level {level}"),
        system_class: iri("hvac:AirHandlingUnit"),
        manages: Some(PhysicalProcess {
            class: iri("hvac:AirConditioning"),
            mechanisms,
        }),
        components,
        sensors,
        actuators,
        specifications,
        simulation_model_url: rng
            .random_bool(0.4)
            .then(|| format!("http://models.example/{twin_id}.fmu")),
    }
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

/// Generates the corpus. Deterministic: the same seed always produces the
/// same bundle, byte for byte once written.
pub fn generate(seed: u64) -> CorpusBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let cpds: Vec<ControlProgramDesc> = CP_DEFS.iter().map(build_cpd).collect();

    let mut plans = twin_plans();
    plans.shuffle(&mut rng);

    let mut sdds = Vec::with_capacity(plans.len());
    let mut twins = BTreeMap::new();
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for (i, plan) in plans.iter().enumerate() {
        let twin_no = i + 1;
        let twin_id = format!("ahu-{twin_no:02}");
        let sdd = build_twin(plan, twin_no, &mut rng);

        let mut expected: Vec<String> = plan
            .correct
            .iter()
            .chain(plan.also_matches.iter())
            .map(|&idx| cp_urn(CP_DEFS[idx].key))
            .collect();
        expected.sort();

        let group = plan
            .correct
            .and_then(|idx| CP_DEFS[idx].group)
            .map(|g| g.to_string());
        if let Some(g) = &group {
            groups.entry(g.clone()).or_default().push(twin_id.clone());
        }
        twins.insert(
            twin_id,
            TwinTruth {
                sdd_id: sdd.id.clone(),
                group,
                expected,
                correct: plan.correct.map(|idx| cp_urn(CP_DEFS[idx].key)),
            },
        );
        sdds.push(sdd);
    }
    for members in groups.values_mut() {
        members.sort();
    }

    CorpusBundle {
        sdds,
        cpds,
        ground_truth: GroundTruth {
            seed,
            twins,
            groups,
        },
    }
}

// ---------------------------------------------------------------------------
// bundle IO
// ---------------------------------------------------------------------------

/// Short twin id (`ahu-07`) from a document urn (`urn:phydit:ahu-07`).
pub fn twin_id_of(sdd_id: &str) -> &str {
    sdd_id.rsplit(':').next().unwrap_or(sdd_id)
}

/// Writes the bundle as `sdd/*.json`, `cpd/*.json`, `ground-truth.json`,
/// and a fleet `manifest.json` under `dir`.
pub fn write_to_dir(bundle: &CorpusBundle, dir: &Path) -> Result<(), CorpusError> {
    let sdd_dir = dir.join("sdd");
    let cpd_dir = dir.join("cpd");
    std::fs::create_dir_all(&sdd_dir)?;
    std::fs::create_dir_all(&cpd_dir)?;

    let mut manifest_twins = Vec::new();
    for sdd in &bundle.sdds {
        let twin_id = twin_id_of(&sdd.id);
        let rel = format!("sdd/{twin_id}.json");
        std::fs::write(dir.join(&rel), sdd::serialize(sdd))?;
        manifest_twins.push(serde_json::json!({ "id": twin_id, "sdd": rel }));
    }
    for cpd_doc in &bundle.cpds {
        let key = twin_id_of(&cpd_doc.id);
        std::fs::write(cpd_dir.join(format!("{key}.json")), cpd::serialize(cpd_doc))?;
    }

    let ground_truth = serde_json::to_string_pretty(&bundle.ground_truth)?;
    std::fs::write(dir.join("ground-truth.json"), ground_truth + "\n")?;

    let manifest = serde_json::to_string_pretty(&serde_json::json!({ "twins": manifest_twins }))?;
    std::fs::write(dir.join("manifest.json"), manifest + "\n")?;
    Ok(())
}

/// Loads a bundle previously written with [`write_to_dir`]. Files are read
/// in lexicographic order, so the result is deterministic.
pub fn load_from_dir(dir: &Path) -> Result<CorpusBundle, CorpusError> {
    let read_sorted = |subdir: &Path| -> Result<Vec<std::path::PathBuf>, CorpusError> {
        let mut paths: Vec<_> = std::fs::read_dir(subdir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        Ok(paths)
    };

    let mut sdds = Vec::new();
    for path in read_sorted(&dir.join("sdd"))? {
        let bytes = std::fs::read(&path)?;
        sdds.push(sdd::parse(&bytes).map_err(|source| CorpusError::Sdd {
            path: path.display().to_string(),
            source,
        })?);
    }
    let mut cpds = Vec::new();
    for path in read_sorted(&dir.join("cpd"))? {
        let bytes = std::fs::read(&path)?;
        cpds.push(cpd::parse(&bytes).map_err(|source| CorpusError::Cpd {
            path: path.display().to_string(),
            source,
        })?);
    }
    let ground_truth: GroundTruth =
        serde_json::from_slice(&std::fs::read(dir.join("ground-truth.json"))?)?;
    Ok(CorpusBundle {
        sdds,
        cpds,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{MatchOutcome, Matcher};
    use crate::sdd::Strictness;
    use crate::td;
    use crate::vocab::Taxonomy;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate(42), generate(42));
        assert_ne!(generate(42).sdds[0].title, generate(7).sdds[0].title);
    }

    #[test]
    fn corpus_has_expected_shape() {
        let bundle = generate(DEFAULT_SEED);
        assert_eq!(bundle.sdds.len(), 34);
        assert_eq!(bundle.cpds.len(), 11);
        let gt = &bundle.ground_truth;
        assert_eq!(gt.twins.len(), 34);
        assert_eq!(
            gt.groups.iter().map(|(g, m)| (g.as_str(), m.len())).collect::<Vec<_>>(),
            vec![("A", 4), ("B", 8), ("C", 16), ("D", 4)]
        );
        let doubles = gt.twins.values().filter(|t| t.expected.len() == 2).count();
        let none = gt.twins.values().filter(|t| t.expected.is_empty()).count();
        assert_eq!(doubles, 1);
        assert_eq!(none, 2);
    }

    #[test]
    fn every_corpus_sdd_validates_clean() {
        let bundle = generate(DEFAULT_SEED);
        let taxonomy = Taxonomy::shipped();
        for sdd in &bundle.sdds {
            let diags = sdd::validate(sdd, taxonomy, Strictness::Strict);
            assert!(diags.is_empty(), "{}: {diags:?}", sdd.id);
        }
        for cpd_doc in &bundle.cpds {
            let diags = crate::cpd::validate(cpd_doc, taxonomy);
            assert!(diags.is_empty(), "{}: {diags:?}", cpd_doc.id);
        }
    }

    #[test]
    fn matcher_recovers_ground_truth_labels() {
        let bundle = generate(DEFAULT_SEED);
        let taxonomy = Taxonomy::shipped();
        let matcher = Matcher::new(taxonomy);
        let tds: Vec<_> = bundle
            .sdds
            .iter()
            .map(|s| td::synthesize(s, taxonomy).unwrap())
            .collect();
        let cpds: Vec<_> = bundle
            .cpds
            .iter()
            .map(|c| c.canonicalize(taxonomy).unwrap())
            .collect();
        let matrix = matcher.match_all(&tds, &cpds);

        let mut unique = 0;
        let mut multi = 0;
        let mut none = 0;
        for summary in &matrix.summaries {
            let twin = &bundle.ground_truth.twins[twin_id_of(&summary.td_id)];
            let mut matched = summary.matched.clone();
            matched.sort();
            assert_eq!(matched, twin.expected, "twin {}", summary.td_id);
            match summary.outcome {
                MatchOutcome::Unique => unique += 1,
                MatchOutcome::Multiple => multi += 1,
                MatchOutcome::None => none += 1,
            }
        }
        assert_eq!((unique, multi, none), (31, 1, 2));
    }

    #[test]
    fn affordance_counts_mirror_sensor_and_actuator_counts() {
        let bundle = generate(DEFAULT_SEED);
        let taxonomy = Taxonomy::shipped();
        let sdd = &bundle.sdds[0];
        let synthesized = td::synthesize(sdd, taxonomy).unwrap();
        assert_eq!(
            synthesized.properties.len() + synthesized.actions.len(),
            sdd.sensors.len() + sdd.actuators.len()
        );
    }

    #[test]
    fn write_and_load_round_trips() {
        let bundle = generate(DEFAULT_SEED);
        let dir = tempfile::tempdir().unwrap();
        write_to_dir(&bundle, dir.path()).unwrap();
        let loaded = load_from_dir(dir.path()).unwrap();
        assert_eq!(bundle, loaded);

        let dir2 = tempfile::tempdir().unwrap();
        write_to_dir(&bundle, dir2.path()).unwrap();
        let a = std::fs::read(dir.path().join("sdd/ahu-01.json")).unwrap();
        let b = std::fs::read(dir2.path().join("sdd/ahu-01.json")).unwrap();
        assert_eq!(a, b);
    }
}
