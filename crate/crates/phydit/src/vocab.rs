//! Namespaced identifiers and the class taxonomy with subclass reasoning.
//!
//! Every class mentioned in a system design, control program description,
//! or thing description must be registered in a [`Taxonomy`]. The taxonomy
//! is loaded from a line-oriented text file (see `data/taxonomy.pdt` for the
//! grammar) and precomputes the reflexive-transitive subclass closure so
//! that [`Taxonomy::subclass_of`] is a constant-time set lookup.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A compact namespaced identifier (`prefix:local`).
///
/// Equality and ordering are decided on the `(prefix, local)` pair. Because
/// the prefix table maps distinct prefixes to distinct bases (checked at
/// load), this coincides with equality of the expanded IRI strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri {
    prefix: String,
    local: String,
}

impl Iri {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
            local: local.into(),
        }
    }

    /// Parses a `prefix:local` curie. The prefix is everything before the
    /// first colon; both parts must be non-empty.
    pub fn parse(curie: &str) -> Result<Self, TaxonomyError> {
        match curie.split_once(':') {
            Some((p, l)) if !p.is_empty() && !l.is_empty() => Ok(Self::new(p, l)),
            _ => Err(TaxonomyError::MalformedCurie {
                curie: curie.to_string(),
            }),
        }
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local(&self) -> &str {
        &self.local
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

impl Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Iri::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Maps prefix tokens to IRI bases. Expansion is total for registered
/// prefixes and injective (two tokens never share a base).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixTable {
    bases: BTreeMap<String, String>,
}

impl PrefixTable {
    pub fn register(&mut self, token: &str, base: &str) -> Result<(), TaxonomyError> {
        if let Some(existing) = self.bases.get(token) {
            if existing != base {
                return Err(TaxonomyError::PrefixRedeclared {
                    token: token.to_string(),
                });
            }
            return Ok(());
        }
        if self.bases.values().any(|b| b == base) {
            return Err(TaxonomyError::BaseReused {
                base: base.to_string(),
            });
        }
        self.bases.insert(token.to_string(), base.to_string());
        Ok(())
    }

    pub fn base_of(&self, token: &str) -> Option<&str> {
        self.bases.get(token).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.bases.contains_key(token)
    }

    /// Expands a curie to its full IRI string.
    pub fn expand(&self, iri: &Iri) -> Result<String, TaxonomyError> {
        self.base_of(iri.prefix())
            .map(|base| format!("{base}{}", iri.local()))
            .ok_or_else(|| TaxonomyError::UnknownPrefix {
                token: iri.prefix().to_string(),
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bases.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("malformed curie `{curie}` (expected `prefix:local`)")]
    MalformedCurie { curie: String },
    #[error("unknown prefix `{token}`")]
    UnknownPrefix { token: String },
    #[error("prefix `{token}` redeclared with a different base")]
    PrefixRedeclared { token: String },
    #[error("iri base `{base}` bound to more than one prefix")]
    BaseReused { base: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("subclass cycle detected: {}", path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" -> "))]
    Cycle { path: Vec<Iri> },
    #[error("class `{iri}` is not registered in the taxonomy")]
    UnknownClass { iri: Iri },
    #[error("failed to read taxonomy file: {0}")]
    Io(#[from] std::io::Error),
}

/// A class hierarchy with precomputed reflexive-transitive subclass closure.
///
/// The direct-superclass graph is a DAG (multiple inheritance is allowed,
/// cycles are rejected at load). Immutable after load and safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    prefixes: PrefixTable,
    direct_superclasses: BTreeMap<Iri, BTreeSet<Iri>>,
    ancestors: HashMap<Iri, HashSet<Iri>>,
    depth: HashMap<Iri, usize>,
}

impl Taxonomy {
    /// Parses a taxonomy document. See the shipped `data/taxonomy.pdt` for
    /// the exact grammar.
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut prefixes = PrefixTable::default();
        let mut direct: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();

        let parse_curie = |prefixes: &PrefixTable,
                           token: &str,
                           line: usize|
         -> Result<Iri, TaxonomyError> {
            let iri = Iri::parse(token).map_err(|_| TaxonomyError::Syntax {
                line,
                message: format!("malformed curie `{token}`"),
            })?;
            if !prefixes.contains(iri.prefix()) {
                return Err(TaxonomyError::UnknownPrefix {
                    token: iri.prefix().to_string(),
                });
            }
            Ok(iri)
        };

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.split_once('#') {
                Some((before, _)) => before,
                None => raw,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                [] => {}
                ["@prefix", token, base] => prefixes.register(token, base)?,
                [sub, "subClassOf", sup] => {
                    let sub = parse_curie(&prefixes, sub, line_no)?;
                    let sup = parse_curie(&prefixes, sup, line_no)?;
                    // Repeated declarations take the union of parents.
                    direct.entry(sup.clone()).or_default();
                    direct.entry(sub).or_default().insert(sup);
                }
                [class] => {
                    let class = parse_curie(&prefixes, class, line_no)?;
                    direct.entry(class).or_default();
                }
                _ => {
                    return Err(TaxonomyError::Syntax {
                        line: line_no,
                        message: format!("unrecognized line `{}`", line.trim()),
                    })
                }
            }
        }

        let (ancestors, depth) = compute_closure(&direct)?;
        Ok(Self {
            prefixes,
            direct_superclasses: direct,
            ancestors,
            depth,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The taxonomy bundled with the crate, covering the building-automation
    /// classes used by the example corpus.
    pub fn shipped() -> &'static Taxonomy {
        static SHIPPED: OnceLock<Taxonomy> = OnceLock::new();
        SHIPPED.get_or_init(|| {
            Taxonomy::parse(include_str!("../data/taxonomy.pdt"))
                .expect("bundled taxonomy parses")
        })
    }

    pub fn prefixes(&self) -> &PrefixTable {
        &self.prefixes
    }

    pub fn contains(&self, class: &Iri) -> bool {
        self.direct_superclasses.contains_key(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = &Iri> {
        self.direct_superclasses.keys()
    }

    pub fn len(&self) -> usize {
        self.direct_superclasses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.direct_superclasses.is_empty()
    }

    pub fn direct_superclasses(&self, class: &Iri) -> Result<&BTreeSet<Iri>, TaxonomyError> {
        self.direct_superclasses
            .get(class)
            .ok_or_else(|| TaxonomyError::UnknownClass { iri: class.clone() })
    }

    /// True iff `sub` is `sup` or a (transitive) descendant of it.
    pub fn subclass_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, TaxonomyError> {
        let up = self
            .ancestors
            .get(sub)
            .ok_or_else(|| TaxonomyError::UnknownClass { iri: sub.clone() })?;
        if !self.contains(sup) {
            return Err(TaxonomyError::UnknownClass { iri: sup.clone() });
        }
        Ok(up.contains(sup))
    }

    /// All reflexive-transitive superclasses of `class`.
    pub fn ancestors(&self, class: &Iri) -> Result<&HashSet<Iri>, TaxonomyError> {
        self.ancestors
            .get(class)
            .ok_or_else(|| TaxonomyError::UnknownClass { iri: class.clone() })
    }

    /// Length of the longest chain of strict superclasses above `class`.
    /// Deeper classes are more specific; roots have depth 0.
    pub fn specificity_depth(&self, class: &Iri) -> Result<usize, TaxonomyError> {
        self.depth
            .get(class)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownClass { iri: class.clone() })
    }
}

/// Computes the reflexive-transitive closure and longest-chain depth of the
/// direct-superclass DAG, rejecting cycles with one offending path.
fn compute_closure(
    direct: &BTreeMap<Iri, BTreeSet<Iri>>,
) -> Result<(HashMap<Iri, HashSet<Iri>>, HashMap<Iri, usize>), TaxonomyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unvisited,
        InProgress,
        Done,
    }

    let mut marks: HashMap<&Iri, Mark> = direct.keys().map(|k| (k, Mark::Unvisited)).collect();
    let mut ancestors: HashMap<Iri, HashSet<Iri>> = HashMap::with_capacity(direct.len());
    let mut depth: HashMap<Iri, usize> = HashMap::with_capacity(direct.len());

    fn visit<'a>(
        class: &'a Iri,
        direct: &'a BTreeMap<Iri, BTreeSet<Iri>>,
        marks: &mut HashMap<&'a Iri, Mark>,
        ancestors: &mut HashMap<Iri, HashSet<Iri>>,
        depth: &mut HashMap<Iri, usize>,
        stack: &mut Vec<Iri>,
    ) -> Result<(), TaxonomyError> {
        match marks.get(class) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::InProgress) => {
                // Report the cycle segment starting at the first occurrence.
                let start = stack.iter().position(|c| c == class).unwrap_or(0);
                let mut path: Vec<Iri> = stack[start..].to_vec();
                path.push(class.clone());
                return Err(TaxonomyError::Cycle { path });
            }
            _ => {}
        }
        marks.insert(class, Mark::InProgress);
        stack.push(class.clone());

        let mut up: HashSet<Iri> = HashSet::new();
        up.insert(class.clone());
        let mut max_parent_depth: Option<usize> = None;
        for parent in &direct[class] {
            visit(parent, direct, marks, ancestors, depth, stack)?;
            up.extend(ancestors[parent].iter().cloned());
            max_parent_depth = Some(max_parent_depth.unwrap_or(0).max(depth[parent]));
        }
        depth.insert(class.clone(), max_parent_depth.map_or(0, |d| d + 1));
        ancestors.insert(class.clone(), up);

        stack.pop();
        marks.insert(class, Mark::Done);
        Ok(())
    }

    let mut stack = Vec::new();
    for class in direct.keys() {
        visit(class, direct, &mut marks, &mut ancestors, &mut depth, &mut stack)?;
    }
    Ok((ancestors, depth))
}

/// Anything that may carry a declared class.
pub trait Typed {
    fn declared_class(&self) -> Option<&Iri>;
}

/// Returns the declared class of a typed individual, erroring when it
/// carries none.
pub fn class_of<T: Typed>(individual: &T) -> Result<&Iri, UntypedIndividual> {
    individual.declared_class().ok_or(UntypedIndividual)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("individual carries no declared class")]
pub struct UntypedIndividual;

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::parse(s).unwrap()
    }

    #[test]
    fn shipped_taxonomy_loads_and_contains_bridged_classes() {
        let t = Taxonomy::shipped();
        assert!(t.contains(&iri("hvac:CondensingBoiler")));
        assert!(t.contains(&iri("brick:Boiler")));
        assert!(t
            .subclass_of(&iri("hvac:CondensingBoiler"), &iri("brick:Boiler"))
            .unwrap());
    }

    #[test]
    fn empty_document_yields_empty_taxonomy() {
        let t = Taxonomy::parse("").unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn two_cycle_is_rejected_with_path() {
        let doc = "@prefix x https://example.org/x#\n\
                   x:A subClassOf x:B\n\
                   x:B subClassOf x:A\n";
        match Taxonomy::parse(doc) {
            Err(TaxonomyError::Cycle { path }) => {
                assert!(path.len() >= 3);
                assert_eq!(path.first(), path.last());
            }
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_prefix_is_rejected() {
        let doc = "y:A subClassOf y:B\n";
        assert!(matches!(
            Taxonomy::parse(doc),
            Err(TaxonomyError::UnknownPrefix { .. })
        ));
    }

    #[test]
    fn duplicate_declaration_unions_parents() {
        let doc = "@prefix x https://example.org/x#\n\
                   x:A subClassOf x:B\n\
                   x:A subClassOf x:C\n";
        let t = Taxonomy::parse(doc).unwrap();
        assert!(t.subclass_of(&iri("x:A"), &iri("x:B")).unwrap());
        assert!(t.subclass_of(&iri("x:A"), &iri("x:C")).unwrap());
    }

    #[test]
    fn subclass_is_reflexive() {
        let t = Taxonomy::shipped();
        assert!(t
            .subclass_of(&iri("brick:Boiler"), &iri("brick:Boiler"))
            .unwrap());
    }

    #[test]
    fn subclass_follows_transitive_chain_one_way() {
        let t = Taxonomy::shipped();
        assert!(t
            .subclass_of(&iri("brick:TemperatureSensor"), &iri("brick:Sensor"))
            .unwrap());
        assert!(!t
            .subclass_of(&iri("brick:Sensor"), &iri("brick:TemperatureSensor"))
            .unwrap());
        assert!(t
            .subclass_of(&iri("brick:TemperatureSensor"), &iri("pdt:Sensor"))
            .unwrap());
    }

    #[test]
    fn unknown_class_lookup_errors() {
        let t = Taxonomy::shipped();
        assert!(matches!(
            t.subclass_of(&iri("brick:Spaceship"), &iri("brick:Sensor")),
            Err(TaxonomyError::UnknownClass { .. })
        ));
    }

    #[test]
    fn specificity_depth_increases_down_the_chain() {
        let t = Taxonomy::shipped();
        let sys = t.specificity_depth(&iri("pdt:System")).unwrap();
        let ahu = t.specificity_depth(&iri("hvac:AirHandlingUnit")).unwrap();
        let rtu = t.specificity_depth(&iri("hvac:RooftopUnit")).unwrap();
        assert_eq!(sys, 0);
        assert!(ahu > sys);
        assert_eq!(rtu, ahu + 1);
    }

    #[test]
    fn prefix_expansion_is_total_and_injective() {
        let t = Taxonomy::shipped();
        let mut expanded = BTreeSet::new();
        for class in t.classes() {
            let full = t.prefixes().expand(class).unwrap();
            assert!(expanded.insert(full), "expansion collision for {class}");
        }
    }

    #[test]
    fn base_reuse_under_two_prefixes_is_rejected() {
        let doc = "@prefix a https://example.org/ns#\n\
                   @prefix b https://example.org/ns#\n";
        assert!(matches!(
            Taxonomy::parse(doc),
            Err(TaxonomyError::BaseReused { .. })
        ));
    }

    struct Fixture(Option<Iri>);
    impl Typed for Fixture {
        fn declared_class(&self) -> Option<&Iri> {
            self.0.as_ref()
        }
    }

    #[test]
    fn class_of_returns_declared_class_or_errors() {
        let boiler = Fixture(Some(iri("brick:Boiler")));
        assert_eq!(class_of(&boiler).unwrap(), &iri("brick:Boiler"));
        let sensor = Fixture(Some(iri("brick:TemperatureSensor")));
        assert_eq!(class_of(&sensor).unwrap(), &iri("brick:TemperatureSensor"));
        let untyped = Fixture(None);
        assert_eq!(class_of(&untyped), Err(UntypedIndividual));
    }
}
