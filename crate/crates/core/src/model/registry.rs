//! Class and property registry.
//!
//! The registry is loaded from a line-oriented bundle document (see
//! `registry_bundle.txt` for the embedded default). Each property carries a
//! domain/range table per validation profile, so the same store can be
//! checked against the catalog's own usage and against the published
//! standard.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_BUNDLE: &str = include_str!("registry_bundle.txt");

/// Validation profile selecting a domain/range table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Usage as drawn in the catalog's documentation patterns.
    Paper,
    /// Domain/range as published in the CIDOC-CRM standard.
    Strict,
}

impl Profile {
    pub const ALL: [Profile; 2] = [Profile::Paper, Profile::Strict];

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Paper => "paper",
            Profile::Strict => "strict",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Profile::Paper),
            "strict" => Ok(Profile::Strict),
            other => Err(RegistryError::UnknownProfile(other.to_string())),
        }
    }
}

/// Whether entities of a class carry a literal payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralRule {
    Required,
    Optional,
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub code: String,
    pub label: String,
    pub parents: BTreeSet<String>,
    pub literal: LiteralRule,
}

/// Object side of a property's signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeSpec {
    Classes(BTreeSet<String>),
    Literal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub domain: BTreeSet<String>,
    pub range: RangeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDef {
    pub code: String,
    pub forward_label: String,
    pub inverse_label: Option<String>,
    pub signatures: BTreeMap<Profile, Signature>,
    pub allows_type_qualifier: bool,
}

impl PropertyDef {
    pub fn signature(&self, profile: Profile) -> &Signature {
        // Every profile is present after load.
        &self.signatures[&profile]
    }

    pub fn is_literal_valued(&self) -> bool {
        // Literal-ness does not vary between profiles; checked at load.
        matches!(
            self.signatures.values().next().map(|s| &s.range),
            Some(RangeSpec::Literal)
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate definition of {0}")]
    Duplicate(String),
    #[error("class {class} lists unknown parent {parent}")]
    UnknownParent { class: String, parent: String },
    #[error("class hierarchy contains a cycle through {0}")]
    Cycle(String),
    #[error("property {property} has no entry for profile {profile}")]
    MissingProfile { property: String, profile: String },
    #[error("property {property} references unknown class {class}")]
    UnknownClassRef { property: String, class: String },
    #[error("property {0} mixes literal and class ranges across profiles")]
    MixedRange(String),
    #[error("unknown profile {0}")]
    UnknownProfile(String),
    #[error("unknown class {0}")]
    UnknownClass(String),
}

/// The loaded ontology subset with a precomputed subsumption closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    classes: BTreeMap<String, ClassDef>,
    properties: BTreeMap<String, PropertyDef>,
    profiles: Vec<Profile>,
    // class -> all ancestors including itself
    ancestors: BTreeMap<String, BTreeSet<String>>,
}

impl Registry {
    /// The embedded default bundle.
    pub fn default_bundle() -> Registry {
        Registry::parse(DEFAULT_BUNDLE).expect("embedded registry bundle is valid")
    }

    pub fn default_bundle_text() -> &'static str {
        DEFAULT_BUNDLE
    }

    pub fn parse(text: &str) -> Result<Registry, RegistryError> {
        let mut classes = BTreeMap::new();
        let mut properties = BTreeMap::new();
        let mut profiles: Option<Vec<Profile>> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: &str| RegistryError::Syntax {
                line: line_no,
                message: message.to_string(),
            };
            let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match keyword {
                "profiles" => {
                    let list = rest
                        .split_whitespace()
                        .map(Profile::from_str)
                        .collect::<Result<Vec<_>, _>>()?;
                    profiles = Some(list);
                }
                "class" => {
                    let cols: Vec<&str> = rest.split('|').map(str::trim).collect();
                    if cols.len() != 4 {
                        return Err(syntax("class record needs 4 columns"));
                    }
                    let parents = if cols[2] == "-" {
                        BTreeSet::new()
                    } else {
                        cols[2].split_whitespace().map(str::to_string).collect()
                    };
                    let literal = match cols[3] {
                        "required" => LiteralRule::Required,
                        "optional" => LiteralRule::Optional,
                        "forbidden" => LiteralRule::Forbidden,
                        _ => return Err(syntax("literal rule must be required|optional|forbidden")),
                    };
                    let def = ClassDef {
                        code: cols[0].to_string(),
                        label: cols[1].to_string(),
                        parents,
                        literal,
                    };
                    if classes.insert(def.code.clone(), def).is_some() {
                        return Err(RegistryError::Duplicate(cols[0].to_string()));
                    }
                }
                "property" => {
                    let cols: Vec<&str> = rest.split('|').map(str::trim).collect();
                    if cols.len() < 5 {
                        return Err(syntax("property record needs at least 5 columns"));
                    }
                    let code = cols[0].to_string();
                    let inverse_label = (cols[2] != "-").then(|| cols[2].to_string());
                    let flag = cols[cols.len() - 1];
                    let allows_type_qualifier = match flag {
                        "qualified" => true,
                        "-" => false,
                        _ => return Err(syntax("last property column must be `qualified` or `-`")),
                    };
                    let mut signatures = BTreeMap::new();
                    for entry in &cols[3..cols.len() - 1] {
                        let (profile, sig) = entry
                            .split_once(':')
                            .ok_or_else(|| syntax("profile entry must be `<profile>: <domain> -> <range>`"))?;
                        let profile = Profile::from_str(profile.trim())?;
                        let (domain, range) = sig
                            .split_once("->")
                            .ok_or_else(|| syntax("signature must contain `->`"))?;
                        let domain: BTreeSet<String> =
                            domain.split_whitespace().map(str::to_string).collect();
                        let range_classes: BTreeSet<String> =
                            range.split_whitespace().map(str::to_string).collect();
                        if domain.is_empty() || range_classes.is_empty() {
                            return Err(syntax("domain and range must be non-empty"));
                        }
                        let range = if range_classes.len() == 1 && range_classes.contains("literal") {
                            RangeSpec::Literal
                        } else {
                            RangeSpec::Classes(range_classes)
                        };
                        signatures.insert(profile, Signature { domain, range });
                    }
                    let def = PropertyDef {
                        code: code.clone(),
                        forward_label: cols[1].to_string(),
                        inverse_label,
                        signatures,
                        allows_type_qualifier,
                    };
                    if properties.insert(code.clone(), def).is_some() {
                        return Err(RegistryError::Duplicate(code));
                    }
                }
                _ => return Err(syntax("expected `profiles`, `class` or `property`")),
            }
        }

        let profiles = profiles.ok_or(RegistryError::Syntax {
            line: 0,
            message: "missing `profiles` declaration".into(),
        })?;
        Registry::build(classes, properties, profiles)
    }

    fn build(
        classes: BTreeMap<String, ClassDef>,
        properties: BTreeMap<String, PropertyDef>,
        profiles: Vec<Profile>,
    ) -> Result<Registry, RegistryError> {
        for class in classes.values() {
            for parent in &class.parents {
                if !classes.contains_key(parent) {
                    return Err(RegistryError::UnknownParent {
                        class: class.code.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
        let order = topological_order(&classes)?;

        let mut ancestors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for code in order {
            let mut set = BTreeSet::from([code.clone()]);
            for parent in &classes[&code].parents {
                set.extend(ancestors[parent].iter().cloned());
            }
            ancestors.insert(code, set);
        }

        for prop in properties.values() {
            for profile in Profile::ALL {
                let sig = prop.signatures.get(&profile).ok_or_else(|| RegistryError::MissingProfile {
                    property: prop.code.clone(),
                    profile: profile.to_string(),
                })?;
                let mut refs: Vec<&String> = sig.domain.iter().collect();
                if let RangeSpec::Classes(range) = &sig.range {
                    refs.extend(range.iter());
                }
                for class in refs {
                    if !classes.contains_key(class) {
                        return Err(RegistryError::UnknownClassRef {
                            property: prop.code.clone(),
                            class: class.clone(),
                        });
                    }
                }
            }
            let literal_count = prop
                .signatures
                .values()
                .filter(|s| s.range == RangeSpec::Literal)
                .count();
            if literal_count != 0 && literal_count != prop.signatures.len() {
                return Err(RegistryError::MixedRange(prop.code.clone()));
            }
        }

        Ok(Registry {
            classes,
            properties,
            profiles,
            ancestors,
        })
    }

    pub fn class(&self, code: &str) -> Option<&ClassDef> {
        self.classes.get(code)
    }

    pub fn property(&self, code: &str) -> Option<&PropertyDef> {
        self.properties.get(code)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.classes.values()
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyDef> {
        self.properties.values()
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    /// Reflexive, transitive subsumption test.
    pub fn is_subclass_of(&self, a: &str, b: &str) -> Result<bool, RegistryError> {
        let ancestors = self
            .ancestors
            .get(a)
            .ok_or_else(|| RegistryError::UnknownClass(a.to_string()))?;
        if !self.classes.contains_key(b) {
            return Err(RegistryError::UnknownClass(b.to_string()));
        }
        Ok(ancestors.contains(b))
    }

    /// Subsumption for codes already known to be registered.
    pub(crate) fn subsumed(&self, a: &str, b: &str) -> bool {
        self.ancestors.get(a).is_some_and(|set| set.contains(b))
    }

    /// True if `class` falls under any class of `set`.
    pub(crate) fn subsumed_by_any(&self, class: &str, set: &BTreeSet<String>) -> bool {
        set.iter().any(|target| self.subsumed(class, target))
    }

    /// RDF local name for a class, e.g. `E22_Human-Made_Object`.
    pub fn class_local_name(&self, code: &str) -> String {
        match self.classes.get(code) {
            Some(def) => format!("{}_{}", code, def.label.replace(' ', "_")),
            None => code.to_string(),
        }
    }

    /// RDF local name for a property, e.g. `P1_is_identified_by`.
    pub fn property_local_name(&self, code: &str) -> String {
        match self.properties.get(code) {
            Some(def) => format!("{}_{}", code, def.forward_label.replace(' ', "_")),
            None => code.to_string(),
        }
    }
}

/// Kahn's algorithm over parent links; parents come before children.
fn topological_order(classes: &BTreeMap<String, ClassDef>) -> Result<Vec<String>, RegistryError> {
    let mut remaining: BTreeMap<&str, usize> = classes
        .values()
        .map(|c| (c.code.as_str(), c.parents.len()))
        .collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for c in classes.values() {
        for p in &c.parents {
            children.entry(p.as_str()).or_default().push(c.code.as_str());
        }
    }
    let mut ready: Vec<&str> = remaining
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(c, _)| *c)
        .collect();
    let mut order = Vec::with_capacity(classes.len());
    while let Some(code) = ready.pop() {
        order.push(code.to_string());
        for child in children.get(code).into_iter().flatten() {
            let n = remaining.get_mut(child).expect("child registered");
            *n -= 1;
            if *n == 0 {
                ready.push(child);
            }
        }
    }
    if order.len() != classes.len() {
        let stuck = remaining
            .iter()
            .find(|(c, n)| **n > 0 && !order.iter().any(|o| o == *c))
            .map(|(c, _)| c.to_string())
            .unwrap_or_default();
        return Err(RegistryError::Cycle(stuck));
    }
    Ok(order)
}
