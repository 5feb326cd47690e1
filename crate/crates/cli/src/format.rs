//! JSON instance documents.
//!
//! ```json
//! {
//!   "format": "secord-network/1",
//!   "variables": [{"name": "x", "values": ["a", "b"]}, {"name": "y", "values": [0, 1]}],
//!   "constraints": [{"scope": ["x", "y"], "polarity": "conflicts", "tuples": [["a", 0]]}],
//!   "metadata": {"seed": 7}
//! }
//! ```
//!
//! Values are strings or integers and map to dense ids in declared order.
//! Values removed from a domain are written as a unary conflicts constraint.

use std::collections::HashMap;
use std::fmt;

use secord_core::{ConstraintNetwork, ConstraintSpec, NetworkError, Polarity, VarId};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

pub const FORMAT_VERSION: &str = "secord-network/1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueName {
    Int(i64),
    Str(String),
}

impl fmt::Display for ValueName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueName::Int(i) => write!(f, "{i}"),
            ValueName::Str(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    pub values: Vec<ValueName>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub scope: Vec<String>,
    pub polarity: Polarity,
    pub tuples: Vec<Vec<ValueName>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub format: String,
    pub variables: Vec<VariableDoc>,
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Json>,
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown field `{field}` in {place}")]
    UnknownField { field: String, place: String },
    #[error("unsupported format `{0}`, expected `{FORMAT_VERSION}`")]
    Version(String),
    #[error("variable {index}: {message}")]
    Variable { index: usize, message: String },
    #[error("constraint {index}: {message}")]
    Constraint { index: usize, message: String },
    #[error("invalid network: {0}")]
    Network(#[from] NetworkError),
}

/// A parsed network with the names needed to write it back.
#[derive(Debug, Clone)]
pub struct Instance {
    pub network: ConstraintNetwork,
    pub var_names: Vec<String>,
    pub value_names: Vec<Vec<ValueName>>,
    pub metadata: Option<Json>,
}

impl Instance {
    /// Default names `x0, x1, ...` and integer values.
    pub fn unnamed(network: ConstraintNetwork) -> Self {
        let var_names = (0..network.num_vars()).map(|i| format!("x{i}")).collect();
        let value_names =
            network.init_sizes().iter().map(|&d| (0..d as i64).map(ValueName::Int).collect()).collect();
        Instance { network, var_names, value_names, metadata: None }
    }

    /// Same names, different network over the same variables.
    pub fn with_network(&self, network: ConstraintNetwork) -> Self {
        Instance { network, ..self.clone() }
    }
}

const TOP_FIELDS: &[&str] = &["format", "variables", "constraints", "metadata"];
const VAR_FIELDS: &[&str] = &["name", "values"];
const CON_FIELDS: &[&str] = &["scope", "polarity", "tuples"];

fn check_fields(obj: &Json, allowed: &[&str], place: impl Fn() -> String) -> Result<(), FormatError> {
    if let Some(map) = obj.as_object() {
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(FormatError::UnknownField { field: k.clone(), place: place() });
        }
    }
    Ok(())
}

fn reject_unknown_fields(doc: &Json) -> Result<(), FormatError> {
    check_fields(doc, TOP_FIELDS, || "the document".into())?;
    let list = |key: &str| doc.get(key).and_then(Json::as_array).cloned().unwrap_or_default();
    for (i, v) in list("variables").iter().enumerate() {
        check_fields(v, VAR_FIELDS, || format!("variable {i}"))?;
    }
    for (i, c) in list("constraints").iter().enumerate() {
        check_fields(c, CON_FIELDS, || format!("constraint {i}"))?;
    }
    Ok(())
}

fn syntax(e: serde_json::Error) -> FormatError {
    FormatError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses a document. Strict mode rejects unknown fields.
pub fn parse(text: &str, strict: bool) -> Result<Instance, FormatError> {
    let raw: Json = serde_json::from_str(text).map_err(syntax)?;
    if strict {
        reject_unknown_fields(&raw)?;
    }
    let doc: InstanceDocument = serde_json::from_value(raw).map_err(|e| FormatError::Syntax {
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    from_document(doc)
}

pub fn from_document(doc: InstanceDocument) -> Result<Instance, FormatError> {
    if doc.format != FORMAT_VERSION {
        return Err(FormatError::Version(doc.format));
    }
    let mut var_index = HashMap::new();
    let mut value_index: Vec<HashMap<&ValueName, usize>> = Vec::new();
    for (i, v) in doc.variables.iter().enumerate() {
        if var_index.insert(v.name.as_str(), i).is_some() {
            return Err(FormatError::Variable { index: i, message: format!("duplicate name `{}`", v.name) });
        }
        if v.values.is_empty() {
            return Err(FormatError::Variable { index: i, message: format!("`{}` has no values", v.name) });
        }
        let mut map = HashMap::new();
        for (k, val) in v.values.iter().enumerate() {
            if map.insert(val, k).is_some() {
                return Err(FormatError::Variable { index: i, message: format!("duplicate value `{val}`") });
            }
        }
        value_index.push(map);
    }
    let mut specs = Vec::with_capacity(doc.constraints.len());
    for (ci, c) in doc.constraints.iter().enumerate() {
        let err = |message: String| FormatError::Constraint { index: ci, message };
        let scope: Vec<VarId> = c
            .scope
            .iter()
            .map(|name| var_index.get(name.as_str()).map(|&i| VarId(i)).ok_or_else(|| err(format!("unknown variable `{name}`"))))
            .collect::<Result<_, _>>()?;
        let mut tuples = Vec::with_capacity(c.tuples.len());
        for row in &c.tuples {
            if row.len() != scope.len() {
                return Err(err(format!("tuple of length {} for a scope of {} variables", row.len(), scope.len())));
            }
            let t = row
                .iter()
                .zip(&scope)
                .map(|(val, x)| {
                    value_index[x.0]
                        .get(val)
                        .copied()
                        .ok_or_else(|| err(format!("value `{val}` is not in the domain of `{}`", doc.variables[x.0].name)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            tuples.push(t);
        }
        specs.push(ConstraintSpec { scope, polarity: c.polarity, tuples });
    }
    let sizes: Vec<usize> = doc.variables.iter().map(|v| v.values.len()).collect();
    let network = ConstraintNetwork::build(&sizes, specs)?;
    Ok(Instance {
        network,
        var_names: doc.variables.iter().map(|v| v.name.clone()).collect(),
        value_names: doc.variables.into_iter().map(|v| v.values).collect(),
        metadata: doc.metadata,
    })
}

pub fn to_document(inst: &Instance) -> InstanceDocument {
    let net = &inst.network;
    let variables = inst
        .var_names
        .iter()
        .zip(&inst.value_names)
        .map(|(name, values)| VariableDoc { name: name.clone(), values: values.clone() })
        .collect();
    let name_of = |x: VarId, a: usize| inst.value_names[x.0][a].clone();
    let mut constraints = Vec::new();
    for x in net.vars() {
        let removed: Vec<usize> = net.domain(x).removed().collect();
        if !removed.is_empty() {
            constraints.push(ConstraintDoc {
                scope: vec![inst.var_names[x.0].clone()],
                polarity: Polarity::Conflicts,
                tuples: removed.into_iter().map(|a| vec![name_of(x, a)]).collect(),
            });
        }
    }
    for c in net.constraints() {
        constraints.push(ConstraintDoc {
            scope: c.scope().iter().map(|x| inst.var_names[x.0].clone()).collect(),
            polarity: c.polarity(),
            tuples: c.table().iter().map(|t| t.iter().zip(c.scope()).map(|(&a, &x)| name_of(x, a)).collect()).collect(),
        });
    }
    InstanceDocument { format: FORMAT_VERSION.to_string(), variables, constraints, metadata: inst.metadata.clone() }
}

/// Pretty-printed JSON with a trailing newline.
pub fn serialize(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&to_document(inst)).expect("documents always serialize");
    s.push('\n');
    s
}

/// Merges `extra` into the metadata object, creating it if needed.
pub fn add_metadata(inst: &mut Instance, extra: Map<String, Json>) {
    let mut map = match inst.metadata.take() {
        Some(Json::Object(m)) => m,
        Some(other) => Map::from_iter([("previous".to_string(), other)]),
        None => Map::new(),
    };
    map.extend(extra);
    inst.metadata = Some(Json::Object(map));
}
