//! Shared typed key-value store for leaves.
//!
//! Writes are immediately visible to every node ticked later in the same
//! traversal. Keys touched during a tick are recorded and copied into the
//! tick's trace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hole information as exchanged between leaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleRecord {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub emulsion_target: f64,
    pub detonator_type: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Int,
    Real,
    Str,
    Flag,
    Hole,
    HoleQueue,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Int => "int",
            ValueType::Real => "real",
            ValueType::Str => "string",
            ValueType::Flag => "flag",
            ValueType::Hole => "hole",
            ValueType::HoleQueue => "hole_queue",
        }
    }

    pub fn parse(s: &str) -> Option<ValueType> {
        Some(match s {
            "int" => ValueType::Int,
            "real" => ValueType::Real,
            "string" => ValueType::Str,
            "flag" => ValueType::Flag,
            "hole" => ValueType::Hole,
            "hole_queue" => ValueType::HoleQueue,
            _ => return None,
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Int(i64),
    Real(f64),
    Str(String),
    Flag(bool),
    Hole(HoleRecord),
    HoleQueue(Vec<HoleRecord>),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Int,
            Value::Real(_) => ValueType::Real,
            Value::Str(_) => ValueType::Str,
            Value::Flag(_) => ValueType::Flag,
            Value::Hole(_) => ValueType::Hole,
            Value::HoleQueue(_) => ValueType::HoleQueue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlackboardError {
    #[error("blackboard key `{0}` is not set")]
    MissingKey(String),
    #[error("blackboard key `{key}` holds {found}, expected {expected}")]
    TypeMismatch {
        key: String,
        expected: ValueType,
        found: ValueType,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    values: BTreeMap<String, Value>,
    schema: BTreeMap<String, ValueType>,
    #[serde(skip)]
    touched: BTreeSet<String>,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    /// A blackboard whose declared keys are type-checked on write.
    pub fn with_schema(schema: BTreeMap<String, ValueType>) -> Self {
        Blackboard {
            schema,
            ..Self::default()
        }
    }

    pub fn declare(&mut self, key: &str, ty: ValueType) {
        self.schema.insert(key.to_string(), ty);
    }

    pub fn schema(&self) -> &BTreeMap<String, ValueType> {
        &self.schema
    }

    pub fn get(&mut self, key: &str) -> Result<&Value, BlackboardError> {
        self.touched.insert(key.to_string());
        self.values
            .get(key)
            .ok_or_else(|| BlackboardError::MissingKey(key.to_string()))
    }

    /// Read without recording an access.
    pub fn peek(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn set(&mut self, key: &str, value: Value) -> Result<(), BlackboardError> {
        if let Some(&expected) = self.schema.get(key) {
            let found = value.value_type();
            if found != expected {
                return Err(BlackboardError::TypeMismatch {
                    key: key.to_string(),
                    expected,
                    found,
                });
            }
        }
        self.touched.insert(key.to_string());
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn remove(&mut self, key: &str) -> Option<Value> {
        self.touched.insert(key.to_string());
        self.values.remove(key)
    }

    pub fn get_flag(&mut self, key: &str) -> Result<bool, BlackboardError> {
        match self.get(key)? {
            Value::Flag(b) => Ok(*b),
            other => Err(mismatch(key, ValueType::Flag, other)),
        }
    }

    pub fn get_int(&mut self, key: &str) -> Result<i64, BlackboardError> {
        match self.get(key)? {
            Value::Int(i) => Ok(*i),
            other => Err(mismatch(key, ValueType::Int, other)),
        }
    }

    pub fn get_hole(&mut self, key: &str) -> Result<HoleRecord, BlackboardError> {
        match self.get(key)? {
            Value::Hole(h) => Ok(h.clone()),
            other => Err(mismatch(key, ValueType::Hole, other)),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub(crate) fn take_touched(&mut self) -> BTreeSet<String> {
        std::mem::take(&mut self.touched)
    }
}

fn mismatch(key: &str, expected: ValueType, found: &Value) -> BlackboardError {
    BlackboardError::TypeMismatch {
        key: key.to_string(),
        expected,
        found: found.value_type(),
    }
}
