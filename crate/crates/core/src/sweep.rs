//! Cartesian parameter sweeps over dotted scenario fields.

use std::str::FromStr;

use serde_json::Value;

use crate::preset::{Point, Preset};
use crate::scenario::ScenarioError;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("axis must look like `path=v1,v2,...`, got `{0}`")]
pub struct AxisSyntax(String);

impl FromStr for Axis {
    type Err = AxisSyntax;

    /// `workload.m=1,8,40`; values that are not JSON are taken as strings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (path, rest) = s.split_once('=').ok_or_else(|| AxisSyntax(s.into()))?;
        let path = path.trim();
        if path.is_empty() || rest.trim().is_empty() {
            return Err(AxisSyntax(s.into()));
        }
        let values = rest
            .split(',')
            .map(|v| {
                let v = v.trim();
                serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
            })
            .collect();
        Ok(Axis {
            path: path.to_string(),
            values,
        })
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Expands every base point over the product of `axes`, first axis outermost.
pub fn expand(base: &Preset, axes: &[Axis]) -> Result<Preset, ScenarioError> {
    let mut points = base.points.clone();
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for p in &points {
            for v in &axis.values {
                next.push(Point {
                    label: format!("{}/{}={}", p.label, axis.path, show(v)),
                    scenario: p.scenario.with_field(&axis.path, v.clone())?,
                });
            }
        }
        points = next;
    }
    Ok(Preset {
        name: format!("{}_sweep", base.name),
        description: format!("{} (swept)", base.description),
        points,
    })
}
