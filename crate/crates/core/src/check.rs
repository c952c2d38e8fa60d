use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// Outcome of comparing a computed quantity against a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn at_most(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            label: label.into(),
            lhs,
            relation: Relation::AtMost,
            rhs,
            slack,
            holds: lhs <= rhs + slack,
        }
    }

    pub fn at_least(label: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            label: label.into(),
            lhs,
            relation: Relation::AtLeast,
            rhs,
            slack,
            holds: lhs >= rhs - slack,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(BoundCheck::at_most("x", 1.0, 1.0, 0.0).holds);
        assert!(!BoundCheck::at_most("x", 1.1, 1.0, 0.05).holds);
        assert!(BoundCheck::at_least("x", 0.96, 1.0, 0.05).holds);
        let json = serde_json::to_string(&BoundCheck::at_most("x", 1.0, 2.0, 0.0)).unwrap();
        assert!(json.contains("\"<=\""));
    }
}
