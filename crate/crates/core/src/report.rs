//! Pass/fail verdicts carried by every checker.

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

/// `"pass"` or `{"witness": …}` once serialized.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(Value),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&Value> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(w) => Some(w),
        }
    }

    pub fn from_option(w: Option<Value>) -> Self {
        w.map_or(Verdict::Pass, Verdict::Fail)
    }

    /// Keeps the first failure.
    pub fn and(self, other: Verdict) -> Verdict {
        match self {
            Verdict::Pass => other,
            fail => fail,
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Verdict::Pass => s.serialize_str("pass"),
            Verdict::Fail(w) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("witness", w)?;
                m.end()
            }
        }
    }
}
