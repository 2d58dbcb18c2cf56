//! Line-oriented text form of a [`DioSystem`].
//!
//! ```text
//! domain der_0 2
//! d_2 = 0  # rigidity of d(DerTerm, any), critical path 1
//! conc5_1 > 0
//! ```

use std::fmt;

use thiserror::Error;

use super::{DioConstraint, DioSystem, Origin, Relation};
use crate::polyalg::{UPoly, Unknown};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct DumpError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for DioSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, max) in &self.domains {
            writeln!(f, "domain {u} {max}")?;
        }
        for c in &self.constraints {
            writeln!(f, "{} {} 0  # {}", c.poly, c.relation, c.origin)?;
        }
        Ok(())
    }
}

pub fn parse_system(text: &str) -> Result<DioSystem, DumpError> {
    let mut sys = DioSystem::default();
    for (k, raw) in text.lines().enumerate() {
        let err = |msg: String| DumpError { line: k + 1, msg };
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b.trim(), Some(c.trim())),
            None => (raw.trim(), None),
        };
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("domain ") {
            let mut it = rest.split_whitespace();
            let (Some(name), Some(max), None) = (it.next(), it.next(), it.next()) else {
                return Err(err("expected `domain NAME MAX`".into()));
            };
            let max = max.parse::<u64>().map_err(|e| err(e.to_string()))?;
            sys.domains.insert(Unknown::new(name), max);
            continue;
        }
        // longest operators first so `>=` is not read as `>`
        let (lhs, relation, rhs) = [(">=", Relation::Geq0), (">", Relation::Gt0), ("=", Relation::Eq0)]
            .into_iter()
            .find_map(|(op, rel)| body.rsplit_once(op).map(|(l, r)| (l, rel, r)))
            .ok_or_else(|| err("missing relation".into()))?;
        if rhs.trim() != "0" {
            return Err(err("right-hand side must be 0".into()));
        }
        let poly = UPoly::parse(lhs.trim()).map_err(|e| err(e.to_string()))?;
        let origin = Origin::Text(comment.unwrap_or_default().to_string());
        sys.push(DioConstraint { poly, relation, origin });
    }
    Ok(sys)
}
