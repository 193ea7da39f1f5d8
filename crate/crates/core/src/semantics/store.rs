use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Finite map from variable names to integer values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Store(BTreeMap<String, i64>);

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    /// Binds every name in `vars` to zero.
    pub fn zeroed<'a>(vars: impl IntoIterator<Item = &'a String>) -> Self {
        Store(vars.into_iter().map(|v| (v.clone(), 0)).collect())
    }

    pub fn get(&self, x: &str) -> Option<i64> {
        self.0.get(x).copied()
    }

    pub fn set(&mut self, x: impl Into<String>, v: i64) {
        self.0.insert(x.into(), v);
    }

    pub fn with(mut self, x: impl Into<String>, v: i64) -> Self {
        self.set(x, v);
        self
    }

    /// Puts back a previous binding of `x`, or removes `x` if it had none.
    pub fn restore(&mut self, x: &str, previous: Option<i64>) {
        match previous {
            Some(v) => {
                self.0.insert(x.to_string(), v);
            }
            None => {
                self.0.remove(x);
            }
        }
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps only bindings for names in `vars`.
    pub fn restricted_to(&self, vars: &BTreeSet<String>) -> Store {
        Store(
            self.0
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        )
    }

    /// Parses `x=1,y=-2`. The empty string is the empty store.
    pub fn parse(text: &str) -> Result<Store> {
        let mut store = Store::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::malformed(format!("expected `name=value`, got `{part}`")))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::malformed(format!("bad variable name `{name}`")));
            }
            let value: i64 = value
                .trim()
                .parse()
                .map_err(|_| Error::malformed(format!("bad integer in `{part}`")))?;
            if store.contains(name) {
                return Err(Error::malformed(format!("`{name}` bound twice")));
            }
            store.set(name, value);
        }
        Ok(store)
    }
}

impl FromIterator<(String, i64)> for Store {
    fn from_iter<I: IntoIterator<Item = (String, i64)>>(iter: I) -> Self {
        Store(iter.into_iter().collect())
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}
