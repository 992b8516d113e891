//! Accumulating validator over `serde_json::Value`.

use serde::Serialize;
use serde_json::{Map, Value};

/// One schema violation, located by a JSON pointer into the config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub pointer: String,
    pub message: String,
}

/// Appends `key` to `pointer` with RFC 6901 escaping.
pub fn child(pointer: &str, key: &str) -> String {
    format!("{pointer}/{}", key.replace('~', "~0").replace('/', "~1"))
}

pub fn index(pointer: &str, k: usize) -> String {
    format!("{pointer}/{k}")
}

#[derive(Debug, Default)]
pub struct Checker {
    pub violations: Vec<Violation>,
}

impl Checker {
    pub fn fail(&mut self, pointer: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            pointer: pointer.into(),
            message: message.into(),
        });
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// The value as an object whose keys all appear in `allowed`.
    pub fn object<'v>(
        &mut self,
        v: &'v Value,
        pointer: &str,
        allowed: &[&str],
    ) -> Option<&'v Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.fail(pointer, "expected an object");
            return None;
        };
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.fail(
                    child(pointer, key),
                    format!("unknown field, expected one of: {}", allowed.join(", ")),
                );
            }
        }
        Some(map)
    }

    pub fn number(&mut self, v: &Value, pointer: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(pointer, "expected a finite number");
                None
            }
        }
    }

    pub fn positive(&mut self, v: &Value, pointer: &str) -> Option<f64> {
        let x = self.number(v, pointer)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.fail(pointer, format!("must be positive, got {x}"));
            None
        }
    }

    pub fn count(&mut self, v: &Value, pointer: &str) -> Option<usize> {
        match v.as_u64() {
            Some(k) => Some(k as usize),
            None => {
                self.fail(pointer, "expected a nonnegative integer");
                None
            }
        }
    }

    pub fn string<'v>(&mut self, v: &'v Value, pointer: &str) -> Option<&'v str> {
        let s = v.as_str();
        if s.is_none() {
            self.fail(pointer, "expected a string");
        }
        s
    }

    pub fn array<'v>(&mut self, v: &'v Value, pointer: &str) -> Option<&'v [Value]> {
        let a = v.as_array().map(Vec::as_slice);
        if a.is_none() {
            self.fail(pointer, "expected an array");
        }
        a
    }

    /// Applies `item` to every element; `None` if any element failed.
    pub fn array_of<'v, T>(
        &mut self,
        v: &'v Value,
        pointer: &str,
        mut item: impl FnMut(&mut Self, &'v Value, &str) -> Option<T>,
    ) -> Option<Vec<T>> {
        let items = self.array(v, pointer)?;
        let parsed: Vec<Option<T>> = items
            .iter()
            .enumerate()
            .map(|(k, x)| item(self, x, &index(pointer, k)))
            .collect();
        parsed.into_iter().collect()
    }

    pub fn numbers(&mut self, v: &Value, pointer: &str) -> Option<Vec<f64>> {
        self.array_of(v, pointer, |c, x, p| c.number(x, p))
    }

    pub fn one_of<'v>(&mut self, v: &'v Value, pointer: &str, options: &[&str]) -> Option<&'v str> {
        let s = self.string(v, pointer)?;
        if options.contains(&s) {
            Some(s)
        } else {
            self.fail(
                pointer,
                format!("'{s}' is not one of: {}", options.join(", ")),
            );
            None
        }
    }

    pub fn required<'v>(
        &mut self,
        map: &'v Map<String, Value>,
        pointer: &str,
        key: &str,
    ) -> Option<&'v Value> {
        let v = map.get(key);
        if v.is_none() {
            self.fail(child(pointer, key), "missing required field");
        }
        v
    }

    pub fn req_number(
        &mut self,
        map: &Map<String, Value>,
        pointer: &str,
        key: &str,
    ) -> Option<f64> {
        let v = self.required(map, pointer, key)?;
        self.number(v, &child(pointer, key))
    }

    pub fn opt_number(
        &mut self,
        map: &Map<String, Value>,
        pointer: &str,
        key: &str,
        default: f64,
    ) -> Option<f64> {
        match map.get(key) {
            Some(v) => self.number(v, &child(pointer, key)),
            None => Some(default),
        }
    }

    /// Reports slopes that coincide with an earlier one.
    pub fn distinct(&mut self, values: &[f64], pointer: &str) {
        for (k, &b) in values.iter().enumerate() {
            if let Some(first) = values[..k].iter().position(|&a| a == b) {
                self.fail(
                    index(pointer, k),
                    format!("duplicates the slope of state {first} ({b})"),
                );
            }
        }
    }
}
