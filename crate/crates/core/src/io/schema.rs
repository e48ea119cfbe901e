//! Validation against the shipped run-configuration schema.
//!
//! Interprets the keyword subset the schema uses: `$ref` (local), `type`,
//! `enum`, `const`, `required`, `properties`, `additionalProperties: false`,
//! `minProperties`, `maxProperties`, `items`, `minItems`, `maxItems`,
//! `minimum`, `maximum`, `exclusiveMinimum`, `exclusiveMaximum`,
//! `minLength`, `allOf` and `if`/`then`.

use serde_json::Value;

/// The run-configuration schema, draft 2020-12.
pub const RUN_CONFIG_SCHEMA: &str = include_str!("../../schema/run_config.schema.json");

/// A violation at a JSON pointer. Bounds on scalar array items are reported
/// at the array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

pub struct Validator {
    root: Value,
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn type_matches(expected: &str, v: &Value) -> bool {
    match expected {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        "null" => v.is_null(),
        _ => false,
    }
}

impl Validator {
    pub fn new(schema: Value) -> Self {
        Self { root: schema }
    }

    pub fn run_config() -> Self {
        Self::new(serde_json::from_str(RUN_CONFIG_SCHEMA).expect("shipped schema is valid JSON"))
    }

    /// All violations, in a deterministic order without duplicates.
    pub fn validate(&self, instance: &Value) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check(&self.root, instance, "", &mut out);
        let mut seen = Vec::new();
        out.retain(|v| {
            if seen.contains(v) {
                false
            } else {
                seen.push(v.clone());
                true
            }
        });
        out
    }

    fn resolve<'a>(&'a self, reference: &str) -> Option<&'a Value> {
        reference
            .strip_prefix('#')
            .and_then(|p| self.root.pointer(p))
    }

    fn check(&self, schema: &Value, v: &Value, path: &str, out: &mut Vec<Violation>) {
        let Some(s) = schema.as_object() else { return };
        let mut push = |p: &str, m: String| {
            out.push(Violation {
                path: p.to_string(),
                message: m,
            })
        };
        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            match self.resolve(r) {
                Some(target) => self.check(target, v, path, out),
                None => out.push(Violation {
                    path: path.to_string(),
                    message: format!("unresolved reference {r}"),
                }),
            }
            return;
        }
        if let Some(t) = s.get("type").and_then(Value::as_str) {
            if !type_matches(t, v) {
                push(path, format!("expected {t}"));
                return;
            }
        }
        if let Some(e) = s.get("enum").and_then(Value::as_array) {
            if !e.contains(v) {
                let names: Vec<String> = e.iter().map(Value::to_string).collect();
                push(path, format!("must be one of {}", names.join(", ")));
            }
        }
        if let Some(c) = s.get("const") {
            if c != v {
                push(path, format!("must equal {c}"));
            }
        }
        if let Some(x) = v.as_f64() {
            if let Some(b) = s.get("minimum") {
                if x < num(b) {
                    push(path, format!("minimum {b}"));
                }
            }
            if let Some(b) = s.get("maximum") {
                if x > num(b) {
                    push(path, format!("maximum {b}"));
                }
            }
            if let Some(b) = s.get("exclusiveMinimum") {
                if x <= num(b) {
                    push(path, format!("exclusive minimum {b}"));
                }
            }
            if let Some(b) = s.get("exclusiveMaximum") {
                if x >= num(b) {
                    push(path, format!("exclusive maximum {b}"));
                }
            }
        }
        if let (Some(text), Some(b)) = (v.as_str(), s.get("minLength").and_then(Value::as_u64)) {
            if (text.chars().count() as u64) < b {
                push(path, format!("minimum length {b}"));
            }
        }
        if let Some(obj) = v.as_object() {
            if let Some(req) = s.get("required").and_then(Value::as_array) {
                for key in req.iter().filter_map(Value::as_str) {
                    if !obj.contains_key(key) {
                        push(&format!("{path}/{key}"), "required".to_string());
                    }
                }
            }
            let props = s.get("properties").and_then(Value::as_object);
            if let Some(b) = s.get("minProperties").and_then(Value::as_u64) {
                if (obj.len() as u64) < b {
                    push(path, format!("at least {b} properties"));
                }
            }
            if let Some(b) = s.get("maxProperties").and_then(Value::as_u64) {
                if (obj.len() as u64) > b {
                    push(path, format!("at most {b} properties"));
                }
            }
            for (key, value) in obj {
                let child = format!("{path}/{key}");
                match props.and_then(|p| p.get(key)) {
                    Some(sub) => self.check(sub, value, &child, out),
                    None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                        out.push(Violation {
                            path: child,
                            message: "unknown property".to_string(),
                        })
                    }
                    None => {}
                }
            }
        }
        if let Some(arr) = v.as_array() {
            if let Some(b) = s.get("minItems").and_then(Value::as_u64) {
                if (arr.len() as u64) < b {
                    out.push(Violation {
                        path: path.to_string(),
                        message: format!("at least {b} items"),
                    });
                }
            }
            if let Some(b) = s.get("maxItems").and_then(Value::as_u64) {
                if (arr.len() as u64) > b {
                    out.push(Violation {
                        path: path.to_string(),
                        message: format!("at most {b} items"),
                    });
                }
            }
            if let Some(items) = s.get("items") {
                for (i, item) in arr.iter().enumerate() {
                    let child = if item.is_object() || item.is_array() {
                        format!("{path}/{i}")
                    } else {
                        path.to_string()
                    };
                    self.check(items, item, &child, out);
                }
            }
        }
        if let Some(all) = s.get("allOf").and_then(Value::as_array) {
            for sub in all {
                self.check(sub, v, path, out);
            }
        }
        if let Some(cond) = s.get("if") {
            let mut probe = Vec::new();
            self.check(cond, v, path, &mut probe);
            if probe.is_empty() {
                if let Some(then) = s.get("then") {
                    self.check(then, v, path, out);
                }
            }
        }
    }
}
