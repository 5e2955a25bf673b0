//! Model declaration files.
//!
//! ```toml
//! dim = 2
//! drift = [0.0, 0.0]          # optional, defaults to zero
//!
//! [measure]
//! variant = "isotropic-stable"
//! alpha = 1.5
//! c = 0.25                     # or: normalized = true
//! ```
//!
//! Variants and their keys:
//!
//! | variant              | keys                                                     |
//! |----------------------|----------------------------------------------------------|
//! | `isotropic-stable`   | `alpha`, `c` or `normalized = true`                      |
//! | `discretized-stable` | `gamma`, `upsilon`, optional `k_min`, `k_max`            |
//! | `axis-stable`        | `alpha`, `c_plus`, `c_minus`, `axis` (0-based)           |
//! | `tempered-stable`    | `alpha`, `c`, `lambda`                                   |
//! | `tabulated-atoms`    | `[[measure.atoms]]` tables with `position`, `weight`     |
//!
//! Errors name the offending key path, e.g. `measure.alpha`.

use crate::error::{Error, Result};
use crate::levy_model::{Atom, LevyMeasureSpec, LevyTriplet, RadialProfile};
use toml::{Table, Value};

fn err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn get<'a>(t: &'a Table, prefix: &str, key: &str) -> Result<&'a Value> {
    t.get(key).ok_or_else(|| err(&join(prefix, key), "missing"))
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(err(path, format!("expected a number, found {}", v.type_str()))),
    }
}

fn num(t: &Table, prefix: &str, key: &str) -> Result<f64> {
    as_f64(get(t, prefix, key)?, &join(prefix, key))
}

fn int(t: &Table, prefix: &str, key: &str) -> Result<i64> {
    match get(t, prefix, key)? {
        Value::Integer(i) => Ok(*i),
        v => Err(err(&join(prefix, key), format!("expected an integer, found {}", v.type_str()))),
    }
}

fn vector(v: &Value, path: &str) -> Result<Vec<f64>> {
    match v {
        Value::Array(a) => a
            .iter()
            .enumerate()
            .map(|(i, x)| as_f64(x, &format!("{path}[{i}]")))
            .collect(),
        _ => Err(err(path, format!("expected an array, found {}", v.type_str()))),
    }
}

/// Re-labels model validation failures with the key they came from.
fn located<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidModel(m) => err(key, m),
        other => other,
    })
}

pub fn from_toml(text: &str) -> Result<LevyTriplet> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| err("<document>", e.message().to_string()))?;
    from_table(&root)
}

pub fn from_table(root: &Table) -> Result<LevyTriplet> {
    let dim = int(root, "", "dim")?;
    if !(1..=3).contains(&dim) {
        return Err(err("dim", format!("must be 1, 2 or 3, got {dim}")));
    }
    let dim = dim as usize;
    let drift = match root.get("drift") {
        Some(v) => vector(v, "drift")?,
        None => vec![0.0; dim],
    };
    if drift.len() != dim {
        return Err(err("drift", format!("has {} entries, dim is {dim}", drift.len())));
    }
    let m = match get(root, "", "measure")? {
        Value::Table(t) => t,
        v => return Err(err("measure", format!("expected a table, found {}", v.type_str()))),
    };
    let p = "measure";
    let variant = match get(m, p, "variant")? {
        Value::String(s) => s.as_str(),
        v => return Err(err("measure.variant", format!("expected a string, found {}", v.type_str()))),
    };
    let measure = match variant {
        "isotropic-stable" => {
            let alpha = stable_index(m, p)?;
            let normalized = matches!(m.get("normalized"), Some(Value::Boolean(true)));
            if normalized {
                located("measure.alpha", LevyMeasureSpec::isotropic_stable_normalized(dim, alpha))?
            } else {
                let c = positive(m, p, "c")?;
                located("measure", LevyMeasureSpec::isotropic_stable(dim, alpha, c))?
            }
        }
        "discretized-stable" => {
            let gamma = positive(m, p, "gamma")?;
            let upsilon = positive(m, p, "upsilon")?;
            if gamma >= 2.0 * upsilon {
                return Err(err("measure.gamma", format!("must be below 2 * upsilon = {}", 2.0 * upsilon)));
            }
            let mut spec = located("measure", LevyMeasureSpec::discretized_stable(dim, gamma, upsilon))?;
            if let LevyMeasureSpec::DiscretizedStable { k_min, k_max, .. } = &mut spec {
                if m.contains_key("k_min") {
                    *k_min = int(m, p, "k_min")? as i32;
                }
                if m.contains_key("k_max") {
                    *k_max = int(m, p, "k_max")? as i32;
                }
            }
            located("measure.k_min", spec.validate())?;
            spec
        }
        "axis-stable" => {
            let axis = int(m, p, "axis")?;
            if axis < 0 {
                return Err(err("measure.axis", "must be non-negative"));
            }
            located(
                "measure",
                LevyMeasureSpec::axis_stable(
                    dim,
                    stable_index(m, p)?,
                    non_negative(m, p, "c_plus")?,
                    non_negative(m, p, "c_minus")?,
                    axis as usize,
                ),
            )?
        }
        "tempered-stable" => {
            let spec = LevyMeasureSpec::RadialDensity {
                dim,
                profile: RadialProfile::TemperedStable {
                    c: positive(m, p, "c")?,
                    alpha: stable_index(m, p)?,
                    lambda: positive(m, p, "lambda")?,
                },
            };
            located("measure", spec.validate())?;
            spec
        }
        "tabulated-atoms" => {
            let list = match get(m, p, "atoms")? {
                Value::Array(a) => a,
                v => return Err(err("measure.atoms", format!("expected an array, found {}", v.type_str()))),
            };
            let mut atoms = Vec::new();
            for (i, a) in list.iter().enumerate() {
                let prefix = format!("measure.atoms[{i}]");
                let t = match a {
                    Value::Table(t) => t,
                    _ => return Err(err(&prefix, "expected a table")),
                };
                let position = vector(get(t, &prefix, "position")?, &format!("{prefix}.position"))?;
                let weight = num(t, &prefix, "weight")?;
                atoms.push(Atom { position, weight });
            }
            let spec = LevyMeasureSpec::TabulatedAtoms { dim, atoms };
            located("measure.atoms", spec.validate())?;
            spec
        }
        other => return Err(err("measure.variant", format!("unknown variant `{other}`"))),
    };
    located("measure", LevyTriplet::new(drift, measure))
}

fn stable_index(t: &Table, prefix: &str) -> Result<f64> {
    let a = num(t, prefix, "alpha")?;
    if !(a > 0.0 && a < 2.0) {
        return Err(err(&format!("{prefix}.alpha"), format!("must lie in (0, 2), got {a}")));
    }
    Ok(a)
}

fn positive(t: &Table, prefix: &str, key: &str) -> Result<f64> {
    let x = num(t, prefix, key)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(err(&format!("{prefix}.{key}"), format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn non_negative(t: &Table, prefix: &str, key: &str) -> Result<f64> {
    let x = num(t, prefix, key)?;
    if !(x >= 0.0 && x.is_finite()) {
        return Err(err(&format!("{prefix}.{key}"), format!("must be non-negative, got {x}")));
    }
    Ok(x)
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

pub fn to_table(tr: &LevyTriplet) -> Result<Table> {
    let mut root = Table::new();
    root.insert("dim".into(), Value::Integer(tr.dim() as i64));
    root.insert("drift".into(), floats(&tr.drift));
    let mut m = Table::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    match &tr.measure {
        LevyMeasureSpec::IsotropicStable { alpha, c, .. } => {
            put("variant", Value::String("isotropic-stable".into()));
            put("alpha", Value::Float(*alpha));
            put("c", Value::Float(*c));
        }
        LevyMeasureSpec::DiscretizedStable {
            gamma,
            upsilon,
            k_min,
            k_max,
            ..
        } => {
            put("variant", Value::String("discretized-stable".into()));
            put("gamma", Value::Float(*gamma));
            put("upsilon", Value::Float(*upsilon));
            put("k_min", Value::Integer(*k_min as i64));
            put("k_max", Value::Integer(*k_max as i64));
        }
        LevyMeasureSpec::AxisStable {
            alpha,
            c_plus,
            c_minus,
            axis,
            ..
        } => {
            put("variant", Value::String("axis-stable".into()));
            put("alpha", Value::Float(*alpha));
            put("c_plus", Value::Float(*c_plus));
            put("c_minus", Value::Float(*c_minus));
            put("axis", Value::Integer(*axis as i64));
        }
        LevyMeasureSpec::RadialDensity { profile, .. } => match profile {
            RadialProfile::TemperedStable { c, alpha, lambda } => {
                put("variant", Value::String("tempered-stable".into()));
                put("alpha", Value::Float(*alpha));
                put("c", Value::Float(*c));
                put("lambda", Value::Float(*lambda));
            }
            RadialProfile::Custom { name, .. } => {
                return Err(err("measure", format!("custom profile `{name}` cannot be written")));
            }
        },
        LevyMeasureSpec::TabulatedAtoms { atoms, .. } => {
            put("variant", Value::String("tabulated-atoms".into()));
            let list = atoms
                .iter()
                .map(|a| {
                    let mut t = Table::new();
                    t.insert("position".into(), floats(&a.position));
                    t.insert("weight".into(), Value::Float(a.weight));
                    Value::Table(t)
                })
                .collect();
            put("atoms", Value::Array(list));
        }
    }
    root.insert("measure".into(), Value::Table(m));
    Ok(root)
}

pub fn to_toml(tr: &LevyTriplet) -> Result<String> {
    toml::to_string(&to_table(tr)?).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("dim = 2\n[measure]\nvariant = \"isotropic-stable\"\nc = 1.0\n", "measure.alpha"),
            ("dim = 2\n[measure]\nvariant = \"isotropic-stable\"\nalpha = 2.5\nc = 1.0\n", "measure.alpha"),
            ("dim = 2\n[measure]\nvariant = \"discretized-stable\"\ngamma = 3.0\nupsilon = 1.0\n", "measure.gamma"),
            ("dim = 1\ndrift = [0.0, 1.0]\n[measure]\nvariant = \"x\"\n", "drift"),
            ("dim = 1\ndrift = [\"a\"]\n", "drift[0]"),
            ("dim = 1\n[measure]\nvariant = \"wobbly\"\n", "measure.variant"),
            ("dim = 1\n[measure]\nvariant = \"tabulated-atoms\"\n[[measure.atoms]]\nposition = [1.0]\n", "measure.atoms[0].weight"),
        ];
        for (text, key) in cases {
            match from_toml(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn normalized_flag() {
        let tr = from_toml("dim = 1\n[measure]\nvariant = \"isotropic-stable\"\nalpha = 1.5\nnormalized = true\n").unwrap();
        assert_eq!(tr.measure, LevyMeasureSpec::isotropic_stable_normalized(1, 1.5).unwrap());
    }
}
