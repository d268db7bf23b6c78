//! JSON exchange format for structure constants.
//!
//! ```json
//! {"name": "c:z2", "dim": 2, "unit_index": null,
//!  "mult": [[0,0,0,1,0], [1,1,1,1,0]],
//!  "coproduct": [[0,0,0,1,0], [0,1,1,1,0], [1,0,1,1,0], [1,1,0,1,0]],
//!  "counit": [[0,1,0]],
//!  "involution": [[0,0,1,0], [1,1,1,0]],
//!  "antipode": [[0,0,1,0], [1,1,1,0]]}
//! ```
//!
//! Omitted entries are zero. `unit_index` may be omitted or `null` when the
//! unit is not a basis element; it is then solved from `mult`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group_table::GroupTable;
use crate::hopf::{self, FiniteQuantumGroup, StructureConstants, Tensor3};
use crate::scalar::{CMat, CVec, Real, C};

#[derive(Debug, Serialize, Deserialize)]
struct GroupJson {
    name: String,
    dim: usize,
    #[serde(default)]
    unit_index: Option<usize>,
    #[serde(default)]
    mult: Vec<Vec<f64>>,
    #[serde(default)]
    coproduct: Vec<Vec<f64>>,
    #[serde(default)]
    counit: Vec<Vec<f64>>,
    #[serde(default)]
    involution: Vec<Vec<f64>>,
    #[serde(default)]
    antipode: Vec<Vec<f64>>,
}

fn index(field: &str, raw: f64, n: usize) -> Result<usize> {
    if raw.fract() != 0.0 || raw < 0.0 || raw >= n as f64 {
        return Err(Error::Parse(format!(
            "{field}: index {raw} is not an integer in 0..{n}"
        )));
    }
    Ok(raw as usize)
}

fn entries<'a>(field: &'a str, rows: &'a [Vec<f64>], arity: usize) -> impl Iterator<Item = Result<&'a [f64]>> + 'a {
    rows.iter().map(move |r| {
        if r.len() != arity + 2 {
            Err(Error::Parse(format!(
                "{field}: entry {r:?} must have {} indices followed by re, im",
                arity
            )))
        } else {
            Ok(r.as_slice())
        }
    })
}

fn tensor<T: Real>(field: &str, rows: &[Vec<f64>], n: usize) -> Result<Tensor3<T>> {
    let mut t = Tensor3::zeros(n);
    for e in entries(field, rows, 3) {
        let e = e?;
        let (i, j, k) = (index(field, e[0], n)?, index(field, e[1], n)?, index(field, e[2], n)?);
        t.add(i, j, k, C::new(T::lit(e[3]), T::lit(e[4])));
    }
    Ok(t)
}

fn matrix<T: Real>(field: &str, rows: &[Vec<f64>], n: usize) -> Result<CMat<T>> {
    let mut m = CMat::<T>::zeros(n, n);
    for e in entries(field, rows, 2) {
        let e = e?;
        let (i, k) = (index(field, e[0], n)?, index(field, e[1], n)?);
        m[(i, k)] += C::new(T::lit(e[2]), T::lit(e[3]));
    }
    Ok(m)
}

fn vector<T: Real>(field: &str, rows: &[Vec<f64>], n: usize) -> Result<CVec<T>> {
    let mut v = CVec::<T>::zeros(n);
    for e in entries(field, rows, 1) {
        let e = e?;
        v[index(field, e[0], n)?] += C::new(T::lit(e[1]), T::lit(e[2]));
    }
    Ok(v)
}

/// Parses and densifies a quantum group; structural checks run in
/// [`FiniteQuantumGroup::new`].
pub fn group_from_json<T: Real>(text: &str) -> Result<FiniteQuantumGroup<T>> {
    let raw: GroupJson = serde_json::from_str(text)?;
    let n = raw.dim;
    if n == 0 {
        return Err(Error::Structure("dim must be positive".into()));
    }
    FiniteQuantumGroup::new(StructureConstants {
        name: raw.name,
        dim: n,
        unit_index: raw.unit_index,
        mult: tensor("mult", &raw.mult, n)?,
        coproduct: tensor("coproduct", &raw.coproduct, n)?,
        counit: vector("counit", &raw.counit, n)?,
        involution: matrix("involution", &raw.involution, n)?,
        antipode: matrix("antipode", &raw.antipode, n)?,
    })
}

pub fn load_group<T: Real>(path: impl AsRef<Path>) -> Result<FiniteQuantumGroup<T>> {
    group_from_json(&std::fs::read_to_string(path)?)
}

fn num(x: f64) -> Value {
    json!(x)
}

/// Sparse JSON with integer indices; entries are listed in row-major order.
pub fn group_to_json<T: Real>(g: &FiniteQuantumGroup<T>) -> String {
    let n = g.dim();
    let z = |c: C<T>| (num(c.re.as_f64()), num(c.im.as_f64()));
    let t3 = |t: &Tensor3<T>| -> Vec<Value> {
        t.iter_nonzero()
            .map(|(i, j, k, v)| {
                let (re, im) = z(v);
                json!([i, j, k, re, im])
            })
            .collect()
    };
    let mat = |m: &CMat<T>| -> Vec<Value> {
        let mut out = Vec::new();
        for i in 0..n {
            for k in 0..n {
                let v = m[(i, k)];
                if v.re != T::zero() || v.im != T::zero() {
                    let (re, im) = z(v);
                    out.push(json!([i, k, re, im]));
                }
            }
        }
        out
    };
    let counit: Vec<Value> = g
        .counit()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.re != T::zero() || v.im != T::zero())
        .map(|(i, v)| {
            let (re, im) = z(*v);
            json!([i, re, im])
        })
        .collect();
    let doc = json!({
        "name": g.name(),
        "dim": n,
        "unit_index": g.unit_index(),
        "mult": t3(g.mult()),
        "coproduct": t3(g.coproduct()),
        "counit": counit,
        "involution": mat(g.involution()),
        "antipode": mat(g.antipode()),
    });
    serde_json::to_string_pretty(&doc).expect("JSON values serialize")
}

/// Largest `N` accepted in `c:zN` and `group-algebra:zN`.
pub const MAX_CYCLIC_ORDER: usize = 64;

fn cyclic_order(spec: &str, rest: &str) -> Result<usize> {
    let n: usize = rest
        .strip_prefix('z')
        .and_then(|k| k.parse().ok())
        .ok_or_else(|| Error::Parse(format!("group `{spec}`: expected zN or s3")))?;
    if n == 0 || n > MAX_CYCLIC_ORDER {
        return Err(Error::Parse(format!("group `{spec}`: order must be in 1..={MAX_CYCLIC_ORDER}")));
    }
    Ok(n)
}

/// Builds a group from `c:zN`, `c:s3`, `group-algebra:zN`,
/// `group-algebra:s3`, `kac-paljutkin` or `file:<path>`, without solving its
/// Haar state.
pub fn resolve_group<T: Real>(spec: &str) -> Result<FiniteQuantumGroup<T>> {
    let spec = spec.trim();
    if spec == "kac-paljutkin" {
        return Ok(hopf::build_kac_paljutkin());
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return load_group(path);
    }
    let table = |rest: &str| -> Result<GroupTable> {
        if rest == "s3" {
            Ok(GroupTable::symmetric3())
        } else {
            GroupTable::cyclic(cyclic_order(spec, rest)?)
        }
    };
    if let Some(rest) = spec.strip_prefix("c:") {
        return Ok(hopf::build_function_algebra(&table(rest)?));
    }
    if let Some(rest) = spec.strip_prefix("group-algebra:") {
        return Ok(hopf::build_group_algebra(&table(rest)?));
    }
    Err(Error::Parse(format!(
        "unknown group `{spec}`; expected c:zN, c:s3, group-algebra:zN, group-algebra:s3, kac-paljutkin or file:<path>"
    )))
}

/// Builtin names with their dimensions, in a fixed order; cyclic families are
/// listed for `N = 2..=8`.
pub fn builtin_catalog() -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for n in 2..=8 {
        out.push((format!("c:z{n}"), n));
    }
    out.push(("c:s3".into(), 6));
    for n in 2..=8 {
        out.push((format!("group-algebra:z{n}"), n));
    }
    out.push(("group-algebra:s3".into(), 6));
    out.push(("kac-paljutkin".into(), 8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_table::GroupTable;
    use crate::hopf::{build_function_algebra, build_kac_paljutkin, verify_axioms};

    #[test]
    fn roundtrip_preserves_constants() {
        for g in [
            build_kac_paljutkin::<f64>(),
            build_function_algebra(&GroupTable::symmetric3()),
        ] {
            let text = group_to_json(&g);
            let back: FiniteQuantumGroup<f64> = group_from_json(&text).unwrap();
            assert_eq!(back.mult(), g.mult());
            assert_eq!(back.coproduct(), g.coproduct());
            assert_eq!(back.counit(), g.counit());
            assert_eq!(back.involution(), g.involution());
            assert_eq!(back.antipode(), g.antipode());
            assert_eq!(group_to_json(&back), text);
        }
    }

    #[test]
    fn doc_example_parses() {
        let text = r#"{"name": "c:z2", "dim": 2, "unit_index": null,
          "mult": [[0,0,0,1,0], [1,1,1,1,0]],
          "coproduct": [[0,0,0,1,0], [0,1,1,1,0], [1,0,1,1,0], [1,1,0,1,0]],
          "counit": [[0,1,0]],
          "involution": [[0,0,1,0], [1,1,1,0]],
          "antipode": [[0,0,1,0], [1,1,1,0]]}"#;
        let g: FiniteQuantumGroup<f64> = group_from_json(text).unwrap();
        assert!(verify_axioms(&g, 1e-12).passed());
    }

    #[test]
    fn builtins_resolve_with_catalog_dims() {
        for (name, dim) in builtin_catalog() {
            let g: FiniteQuantumGroup<f64> = resolve_group(&name).unwrap();
            assert_eq!(g.dim(), dim, "{name}");
            assert_eq!(g.name(), name);
        }
        assert!(resolve_group::<f64>("c:z0").is_err());
        assert!(resolve_group::<f64>("su2").is_err());
        assert!(resolve_group::<f64>("file:/nonexistent.json").is_err());
    }

    #[test]
    fn bad_index_is_reported() {
        let text = r#"{"name":"x","dim":1,"unit_index":0,"mult":[[0,0,3,1,0]]}"#;
        let err = group_from_json::<f64>(text).unwrap_err();
        assert!(err.to_string().contains("mult"));
    }
}
