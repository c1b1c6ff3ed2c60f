//! A compact pretty-printer for JSON artifacts: objects get one key per
//! line, while arrays of numbers (coordinates, edges, vertex lists) stay on
//! one line.

use serde_json::Value;

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(xs) => xs.iter().all(|x| !x.is_array() && !x.is_object() || (x.is_array() && is_flat(x) && !has_arrays(x))),
        Value::Object(_) => false,
        _ => true,
    }
}

fn has_arrays(v: &Value) -> bool {
    matches!(v, Value::Array(xs) if xs.iter().any(|x| x.is_array() || x.is_object()))
}

fn write(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Object(m) if !m.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        Value::Array(xs) if !xs.is_empty() && !is_flat(v) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad);
                write(x, indent + 1, out);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("values serialize")),
    }
}

/// The document as text, with a trailing newline.
pub fn pretty(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keeps_coordinate_lists_inline() {
        let v = json!({"b": 1, "a": [[0, 1], [2, 3]], "c": [{"x": [1, 2]}], "d": [[[1, 2]]], "e": {}});
        let s = pretty(&v);
        assert_eq!(
            s,
            "{\n  \"b\": 1,\n  \"a\": [[0,1],[2,3]],\n  \"c\": [\n    {\n      \"x\": [1,2]\n    }\n  ],\n  \"d\": [\n    [[1,2]]\n  ],\n  \"e\": {}\n}\n"
        );
        assert_eq!(serde_json::from_str::<Value>(&s).unwrap(), v);
    }
}
