//! Result formatting: JSON lines and aligned text tables.

use serde_json::{json, Map};

use crate::evaluator::{BindingSet, Value, LOCATION_COLUMN};
use crate::graph::Graph;

/// JSON form of a value. Elements become `{"vertex":"<id>"}` or
/// `{"edge":"<id>"}` with their external ids.
pub fn value_to_json(value: &Value, g: &Graph) -> serde_json::Value {
    match value {
        Value::Vertex(v) => json!({ "vertex": g.vertex_external_id(*v) }),
        Value::Edge(e) => json!({ "edge": g.edge_external_id(*e) }),
        Value::Property(p) => p.to_json(),
        Value::List(items) => items.iter().map(|v| value_to_json(v, g)).collect(),
    }
}

/// One JSON object per row, keyed by column, each followed by a newline.
/// Columns a row does not bind are written as `null`.
pub fn to_json_lines(set: &BindingSet, g: &Graph) -> String {
    let mut out = String::new();
    for row in set.rows() {
        let mut obj = Map::new();
        for var in set.schema() {
            let v = row
                .get(var)
                .map_or(serde_json::Value::Null, |v| value_to_json(v, g));
            obj.insert(var.to_string(), v);
        }
        out.push_str(&serde_json::Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}

/// A header row, a rule and one line per row, columns padded to equal width.
/// A result whose only column is the unlabeled location is written as bare
/// values, one per line.
pub fn to_table(set: &BindingSet, g: &Graph) -> String {
    if let [only] = set.schema() {
        if only.as_str() == LOCATION_COLUMN {
            return set
                .column(LOCATION_COLUMN)
                .map(|v| v.map_or(String::new(), |v| v.display(g).to_string()) + "\n")
                .collect();
        }
    }
    let header: Vec<String> = set.schema().iter().map(|v| v.to_string()).collect();
    let cells: Vec<Vec<String>> = set
        .rows()
        .iter()
        .map(|row| {
            set.schema()
                .iter()
                .map(|var| row.get(var).map_or(String::new(), |v| v.display(g).to_string()))
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            cells
                .iter()
                .map(|r| r[i].chars().count())
                .chain([header[i].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |items: &[String]| {
        let padded: Vec<String> = items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        let mut l = padded.join(" | ");
        l.truncate(l.trim_end().len());
        l.push('\n');
        l
    };
    let mut out = line(&header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(&rule).replace(" | ", "-+-"));
    for r in &cells {
        out.push_str(&line(r));
    }
    out
}
