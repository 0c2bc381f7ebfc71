//! Render-ready views of an analysis.
//!
//! A [`Report`] is a plain data structure — strings and numbers only, every
//! list already sorted — built once from an [`Analysis`] and then rendered
//! either as JSON (via serde) or as text. Both output formats read the same
//! struct, so they cannot drift apart.

use serde::Serialize;

use crate::inference::Analysis;
use crate::region::RegionSet;

/// Which sections of the report to populate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Sections {
    /// The inferred class table (field and method rows).
    pub tables: bool,
    /// The per-method summaries.
    pub summaries: bool,
    /// Instrumentation counters and their analytic bounds.
    pub stats: bool,
}

/// One field row: `F(class, region, field) = regions`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldRow {
    pub class: String,
    pub region: String,
    pub field: String,
    pub regions: Vec<String>,
}

/// One method row: `M(class, region, method, argRegions) = regions`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodRow {
    pub class: String,
    pub region: String,
    pub method: String,
    pub arg_regions: Vec<String>,
    pub regions: Vec<String>,
}

/// One `x :↦ term` entry of a summary's effect.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssignmentEntry {
    pub var: String,
    pub term: String,
}

/// One `path :≥ term` entry of a summary's effect.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintEntry {
    pub key: String,
    pub term: String,
}

/// One method's summary, fully rendered.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryEntry {
    pub class: String,
    pub method: String,
    pub assignments: Vec<AssignmentEntry>,
    pub constraints: Vec<ConstraintEntry>,
    pub return_term: String,
}

/// Per-method instrumentation.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodStatsRow {
    pub class: String,
    pub method: String,
    pub body_visits: usize,
    pub productive_visits: usize,
    pub contexts_served: usize,
}

/// Run-level instrumentation. The analytic bounds are `u128` values and are
/// serialized as strings so the JSON survives readers that truncate large
/// integers.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsReport {
    pub summary_iterations: usize,
    pub summary_iteration_bound: String,
    pub table_iterations: usize,
    pub table_iteration_bound: String,
    pub max_apply_productive: usize,
    pub apply_productive_bound: String,
    pub contexts_enumerated: usize,
    pub per_method: Vec<MethodStatsRow>,
}

/// Everything one analysis run has to show, ready to print.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub regions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_table: Option<Vec<FieldRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method_table: Option<Vec<MethodRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summaries: Option<Vec<SummaryEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsReport>,
}

fn region_list(set: &RegionSet) -> Vec<String> {
    set.iter().map(|r| r.to_string()).collect()
}

impl Report {
    /// Builds the requested sections. Every list inherits the sorted order
    /// of the analysis's underlying maps.
    pub fn build(analysis: &Analysis, sections: Sections) -> Report {
        let regions = analysis.universe.regions().iter().map(|r| r.to_string()).collect();

        let (field_table, method_table) = if sections.tables {
            let fields = analysis
                .table
                .field_rows()
                .map(|((class, region, field), set)| FieldRow {
                    class: class.to_string(),
                    region: region.to_string(),
                    field: field.to_string(),
                    regions: region_list(set),
                })
                .collect();
            let methods = analysis
                .table
                .method_rows()
                .map(|((class, region, method, args), set)| MethodRow {
                    class: class.to_string(),
                    region: region.to_string(),
                    method: method.to_string(),
                    arg_regions: args.iter().map(|r| r.to_string()).collect(),
                    regions: region_list(set),
                })
                .collect();
            (Some(fields), Some(methods))
        } else {
            (None, None)
        };

        let summaries = sections.summaries.then(|| {
            analysis
                .summaries
                .iter()
                .map(|((class, method), summary)| SummaryEntry {
                    class: class.to_string(),
                    method: method.to_string(),
                    assignments: summary
                        .effect
                        .assignments()
                        .map(|(x, term)| AssignmentEntry {
                            var: x.to_string(),
                            term: term.to_string(),
                        })
                        .collect(),
                    constraints: summary
                        .effect
                        .constraints()
                        .map(|(key, term)| ConstraintEntry {
                            key: key.to_string(),
                            term: term.to_string(),
                        })
                        .collect(),
                    return_term: summary.result.to_string(),
                })
                .collect()
        });

        let stats = sections.stats.then(|| {
            let s = &analysis.stats;
            StatsReport {
                summary_iterations: s.summary_iterations,
                summary_iteration_bound: s.summary_iteration_bound.to_string(),
                table_iterations: s.table_iterations,
                table_iteration_bound: s.table_iteration_bound.to_string(),
                max_apply_productive: s.max_apply_productive,
                apply_productive_bound: s.apply_productive_bound.to_string(),
                contexts_enumerated: s.contexts_enumerated,
                per_method: s
                    .per_method
                    .iter()
                    .map(|((class, method), m)| MethodStatsRow {
                        class: class.to_string(),
                        method: method.to_string(),
                        body_visits: m.body_visits,
                        productive_visits: m.productive_visits,
                        contexts_served: m.contexts_served,
                    })
                    .collect(),
            }
        });

        Report { regions, field_table, method_table, summaries, stats }
    }

    /// Serializes the report as pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Renders the report as text. `style` wraps section headers (identity
    /// for plain output, ANSI codes for terminals).
    pub fn to_text(&self, style: &dyn Fn(&str) -> String) -> String {
        let mut out = String::new();
        let join = |items: &[String]| {
            if items.is_empty() {
                "⊥".to_string()
            } else {
                items.join(" ∨ ")
            }
        };
        out.push_str(&format!("{} {}\n", style("regions:"), self.regions.join(", ")));
        if let Some(rows) = &self.field_table {
            out.push_str(&format!("\n{}\n", style("field table:")));
            for row in rows {
                out.push_str(&format!(
                    "  F({}, {}, {}) = {}\n",
                    row.class,
                    row.region,
                    row.field,
                    join(&row.regions)
                ));
            }
        }
        if let Some(rows) = &self.method_table {
            out.push_str(&format!("\n{}\n", style("method table:")));
            for row in rows {
                out.push_str(&format!(
                    "  M({}, {}, {}, [{}]) = {}\n",
                    row.class,
                    row.region,
                    row.method,
                    row.arg_regions.join(", "),
                    join(&row.regions)
                ));
            }
        }
        if let Some(entries) = &self.summaries {
            out.push_str(&format!("\n{}\n", style("summaries:")));
            for entry in entries {
                let mut pieces: Vec<String> = entry
                    .assignments
                    .iter()
                    .map(|a| format!("{} :↦ {}", a.var, a.term))
                    .collect();
                pieces.extend(
                    entry.constraints.iter().map(|c| format!("{} :≥ {}", c.key, c.term)),
                );
                out.push_str(&format!(
                    "  {}.{}: [{}] returns {}\n",
                    entry.class,
                    entry.method,
                    pieces.join(", "),
                    entry.return_term
                ));
            }
        }
        if let Some(stats) = &self.stats {
            out.push_str(&format!("\n{}\n", style("stats:")));
            out.push_str(&format!(
                "  summary passes: {} (bound {})\n",
                stats.summary_iterations, stats.summary_iteration_bound
            ));
            out.push_str(&format!(
                "  table passes: {} (bound {})\n",
                stats.table_iterations, stats.table_iteration_bound
            ));
            out.push_str(&format!(
                "  max apply sweeps: {} (bound {})\n",
                stats.max_apply_productive, stats.apply_productive_bound
            ));
            out.push_str(&format!(
                "  contexts enumerated: {}\n",
                stats.contexts_enumerated
            ));
            for row in &stats.per_method {
                out.push_str(&format!(
                    "  {}.{}: body visits {}, productive {}, contexts served {}\n",
                    row.class, row.method, row.body_visits, row.productive_visits, row.contexts_served
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::analyze;
    use crate::syntax::parse_program;

    fn sample() -> Analysis {
        let p = parse_program(
            "class Node extends Object {\n\
               Node next;\n\
               Node last() {\n\
                 let n = this.next in\n\
                 let z = null in\n\
                 if (n == z) { this } else { n.last() }\n\
               }\n\
             }\n\
             class Test extends Object {\n\
               Node linear() {\n\
                 let x = new[l1] Node() in\n\
                 let y = new[l2] Node() in\n\
                 y.next := x;\n\
                 y.last()\n\
               }\n\
             }",
        )
        .unwrap();
        analyze(&p).unwrap()
    }

    #[test]
    fn sections_control_which_parts_exist() {
        let analysis = sample();
        let types_only =
            Report::build(&analysis, Sections { tables: true, summaries: false, stats: false });
        assert!(types_only.field_table.is_some());
        assert!(types_only.method_table.is_some());
        assert!(types_only.summaries.is_none());
        assert!(types_only.stats.is_none());

        let summaries_only =
            Report::build(&analysis, Sections { tables: false, summaries: true, stats: true });
        assert!(summaries_only.field_table.is_none());
        assert!(summaries_only.summaries.is_some());
        assert!(summaries_only.stats.is_some());
    }

    #[test]
    fn json_uses_camel_case_keys_and_string_bounds() {
        let analysis = sample();
        let report =
            Report::build(&analysis, Sections { tables: true, summaries: true, stats: true });
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert!(value["fieldTable"].is_array());
        assert!(value["methodTable"][0]["argRegions"].is_array());
        assert!(value["summaries"][0]["returnTerm"].is_string());
        assert!(value["stats"]["summaryIterationBound"].is_string());
        let regions: Vec<&str> =
            value["regions"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(regions, vec!["Created@l1", "Created@l2", "Null"]);
    }

    #[test]
    fn text_renders_rows_in_table_notation() {
        let analysis = sample();
        let report =
            Report::build(&analysis, Sections { tables: true, summaries: true, stats: false });
        let text = report.to_text(&|s: &str| s.to_string());
        assert!(text.contains("F(Node, Created@l1, next) = Null"));
        assert!(text.contains("M(Test, Null, linear, []) = Created@l1 ∨ Created@l2 ∨ Null"));
        assert!(text.contains("Node.last: [this :↦ this ∨ this.next"));
    }

    #[test]
    fn empty_sections_render_as_empty_arrays_not_missing_keys() {
        let p = parse_program("class A extends Object { A f; }").unwrap();
        let analysis = analyze(&p).unwrap();
        let report =
            Report::build(&analysis, Sections { tables: true, summaries: true, stats: false });
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(value["fieldTable"].as_array().unwrap().len(), 0);
        assert_eq!(value["methodTable"].as_array().unwrap().len(), 0);
        assert_eq!(value["summaries"].as_array().unwrap().len(), 0);
        assert_eq!(value["regions"], serde_json::json!(["Null"]));
    }
}
