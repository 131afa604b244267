// SPDX-License-Identifier: Apache-2.0

//! Plain-text result tables.

use super::{tcca_overall, AggregateResult, SampleResult, TypeTable};

fn opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(v) => format!("{v:.digits$}"),
        None => "—".to_string(),
    }
}

fn type_analysis(types: &TypeTable) -> String {
    let parts: Vec<String> = types
        .iter()
        .filter(|(_, c)| c.tp + c.fp > 0)
        .map(|(t, c)| format!("{}/{} {t}", c.tp, c.tp + c.fp))
        .collect();
    if parts.is_empty() {
        "—".to_string()
    } else {
        parts.join("; ")
    }
}

fn width(s: &str) -> usize {
    s.chars().count()
}

/// Left-aligned columns separated by ` | `.
fn layout(rows: &[Vec<String>], rule_after: &[usize]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut w = vec![0; cols];
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            w[i] = w[i].max(width(c));
        }
    }
    let mut out = String::new();
    for (ri, r) in rows.iter().enumerate() {
        let cells: Vec<String> = (0..cols)
            .map(|i| {
                let c = r.get(i).map(String::as_str).unwrap_or("");
                format!("{c}{}", " ".repeat(w[i] - width(c)))
            })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if rule_after.contains(&ri) {
            let rule: Vec<String> = w.iter().map(|&n| "-".repeat(n)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

/// Detection, localization and classification columns, one row per
/// sample and a final aggregate row computed from summed counts.
pub fn render_table(samples: &[SampleResult], agg: &AggregateResult) -> String {
    let mut rows = vec![
        vec![
            "".into(),
            "Detection Performance".into(),
            "Localization Precision".into(),
            "".into(),
            "".into(),
            "Type Classification".into(),
            "".into(),
        ],
        vec![
            "Sample".into(),
            "{k, TP, FP, FN}".into(),
            "TLC".into(),
            "PLC".into(),
            "AC".into(),
            "TCCA".into(),
            "Type Analysis".into(),
        ],
    ];
    for s in samples {
        rows.push(vec![
            s.design_id.clone(),
            s.tuple.to_string(),
            opt(s.tlc, 2),
            opt(s.plc, 2),
            opt(s.ac, 2),
            tcca_overall(&s.tcca).percent(),
            type_analysis(&s.tcca),
        ]);
    }
    rows.push(vec![
        "Aggregate".into(),
        agg.tuple.to_string(),
        opt(agg.tlc, 2),
        opt(agg.plc, 2),
        opt(agg.ac, 2),
        tcca_overall(&agg.tcca).percent(),
        type_analysis(&agg.tcca),
    ]);
    let n = rows.len();
    layout(&rows, &[1, n - 2])
}

/// Time, token and money cost per sample for one or more providers.
pub fn render_cost_table(columns: &[(&str, &AggregateResult)]) -> String {
    let mut rows = vec![std::iter::once("Parameter".to_string())
        .chain(columns.iter().map(|(n, _)| n.to_string()))
        .collect::<Vec<_>>()];
    let na = |v: Option<f64>, d: usize| v.map(|v| format!("{v:.d$}")).unwrap_or_else(|| "N/A".into());
    let lines: [(&str, Box<dyn Fn(&AggregateResult) -> String>); 4] = [
        ("Avg Time/Sample (s)", Box::new(|a| format!("{:.2}", a.cost.avg_time))),
        ("Input Tokens/Sample", Box::new(move |a| na(a.cost.input_tokens_per_sample, 2))),
        ("Output Tokens/Sample", Box::new(move |a| na(a.cost.output_tokens_per_sample, 2))),
        ("Cost/Sample ($)", Box::new(move |a| na(a.cost.cost_per_sample, 6))),
    ];
    for (label, f) in lines.iter() {
        let mut r = vec![label.to_string()];
        r.extend(columns.iter().map(|(_, a)| f(a)));
        rows.push(r);
    }
    layout(&rows, &[0])
}
