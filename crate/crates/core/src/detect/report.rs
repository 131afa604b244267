// SPDX-License-Identifier: Apache-2.0

//! The XML answer contract and its parsed form.
//!
//! ```text
//! <detection>
//!   <trojan id="HT1" type="2">
//!     <trigger><line n="3"/><line n="4"/></trigger>
//!     <payload><line n="11"/></payload>
//!     <summary>...</summary>
//!   </trojan>
//! </detection>
//! ```
//!
//! No Trojans is `<detection/>`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::provider::{ProviderConfig, RawResponse};
use crate::annotations::TrojanType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub entry_id: String,
    pub claimed_type: TrojanType,
    pub trigger_lines: BTreeSet<u32>,
    pub payload_lines: BTreeSet<u32>,
    pub summary: String,
}

impl ReportEntry {
    pub fn lines(&self) -> impl Iterator<Item = u32> + '_ {
        self.trigger_lines.iter().chain(self.payload_lines.iter()).copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
    /// Seconds.
    pub wall_time: f64,
    pub monetary_cost: Option<f64>,
}

impl CostRecord {
    /// Price a response. The cost is known only when both token counts are.
    pub fn priced(resp: &RawResponse, cfg: &ProviderConfig) -> Self {
        let monetary_cost = match (resp.input_tokens, resp.output_tokens) {
            (Some(i), Some(o)) => Some(i as f64 * cfg.price_per_input_token + o as f64 * cfg.price_per_output_token),
            _ => None,
        };
        CostRecord {
            input_tokens: resp.input_tokens,
            output_tokens: resp.output_tokens,
            wall_time: resp.wall_time,
            monetary_cost,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub entries: Vec<ReportEntry>,
    pub provider: String,
    pub cost: CostRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("no well-formed <detection> element in the response")]
    XmlNotFound,
    #[error("schema error at {path}: {detail}")]
    Schema { path: String, detail: String },
    #[error("entry `{entry}` references line {line}, outside 1..={loc}")]
    LineOutOfRange { entry: String, line: u32, loc: u32 },
}

fn schema(path: impl Into<String>, detail: impl Into<String>) -> ReportError {
    ReportError::Schema {
        path: path.into(),
        detail: detail.into(),
    }
}

/// Drop Markdown code fence lines.
fn strip_fences(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Candidate `<tag>` element substrings, in order of appearance.
fn candidates<'a>(text: &'a str, tag: &str) -> Vec<&'a str> {
    let open = format!("<{tag}");
    let close = format!("</{tag}>");
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(off) = text[from..].find(&open) {
        let start = from + off;
        from = start + 1;
        let rest = &text[start + open.len()..];
        if !rest.starts_with(['>', '/', ' ', '\t', '\n', '\r']) {
            continue;
        }
        if let Some(gt) = text[start..].find('>') {
            if text[..start + gt].ends_with('/') {
                out.push(&text[start..start + gt + 1]);
            }
        }
        let mut search = start;
        while let Some(off) = text[search..].find(&close) {
            let end = search + off + close.len();
            out.push(&text[start..end]);
            search = end;
        }
    }
    out
}

/// The first well-formed `<tag>` element in `text`, ignoring code fences
/// and surrounding prose.
pub(crate) fn first_element(text: &str, tag: &str) -> Option<String> {
    let text = strip_fences(text);
    candidates(&text, tag)
        .into_iter()
        .find(|c| roxmltree::Document::parse(c).is_ok())
        .map(str::to_string)
}

fn element_children<'a, 'i>(node: roxmltree::Node<'a, 'i>, path: &str) -> Result<Vec<roxmltree::Node<'a, 'i>>, ReportError> {
    let mut out = Vec::new();
    for c in node.children() {
        if c.is_element() {
            out.push(c);
        } else if c.is_text() && !c.text().unwrap_or("").trim().is_empty() {
            return Err(schema(path, "unexpected text"));
        }
    }
    Ok(out)
}

fn check_attrs(node: roxmltree::Node, allowed: &[&str], path: &str) -> Result<(), ReportError> {
    for a in node.attributes() {
        if !allowed.contains(&a.name()) {
            return Err(schema(path, format!("unexpected attribute `{}`", a.name())));
        }
    }
    Ok(())
}

fn line_set(node: roxmltree::Node, path: &str) -> Result<BTreeSet<u32>, ReportError> {
    let mut out = BTreeSet::new();
    for (i, l) in element_children(node, path)?.into_iter().enumerate() {
        let lp = format!("{path}/line[{}]", i + 1);
        if l.tag_name().name() != "line" {
            return Err(schema(&lp, format!("expected <line>, found <{}>", l.tag_name().name())));
        }
        check_attrs(l, &["n"], &lp)?;
        if l.has_children() {
            return Err(schema(&lp, "<line> must be empty"));
        }
        let n = l.attribute("n").ok_or_else(|| schema(&lp, "missing attribute `n`"))?;
        let v: u32 = n
            .trim()
            .parse()
            .map_err(|_| schema(&lp, format!("`{n}` is not a line number")))?;
        if v == 0 {
            return Err(schema(&lp, "line numbers start at 1"));
        }
        out.insert(v);
    }
    Ok(out)
}

fn parse_entry(node: roxmltree::Node, path: &str, loc: u32) -> Result<ReportEntry, ReportError> {
    if node.tag_name().name() != "trojan" {
        return Err(schema(path, format!("expected <trojan>, found <{}>", node.tag_name().name())));
    }
    check_attrs(node, &["id", "type"], path)?;
    let id = node.attribute("id").unwrap_or("").trim();
    if id.is_empty() {
        return Err(schema(path, "missing attribute `id`"));
    }
    let ty = node.attribute("type").ok_or_else(|| schema(path, "missing attribute `type`"))?;
    let claimed_type = ty
        .trim()
        .parse()
        .ok()
        .and_then(TrojanType::from_number)
        .ok_or_else(|| schema(path, format!("type must be 1, 2 or 3, got `{ty}`")))?;
    let (mut trigger, mut payload, mut summary) = (None, None, None);
    for c in element_children(node, path)? {
        let name = c.tag_name().name();
        let cp = format!("{path}/{name}");
        let slot_taken = match name {
            "trigger" => trigger.replace(line_set(c, &cp)?).is_some(),
            "payload" => payload.replace(line_set(c, &cp)?).is_some(),
            "summary" => {
                check_attrs(c, &[], &cp)?;
                if c.children().any(|n| n.is_element()) {
                    return Err(schema(&cp, "<summary> holds text only"));
                }
                let text: String = c.children().filter_map(|n| n.text()).collect();
                summary.replace(text.trim().to_string()).is_some()
            }
            other => return Err(schema(&cp, format!("unexpected element <{other}>"))),
        };
        if slot_taken {
            return Err(schema(&cp, "duplicate element"));
        }
    }
    let entry = ReportEntry {
        entry_id: id.to_string(),
        claimed_type,
        trigger_lines: trigger.ok_or_else(|| schema(path, "missing <trigger>"))?,
        payload_lines: payload.ok_or_else(|| schema(path, "missing <payload>"))?,
        summary: summary.ok_or_else(|| schema(path, "missing <summary>"))?,
    };
    if entry.trigger_lines.is_empty() && entry.payload_lines.is_empty() {
        return Err(schema(path, "trigger and payload are both empty"));
    }
    if let Some(line) = entry.lines().find(|&l| l > loc) {
        return Err(ReportError::LineOutOfRange {
            entry: entry.entry_id.clone(),
            line,
            loc,
        });
    }
    Ok(entry)
}

/// Parse the XML text of a response against a design of `loc` lines.
///
/// The first `<detection>` element that is well-formed XML is used, so
/// surrounding prose and code fences are fine. Provider and cost are left
/// empty.
pub fn parse_report_text(text: &str, loc: u32) -> Result<DetectionReport, ReportError> {
    let doc_text = first_element(text, "detection").ok_or(ReportError::XmlNotFound)?;
    let doc = roxmltree::Document::parse(&doc_text).expect("checked by first_element");
    let root = doc.root_element();
    check_attrs(root, &[], "detection")?;
    let mut entries: Vec<ReportEntry> = Vec::new();
    for (i, t) in element_children(root, "detection")?.into_iter().enumerate() {
        let path = format!("detection/trojan[{}]", i + 1);
        let e = parse_entry(t, &path, loc)?;
        if entries.iter().any(|x| x.entry_id == e.entry_id) {
            return Err(schema(path, format!("duplicate id `{}`", e.entry_id)));
        }
        entries.push(e);
    }
    Ok(DetectionReport {
        entries,
        ..DetectionReport::default()
    })
}

/// Parse a provider response for `design`, carrying over its timing and
/// token counts.
pub fn parse_report(resp: &RawResponse, design: &crate::design::DesignUnit) -> Result<DetectionReport, ReportError> {
    let mut r = parse_report_text(&resp.text, design.lines())?;
    r.cost = CostRecord {
        input_tokens: resp.input_tokens,
        output_tokens: resp.output_tokens,
        wall_time: resp.wall_time,
        monetary_cost: None,
    };
    Ok(r)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn push_lines(out: &mut String, tag: &str, lines: &BTreeSet<u32>) {
    if lines.is_empty() {
        out.push_str(&format!("    <{tag}/>\n"));
        return;
    }
    out.push_str(&format!("    <{tag}>"));
    for l in lines {
        out.push_str(&format!("<line n=\"{l}\"/>"));
    }
    out.push_str(&format!("</{tag}>\n"));
}

/// Canonical XML for a report's entries.
pub fn serialize_report(r: &DetectionReport) -> String {
    if r.entries.is_empty() {
        return "<detection/>\n".to_string();
    }
    let mut out = String::from("<detection>\n");
    for e in &r.entries {
        out.push_str(&format!(
            "  <trojan id=\"{}\" type=\"{}\">\n",
            escape(&e.entry_id),
            e.claimed_type.number()
        ));
        push_lines(&mut out, "trigger", &e.trigger_lines);
        push_lines(&mut out, "payload", &e.payload_lines);
        out.push_str(&format!("    <summary>{}</summary>\n", escape(&e.summary)));
        out.push_str("  </trojan>\n");
    }
    out.push_str("</detection>\n");
    out
}

/// The schema text embedded in prompts.
pub const SCHEMA_TEXT: &str = "\
Answer with exactly one XML document of this form and nothing else:

<detection>
  <trojan id=\"HT1\" type=\"1|2|3\">
    <trigger><line n=\"...\"/>...</trigger>
    <payload><line n=\"...\"/>...</payload>
    <summary>one sentence</summary>
  </trojan>
  ...
</detection>

Line numbers refer to the numbered source above. Every <trojan> needs
<trigger>, <payload> and <summary>; one of <trigger> or <payload> may be
empty, not both. type is 1 (functionality change), 2 (information leakage)
or 3 (denial of service). If the design is clean answer <detection/>.
";
