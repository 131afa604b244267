// SPDX-License-Identifier: Apache-2.0

//! Rule-based detector used as an offline provider.
//!
//! Triggers: an if-chain in a clocked block whose condition tests a signal
//! for equality with a rare constant (at least 8 bits wide, not small, not
//! all ones). The whole chain is reported and the registers it assigns
//! become trigger state. Payloads: branches elsewhere guarded by a
//! condition that reads trigger state, and continuous assigns that read it.

use std::collections::{BTreeMap, BTreeSet};

use crate::annotations::TrojanType;
use crate::rtl::{BinaryOp, Expr, ItemKind, Module, Stmt, StmtKind, SyntaxTree, UnaryOp};

use super::report::ReportEntry;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub trigger_lines: BTreeSet<u32>,
    pub payload_lines: BTreeSet<u32>,
    /// Registers assigned inside the trigger chain.
    pub state: BTreeSet<String>,
    /// Rare constants compared in the trigger, as written.
    pub constants: Vec<String>,
    pub counter: bool,
    pub ty: TrojanType,
}

fn is_rare(e: &Expr) -> Option<String> {
    let Expr::Number(n) = e.unparen() else {
        return None;
    };
    let w = n.width();
    let v = n.value()?;
    let ones = if w >= 128 { u128::MAX } else { (1u128 << w) - 1 };
    (w >= 8 && v >= 16 && v != ones).then(|| crate::rtl::expr_to_string(e))
}

/// Rare constants in equality tests within `e`.
fn rare_equalities(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Binary { op, lhs, rhs } => {
            if matches!(op, BinaryOp::Eq | BinaryOp::CaseEq) {
                out.extend(is_rare(lhs));
                out.extend(is_rare(rhs));
            }
            rare_equalities(lhs, out);
            rare_equalities(rhs, out);
        }
        Expr::Unary { operand, .. } => rare_equalities(operand, out),
        Expr::Paren { inner, .. } => rare_equalities(inner, out),
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
        } => {
            rare_equalities(cond, out);
            rare_equalities(then_expr, out);
            rare_equalities(else_expr, out);
        }
        _ => {}
    }
}

fn reads(e: &Expr, regs: &BTreeSet<String>) -> bool {
    let mut hit = false;
    e.for_each_ident(&mut |i| hit |= regs.contains(&i.name));
    hit
}

fn lhs_name(e: &Expr) -> Option<&str> {
    match e.unparen() {
        Expr::Ident(i) => Some(&i.name),
        Expr::Index { base, .. } | Expr::Slice { base, .. } => lhs_name(base),
        _ => None,
    }
}

fn assigned(s: &Stmt, out: &mut BTreeSet<String>) {
    s.walk(&mut |s| {
        if let StmtKind::Assign { lhs, .. } = &s.kind {
            if let Some(n) = lhs_name(lhs) {
                out.insert(n.to_string());
            }
        }
    });
}

/// Does any branch of this if-chain test a rare constant?
fn chain_constants(s: &Stmt, out: &mut Vec<String>) {
    if let StmtKind::If { cond, else_stmt, .. } = &s.kind {
        rare_equalities(cond, out);
        if let Some(e) = else_stmt {
            chain_constants(e, out);
        }
    }
}

fn is_counter(s: &Stmt) -> bool {
    let mut hit = false;
    s.walk(&mut |s| {
        if let StmtKind::Assign { lhs, rhs, .. } = &s.kind {
            if let (Some(n), Expr::Binary { op: BinaryOp::Add, lhs: a, .. }) = (lhs_name(lhs), rhs.unparen()) {
                hit |= lhs_name(a) == Some(n);
            }
        }
    });
    hit
}

struct Trigger {
    span: (u32, u32),
    state: BTreeSet<String>,
    constants: Vec<String>,
    counter: bool,
}

/// Outermost if-chains with a rare equality, in source order.
fn find_triggers(s: &Stmt, out: &mut Vec<Trigger>) {
    if let StmtKind::If { .. } = &s.kind {
        let mut constants = Vec::new();
        chain_constants(s, &mut constants);
        if !constants.is_empty() {
            let mut state = BTreeSet::new();
            assigned(s, &mut state);
            out.push(Trigger {
                span: (s.span.first, s.span.last),
                state,
                constants,
                counter: is_counter(s),
            });
            return;
        }
    }
    match &s.kind {
        StmtKind::Block { stmts, .. } => stmts.iter().for_each(|s| find_triggers(s, out)),
        StmtKind::If {
            then_stmt, else_stmt, ..
        } => {
            find_triggers(then_stmt, out);
            if let Some(e) = else_stmt {
                find_triggers(e, out);
            }
        }
        StmtKind::Case { items, .. } => items.iter().for_each(|i| find_triggers(&i.body, out)),
        _ => {}
    }
}

fn negated(cond: &Expr) -> bool {
    match cond.unparen() {
        Expr::Binary { op, .. } => matches!(op, BinaryOp::Ne | BinaryOp::CaseNe),
        Expr::Unary { op, .. } => *op == UnaryOp::LogicalNot,
        _ => false,
    }
}

fn inverts(e: &Expr) -> bool {
    match e {
        Expr::Unary { op, operand, .. } => *op == UnaryOp::BitNot || inverts(operand),
        Expr::Binary { op, lhs, rhs } => {
            matches!(op, BinaryOp::BitXor | BinaryOp::BitXnor) || inverts(lhs) || inverts(rhs)
        }
        Expr::Paren { inner, .. } => inverts(inner),
        Expr::Ternary {
            then_expr, else_expr, ..
        } => inverts(then_expr) || inverts(else_expr),
        _ => false,
    }
}

#[derive(Default)]
struct Payload {
    lines: BTreeSet<u32>,
    negated: bool,
    inverts: bool,
}

fn assign_lines(s: &Stmt, p: &mut Payload) {
    s.walk(&mut |s| {
        if let StmtKind::Assign { rhs, .. } = &s.kind {
            p.lines.extend(s.span.first..=s.span.last);
            p.inverts |= inverts(rhs);
        }
    });
}

/// Branches outside `skip` whose guard reads `state`.
fn find_payload(s: &Stmt, state: &BTreeSet<String>, skip: &[(u32, u32)], p: &mut Payload) {
    if skip.iter().any(|&(a, b)| a <= s.span.first && s.span.last <= b) {
        return;
    }
    match &s.kind {
        StmtKind::If {
            cond,
            then_stmt,
            else_stmt,
            ..
        } => {
            if reads(cond, state) {
                p.lines.insert(s.span.first);
                p.negated |= negated(cond);
                assign_lines(then_stmt, p);
            } else {
                find_payload(then_stmt, state, skip, p);
            }
            if let Some(e) = else_stmt {
                find_payload(e, state, skip, p);
            }
        }
        StmtKind::Block { stmts, .. } => stmts.iter().for_each(|s| find_payload(s, state, skip, p)),
        StmtKind::Case { items, .. } => items.iter().for_each(|i| find_payload(&i.body, state, skip, p)),
        _ => {}
    }
}

fn analyze_module(m: &Module, out: &mut Vec<Finding>) {
    let mut triggers = Vec::new();
    for it in &m.items {
        if let ItemKind::Always { sensitivity, body, .. } = &it.kind {
            if sensitivity.is_edge_triggered() {
                find_triggers(body, &mut triggers);
            }
        }
    }
    let spans: Vec<(u32, u32)> = triggers.iter().map(|t| t.span).collect();
    for t in triggers {
        let mut p = Payload::default();
        for it in &m.items {
            match &it.kind {
                ItemKind::Always { body, .. } => find_payload(body, &t.state, &spans, &mut p),
                ItemKind::Assign { assigns, .. } => {
                    for (_, rhs) in assigns {
                        if reads(rhs, &t.state) {
                            p.lines.extend(it.span.first..=it.span.last);
                            p.inverts |= inverts(rhs);
                        }
                    }
                }
                _ => {}
            }
        }
        let ty = if p.negated {
            TrojanType::Type3
        } else if p.inverts {
            TrojanType::Type1
        } else {
            TrojanType::Type2
        };
        out.push(Finding {
            trigger_lines: (t.span.0..=t.span.1).collect(),
            payload_lines: p.lines,
            state: t.state,
            constants: t.constants,
            counter: t.counter,
            ty,
        });
    }
}

pub fn analyze(tree: &SyntaxTree) -> Vec<Finding> {
    let mut out = Vec::new();
    for m in &tree.modules {
        analyze_module(m, &mut out);
    }
    out
}

pub fn entries(findings: &[Finding]) -> Vec<ReportEntry> {
    findings
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let state: Vec<&str> = f.state.iter().map(String::as_str).collect();
            ReportEntry {
                entry_id: format!("HT{}", i + 1),
                claimed_type: f.ty,
                trigger_lines: f.trigger_lines.clone(),
                payload_lines: f.payload_lines.clone(),
                summary: format!(
                    "{} compared against {} drives {}",
                    if f.counter { "counter" } else { "condition" },
                    f.constants.join(", "),
                    state.join(", ")
                ),
            }
        })
        .collect()
}

/// Signature sentences describing what the rules found.
pub fn signatures(findings: &[Finding]) -> Vec<(crate::signatures::SigKind, String)> {
    use crate::signatures::SigKind;
    let mut out = BTreeMap::new();
    for f in findings {
        let trig = if f.counter {
            "counter register advanced only while a rare wide constant matches"
        } else {
            "rare wide constant equality comparison inside a clocked block"
        };
        out.insert((SigKind::Trigger, trig.to_string()), ());
        if !f.payload_lines.is_empty() {
            let pay = match f.ty {
                TrojanType::Type1 => "output data inverted or xored while a trigger register is set",
                TrojanType::Type2 => "output driven from internal storage selected by trigger state",
                TrojanType::Type3 => "register updates suppressed while trigger state holds a rare value",
            };
            out.insert((SigKind::Payload, pay.to_string()), ());
        }
    }
    out.into_keys().collect()
}
