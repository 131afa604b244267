// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{reprint, Pass, PerturbConfig, PerturbError};
use crate::rtl::visit::{self, clear_comments, for_each_reference};
use crate::rtl::*;

/// Re-encode state registers and rewrite control flow: if/else-if chains on
/// one selector become case statements, case statements have their arms
/// reordered or become if chains.
pub fn restructure_control(
    tree: &SyntaxTree,
    cfg: &PerturbConfig,
) -> Result<(SyntaxTree, LineMap), PerturbError> {
    let t = transform(tree, cfg);
    let (t, _, map) = reprint(&t)?;
    Ok((t, map))
}

pub(crate) fn transform(tree: &SyntaxTree, cfg: &PerturbConfig) -> SyntaxTree {
    let mut out = tree.clone();
    let mut rng = cfg.rng(Pass::Restructure);
    for m in &mut out.modules {
        reencode_states(m, &mut rng);
        for it in &mut m.items {
            if let ItemKind::Always { body, .. } = &mut it.kind {
                restructure_stmt(body, &mut rng);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// State re-encoding

#[derive(Debug, Clone, PartialEq, Eq)]
enum ConstRef {
    Literal(u128),
    Param(String),
}

struct Analysis<'a> {
    cands: BTreeMap<&'a str, (usize, u32)>,
    parent: Vec<usize>,
    bad: Vec<bool>,
    consts: Vec<(usize, ConstRef)>,
    params: &'a BTreeMap<String, u128>,
}

impl<'a> Analysis<'a> {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = i;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn cand(&self, e: &Expr) -> Option<usize> {
        match e.unparen() {
            Expr::Ident(id) => self.cands.get(id.name.as_str()).map(|c| c.0),
            _ => None,
        }
    }

    fn constant(&self, e: &Expr) -> Option<ConstRef> {
        match e.unparen() {
            Expr::Number(n) if !n.signed => n.value().map(ConstRef::Literal),
            Expr::Ident(id) if self.params.contains_key(&id.name) => Some(ConstRef::Param(id.name.clone())),
            _ => None,
        }
    }

    fn expr(&mut self, e: &Expr) {
        if let Expr::Binary { op, lhs, rhs } = e {
            if op.is_equality() {
                for (a, b) in [(lhs, rhs), (rhs, lhs)] {
                    if let Some(c) = self.cand(a) {
                        if let Some(k) = self.constant(b) {
                            self.consts.push((c, k));
                        } else if let Some(d) = self.cand(b) {
                            self.union(c, d);
                        } else {
                            self.bad[c] = true;
                            self.expr(b);
                        }
                        return;
                    }
                }
            }
        }
        match e {
            Expr::Ident(id) => {
                if let Some(&(c, _)) = self.cands.get(id.name.as_str()) {
                    self.bad[c] = true;
                }
            }
            Expr::Number(_) => {}
            Expr::Index { base, index } => {
                self.expr(base);
                self.expr(index);
            }
            Expr::Slice { base, msb, lsb } => {
                self.expr(base);
                self.expr(msb);
                self.expr(lsb);
            }
            Expr::Unary { operand, .. } => self.expr(operand),
            Expr::Binary { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
            } => {
                self.expr(cond);
                self.expr(then_expr);
                self.expr(else_expr);
            }
            Expr::Concat { items, .. } => items.iter().for_each(|i| self.expr(i)),
            Expr::Repeat { count, items, .. } => {
                self.expr(count);
                items.iter().for_each(|i| self.expr(i));
            }
            Expr::Paren { inner, .. } => self.expr(inner),
        }
    }

    fn assign(&mut self, lhs: &Expr, rhs: &Expr) {
        if let Expr::Ident(id) = lhs {
            if let Some(&(c, _)) = self.cands.get(id.name.as_str()) {
                if let Some(k) = self.constant(rhs) {
                    self.consts.push((c, k));
                } else if let Some(d) = self.cand(rhs) {
                    self.union(c, d);
                } else {
                    self.bad[c] = true;
                    self.expr(rhs);
                }
                return;
            }
        }
        self.expr(lhs);
        self.expr(rhs);
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block { stmts, .. } => stmts.iter().for_each(|x| self.stmt(x)),
            StmtKind::If {
                cond,
                then_stmt,
                else_stmt,
                ..
            } => {
                self.expr(cond);
                self.stmt(then_stmt);
                if let Some(e) = else_stmt {
                    self.stmt(e);
                }
            }
            StmtKind::Case {
                selector, items, ..
            } => {
                let labels: Vec<&Expr> = items.iter().flat_map(|i| i.labels.iter()).collect();
                match self.cand(selector) {
                    Some(c) if labels.iter().all(|l| self.constant(l).is_some()) => {
                        for l in labels {
                            let k = self.constant(l).expect("checked");
                            self.consts.push((c, k));
                        }
                    }
                    _ => {
                        self.expr(selector);
                        labels.into_iter().for_each(|l| self.expr(l));
                    }
                }
                for it in items {
                    self.stmt(&it.body);
                }
            }
            StmtKind::Assign { lhs, rhs, .. } => self.assign(lhs, rhs),
            StmtKind::Null { .. } => {}
        }
    }

    fn range(&mut self, r: &Option<Range>) {
        if let Some(r) = r {
            self.expr(&r.msb);
            self.expr(&r.lsb);
        }
    }
}

fn const_width(r: &Option<Range>) -> Option<u32> {
    match r {
        None => Some(1),
        Some(r) => {
            let v = |e: &Expr| match e.unparen() {
                Expr::Number(n) => n.value(),
                _ => None,
            };
            let (a, b) = (v(&r.msb)?, v(&r.lsb)?);
            let w = a.abs_diff(b) + 1;
            (w <= 64).then_some(w as u32)
        }
    }
}

/// Body parameters with an unsigned literal value.
fn literal_params(m: &Module) -> BTreeMap<String, u128> {
    let mut out = BTreeMap::new();
    for it in &m.items {
        if let ItemKind::Param { assigns, range, .. } = &it.kind {
            if range.is_some() {
                continue;
            }
            for a in assigns {
                if let Expr::Number(n) = a.value.unparen() {
                    if !n.signed {
                        if let Some(v) = n.value() {
                            out.insert(a.name.name.clone(), v);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Find register groups used only as whole-value states (assigned
/// constants or each other, compared for equality, used as case selectors)
/// and apply a seeded permutation to their constant values.
fn reencode_states(m: &mut Module, rng: &mut impl Rng) {
    let ports: BTreeSet<String> = m.port_names().into_iter().collect();
    let params = literal_params(m);
    let mut cand_list: Vec<(String, u32)> = Vec::new();
    for it in &m.items {
        if let ItemKind::Net {
            kind: NetKind::Reg,
            signed: false,
            range,
            names,
            ..
        } = &it.kind
        {
            let Some(w) = const_width(range) else { continue };
            for d in names {
                if d.array.is_none() && d.init.is_none() && !ports.contains(&d.name.name) {
                    cand_list.push((d.name.name.clone(), w));
                }
            }
        }
    }
    if cand_list.is_empty() {
        return;
    }
    let n = cand_list.len();
    let mut a = Analysis {
        cands: cand_list
            .iter()
            .enumerate()
            .map(|(i, (name, w))| (name.as_str(), (i, *w)))
            .collect(),
        parent: (0..n).collect(),
        bad: vec![false; n],
        consts: Vec::new(),
        params: &params,
    };
    for it in &m.items {
        match &it.kind {
            ItemKind::PortDecl { range, .. } => a.range(range),
            ItemKind::Net { range, names, .. } => {
                a.range(range);
                for d in names {
                    a.range(&d.array);
                    if let Some(e) = &d.init {
                        a.expr(e);
                    }
                }
            }
            ItemKind::Param { range, assigns, .. } => {
                a.range(range);
                assigns.iter().for_each(|p| a.expr(&p.value));
            }
            ItemKind::Assign { assigns, .. } => {
                for (l, r) in assigns {
                    a.expr(l);
                    a.expr(r);
                }
            }
            ItemKind::Always {
                sensitivity, body, ..
            } => {
                if let Sensitivity::List { events, .. } = sensitivity {
                    for ev in events {
                        match (ev.edge, a.cand(&ev.signal)) {
                            (None, Some(_)) => {}
                            _ => a.expr(&ev.signal),
                        }
                    }
                }
                a.stmt(body);
            }
            ItemKind::Instance {
                params, connections, ..
            } => {
                for c in params.iter().chain(connections) {
                    match c {
                        Connection::Named { expr: Some(e), .. } | Connection::Positional(e) => a.expr(e),
                        _ => {}
                    }
                }
            }
        }
    }
    for p in &m.params {
        a.expr(&p.value);
    }
    if let PortList::Ansi(ps) = &m.ports {
        for p in ps {
            if let Some(h) = &p.header {
                a.range(&h.range);
            }
        }
    }

    // Every reference to a parameter must be a constant use of one group.
    let mut total_refs: BTreeMap<&str, usize> = BTreeMap::new();
    for_each_reference(m, &mut |id| {
        if params.contains_key(&id.name) {
            *total_refs.entry(id.name.as_str()).or_default() += 1;
        }
    });
    let consts = std::mem::take(&mut a.consts);
    let mut group_consts: BTreeMap<usize, Vec<ConstRef>> = BTreeMap::new();
    let mut param_group: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    let mut param_uses: BTreeMap<String, usize> = BTreeMap::new();
    for (c, k) in consts {
        let g = a.find(c);
        if let ConstRef::Param(p) = &k {
            param_group.entry(p.clone()).or_default().insert(g);
            *param_uses.entry(p.clone()).or_default() += 1;
        }
        group_consts.entry(g).or_default().push(k);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let g = a.find(i);
        groups.entry(g).or_default().push(i);
    }

    let mut perms: BTreeMap<String, BTreeMap<u128, u128>> = BTreeMap::new();
    let mut param_perm: BTreeMap<String, u128> = BTreeMap::new();
    for (g, members) in &groups {
        if members.iter().any(|i| a.bad[*i]) {
            continue;
        }
        let w = cand_list[members[0]].1;
        if members.iter().any(|i| cand_list[*i].1 != w) {
            continue;
        }
        let Some(ks) = group_consts.get(g) else { continue };
        let mut ok = true;
        let mut values = BTreeSet::new();
        for k in ks {
            let v = match k {
                ConstRef::Literal(v) => *v,
                ConstRef::Param(p) => {
                    let exclusive = param_group[p].len() == 1
                        && param_uses.get(p) == total_refs.get(p.as_str());
                    if !exclusive {
                        ok = false;
                    }
                    params[p]
                }
            };
            if v >> w != 0 {
                ok = false;
            }
            values.insert(v);
        }
        if !ok || values.len() < 2 {
            continue;
        }
        let sorted: Vec<u128> = values.into_iter().collect();
        let mut shuffled = sorted.clone();
        for _ in 0..8 {
            shuffled.shuffle(rng);
            if shuffled != sorted {
                break;
            }
        }
        if shuffled == sorted {
            shuffled.rotate_left(1);
        }
        let perm: BTreeMap<u128, u128> = sorted.iter().copied().zip(shuffled).collect();
        for k in ks {
            if let ConstRef::Param(p) = k {
                param_perm.insert(p.clone(), perm[&params[p]]);
            }
        }
        for i in members {
            perms.insert(cand_list[*i].0.clone(), perm.clone());
        }
    }
    if perms.is_empty() {
        return;
    }
    let widths: BTreeMap<String, u32> = cand_list.into_iter().collect();
    let r = Rewriter {
        perms: &perms,
        widths: &widths,
    };
    for it in &mut m.items {
        match &mut it.kind {
            ItemKind::Param { assigns, .. } => {
                for pa in assigns {
                    if let Some(v) = param_perm.get(&pa.name.name) {
                        if let Expr::Number(n) = unparen_mut(&mut pa.value) {
                            set_number(n, *v, 0);
                        }
                    }
                }
            }
            ItemKind::Always { body, .. } => r.stmt(body),
            ItemKind::Assign { assigns, .. } => {
                for (l, rhs) in assigns {
                    r.expr(l);
                    r.expr(rhs);
                }
            }
            ItemKind::Net { names, .. } => {
                for d in names {
                    if let Some(e) = &mut d.init {
                        r.expr(e);
                    }
                }
            }
            ItemKind::Instance {
                params, connections, ..
            } => {
                for c in params.iter_mut().chain(connections) {
                    match c {
                        Connection::Named { expr: Some(e), .. } | Connection::Positional(e) => r.expr(e),
                        _ => {}
                    }
                }
            }
            ItemKind::PortDecl { .. } => {}
        }
    }
}

fn unparen_mut(e: &mut Expr) -> &mut Expr {
    match e {
        Expr::Paren { inner, .. } => unparen_mut(inner),
        e => e,
    }
}

fn set_number(n: &mut Number, v: u128, width: u32) {
    if !n.set_value(v) {
        n.size = Some(width.max(128 - v.leading_zeros()));
        n.set_value(v);
    }
}

struct Rewriter<'a> {
    perms: &'a BTreeMap<String, BTreeMap<u128, u128>>,
    widths: &'a BTreeMap<String, u32>,
}

impl Rewriter<'_> {
    fn group(&self, e: &Expr) -> Option<(&BTreeMap<u128, u128>, u32)> {
        match e.unparen() {
            Expr::Ident(id) => self.perms.get(&id.name).map(|p| (p, self.widths[&id.name])),
            _ => None,
        }
    }

    fn literal(n: &mut Expr, perm: &BTreeMap<u128, u128>, w: u32) {
        if let Expr::Number(num) = unparen_mut(n) {
            if let Some(v) = num.value() {
                set_number(num, perm[&v], w);
            }
        }
    }

    fn expr(&self, e: &mut Expr) {
        if let Expr::Binary { op, lhs, rhs } = e {
            if op.is_equality() {
                if let Some((p, w)) = self.group(lhs) {
                    Self::literal(rhs, p, w);
                    return;
                }
                if let Some((p, w)) = self.group(rhs) {
                    Self::literal(lhs, p, w);
                    return;
                }
            }
        }
        match e {
            Expr::Ident(_) | Expr::Number(_) => {}
            Expr::Index { base, index } => {
                self.expr(base);
                self.expr(index);
            }
            Expr::Slice { base, msb, lsb } => {
                self.expr(base);
                self.expr(msb);
                self.expr(lsb);
            }
            Expr::Unary { operand, .. } => self.expr(operand),
            Expr::Binary { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
            } => {
                self.expr(cond);
                self.expr(then_expr);
                self.expr(else_expr);
            }
            Expr::Concat { items, .. } => items.iter_mut().for_each(|i| self.expr(i)),
            Expr::Repeat { count, items, .. } => {
                self.expr(count);
                items.iter_mut().for_each(|i| self.expr(i));
            }
            Expr::Paren { inner, .. } => self.expr(inner),
        }
    }

    fn stmt(&self, s: &mut Stmt) {
        match &mut s.kind {
            StmtKind::Block { stmts, .. } => stmts.iter_mut().for_each(|x| self.stmt(x)),
            StmtKind::If {
                cond,
                then_stmt,
                else_stmt,
                ..
            } => {
                self.expr(cond);
                self.stmt(then_stmt);
                if let Some(e) = else_stmt {
                    self.stmt(e);
                }
            }
            StmtKind::Case {
                selector, items, ..
            } => {
                if let Some((p, w)) = self.group(selector) {
                    for it in items.iter_mut() {
                        it.labels.iter_mut().for_each(|l| Self::literal(l, p, w));
                    }
                } else {
                    self.expr(selector);
                    for it in items.iter_mut() {
                        it.labels.iter_mut().for_each(|l| self.expr(l));
                    }
                }
                for it in items {
                    self.stmt(&mut it.body);
                }
            }
            StmtKind::Assign { lhs, rhs, .. } => {
                if let Expr::Ident(id) = lhs {
                    if let Some(p) = self.perms.get(&id.name) {
                        let w = self.widths[&id.name];
                        Self::literal(rhs, p, w);
                        return;
                    }
                }
                self.expr(lhs);
                self.expr(rhs);
            }
            StmtKind::Null { .. } => {}
        }
    }
}

// ---------------------------------------------------------------------------
// Control-flow rewrites

fn restructure_stmt(s: &mut Stmt, rng: &mut impl Rng) {
    if let Some(case) = if_chain_to_case(s) {
        *s = case;
        if let StmtKind::Case { items, .. } = &mut s.kind {
            for it in items {
                restructure_stmt(&mut it.body, rng);
            }
        }
        return;
    }
    match &mut s.kind {
        StmtKind::Block { stmts, .. } => stmts.iter_mut().for_each(|x| restructure_stmt(x, rng)),
        StmtKind::If {
            then_stmt,
            else_stmt,
            ..
        } => {
            restructure_stmt(then_stmt, rng);
            if let Some(e) = else_stmt {
                restructure_stmt(e, rng);
            }
        }
        StmtKind::Case { items, .. } => {
            for it in items.iter_mut() {
                restructure_stmt(&mut it.body, rng);
            }
            if case_labels_ok(s) {
                let arms = match &s.kind {
                    StmtKind::Case { items, .. } => items.iter().filter(|i| !i.is_default()).count(),
                    _ => 0,
                };
                let convert = arms < 2 || rng.gen_bool(0.5);
                if convert && case_convertible(s) {
                    *s = case_to_if_chain(std::mem::replace(s, Stmt::new(StmtKind::Null { tag: Tag::synthetic() })));
                } else if arms >= 2 {
                    reorder_arms(s, rng);
                }
            }
        }
        StmtKind::Assign { .. } | StmtKind::Null { .. } => {}
    }
}

fn has_comments(e: &Expr) -> bool {
    let mut c = e.clone();
    clear_comments(&mut c);
    c != *e
}

fn same_expr(a: &Expr, b: &Expr) -> bool {
    let (mut a, mut b) = (a.clone(), b.clone());
    clear_comments(&mut a);
    clear_comments(&mut b);
    a == b
}

/// Comments on the parentheses wrapping an expression.
fn wrapper_comments(e: &Expr) -> bool {
    match e {
        Expr::Paren { inner, tag } => !tag.comments.is_empty() || wrapper_comments(inner),
        _ => false,
    }
}

fn label_value(e: &Expr) -> Option<u128> {
    match e {
        Expr::Number(n) if !n.signed => n.value(),
        _ => None,
    }
}

/// Case with only unsigned x/z-free literal labels, all distinct.
fn case_labels_ok(s: &Stmt) -> bool {
    let StmtKind::Case { items, .. } = &s.kind else {
        return false;
    };
    let mut seen = BTreeSet::new();
    for l in items.iter().flat_map(|i| i.labels.iter()) {
        match label_value(l) {
            Some(v) if seen.insert(v) => {}
            _ => return false,
        }
    }
    items.iter().filter(|i| i.is_default()).count() <= 1 && items.iter().any(|i| !i.is_default())
}

fn case_convertible(s: &Stmt) -> bool {
    matches!(&s.kind, StmtKind::Case { end, .. } if end.comments.is_empty())
}

fn reorder_arms(s: &mut Stmt, rng: &mut impl Rng) {
    let StmtKind::Case { items, .. } = &mut s.kind else {
        return;
    };
    let (mut arms, default): (Vec<CaseItem>, Vec<CaseItem>) =
        std::mem::take(items).into_iter().partition(|i| !i.is_default());
    let before: Vec<Vec<Expr>> = arms.iter().map(|a| a.labels.clone()).collect();
    let unchanged = |arms: &[CaseItem]| arms.iter().map(|a| &a.labels).eq(before.iter());
    for _ in 0..8 {
        arms.shuffle(rng);
        if !unchanged(&arms) {
            break;
        }
    }
    if unchanged(&arms) {
        arms.rotate_left(1);
    }
    *items = arms;
    items.extend(default);
}

/// `sel == l0 || sel == l1 ...`, each selector copy placed on its label's line.
fn or_chain(sel: &Expr, labels: Vec<Expr>, keep_first: bool) -> Expr {
    let mut out: Option<Expr> = None;
    for l in labels {
        let mut s = sel.clone();
        if !(keep_first && out.is_none()) {
            visit::retag_expr(&mut s, visit::expr_line(&l).unwrap_or(0));
        }
        let s = if s.is_atom() { s } else { Expr::paren(s) };
        let cmp = Expr::binary(BinaryOp::Eq, s, l);
        out = Some(match out {
            None => cmp,
            Some(prev) => Expr::binary(BinaryOp::LogicalOr, prev, cmp),
        });
    }
    out.expect("case arm has labels")
}

fn case_to_if_chain(s: Stmt) -> Stmt {
    let StmtKind::Case {
        tag,
        selector,
        items,
        ..
    } = s.kind
    else {
        return s;
    };
    let (arms, mut default): (Vec<CaseItem>, Vec<CaseItem>) = items.into_iter().partition(|i| !i.is_default());
    let mut acc: Option<(Tag, Stmt)> = default
        .pop()
        .map(|d| (d.default_tag.unwrap_or_default(), d.body));
    for (i, mut arm) in arms.into_iter().enumerate().rev() {
        let line = arm.labels.first().and_then(visit::expr_line).unwrap_or(0);
        // Comments before a label move to the keyword that now starts its line.
        let mut label_comments = Vec::new();
        if let Some(Expr::Number(n)) = arm.labels.first_mut() {
            label_comments = std::mem::take(&mut n.tag.comments);
        }
        if i == 0 && !tag.is_synthetic() {
            // The first comparison sits on the `case` line.
            for l in arm.labels.iter_mut().filter(|l| !has_comments(l)) {
                visit::retag_expr(l, tag.line);
            }
        }
        let cond = or_chain(&selector, arm.labels, i == 0);
        let mut body = arm.body;
        if acc.is_some() && matches!(body.kind, StmtKind::If { .. }) {
            body = Stmt::new(StmtKind::Block {
                begin: Tag::synthetic(),
                stmts: vec![body],
                end: Tag::synthetic(),
            });
        }
        let (else_tag, else_stmt) = match acc.take() {
            Some((t, st)) => (Some(t), Some(Box::new(st))),
            None => (None, None),
        };
        let if_tag = if i == 0 {
            let mut t = tag.clone();
            t.comments.append(&mut label_comments);
            t
        } else {
            Tag::at(line)
        };
        let stmt = Stmt::new(StmtKind::If {
            tag: if_tag,
            cond,
            then_stmt: Box::new(body),
            else_tag,
            else_stmt,
        });
        acc = Some((
            Tag {
                line,
                comments: label_comments,
            },
            stmt,
        ));
    }
    acc.expect("at least one arm").1
}

/// Match `sel == C` or `C == sel` with an unsigned literal C.
fn eq_const(cond: &Expr) -> Option<(&Expr, &Number)> {
    let Expr::Binary { op, lhs, rhs } = cond.unparen() else {
        return None;
    };
    if !matches!(op, BinaryOp::Eq | BinaryOp::CaseEq) {
        return None;
    }
    for (s, c) in [(lhs, rhs), (rhs, lhs)] {
        if let Expr::Number(n) = c.as_ref() {
            if !n.signed && n.value().is_some() && !matches!(s.unparen(), Expr::Number(_)) {
                return Some((s.as_ref(), n));
            }
        }
    }
    None
}

/// An if/else-if chain comparing one selector against distinct literals.
fn if_chain_to_case(s: &Stmt) -> Option<Stmt> {
    let StmtKind::If { tag, cond, .. } = &s.kind else {
        return None;
    };
    let (sel, _) = eq_const(cond)?;
    if wrapper_comments(cond) {
        return None;
    }
    let mut items = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cur = s;
    loop {
        let StmtKind::If {
            cond,
            then_stmt,
            else_tag,
            else_stmt,
            ..
        } = &cur.kind
        else {
            unreachable!()
        };
        let (_, num) = eq_const(cond).expect("checked before descending");
        if !seen.insert(num.value()?) {
            return None;
        }
        items.push(CaseItem {
            labels: vec![Expr::Number(num.clone())],
            default_tag: None,
            body: (**then_stmt).clone(),
        });
        let (Some(et), Some(e)) = (else_tag, else_stmt) else {
            items.push(CaseItem {
                labels: Vec::new(),
                default_tag: Some(Tag::synthetic()),
                body: Stmt::new(StmtKind::Null { tag: Tag::synthetic() }),
            });
            break;
        };
        if let StmtKind::If {
            tag: inner_tag,
            cond: inner,
            ..
        } = &e.kind
        {
            let joins = et.comments.is_empty() && inner_tag.comments.is_empty() && !wrapper_comments(inner);
            if let (true, Some((s2, _))) = (joins, eq_const(inner)) {
                if same_expr(s2, sel) && !has_comments(s2) {
                    cur = e;
                    continue;
                }
            }
        }
        items.push(CaseItem {
            labels: Vec::new(),
            default_tag: Some(et.clone()),
            body: (**e).clone(),
        });
        break;
    }
    Some(Stmt::new(StmtKind::Case {
        tag: tag.clone(),
        selector: sel.clone(),
        items,
        end: Tag::synthetic(),
    }))
}
