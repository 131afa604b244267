// SPDX-License-Identifier: Apache-2.0

//! A small two-state, cycle-based simulator for single-module designs in
//! the parsed subset. It drives the `rtlsim` equivalence route when no
//! external event-driven simulator is installed.
//!
//! All values are unsigned and at most 128 bits wide. Registers start at
//! zero. Combinational logic is settled by iteration to a fixpoint.

mod stim;

use std::collections::HashMap;

use crate::rtl::*;

pub use stim::{parse_stim, run_stim, to_verilog_testbench, Stim, StimCmd};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("unsupported by the built-in simulator: {0}")]
    Unsupported(String),
    #[error("elaboration error: {0}")]
    Elab(String),
    #[error("combinational logic did not settle")]
    CombLoop,
    #[error("stimulus line {line}: {msg}")]
    Stim { line: usize, msg: String },
}

type Result<T> = std::result::Result<T, SimError>;

fn mask(w: u32) -> u128 {
    if w >= 128 {
        u128::MAX
    } else {
        (1u128 << w) - 1
    }
}

#[derive(Debug, Clone)]
struct Signal {
    width: u32,
    lsb: i64,
    /// (lowest index, depth) for memories.
    array: Option<(i64, usize)>,
    words: Vec<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Target {
    Whole(usize),
    Part { sig: usize, lo: u32, width: u32 },
    Word { sig: usize, index: usize },
}

struct SeqBlock {
    events: Vec<(Edge, usize)>,
    body: Stmt,
}

/// An elaborated module ready to simulate.
pub struct Simulator {
    signals: Vec<Signal>,
    names: HashMap<String, usize>,
    params: HashMap<String, (u128, u32)>,
    ports: Vec<(String, Direction, u32)>,
    assigns: Vec<(Expr, Expr)>,
    comb: Vec<Stmt>,
    seq: Vec<SeqBlock>,
    last: Vec<u128>,
}

impl Simulator {
    pub fn new(tree: &SyntaxTree, top: Option<&str>) -> Result<Self> {
        let m = match top {
            Some(name) => tree
                .modules
                .iter()
                .find(|m| m.name.name == name)
                .ok_or_else(|| SimError::Elab(format!("no module `{name}`")))?,
            None => match tree.modules.as_slice() {
                [m] => m,
                _ => return Err(SimError::Elab("top module must be named".into())),
            },
        };
        let mut sim = Simulator {
            signals: Vec::new(),
            names: HashMap::new(),
            params: HashMap::new(),
            ports: Vec::new(),
            assigns: Vec::new(),
            comb: Vec::new(),
            seq: Vec::new(),
            last: Vec::new(),
        };
        sim.elaborate(m)?;
        sim.last = sim.signals.iter().map(|s| s.words[0]).collect();
        Ok(sim)
    }

    fn add_param(&mut self, name: &str, range: &Option<Range>, value: &Expr) -> Result<()> {
        let w = match range {
            Some(r) => self.range_width(r)?.0,
            None => self.self_width(value)?,
        };
        let v = self.eval(value, w)?;
        self.params.insert(name.to_string(), (v & mask(w), w));
        Ok(())
    }

    fn const_eval(&self, e: &Expr) -> Result<i64> {
        let w = self.self_width(e)?;
        Ok(self.eval(e, w)? as i64)
    }

    /// (width, lsb) of a packed range; descending ranges only.
    fn range_width(&self, r: &Range) -> Result<(u32, i64)> {
        let msb = self.const_eval(&r.msb)?;
        let lsb = self.const_eval(&r.lsb)?;
        if msb < lsb {
            return Err(SimError::Unsupported("ascending packed range".into()));
        }
        let w = (msb - lsb + 1) as u32;
        if w > 128 {
            return Err(SimError::Unsupported("vector wider than 128 bits".into()));
        }
        Ok((w, lsb))
    }

    fn declare(&mut self, name: &str, range: &Option<Range>, kind: Option<NetKind>, array: &Option<Range>) -> Result<usize> {
        let (width, lsb) = match (range, kind) {
            (Some(r), _) => self.range_width(r)?,
            (None, Some(NetKind::Integer)) => (32, 0),
            (None, _) => (1, 0),
        };
        let array = match array {
            Some(r) => {
                let a = self.const_eval(&r.msb)?;
                let b = self.const_eval(&r.lsb)?;
                Some((a.min(b), (a - b).unsigned_abs() as usize + 1))
            }
            None => None,
        };
        if let Some(&i) = self.names.get(name) {
            // `output q; reg [3:0] q;` declares one signal twice.
            let s = &mut self.signals[i];
            if range.is_some() {
                s.width = width;
                s.lsb = lsb;
            }
            return Ok(i);
        }
        let depth = array.map(|a| a.1).unwrap_or(1);
        self.signals.push(Signal {
            width,
            lsb,
            array,
            words: vec![0; depth],
        });
        self.names.insert(name.to_string(), self.signals.len() - 1);
        Ok(self.signals.len() - 1)
    }

    fn elaborate(&mut self, m: &Module) -> Result<()> {
        for p in &m.params {
            self.add_param(&p.name.name, &None, &p.value)?;
        }
        let mut inits = Vec::new();
        if let PortList::Ansi(ps) = &m.ports {
            let mut cur: Option<&PortHeader> = None;
            for p in ps {
                if let Some(h) = &p.header {
                    cur = Some(h);
                }
                let h = cur.expect("first port has a header");
                if h.signed {
                    return Err(SimError::Unsupported("signed port".into()));
                }
                self.declare(&p.name.name, &h.range, h.kind, &None)?;
            }
        }
        for it in &m.items {
            match &it.kind {
                ItemKind::Param { range, assigns, .. } => {
                    for a in assigns {
                        self.add_param(&a.name.name, range, &a.value)?;
                    }
                }
                ItemKind::PortDecl {
                    range, names, signed, kind, ..
                } => {
                    if *signed {
                        return Err(SimError::Unsupported("signed port".into()));
                    }
                    for n in names {
                        self.declare(&n.name, range, *kind, &None)?;
                    }
                }
                ItemKind::Net {
                    kind,
                    signed,
                    range,
                    names,
                    ..
                } => {
                    if *signed {
                        return Err(SimError::Unsupported("signed net".into()));
                    }
                    for d in names {
                        self.declare(&d.name.name, range, Some(*kind), &d.array)?;
                        if let Some(e) = &d.init {
                            let lhs = Expr::Ident(d.name.clone());
                            match kind {
                                NetKind::Wire => self.assigns.push((lhs, e.clone())),
                                _ => inits.push((lhs, e.clone())),
                            }
                        }
                    }
                }
                ItemKind::Assign { assigns, .. } => self.assigns.extend(assigns.iter().cloned()),
                ItemKind::Always {
                    sensitivity, body, ..
                } => match sensitivity {
                    Sensitivity::List { events, .. } if sensitivity.is_edge_triggered() => {
                        let mut ev = Vec::new();
                        for e in events {
                            let (Some(edge), Some(id)) = (e.edge, e.signal.as_ident()) else {
                                return Err(SimError::Unsupported("mixed edge and level sensitivity".into()));
                            };
                            let sig = *self
                                .names
                                .get(&id.name)
                                .ok_or_else(|| SimError::Elab(format!("unknown signal `{}`", id.name)))?;
                            ev.push((edge, sig));
                        }
                        self.seq.push(SeqBlock {
                            events: ev,
                            body: body.clone(),
                        });
                    }
                    _ => self.comb.push(body.clone()),
                },
                ItemKind::Instance { .. } => {
                    return Err(SimError::Unsupported("module instances".into()));
                }
            }
        }
        self.ports = m
            .port_infos()
            .into_iter()
            .map(|p| {
                let w = self.names.get(&p.name).map(|i| self.signals[*i].width).unwrap_or(1);
                (p.name, p.direction, w)
            })
            .collect();
        for (l, r) in inits {
            let t = self.target(&l)?;
            let v = self.eval_for(&l, &r)?;
            self.write(t, v);
        }
        Ok(())
    }

    pub fn ports(&self) -> &[(String, Direction, u32)] {
        &self.ports
    }

    pub fn width_of(&self, name: &str) -> Option<u32> {
        self.names.get(name).map(|i| self.signals[*i].width)
    }

    pub fn get(&self, name: &str) -> Option<u128> {
        self.names.get(name).map(|i| self.signals[*i].words[0])
    }

    /// Drive an input and propagate all consequences.
    pub fn set(&mut self, name: &str, value: u128) -> Result<()> {
        let i = *self
            .names
            .get(name)
            .ok_or_else(|| SimError::Elab(format!("unknown signal `{name}`")))?;
        let w = self.signals[i].width;
        self.signals[i].words[0] = value & mask(w);
        self.propagate()
    }

    /// Settle combinational logic, then run edge-triggered blocks until no
    /// further edges occur.
    pub fn propagate(&mut self) -> Result<()> {
        for _ in 0..1000 {
            self.settle()?;
            let mut fired = Vec::new();
            for (bi, b) in self.seq.iter().enumerate() {
                let hit = b.events.iter().any(|(edge, sig)| {
                    let (old, new) = (self.last[*sig] & 1, self.signals[*sig].words[0] & 1);
                    match edge {
                        Edge::Posedge => old == 0 && new == 1,
                        Edge::Negedge => old == 1 && new == 0,
                    }
                });
                if hit {
                    fired.push(bi);
                }
            }
            self.last = self.signals.iter().map(|s| s.words[0]).collect();
            if fired.is_empty() {
                return Ok(());
            }
            let mut nba = Vec::new();
            for bi in fired {
                let body = self.seq[bi].body.clone();
                self.exec(&body, &mut nba)?;
            }
            for (t, v) in nba {
                self.write(t, v);
            }
        }
        Err(SimError::CombLoop)
    }

    fn snapshot(&self) -> Vec<Vec<u128>> {
        self.signals.iter().map(|s| s.words.clone()).collect()
    }

    fn settle(&mut self) -> Result<()> {
        for _ in 0..10_000 {
            let before = self.snapshot();
            for i in 0..self.assigns.len() {
                let (l, r) = self.assigns[i].clone();
                let t = self.target(&l)?;
                let v = self.eval_for(&l, &r)?;
                self.write(t, v);
            }
            for i in 0..self.comb.len() {
                let body = self.comb[i].clone();
                let mut nba = Vec::new();
                self.exec(&body, &mut nba)?;
                for (t, v) in nba {
                    self.write(t, v);
                }
            }
            if self.snapshot() == before {
                return Ok(());
            }
        }
        Err(SimError::CombLoop)
    }

    fn exec(&mut self, s: &Stmt, nba: &mut Vec<(Target, u128)>) -> Result<()> {
        match &s.kind {
            StmtKind::Block { stmts, .. } => {
                for x in stmts {
                    self.exec(x, nba)?;
                }
            }
            StmtKind::If {
                cond,
                then_stmt,
                else_stmt,
                ..
            } => {
                if self.truth(cond)? {
                    self.exec(then_stmt, nba)?;
                } else if let Some(e) = else_stmt {
                    self.exec(e, nba)?;
                }
            }
            StmtKind::Case {
                selector, items, ..
            } => {
                let mut w = self.self_width(selector)?;
                for l in items.iter().flat_map(|i| i.labels.iter()) {
                    w = w.max(self.self_width(l)?);
                }
                let sel = self.eval(selector, w)?;
                let mut chosen = None;
                'outer: for it in items {
                    for l in &it.labels {
                        if self.eval(l, w)? == sel {
                            chosen = Some(&it.body);
                            break 'outer;
                        }
                    }
                }
                if chosen.is_none() {
                    chosen = items.iter().find(|i| i.is_default()).map(|i| &i.body);
                }
                if let Some(b) = chosen {
                    self.exec(b, nba)?;
                }
            }
            StmtKind::Assign { op, lhs, rhs } => {
                let v = self.eval_for(lhs, rhs)?;
                match op {
                    AssignOp::Blocking => {
                        for (t, part) in self.split(lhs, v)? {
                            self.write(t, part);
                        }
                    }
                    AssignOp::NonBlocking => nba.extend(self.split(lhs, v)?),
                }
            }
            StmtKind::Null { .. } => {}
        }
        Ok(())
    }

    /// Evaluate `rhs` in the context of assignment to `lhs`, truncated to
    /// the target width.
    fn eval_for(&self, lhs: &Expr, rhs: &Expr) -> Result<u128> {
        let lw = self.self_width(lhs)?;
        let w = lw.max(self.self_width(rhs)?);
        Ok(self.eval(rhs, w)? & mask(lw))
    }

    /// Break a value across the targets of a (possibly concatenated) lvalue.
    fn split(&self, lhs: &Expr, v: u128) -> Result<Vec<(Target, u128)>> {
        match lhs.unparen() {
            Expr::Concat { items, .. } => {
                let mut out = Vec::new();
                let mut shift = self.self_width(lhs)?;
                for it in items {
                    let w = self.self_width(it)?;
                    shift -= w;
                    out.extend(self.split(it, (v >> shift) & mask(w))?);
                }
                Ok(out)
            }
            _ => Ok(vec![(self.target(lhs)?, v)]),
        }
    }

    fn sig(&self, e: &Expr) -> Result<usize> {
        match e.as_ident() {
            Some(id) => self
                .names
                .get(&id.name)
                .copied()
                .ok_or_else(|| SimError::Elab(format!("`{}` is not a signal", id.name))),
            None => Err(SimError::Unsupported("select on a non-identifier".into())),
        }
    }

    fn target(&self, lhs: &Expr) -> Result<Target> {
        match lhs.unparen() {
            Expr::Ident(_) => Ok(Target::Whole(self.sig(lhs)?)),
            Expr::Index { base, index } => {
                let sig = self.sig(base)?;
                let s = &self.signals[sig];
                let i = self.eval_self(index)? as i64;
                match s.array {
                    Some((lo, _)) => Ok(Target::Word {
                        sig,
                        index: (i - lo).max(-1).try_into().unwrap_or(usize::MAX),
                    }),
                    None => Ok(Target::Part {
                        sig,
                        lo: (i - s.lsb).clamp(-1, 255).try_into().unwrap_or(255),
                        width: 1,
                    }),
                }
            }
            Expr::Slice { base, msb, lsb } => {
                let sig = self.sig(base)?;
                let (m, l) = (self.const_eval(msb)?, self.const_eval(lsb)?);
                let s = &self.signals[sig];
                Ok(Target::Part {
                    sig,
                    lo: (l - s.lsb).max(0) as u32,
                    width: (m - l + 1).max(0) as u32,
                })
            }
            _ => Err(SimError::Unsupported("assignment target".into())),
        }
    }

    fn write(&mut self, t: Target, v: u128) {
        match t {
            Target::Whole(sig) => {
                let s = &mut self.signals[sig];
                s.words[0] = v & mask(s.width);
            }
            Target::Part { sig, lo, width } => {
                let s = &mut self.signals[sig];
                if lo >= s.width {
                    return;
                }
                let m = (mask(width) << lo) & mask(s.width);
                s.words[0] = (s.words[0] & !m) | ((v << lo) & m);
            }
            Target::Word { sig, index } => {
                let s = &mut self.signals[sig];
                let w = s.width;
                if let Some(word) = s.words.get_mut(index) {
                    *word = v & mask(w);
                }
            }
        }
    }

    fn truth(&self, e: &Expr) -> Result<bool> {
        Ok(self.eval_self(e)? != 0)
    }

    fn eval_self(&self, e: &Expr) -> Result<u128> {
        let w = self.self_width(e)?;
        self.eval(e, w)
    }

    fn self_width(&self, e: &Expr) -> Result<u32> {
        let w = match e {
            Expr::Ident(id) => {
                if let Some(i) = self.names.get(&id.name) {
                    self.signals[*i].width
                } else if let Some((_, w)) = self.params.get(&id.name) {
                    *w
                } else {
                    return Err(SimError::Elab(format!("unknown identifier `{}`", id.name)));
                }
            }
            Expr::Number(n) => {
                if n.signed {
                    return Err(SimError::Unsupported("signed literal".into()));
                }
                n.width()
            }
            Expr::Index { base, .. } => {
                let s = &self.signals[self.sig(base)?];
                if s.array.is_some() {
                    s.width
                } else {
                    1
                }
            }
            Expr::Slice { msb, lsb, .. } => (self.const_eval(msb)? - self.const_eval(lsb)?).unsigned_abs() as u32 + 1,
            Expr::Unary { op, operand, .. } => match op {
                UnaryOp::Plus | UnaryOp::Minus | UnaryOp::BitNot => self.self_width(operand)?,
                _ => 1,
            },
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::Lt
                | BinaryOp::Le
                | BinaryOp::Gt
                | BinaryOp::Ge
                | BinaryOp::Eq
                | BinaryOp::Ne
                | BinaryOp::CaseEq
                | BinaryOp::CaseNe
                | BinaryOp::LogicalAnd
                | BinaryOp::LogicalOr => 1,
                BinaryOp::Shl | BinaryOp::Shr | BinaryOp::AShl | BinaryOp::AShr => self.self_width(lhs)?,
                _ => self.self_width(lhs)?.max(self.self_width(rhs)?),
            },
            Expr::Ternary {
                then_expr, else_expr, ..
            } => self.self_width(then_expr)?.max(self.self_width(else_expr)?),
            Expr::Concat { items, .. } => {
                let mut w = 0;
                for i in items {
                    w += self.self_width(i)?;
                }
                w
            }
            Expr::Repeat { count, items, .. } => {
                let mut w = 0;
                for i in items {
                    w += self.self_width(i)?;
                }
                w * self.const_eval(count)? as u32
            }
            Expr::Paren { inner, .. } => self.self_width(inner)?,
        };
        if w > 128 {
            return Err(SimError::Unsupported("expression wider than 128 bits".into()));
        }
        Ok(w)
    }

    /// Evaluate `e` in a context of width `w` (at least its self width).
    fn eval(&self, e: &Expr, w: u32) -> Result<u128> {
        let m = mask(w);
        Ok(match e {
            Expr::Ident(id) => {
                if let Some(i) = self.names.get(&id.name) {
                    let s = &self.signals[*i];
                    if s.array.is_some() {
                        return Err(SimError::Unsupported(format!("memory `{}` used as a value", id.name)));
                    }
                    s.words[0]
                } else {
                    self.params
                        .get(&id.name)
                        .map(|p| p.0)
                        .ok_or_else(|| SimError::Elab(format!("unknown identifier `{}`", id.name)))?
                }
            }
            Expr::Number(n) => n
                .value()
                .ok_or_else(|| SimError::Unsupported("x/z literal".into()))?
                & m,
            Expr::Index { base, index } => {
                let s = &self.signals[self.sig(base)?];
                let i = self.eval_self(index)? as i64;
                match s.array {
                    Some((lo, depth)) => {
                        let k = i - lo;
                        if k < 0 || k as usize >= depth {
                            0
                        } else {
                            s.words[k as usize]
                        }
                    }
                    None => {
                        let k = i - s.lsb;
                        if k < 0 || k as u32 >= s.width {
                            0
                        } else {
                            (s.words[0] >> k) & 1
                        }
                    }
                }
            }
            Expr::Slice { base, msb, lsb } => {
                let s = &self.signals[self.sig(base)?];
                if s.array.is_some() {
                    return Err(SimError::Unsupported("slice of a memory".into()));
                }
                let (hi, lo) = (self.const_eval(msb)?, self.const_eval(lsb)?);
                let k = lo - s.lsb;
                if k < 0 || k >= 128 {
                    0
                } else {
                    (s.words[0] >> k) & mask((hi - lo + 1) as u32)
                }
            }
            Expr::Unary { op, operand, .. } => match op {
                UnaryOp::Plus => self.eval(operand, w)?,
                UnaryOp::Minus => 0u128.wrapping_sub(self.eval(operand, w)?) & m,
                UnaryOp::BitNot => !self.eval(operand, w)? & m,
                UnaryOp::LogicalNot => (self.eval_self(operand)? == 0) as u128,
                _ => {
                    let ow = self.self_width(operand)?;
                    let v = self.eval(operand, ow)?;
                    let ones = v.count_ones();
                    let all = v == mask(ow);
                    (match op {
                        UnaryOp::ReduceAnd => all,
                        UnaryOp::ReduceNand => !all,
                        UnaryOp::ReduceOr => v != 0,
                        UnaryOp::ReduceNor => v == 0,
                        UnaryOp::ReduceXor => ones % 2 == 1,
                        _ => ones % 2 == 0,
                    }) as u128
                }
            },
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::LogicalAnd => (self.truth(lhs)? && self.truth(rhs)?) as u128,
                BinaryOp::LogicalOr => (self.truth(lhs)? || self.truth(rhs)?) as u128,
                BinaryOp::Lt
                | BinaryOp::Le
                | BinaryOp::Gt
                | BinaryOp::Ge
                | BinaryOp::Eq
                | BinaryOp::Ne
                | BinaryOp::CaseEq
                | BinaryOp::CaseNe => {
                    let ow = self.self_width(lhs)?.max(self.self_width(rhs)?);
                    let (a, b) = (self.eval(lhs, ow)?, self.eval(rhs, ow)?);
                    (match op {
                        BinaryOp::Lt => a < b,
                        BinaryOp::Le => a <= b,
                        BinaryOp::Gt => a > b,
                        BinaryOp::Ge => a >= b,
                        BinaryOp::Eq | BinaryOp::CaseEq => a == b,
                        _ => a != b,
                    }) as u128
                }
                BinaryOp::Shl | BinaryOp::Shr | BinaryOp::AShl | BinaryOp::AShr => {
                    let a = self.eval(lhs, w)?;
                    let n = self.eval_self(rhs)?;
                    if n >= 128 {
                        0
                    } else if matches!(op, BinaryOp::Shl | BinaryOp::AShl) {
                        (a << n) & m
                    } else {
                        a >> n
                    }
                }
                _ => {
                    let (a, b) = (self.eval(lhs, w)?, self.eval(rhs, w)?);
                    (match op {
                        BinaryOp::Add => a.wrapping_add(b),
                        BinaryOp::Sub => a.wrapping_sub(b),
                        BinaryOp::Mul => a.wrapping_mul(b),
                        BinaryOp::Div => a.checked_div(b).unwrap_or(0),
                        BinaryOp::Mod => a.checked_rem(b).unwrap_or(0),
                        BinaryOp::BitAnd => a & b,
                        BinaryOp::BitOr => a | b,
                        BinaryOp::BitXor => a ^ b,
                        _ => !(a ^ b),
                    }) & m
                }
            },
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
            } => {
                if self.truth(cond)? {
                    self.eval(then_expr, w)?
                } else {
                    self.eval(else_expr, w)?
                }
            }
            Expr::Concat { items, .. } => self.concat(items)?,
            Expr::Repeat { count, items, .. } => {
                let n = self.const_eval(count)?;
                let mut width = 0;
                for i in items {
                    width += self.self_width(i)?;
                }
                let one = self.concat(items)?;
                let mut acc = 0u128;
                for _ in 0..n {
                    acc = if width >= 128 { one } else { (acc << width) | one };
                }
                acc
            }
            Expr::Paren { inner, .. } => self.eval(inner, w)?,
        })
    }

    fn concat(&self, items: &[Expr]) -> Result<u128> {
        let mut acc = 0u128;
        for i in items {
            let w = self.self_width(i)?;
            let v = self.eval(i, w)?;
            acc = if w >= 128 { v } else { (acc << w) | v };
        }
        Ok(acc)
    }
}

/// Evaluate a constant-free expression over named values, used by tests
/// to check rewrites bit-exactly.
pub fn eval_expr(e: &Expr, env: &[(&str, u32, u128)], width: u32) -> Result<u128> {
    let mut sim = Simulator {
        signals: Vec::new(),
        names: HashMap::new(),
        params: HashMap::new(),
        ports: Vec::new(),
        assigns: Vec::new(),
        comb: Vec::new(),
        seq: Vec::new(),
        last: Vec::new(),
    };
    for (name, w, v) in env {
        sim.signals.push(Signal {
            width: *w,
            lsb: 0,
            array: None,
            words: vec![*v & mask(*w)],
        });
        sim.names.insert(name.to_string(), sim.signals.len() - 1);
    }
    let w = width.max(sim.self_width(e)?);
    Ok(sim.eval(e, w)? & mask(width))
}
