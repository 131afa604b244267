// SPDX-License-Identifier: Apache-2.0

//! Layout-preserving printer.
//!
//! Each printed line records the source line it came from. Tokens that were
//! on different source lines stay on different printed lines, so a source
//! line maps to the printed lines carrying its tokens. Source lines with no
//! tagged token (blank lines, a lone `);`) get an empty filler line so the
//! resulting map is total.

use std::collections::BTreeMap;

use super::ast::*;
use super::linemap::LineMap;

const INDENT: &str = "    ";

struct Line {
    text: String,
    origin: Option<u32>,
    depth: u32,
    /// Continuation of a block comment, printed as written.
    verbatim: bool,
}

#[derive(Default)]
struct Writer {
    lines: Vec<Line>,
    open: bool,
    /// Break requested before the next token, at this depth.
    pending: Option<u32>,
    /// Depth to use if the next tagged token starts a new source line.
    soft: Option<u32>,
    stmt_depth: u32,
    /// The open line holds only comments.
    comment_only: bool,
}

impl Writer {
    fn cur(&mut self) -> &mut Line {
        self.lines.last_mut().expect("open line")
    }

    fn close(&mut self) {
        self.open = false;
    }

    fn open_line(&mut self, depth: u32, origin: Option<u32>) {
        self.lines.push(Line {
            text: String::new(),
            origin,
            depth,
            verbatim: false,
        });
        self.open = true;
    }

    fn brk(&mut self, depth: u32) {
        self.pending = Some(depth);
        self.soft = None;
        self.stmt_depth = depth;
    }

    /// Next statement starts here; break only if its source line differs.
    fn soft_brk(&mut self, depth: u32) {
        self.soft = Some(depth);
    }

    fn cur_origin(&self) -> Option<u32> {
        if self.open {
            self.lines.last().and_then(|l| l.origin)
        } else {
            None
        }
    }

    fn push_text(&mut self, text: &str, space: bool) {
        let cur = self.cur();
        if space && !cur.text.is_empty() {
            cur.text.push(' ');
        }
        cur.text.push_str(text);
    }

    fn comments(&mut self, comments: &[Comment]) {
        for c in comments {
            let mut parts = c.text.split('\n');
            let first = parts.next().unwrap_or("");
            let same_line = self.open && self.cur_origin() == Some(c.line);
            if !same_line {
                let depth = match self.pending.take() {
                    Some(d) => d,
                    None if self.open => self.cur().depth,
                    None => self.stmt_depth,
                };
                self.soft = None;
                self.close();
                self.open_line(depth, Some(c.line));
                self.comment_only = true;
            }
            self.push_text(first, true);
            let mut origin = c.line;
            for rest in parts {
                origin += 1;
                let depth = self.cur().depth;
                self.open_line(depth, Some(origin));
                self.cur().verbatim = true;
                self.cur().text.push_str(rest);
            }
            if c.text.starts_with("//") {
                let depth = self.cur().depth;
                if self.pending.is_none() {
                    self.pending = Some(depth);
                }
            }
        }
    }

    /// Emit one token. `tag` is present for line-starting tokens.
    fn tok(&mut self, text: &str, tag: Option<&Tag>, space: bool) {
        let line = match tag {
            Some(t) => {
                self.comments(&t.comments);
                if t.is_synthetic() {
                    None
                } else {
                    Some(t.line)
                }
            }
            None => None,
        };
        if let Some(d) = self.pending.take() {
            self.soft = None;
            self.close();
            self.open_line(d, line);
        } else if !self.open {
            let d = self.soft.take().unwrap_or(self.stmt_depth + 1);
            self.open_line(d, line);
        } else if let Some(l) = line {
            match self.cur_origin() {
                Some(o) if o != l => {
                    let d = match self.soft.take() {
                        Some(d) => {
                            self.stmt_depth = d;
                            d
                        }
                        None if self.comment_only => self.cur().depth,
                        None => self.stmt_depth + 1,
                    };
                    self.close();
                    self.open_line(d, Some(l));
                }
                Some(_) => {}
                None => self.cur().origin = Some(l),
            }
        }
        if line.is_some() {
            if let Some(d) = self.soft.take() {
                self.stmt_depth = d;
            }
        }
        self.comment_only = false;
        self.push_text(text, space);
    }

    fn word(&mut self, text: &str, tag: &Tag) {
        self.tok(text, Some(tag), true);
    }

    fn punct(&mut self, text: &str, space: bool) {
        if self.pending.is_some() || !self.open {
            self.tok(text, None, space);
        } else {
            self.push_text(text, space);
        }
    }

    fn finish(mut self, trailing: &[Comment], source_lines: u32) -> (String, LineMap) {
        self.comments(trailing);
        let lines = fill_orphans(self.lines, source_lines);
        let mut text = String::new();
        let mut map = LineMap::default();
        for (i, l) in lines.iter().enumerate() {
            let n = i as u32 + 1;
            if !l.text.is_empty() && !l.verbatim {
                for _ in 0..l.depth {
                    text.push_str(INDENT);
                }
            }
            text.push_str(l.text.trim_end());
            text.push('\n');
            match l.origin {
                Some(o) => map.entries.entry(o).or_default().push(n),
                None => map.inserted.push(n),
            }
        }
        (text, map)
    }
}

/// Insert an empty line for every source line that has no printed line, right
/// after the last printed line whose origin precedes it.
fn fill_orphans(lines: Vec<Line>, source_lines: u32) -> Vec<Line> {
    let mut covered = vec![false; source_lines as usize + 1];
    for l in &lines {
        if let Some(o) = l.origin {
            if (o as usize) < covered.len() {
                covered[o as usize] = true;
            }
        }
    }
    let orphans: Vec<u32> = (1..=source_lines).filter(|l| !covered[*l as usize]).collect();
    if orphans.is_empty() {
        return lines;
    }
    // origin -> index of its last printed line
    let mut last: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, l) in lines.iter().enumerate() {
        if let Some(o) = l.origin {
            last.insert(o, i);
        }
    }
    // anchor index (None = file start) -> orphans to place after it
    let mut after: BTreeMap<Option<usize>, Vec<u32>> = BTreeMap::new();
    for o in orphans {
        let anchor = last.range(..o).next_back().map(|(_, i)| *i);
        after.entry(anchor).or_default().push(o);
    }
    let blank = |o: u32| Line {
        text: String::new(),
        origin: Some(o),
        depth: 0,
        verbatim: false,
    };
    let mut out = Vec::with_capacity(lines.len() + after.len());
    if let Some(v) = after.get(&None) {
        out.extend(v.iter().map(|o| blank(*o)));
    }
    for (i, l) in lines.into_iter().enumerate() {
        out.push(l);
        if let Some(v) = after.get(&Some(i)) {
            out.extend(v.iter().map(|o| blank(*o)));
        }
    }
    out
}

/// Print a tree. Unchanged parse trees print to a canonical form of their
/// source; printing is idempotent.
pub fn print(tree: &SyntaxTree) -> String {
    print_with_map(tree).0
}

/// Print a tree and return the map from the lines it was parsed from to
/// printed lines.
pub fn print_with_map(tree: &SyntaxTree) -> (String, LineMap) {
    let mut w = Writer::default();
    for m in &tree.modules {
        module(&mut w, m);
    }
    w.finish(&tree.trailing, tree.source_lines)
}

/// Print a single expression on one line.
pub fn expr_to_string(e: &Expr) -> String {
    let mut w = Writer::default();
    w.open_line(0, None);
    expr_flat(&mut w, e, false);
    w.lines.pop().map(|l| l.text).unwrap_or_default()
}

fn expr_flat(w: &mut Writer, e: &Expr, space: bool) {
    // Same as `expr` but ignores source lines.
    let mut e = e.clone();
    super::visit::retag_expr(&mut e, 0);
    expr(w, &e, space);
}

fn module(w: &mut Writer, m: &Module) {
    w.brk(0);
    w.word("module", &m.kw);
    w.word(&m.name.name, &m.name.tag);
    if !m.params.is_empty() {
        w.punct("#(parameter", true);
        for (i, p) in m.params.iter().enumerate() {
            if i > 0 {
                w.punct(",", false);
            }
            param_assign(w, p);
        }
        w.punct(")", false);
    }
    match &m.ports {
        PortList::None => {}
        PortList::Names(names) => {
            w.punct("(", false);
            for (i, n) in names.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                w.tok(&n.name, Some(&n.tag), i > 0);
            }
            w.punct(")", false);
        }
        PortList::Ansi(ports) => {
            w.punct("(", false);
            for (i, p) in ports.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                if let Some(h) = &p.header {
                    w.tok(h.direction.keyword(), Some(&h.tag), i > 0);
                    if let Some(k) = h.kind {
                        w.punct(k.keyword(), true);
                    }
                    if h.signed {
                        w.punct("signed", true);
                    }
                    if let Some(r) = &h.range {
                        range(w, r, true);
                    }
                    w.word(&p.name.name, &p.name.tag);
                } else {
                    w.tok(&p.name.name, Some(&p.name.tag), i > 0);
                }
            }
            w.punct(")", false);
        }
    }
    w.punct(";", false);
    for it in &m.items {
        item(w, it);
    }
    w.brk(0);
    w.word("endmodule", &m.end);
}

fn param_assign(w: &mut Writer, p: &ParamAssign) {
    w.word(&p.name.name, &p.name.tag);
    w.punct("=", true);
    expr(w, &p.value, true);
}

fn range(w: &mut Writer, r: &Range, space: bool) {
    w.punct("[", space);
    expr(w, &r.msb, false);
    w.punct(":", false);
    expr(w, &r.lsb, false);
    w.punct("]", false);
}

fn item(w: &mut Writer, it: &Item) {
    w.brk(1);
    match &it.kind {
        ItemKind::PortDecl {
            tag,
            direction,
            kind,
            signed,
            range: r,
            names,
        } => {
            w.word(direction.keyword(), tag);
            if let Some(k) = kind {
                w.punct(k.keyword(), true);
            }
            if *signed {
                w.punct("signed", true);
            }
            if let Some(r) = r {
                range(w, r, true);
            }
            for (i, n) in names.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                w.word(&n.name, &n.tag);
            }
            w.punct(";", false);
        }
        ItemKind::Net {
            tag,
            kind,
            signed,
            range: r,
            names,
        } => {
            w.word(kind.keyword(), tag);
            if *signed {
                w.punct("signed", true);
            }
            if let Some(r) = r {
                range(w, r, true);
            }
            for (i, n) in names.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                w.word(&n.name.name, &n.name.tag);
                if let Some(a) = &n.array {
                    range(w, a, true);
                }
                if let Some(init) = &n.init {
                    w.punct("=", true);
                    expr(w, init, true);
                }
            }
            w.punct(";", false);
        }
        ItemKind::Param {
            tag,
            local,
            range: r,
            assigns,
        } => {
            w.word(if *local { "localparam" } else { "parameter" }, tag);
            if let Some(r) = r {
                range(w, r, true);
            }
            for (i, a) in assigns.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                param_assign(w, a);
            }
            w.punct(";", false);
        }
        ItemKind::Assign { tag, assigns } => {
            w.word("assign", tag);
            for (i, (l, r)) in assigns.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                expr(w, l, true);
                w.punct("=", true);
                expr(w, r, true);
            }
            w.punct(";", false);
        }
        ItemKind::Always {
            tag,
            sensitivity,
            body,
        } => {
            w.word("always", tag);
            match sensitivity {
                Sensitivity::Star => w.punct("@*", true),
                Sensitivity::ParenStar => w.punct("@(*)", true),
                Sensitivity::List { events, comma } => {
                    w.punct("@(", true);
                    for (i, e) in events.iter().enumerate() {
                        if i > 0 {
                            if *comma {
                                w.punct(",", false);
                            } else {
                                w.punct("or", true);
                            }
                        }
                        let first = i == 0;
                        match e.edge {
                            Some(Edge::Posedge) => w.punct("posedge", !first),
                            Some(Edge::Negedge) => w.punct("negedge", !first),
                            None => {}
                        }
                        expr(w, &e.signal, !first || e.edge.is_some());
                    }
                    w.punct(")", false);
                }
            }
            sub_stmt(w, body, 1);
        }
        ItemKind::Instance {
            module,
            params,
            name,
            connections,
        } => {
            w.word(&module.name, &module.tag);
            if !params.is_empty() {
                w.punct("#(", true);
                conns(w, params);
                w.punct(")", false);
            }
            w.word(&name.name, &name.tag);
            w.punct("(", false);
            conns(w, connections);
            w.punct(")", false);
            w.punct(";", false);
        }
    }
}

fn conns(w: &mut Writer, cs: &[Connection]) {
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            w.punct(",", false);
        }
        match c {
            Connection::Named { port, expr: e } => {
                w.punct(".", i > 0);
                w.tok(&port.name, Some(&port.tag), false);
                w.punct("(", false);
                if let Some(e) = e {
                    expr(w, e, false);
                }
                w.punct(")", false);
            }
            Connection::Positional(e) => expr(w, e, i > 0),
        }
    }
}

/// Body of an if/else/always/case arm owned by a statement at `depth`.
fn sub_stmt(w: &mut Writer, s: &Stmt, depth: u32) {
    match &s.kind {
        StmtKind::Block { .. } => {
            w.soft_brk(depth);
            stmt_inner(w, s, depth);
        }
        _ => {
            w.soft_brk(depth + 1);
            stmt_inner(w, s, depth + 1);
        }
    }
}

fn stmt(w: &mut Writer, s: &Stmt, depth: u32) {
    w.brk(depth);
    stmt_inner(w, s, depth);
}

fn stmt_inner(w: &mut Writer, s: &Stmt, depth: u32) {
    match &s.kind {
        StmtKind::Block { begin, stmts, end } => {
            w.word("begin", begin);
            for st in stmts {
                stmt(w, st, depth + 1);
            }
            w.brk(depth);
            w.word("end", end);
        }
        StmtKind::If {
            tag,
            cond,
            then_stmt,
            else_tag,
            else_stmt,
        } => {
            w.word("if", tag);
            w.punct("(", true);
            expr(w, cond, false);
            w.punct(")", false);
            sub_stmt(w, then_stmt, depth);
            if let Some(e) = else_stmt {
                let synth = Tag::synthetic();
                let et = else_tag.as_ref().unwrap_or(&synth);
                if matches!(then_stmt.kind, StmtKind::Block { .. }) && !et.is_synthetic() {
                    // `end else` on one line survives; a new line gets the
                    // owner's depth.
                    w.soft_brk(depth);
                } else {
                    w.brk(depth);
                }
                w.word("else", et);
                if matches!(e.kind, StmtKind::If { .. }) {
                    w.soft_brk(depth);
                    stmt_inner(w, e, depth);
                } else {
                    sub_stmt(w, e, depth);
                }
            }
        }
        StmtKind::Case {
            tag,
            selector,
            items,
            end,
        } => {
            w.word("case", tag);
            w.punct("(", true);
            expr(w, selector, false);
            w.punct(")", false);
            for it in items {
                w.brk(depth + 1);
                if let Some(t) = &it.default_tag {
                    w.word("default", t);
                    w.punct(":", false);
                } else {
                    for (i, l) in it.labels.iter().enumerate() {
                        if i > 0 {
                            w.punct(",", false);
                        }
                        expr(w, l, i > 0);
                    }
                    w.punct(":", false);
                }
                sub_stmt(w, &it.body, depth + 1);
            }
            w.brk(depth);
            w.word("endcase", end);
        }
        StmtKind::Assign { op, lhs, rhs } => {
            expr(w, lhs, true);
            w.punct(op.symbol(), true);
            expr(w, rhs, true);
            w.punct(";", false);
        }
        StmtKind::Null { tag } => {
            w.tok(";", Some(tag), true);
        }
    }
}

fn number_text(n: &Number) -> String {
    let mut s = String::new();
    if let Some(sz) = n.size {
        s.push_str(&sz.to_string());
    }
    if let Some(b) = n.base {
        s.push('\'');
        if n.signed {
            s.push('s');
        }
        s.push(b.letter());
    }
    s.push_str(&n.digits);
    s
}

fn expr(w: &mut Writer, e: &Expr, space: bool) {
    match e {
        Expr::Ident(id) => w.tok(&id.name, Some(&id.tag), space),
        Expr::Number(n) => w.tok(&number_text(n), Some(&n.tag), space),
        Expr::Index { base, index } => {
            expr(w, base, space);
            w.punct("[", false);
            expr(w, index, false);
            w.punct("]", false);
        }
        Expr::Slice { base, msb, lsb } => {
            expr(w, base, space);
            w.punct("[", false);
            expr(w, msb, false);
            w.punct(":", false);
            expr(w, lsb, false);
            w.punct("]", false);
        }
        Expr::Unary { op, operand, tag } => {
            w.tok(op.symbol(), Some(tag), space);
            // `- -a` must not become `--a`.
            let glue = matches!(operand.as_ref(), Expr::Unary { .. });
            expr(w, operand, glue);
        }
        Expr::Binary { op, lhs, rhs } => {
            expr(w, lhs, space);
            w.punct(op.symbol(), true);
            expr(w, rhs, true);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
        } => {
            expr(w, cond, space);
            w.punct("?", true);
            expr(w, then_expr, true);
            w.punct(":", true);
            expr(w, else_expr, true);
        }
        Expr::Concat { items, tag } => {
            w.tok("{", Some(tag), space);
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                expr(w, it, i > 0);
            }
            w.punct("}", false);
        }
        Expr::Repeat { count, items, tag } => {
            w.tok("{", Some(tag), space);
            expr(w, count, false);
            w.punct("{", false);
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    w.punct(",", false);
                }
                expr(w, it, i > 0);
            }
            w.punct("}}", false);
        }
        Expr::Paren { inner, tag } => {
            w.tok("(", Some(tag), space);
            expr(w, inner, false);
            w.punct(")", false);
        }
    }
}
