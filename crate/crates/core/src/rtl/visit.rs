// SPDX-License-Identifier: Apache-2.0

//! Identifier traversal over modules.

use super::ast::*;

/// What an identifier occurrence denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentRole {
    /// Name in `module <name>`.
    ModuleName,
    /// Module type of an instantiation.
    InstanceType,
    /// Port name in the module header.
    HeaderPort,
    /// Parameter in the `#(...)` header list.
    HeaderParam,
    /// Port name in a `.port(expr)` connection or `#(.P(v))` override.
    ConnectionPort,
    /// Port name in a body `input`/`output` declaration.
    PortDecl,
    /// Declared net, reg, integer or memory.
    NetDecl,
    /// Body `parameter`/`localparam`.
    ParamDecl,
    /// Instance name.
    InstanceName,
    /// Use inside an expression.
    Reference,
}

/// Visit every identifier used inside an expression of the module.
pub fn for_each_reference<'a>(m: &'a Module, f: &mut impl FnMut(&'a Ident)) {
    for_each_ident(m, &mut |role, id| {
        if role == IdentRole::Reference {
            f(id)
        }
    });
}

fn range_idents<'a>(r: &'a Option<Range>, f: &mut impl FnMut(IdentRole, &'a Ident)) {
    if let Some(r) = r {
        r.msb.for_each_ident(&mut |i| f(IdentRole::Reference, i));
        r.lsb.for_each_ident(&mut |i| f(IdentRole::Reference, i));
    }
}

/// Visit every identifier of the module in source order with its role.
pub fn for_each_ident<'a>(m: &'a Module, f: &mut impl FnMut(IdentRole, &'a Ident)) {
    let refs = |e: &'a Expr, f: &mut dyn FnMut(IdentRole, &'a Ident)| {
        e.for_each_ident(&mut |i| f(IdentRole::Reference, i))
    };
    f(IdentRole::ModuleName, &m.name);
    for p in &m.params {
        f(IdentRole::HeaderParam, &p.name);
        refs(&p.value, f);
    }
    match &m.ports {
        PortList::None => {}
        PortList::Names(v) => v.iter().for_each(|i| f(IdentRole::HeaderPort, i)),
        PortList::Ansi(v) => {
            for p in v {
                if let Some(h) = &p.header {
                    range_idents(&h.range, f);
                }
                f(IdentRole::HeaderPort, &p.name);
            }
        }
    }
    for it in &m.items {
        match &it.kind {
            ItemKind::PortDecl { range, names, .. } => {
                range_idents(range, f);
                names.iter().for_each(|i| f(IdentRole::PortDecl, i));
            }
            ItemKind::Net { range, names, .. } => {
                range_idents(range, f);
                for n in names {
                    f(IdentRole::NetDecl, &n.name);
                    range_idents(&n.array, f);
                    if let Some(e) = &n.init {
                        refs(e, f);
                    }
                }
            }
            ItemKind::Param { range, assigns, .. } => {
                range_idents(range, f);
                for a in assigns {
                    f(IdentRole::ParamDecl, &a.name);
                    refs(&a.value, f);
                }
            }
            ItemKind::Assign { assigns, .. } => {
                for (l, r) in assigns {
                    refs(l, f);
                    refs(r, f);
                }
            }
            ItemKind::Always {
                sensitivity, body, ..
            } => {
                if let Sensitivity::List { events, .. } = sensitivity {
                    events.iter().for_each(|e| refs(&e.signal, f));
                }
                body.walk(&mut |s| {
                    for e in s.own_exprs() {
                        refs(e, f);
                    }
                });
            }
            ItemKind::Instance {
                module,
                params,
                name,
                connections,
            } => {
                f(IdentRole::InstanceType, module);
                for c in params {
                    conn_idents(c, f);
                }
                f(IdentRole::InstanceName, name);
                for c in connections {
                    conn_idents(c, f);
                }
            }
        }
    }
}

fn conn_idents<'a>(c: &'a Connection, f: &mut impl FnMut(IdentRole, &'a Ident)) {
    match c {
        Connection::Named { port, expr } => {
            f(IdentRole::ConnectionPort, port);
            if let Some(e) = expr {
                e.for_each_ident(&mut |i| f(IdentRole::Reference, i));
            }
        }
        Connection::Positional(e) => e.for_each_ident(&mut |i| f(IdentRole::Reference, i)),
    }
}

fn range_idents_mut(r: &mut Option<Range>, f: &mut impl FnMut(IdentRole, &mut Ident)) {
    if let Some(r) = r {
        r.msb.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
        r.lsb.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
    }
}

fn conn_idents_mut(c: &mut Connection, f: &mut impl FnMut(IdentRole, &mut Ident)) {
    match c {
        Connection::Named { port, expr } => {
            f(IdentRole::ConnectionPort, port);
            if let Some(e) = expr {
                e.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
            }
        }
        Connection::Positional(e) => e.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i)),
    }
}

/// Mutable counterpart of [`for_each_ident`].
pub fn for_each_ident_mut(m: &mut Module, f: &mut impl FnMut(IdentRole, &mut Ident)) {
    f(IdentRole::ModuleName, &mut m.name);
    for p in &mut m.params {
        f(IdentRole::HeaderParam, &mut p.name);
        p.value
            .for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
    }
    match &mut m.ports {
        PortList::None => {}
        PortList::Names(v) => v.iter_mut().for_each(|i| f(IdentRole::HeaderPort, i)),
        PortList::Ansi(v) => {
            for p in v {
                if let Some(h) = &mut p.header {
                    range_idents_mut(&mut h.range, f);
                }
                f(IdentRole::HeaderPort, &mut p.name);
            }
        }
    }
    for it in &mut m.items {
        match &mut it.kind {
            ItemKind::PortDecl { range, names, .. } => {
                range_idents_mut(range, f);
                names.iter_mut().for_each(|i| f(IdentRole::PortDecl, i));
            }
            ItemKind::Net { range, names, .. } => {
                range_idents_mut(range, f);
                for n in names {
                    f(IdentRole::NetDecl, &mut n.name);
                    range_idents_mut(&mut n.array, f);
                    if let Some(e) = &mut n.init {
                        e.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
                    }
                }
            }
            ItemKind::Param { range, assigns, .. } => {
                range_idents_mut(range, f);
                for a in assigns {
                    f(IdentRole::ParamDecl, &mut a.name);
                    a.value
                        .for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
                }
            }
            ItemKind::Assign { assigns, .. } => {
                for (l, r) in assigns {
                    l.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
                    r.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
                }
            }
            ItemKind::Always {
                sensitivity, body, ..
            } => {
                if let Sensitivity::List { events, .. } = sensitivity {
                    for e in events {
                        e.signal
                            .for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
                    }
                }
                body.walk_mut(&mut |s| {
                    for e in own_exprs_mut(s) {
                        e.for_each_ident_mut(&mut |i| f(IdentRole::Reference, i));
                    }
                });
            }
            ItemKind::Instance {
                module,
                params,
                name,
                connections,
            } => {
                f(IdentRole::InstanceType, module);
                for c in params {
                    conn_idents_mut(c, f);
                }
                f(IdentRole::InstanceName, name);
                for c in connections {
                    conn_idents_mut(c, f);
                }
            }
        }
    }
}

/// Expressions appearing directly in a statement, mutably.
pub fn own_exprs_mut(s: &mut Stmt) -> Vec<&mut Expr> {
    match &mut s.kind {
        StmtKind::If { cond, .. } => vec![cond],
        StmtKind::Case {
            selector, items, ..
        } => {
            let mut v = vec![selector];
            for it in items {
                v.extend(it.labels.iter_mut());
            }
            v
        }
        StmtKind::Assign { lhs, rhs, .. } => vec![lhs, rhs],
        _ => Vec::new(),
    }
}

/// Set every tag in the expression to `line`, dropping comments.
pub fn retag_expr(e: &mut Expr, line: u32) {
    match e {
        Expr::Ident(id) => id.tag = Tag::at(line),
        Expr::Number(n) => n.tag = Tag::at(line),
        Expr::Index { base, index } => {
            retag_expr(base, line);
            retag_expr(index, line);
        }
        Expr::Slice { base, msb, lsb } => {
            retag_expr(base, line);
            retag_expr(msb, line);
            retag_expr(lsb, line);
        }
        Expr::Unary { operand, tag, .. } => {
            *tag = Tag::at(line);
            retag_expr(operand, line);
        }
        Expr::Binary { lhs, rhs, .. } => {
            retag_expr(lhs, line);
            retag_expr(rhs, line);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
        } => {
            retag_expr(cond, line);
            retag_expr(then_expr, line);
            retag_expr(else_expr, line);
        }
        Expr::Concat { items, tag } => {
            *tag = Tag::at(line);
            items.iter_mut().for_each(|i| retag_expr(i, line));
        }
        Expr::Repeat { count, items, tag } => {
            *tag = Tag::at(line);
            retag_expr(count, line);
            items.iter_mut().for_each(|i| retag_expr(i, line));
        }
        Expr::Paren { inner, tag } => {
            *tag = Tag::at(line);
            retag_expr(inner, line);
        }
    }
}

/// First source line of an expression, if it has any tagged token.
pub fn expr_line(e: &Expr) -> Option<u32> {
    let mut v = Vec::new();
    e.tag_lines(&mut v);
    v.into_iter().find(|l| *l != 0)
}

/// Drop comments from every tag in the expression, keeping lines.
pub fn clear_comments(e: &mut Expr) {
    match e {
        Expr::Ident(id) => id.tag.comments.clear(),
        Expr::Number(n) => n.tag.comments.clear(),
        Expr::Index { base, index } => {
            clear_comments(base);
            clear_comments(index);
        }
        Expr::Slice { base, msb, lsb } => {
            clear_comments(base);
            clear_comments(msb);
            clear_comments(lsb);
        }
        Expr::Unary { operand, tag, .. } => {
            tag.comments.clear();
            clear_comments(operand);
        }
        Expr::Binary { lhs, rhs, .. } => {
            clear_comments(lhs);
            clear_comments(rhs);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
        } => {
            clear_comments(cond);
            clear_comments(then_expr);
            clear_comments(else_expr);
        }
        Expr::Concat { items, tag } => {
            tag.comments.clear();
            items.iter_mut().for_each(clear_comments);
        }
        Expr::Repeat { count, items, tag } => {
            tag.comments.clear();
            clear_comments(count);
            items.iter_mut().for_each(clear_comments);
        }
        Expr::Paren { inner, tag } => {
            tag.comments.clear();
            clear_comments(inner);
        }
    }
}
