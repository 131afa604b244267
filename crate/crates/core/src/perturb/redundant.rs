// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::names::NameGen;
use super::{reprint, Pass, PerturbConfig, PerturbError};
use crate::rtl::visit::{self, clear_comments, expr_line};
use crate::rtl::*;

/// Add write-only registers and equivalent rewrites of combinational
/// expressions to `round(density * always_blocks)` always blocks.
pub fn insert_redundant_logic(
    tree: &SyntaxTree,
    cfg: &PerturbConfig,
) -> Result<(SyntaxTree, LineMap), PerturbError> {
    let t = transform(tree, cfg, &BTreeSet::new())?;
    let (t, _, map) = reprint(&t)?;
    Ok((t, map))
}

/// Number of always blocks that receive a construct.
pub(crate) fn blocks_to_modify(total: usize, density: f64) -> usize {
    ((total as f64) * density).round().min(total as f64) as usize
}

pub(crate) fn transform(
    tree: &SyntaxTree,
    cfg: &PerturbConfig,
    avoid: &BTreeSet<String>,
) -> Result<SyntaxTree, PerturbError> {
    let mut out = tree.clone();
    let blocks: Vec<(usize, usize)> = out
        .modules
        .iter()
        .enumerate()
        .flat_map(|(mi, m)| {
            m.items
                .iter()
                .enumerate()
                .filter(|(_, it)| matches!(it.kind, ItemKind::Always { .. }))
                .map(move |(ii, _)| (mi, ii))
        })
        .collect();
    let n = blocks_to_modify(blocks.len(), cfg.redundant_density);
    if n == 0 {
        return Ok(out);
    }
    let mut rng = cfg.rng(Pass::Redundant);
    let mut chosen = blocks.clone();
    chosen.shuffle(&mut rng);
    chosen.truncate(n);
    chosen.sort();

    let mut taken: BTreeSet<String> = collect_identifiers(tree)
        .all_names()
        .into_iter()
        .map(String::from)
        .collect();
    taken.extend(avoid.iter().cloned());
    let mut gen = NameGen::new(cfg, taken);

    // Highest index first so earlier insertions do not shift later ones.
    for &(mi, ii) in chosen.iter().rev() {
        let use_register = rng.gen_bool(0.5);
        let module = &mut out.modules[mi];
        let rewrote = !use_register && rewrite_block(&mut module.items[ii], &mut rng);
        if rewrote {
            continue;
        }
        if let Some(decl) = add_register(module, ii, &mut rng, &mut gen)? {
            module.items.insert(ii, decl);
        } else {
            rewrite_block(&mut module.items[ii], &mut rng);
        }
    }
    Ok(out)
}

struct DeclShape {
    kind: NetKind,
    signed: bool,
    range: Option<Range>,
}

fn declared_shape(m: &Module, name: &str) -> Option<DeclShape> {
    if let PortList::Ansi(ports) = &m.ports {
        let mut cur: Option<&PortHeader> = None;
        for p in ports {
            if let Some(h) = &p.header {
                cur = Some(h);
            }
            if p.name.name == name {
                let h = cur?;
                return Some(DeclShape {
                    kind: NetKind::Reg,
                    signed: h.signed,
                    range: h.range.clone(),
                });
            }
        }
    }
    for it in &m.items {
        match &it.kind {
            ItemKind::PortDecl {
                signed,
                range,
                names,
                ..
            } if names.iter().any(|n| n.name == name) => {
                return Some(DeclShape {
                    kind: NetKind::Reg,
                    signed: *signed,
                    range: range.clone(),
                });
            }
            ItemKind::Net {
                kind,
                signed,
                range,
                names,
                ..
            } => {
                if let Some(d) = names.iter().find(|d| d.name.name == name) {
                    if d.array.is_some() {
                        return None;
                    }
                    return Some(DeclShape {
                        kind: if *kind == NetKind::Integer {
                            NetKind::Integer
                        } else {
                            NetKind::Reg
                        },
                        signed: *signed,
                        range: range.clone(),
                    });
                }
            }
            _ => {}
        }
    }
    None
}

/// Declare a fresh register shaped like a signal the block already uses and
/// assign it at the end of the block. Returns the declaration to insert.
fn add_register(
    m: &mut Module,
    ii: usize,
    rng: &mut impl Rng,
    gen: &mut NameGen,
) -> Result<Option<Item>, PerturbError> {
    let ItemKind::Always {
        sensitivity, body, ..
    } = &m.items[ii].kind
    else {
        return Ok(None);
    };
    let mut seen = Vec::new();
    body.walk(&mut |s| {
        for e in s.own_exprs() {
            e.for_each_ident(&mut |id| {
                if !seen.contains(&id.name) {
                    seen.push(id.name.clone());
                }
            });
        }
    });
    let candidates: Vec<(String, DeclShape)> = seen
        .into_iter()
        .filter_map(|n| declared_shape(m, &n).map(|d| (n, d)))
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    let (sig, shape) = &candidates[rng.gen_range(0..candidates.len())];
    let fresh = gen.fresh(rng, sig)?;
    let op = if sensitivity.is_edge_triggered() {
        AssignOp::NonBlocking
    } else {
        AssignOp::Blocking
    };
    let mut range = shape.range.clone();
    if let Some(r) = &mut range {
        visit::retag_expr(&mut r.msb, 0);
        visit::retag_expr(&mut r.lsb, 0);
    }
    let decl = Item::new(ItemKind::Net {
        tag: Tag::synthetic(),
        kind: shape.kind,
        signed: shape.signed,
        range,
        names: vec![DeclName {
            name: Ident::synthetic(fresh.clone()),
            array: None,
            init: None,
        }],
    });
    let stmt = Stmt::new(StmtKind::Assign {
        op,
        lhs: Expr::ident(fresh),
        rhs: Expr::ident(sig.clone()),
    });
    let ItemKind::Always { body, .. } = &mut m.items[ii].kind else {
        unreachable!()
    };
    match &mut body.kind {
        StmtKind::Block { stmts, .. } => stmts.push(stmt),
        _ => {
            let inner = std::mem::replace(body, Stmt::new(StmtKind::Null { tag: Tag::synthetic() }));
            *body = Stmt::new(StmtKind::Block {
                begin: Tag::synthetic(),
                stmts: vec![inner, stmt],
                end: Tag::synthetic(),
            });
        }
    }
    Ok(Some(decl))
}

fn is_catalog_op(op: BinaryOp) -> bool {
    matches!(
        op,
        BinaryOp::BitAnd | BinaryOp::BitOr | BinaryOp::BitXor | BinaryOp::LogicalAnd
    )
}

/// Apply `f` to each assignment right-hand side and `if` condition.
fn for_each_rewritable(body: &mut Stmt, f: &mut impl FnMut(&mut Expr, bool)) {
    body.walk_mut(&mut |s| match &mut s.kind {
        StmtKind::Assign { rhs, .. } => f(rhs, true),
        StmtKind::If { cond, .. } => f(cond, false),
        _ => {}
    });
}

fn preorder_mut(e: &mut Expr, f: &mut impl FnMut(&mut Expr) -> bool) {
    if f(e) {
        return;
    }
    match e {
        Expr::Ident(_) | Expr::Number(_) => {}
        Expr::Index { base, index } => {
            preorder_mut(base, f);
            preorder_mut(index, f);
        }
        Expr::Slice { base, msb, lsb } => {
            preorder_mut(base, f);
            preorder_mut(msb, f);
            preorder_mut(lsb, f);
        }
        Expr::Unary { operand, .. } => preorder_mut(operand, f),
        Expr::Binary { lhs, rhs, .. } => {
            preorder_mut(lhs, f);
            preorder_mut(rhs, f);
        }
        Expr::Ternary {
            cond,
            then_expr,
            else_expr,
        } => {
            preorder_mut(cond, f);
            preorder_mut(then_expr, f);
            preorder_mut(else_expr, f);
        }
        Expr::Concat { items, .. } => items.iter_mut().for_each(|i| preorder_mut(i, f)),
        Expr::Repeat { count, items, .. } => {
            preorder_mut(count, f);
            items.iter_mut().for_each(|i| preorder_mut(i, f));
        }
        Expr::Paren { inner, .. } => preorder_mut(inner, f),
    }
}

/// Rewrite one expression in the block with an equivalent form. Returns
/// false when the block has nothing to rewrite.
fn rewrite_block(item: &mut Item, rng: &mut impl Rng) -> bool {
    let ItemKind::Always { body, .. } = &mut item.kind else {
        return false;
    };
    let mut ops = 0usize;
    let mut roots = 0usize;
    for_each_rewritable(body, &mut |e, is_rhs| {
        if is_rhs {
            roots += 1;
        }
        preorder_mut(e, &mut |n| {
            if matches!(n, Expr::Binary { op, .. } if is_catalog_op(*op)) {
                ops += 1;
            }
            false
        });
    });
    if ops > 0 {
        let target = rng.gen_range(0..ops);
        let mut i = 0usize;
        let mut done = false;
        for_each_rewritable(body, &mut |e, _| {
            preorder_mut(e, &mut |n| {
                if done {
                    return true;
                }
                if matches!(n, Expr::Binary { op, .. } if is_catalog_op(*op)) {
                    if i == target {
                        *n = catalog_rewrite(n.clone());
                        done = true;
                        return true;
                    }
                    i += 1;
                }
                false
            });
        });
        return true;
    }
    if roots > 0 {
        let target = rng.gen_range(0..roots);
        let mut i = 0usize;
        for_each_rewritable(body, &mut |e, is_rhs| {
            if !is_rhs {
                return;
            }
            if i == target {
                *e = double_negation(e.clone());
            }
            i += 1;
        });
        return true;
    }
    false
}

fn atom(e: Expr, line: u32) -> Expr {
    if e.is_atom() {
        e
    } else {
        Expr::Paren {
            inner: Box::new(e),
            tag: Tag::at(line),
        }
    }
}

fn un(op: UnaryOp, e: Expr, line: u32) -> Expr {
    Expr::Unary {
        op,
        operand: Box::new(atom(e, line)),
        tag: Tag::at(line),
    }
}

fn par(e: Expr, line: u32) -> Expr {
    Expr::Paren {
        inner: Box::new(e),
        tag: Tag::at(line),
    }
}

fn copy(e: &Expr) -> Expr {
    let mut c = e.clone();
    clear_comments(&mut c);
    c
}

/// The fixed equivalence catalog.
fn catalog_rewrite(e: Expr) -> Expr {
    let line = expr_line(&e).unwrap_or(0);
    let Expr::Binary { op, lhs, rhs } = e else {
        return e;
    };
    let (a, b) = (*lhs, *rhs);
    match op {
        // a & b  ==  ~(~a | ~b)
        BinaryOp::BitAnd => un(
            UnaryOp::BitNot,
            par(
                Expr::binary(BinaryOp::BitOr, un(UnaryOp::BitNot, a, line), un(UnaryOp::BitNot, b, line)),
                line,
            ),
            line,
        ),
        // a | b  ==  ~(~a & ~b)
        BinaryOp::BitOr => un(
            UnaryOp::BitNot,
            par(
                Expr::binary(BinaryOp::BitAnd, un(UnaryOp::BitNot, a, line), un(UnaryOp::BitNot, b, line)),
                line,
            ),
            line,
        ),
        // a ^ b  ==  (a & ~b) | (~a & b)
        BinaryOp::BitXor => {
            let (a2, b2) = (copy(&a), copy(&b));
            par(
                Expr::binary(
                    BinaryOp::BitOr,
                    par(
                        Expr::binary(BinaryOp::BitAnd, atom(a, line), un(UnaryOp::BitNot, b, line)),
                        line,
                    ),
                    par(
                        Expr::binary(BinaryOp::BitAnd, un(UnaryOp::BitNot, a2, line), atom(b2, line)),
                        line,
                    ),
                ),
                line,
            )
        }
        // a && b  ==  !(!a || !b)
        BinaryOp::LogicalAnd => un(
            UnaryOp::LogicalNot,
            par(
                Expr::binary(
                    BinaryOp::LogicalOr,
                    un(UnaryOp::LogicalNot, a, line),
                    un(UnaryOp::LogicalNot, b, line),
                ),
                line,
            ),
            line,
        ),
        op => Expr::binary(op, a, b),
    }
}

/// x  ==  ~(~x)
fn double_negation(e: Expr) -> Expr {
    let line = expr_line(&e).unwrap_or(0);
    un(UnaryOp::BitNot, par(un(UnaryOp::BitNot, e, line), line), line)
}

#[cfg(test)]
pub(crate) fn rewrite_for_test(e: Expr) -> Expr {
    catalog_rewrite(e)
}
