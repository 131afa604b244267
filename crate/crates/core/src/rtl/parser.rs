// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the supported subset.

use std::collections::{BTreeSet, HashSet};

use super::ast::*;
use super::keywords;
use super::lexer::{tokenize, TokKind, Token};
use super::ParseError;

pub(crate) fn parse_text(src: &str) -> Result<SyntaxTree, ParseError> {
    let (toks, trailing) = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        carry: Vec::new(),
        last_line: 1,
    };
    let mut modules = Vec::new();
    loop {
        let t = p.peek();
        if t.kind == TokKind::Eof {
            break;
        }
        if t.is_ident("module") {
            modules.push(p.module()?);
        } else {
            return Err(p.unexpected(&["`module`"]));
        }
    }
    let mut tail = std::mem::take(&mut p.carry);
    tail.extend(p.toks[p.pos].comments.iter().cloned());
    tail.extend(trailing);
    let tree = SyntaxTree {
        modules,
        trailing: tail,
        source_lines: count_lines(src),
    };
    for m in &tree.modules {
        check_declarations(m)?;
    }
    Ok(tree)
}

/// Number of newline-delimited physical lines. A final line without a
/// trailing newline still counts; an empty text has zero lines.
pub fn count_lines(src: &str) -> u32 {
    if src.is_empty() {
        return 0;
    }
    let n = src.bytes().filter(|b| *b == b'\n').count() as u32;
    if src.ends_with('\n') {
        n
    } else {
        n + 1
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Comments from consumed but untagged tokens, waiting for the next tag.
    carry: Vec<Comment>,
    last_line: u32,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }


    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != TokKind::Eof {
            self.pos += 1;
            self.last_line = t.line;
        }
        self.carry.extend(t.comments.iter().cloned());
        t
    }

    /// Consume the next token and turn it into a tag, collecting any
    /// comments carried from untagged tokens before it.
    fn bump_tag(&mut self) -> (Token, Tag) {
        let t = self.bump();
        let tag = Tag {
            line: t.line,
            comments: std::mem::take(&mut self.carry),
        };
        (t, tag)
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        if let TokKind::Ident(w) = &t.kind {
            if keywords::is_unsupported(w) {
                return ParseError::Unsupported {
                    line: t.line,
                    construct: w.clone(),
                };
            }
        }
        if let TokKind::System(s) = &t.kind {
            return ParseError::Unsupported {
                line: t.line,
                construct: format!("system task or function {s}"),
            };
        }
        if t.is_punct("#") {
            return ParseError::Unsupported {
                line: t.line,
                construct: "delay control".into(),
            };
        }
        ParseError::Syntax {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            let shown = format!("`{p}`");
            Err(self.unexpected(&[shown.as_str()]))
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Tag> {
        if self.peek().is_ident(kw) {
            Ok(self.bump_tag().1)
        } else {
            let shown = format!("`{kw}`");
            Err(self.unexpected(&[shown.as_str()]))
        }
    }

    fn peek_kw(&self) -> Option<&str> {
        match &self.peek().kind {
            TokKind::Ident(w) if keywords::is_reserved(w) => Some(w.as_str()),
            _ => None,
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match &self.peek().kind {
            TokKind::Ident(w) if !keywords::is_reserved(w) => {
                let (t, tag) = self.bump_tag();
                let TokKind::Ident(name) = t.kind else {
                    unreachable!()
                };
                Ok(Ident { name, tag })
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn module(&mut self) -> PResult<Module> {
        let kw = self.expect_kw("module")?;
        let first = kw.line;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            if !self.peek().is_punct(")") {
                loop {
                    if self.peek().is_ident("parameter") {
                        self.bump();
                    }
                    if self.peek().is_punct("[") {
                        return Err(ParseError::Unsupported {
                            line: self.peek().line,
                            construct: "ranged header parameter".into(),
                        });
                    }
                    params.push(self.param_assign()?);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        let ports = if self.eat_punct("(") {
            if self.eat_punct(")") {
                PortList::Names(Vec::new())
            } else if direction_of(self.peek()).is_some() {
                let list = self.ansi_ports()?;
                self.expect_punct(")")?;
                PortList::Ansi(list)
            } else {
                let mut names = vec![self.ident()?];
                while self.eat_punct(",") {
                    names.push(self.ident()?);
                }
                self.expect_punct(")")?;
                PortList::Names(names)
            }
        } else {
            PortList::None
        };
        self.expect_punct(";")?;
        let ansi = matches!(ports, PortList::Ansi(_));
        let mut items = Vec::new();
        while !self.peek().is_ident("endmodule") {
            if self.peek().kind == TokKind::Eof {
                return Err(self.unexpected(&["`endmodule`"]));
            }
            items.push(self.item(ansi)?);
        }
        let end = self.expect_kw("endmodule")?;
        let span = LineSpan::new(first, end.line);
        let module = Module {
            kw,
            name,
            params,
            ports,
            items,
            end,
            span,
        };
        check_ports_unique(&module)?;
        Ok(module)
    }

    fn ansi_ports(&mut self) -> PResult<Vec<AnsiPort>> {
        let mut out = Vec::new();
        loop {
            let header = if let Some(direction) = direction_of(self.peek()) {
                let (_, tag) = self.bump_tag();
                let kind = self.net_kind_opt();
                if kind == Some(NetKind::Integer) {
                    return Err(ParseError::Unsupported {
                        line: tag.line,
                        construct: "integer port".into(),
                    });
                }
                let signed = self.signed_opt();
                let range = self.range_opt()?;
                Some(PortHeader {
                    direction,
                    kind,
                    signed,
                    range,
                    tag,
                })
            } else if out.is_empty() {
                return Err(self.unexpected(&["port direction"]));
            } else {
                None
            };
            let name = self.ident()?;
            out.push(AnsiPort { header, name });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(out)
    }

    fn net_kind_opt(&mut self) -> Option<NetKind> {
        let k = match &self.peek().kind {
            TokKind::Ident(w) if w == "wire" => NetKind::Wire,
            TokKind::Ident(w) if w == "reg" => NetKind::Reg,
            TokKind::Ident(w) if w == "integer" => NetKind::Integer,
            _ => return None,
        };
        self.bump();
        Some(k)
    }

    fn signed_opt(&mut self) -> bool {
        if self.peek().is_ident("signed") {
            self.bump();
            true
        } else {
            false
        }
    }

    fn range_opt(&mut self) -> PResult<Option<Range>> {
        if !self.peek().is_punct("[") {
            return Ok(None);
        }
        self.bump();
        let msb = self.expr()?;
        self.expect_punct(":")?;
        let lsb = self.expr()?;
        self.expect_punct("]")?;
        Ok(Some(Range { msb, lsb }))
    }

    fn param_assign(&mut self) -> PResult<ParamAssign> {
        let name = self.ident()?;
        self.expect_punct("=")?;
        let value = self.expr()?;
        Ok(ParamAssign { name, value })
    }

    fn item(&mut self, ansi: bool) -> PResult<Item> {
        let first = self.peek().line;
        let kind = match self.peek_kw() {
            Some("input") | Some("output") | Some("inout") => {
                if ansi {
                    return Err(ParseError::Syntax {
                        line: first,
                        col: self.peek().col,
                        expected: vec!["module item (ports already declared in header)".into()],
                    });
                }
                let direction = direction_of(self.peek()).expect("checked above");
                let (_, tag) = self.bump_tag();
                let kind = self.net_kind_opt();
                let signed = self.signed_opt();
                let range = self.range_opt()?;
                let mut names = vec![self.ident()?];
                while self.eat_punct(",") {
                    names.push(self.ident()?);
                }
                self.expect_punct(";")?;
                ItemKind::PortDecl {
                    tag,
                    direction,
                    kind,
                    signed,
                    range,
                    names,
                }
            }
            Some("wire") | Some("reg") | Some("integer") => {
                let (_, tag) = self.bump_tag();
                let kind = match self.toks[self.pos - 1].kind {
                    TokKind::Ident(ref w) if w == "wire" => NetKind::Wire,
                    TokKind::Ident(ref w) if w == "reg" => NetKind::Reg,
                    _ => NetKind::Integer,
                };
                let signed = self.signed_opt();
                let range = if kind == NetKind::Integer {
                    None
                } else {
                    self.range_opt()?
                };
                let mut names = Vec::new();
                loop {
                    let name = self.ident()?;
                    let array = self.range_opt()?;
                    let init = if self.eat_punct("=") {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    names.push(DeclName { name, array, init });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                ItemKind::Net {
                    tag,
                    kind,
                    signed,
                    range,
                    names,
                }
            }
            Some("parameter") | Some("localparam") => {
                let local = self.peek().is_ident("localparam");
                let (_, tag) = self.bump_tag();
                if self.peek().is_ident("integer") || self.peek().is_ident("signed") {
                    return Err(ParseError::Unsupported {
                        line: first,
                        construct: "typed parameter".into(),
                    });
                }
                let range = self.range_opt()?;
                let mut assigns = vec![self.param_assign()?];
                while self.eat_punct(",") {
                    assigns.push(self.param_assign()?);
                }
                self.expect_punct(";")?;
                ItemKind::Param {
                    tag,
                    local,
                    range,
                    assigns,
                }
            }
            Some("assign") => {
                let tag = self.expect_kw("assign")?;
                if self.peek().is_punct("#") || self.peek().is_punct("(") {
                    return Err(ParseError::Unsupported {
                        line: first,
                        construct: "assignment delay or drive strength".into(),
                    });
                }
                let mut assigns = Vec::new();
                loop {
                    let lhs = self.lvalue()?;
                    self.expect_punct("=")?;
                    let rhs = self.expr()?;
                    assigns.push((lhs, rhs));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                ItemKind::Assign { tag, assigns }
            }
            Some("always") => {
                let tag = self.expect_kw("always")?;
                if !self.peek().is_punct("@") {
                    return Err(ParseError::Unsupported {
                        line: first,
                        construct: "always without event control".into(),
                    });
                }
                self.bump();
                let sensitivity = self.sensitivity()?;
                let body = self.stmt()?;
                ItemKind::Always {
                    tag,
                    sensitivity,
                    body,
                }
            }
            Some(_) => return Err(self.unexpected(&["module item"])),
            None => match &self.peek().kind {
                TokKind::Ident(_) => self.instance()?,
                _ => return Err(self.unexpected(&["module item"])),
            },
        };
        Ok(Item {
            kind,
            span: LineSpan::new(first, self.last_line),
        })
    }

    fn instance(&mut self) -> PResult<ItemKind> {
        let module = self.ident()?;
        let mut params = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            params = self.connections()?;
            self.expect_punct(")")?;
        }
        let name = self.ident()?;
        if self.peek().is_punct("[") {
            return Err(ParseError::Unsupported {
                line: name.tag.line,
                construct: "instance array".into(),
            });
        }
        self.expect_punct("(")?;
        let connections = self.connections()?;
        self.expect_punct(")")?;
        self.expect_punct(";")?;
        Ok(ItemKind::Instance {
            module,
            params,
            name,
            connections,
        })
    }

    fn connections(&mut self) -> PResult<Vec<Connection>> {
        let mut out = Vec::new();
        if self.peek().is_punct(")") {
            return Ok(out);
        }
        loop {
            if self.eat_punct(".") {
                let port = self.ident()?;
                self.expect_punct("(")?;
                let expr = if self.peek().is_punct(")") {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(")")?;
                out.push(Connection::Named { port, expr });
            } else {
                out.push(Connection::Positional(self.expr()?));
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(out)
    }

    fn sensitivity(&mut self) -> PResult<Sensitivity> {
        if self.eat_punct("*") {
            return Ok(Sensitivity::Star);
        }
        self.expect_punct("(")?;
        if self.eat_punct("*") {
            self.expect_punct(")")?;
            return Ok(Sensitivity::ParenStar);
        }
        let mut events = Vec::new();
        let mut comma = None;
        loop {
            let edge = if self.peek().is_ident("posedge") {
                self.bump();
                Some(Edge::Posedge)
            } else if self.peek().is_ident("negedge") {
                self.bump();
                Some(Edge::Negedge)
            } else {
                None
            };
            let signal = self.primary()?;
            events.push(EventExpr { edge, signal });
            if self.peek().is_ident("or") {
                if comma == Some(true) {
                    return Err(self.unexpected(&["`,`"]));
                }
                comma = Some(false);
                self.bump();
            } else if self.peek().is_punct(",") {
                if comma == Some(false) {
                    return Err(self.unexpected(&["`or`"]));
                }
                comma = Some(true);
                self.bump();
            } else {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(Sensitivity::List {
            events,
            comma: comma.unwrap_or(false),
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let first = self.peek().line;
        let kind = match self.peek_kw() {
            Some("begin") => {
                let begin = self.expect_kw("begin")?;
                if self.peek().is_punct(":") {
                    return Err(ParseError::Unsupported {
                        line: first,
                        construct: "named block".into(),
                    });
                }
                let mut stmts = Vec::new();
                while !self.peek().is_ident("end") {
                    if self.peek().kind == TokKind::Eof {
                        return Err(self.unexpected(&["`end`"]));
                    }
                    stmts.push(self.stmt()?);
                }
                let end = self.expect_kw("end")?;
                StmtKind::Block { begin, stmts, end }
            }
            Some("if") => {
                let tag = self.expect_kw("if")?;
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then_stmt = Box::new(self.stmt()?);
                let (else_tag, else_stmt) = if self.peek().is_ident("else") {
                    let t = self.expect_kw("else")?;
                    (Some(t), Some(Box::new(self.stmt()?)))
                } else {
                    (None, None)
                };
                StmtKind::If {
                    tag,
                    cond,
                    then_stmt,
                    else_tag,
                    else_stmt,
                }
            }
            Some("case") => {
                let tag = self.expect_kw("case")?;
                self.expect_punct("(")?;
                let selector = self.expr()?;
                self.expect_punct(")")?;
                let mut items = Vec::new();
                while !self.peek().is_ident("endcase") {
                    if self.peek().kind == TokKind::Eof {
                        return Err(self.unexpected(&["`endcase`"]));
                    }
                    items.push(self.case_item()?);
                }
                let end = self.expect_kw("endcase")?;
                StmtKind::Case {
                    tag,
                    selector,
                    items,
                    end,
                }
            }
            Some(_) => return Err(self.unexpected(&["statement"])),
            None => {
                if self.peek().is_punct(";") {
                    let (_, tag) = self.bump_tag();
                    StmtKind::Null { tag }
                } else if self.peek().is_punct("@") {
                    return Err(ParseError::Unsupported {
                        line: first,
                        construct: "event control in statement".into(),
                    });
                } else {
                    let lhs = self.lvalue()?;
                    let op = if self.eat_punct("=") {
                        AssignOp::Blocking
                    } else if self.eat_punct("<=") {
                        AssignOp::NonBlocking
                    } else {
                        return Err(self.unexpected(&["`=`", "`<=`"]));
                    };
                    if self.peek().is_punct("#") || self.peek().is_punct("@") {
                        return Err(ParseError::Unsupported {
                            line: self.peek().line,
                            construct: "intra-assignment timing control".into(),
                        });
                    }
                    let rhs = self.expr()?;
                    self.expect_punct(";")?;
                    StmtKind::Assign { op, lhs, rhs }
                }
            }
        };
        Ok(Stmt {
            kind,
            span: LineSpan::new(first, self.last_line),
        })
    }

    fn case_item(&mut self) -> PResult<CaseItem> {
        if self.peek().is_ident("default") {
            let tag = self.expect_kw("default")?;
            self.eat_punct(":");
            let body = self.stmt()?;
            return Ok(CaseItem {
                labels: Vec::new(),
                default_tag: Some(tag),
                body,
            });
        }
        let mut labels = vec![self.expr()?];
        while self.eat_punct(",") {
            labels.push(self.expr()?);
        }
        self.expect_punct(":")?;
        let body = self.stmt()?;
        Ok(CaseItem {
            labels,
            default_tag: None,
            body,
        })
    }

    fn lvalue(&mut self) -> PResult<Expr> {
        if self.peek().is_punct("{") {
            let (_, tag) = self.bump_tag();
            let mut items = vec![self.lvalue()?];
            while self.eat_punct(",") {
                items.push(self.lvalue()?);
            }
            self.expect_punct("}")?;
            return Ok(Expr::Concat { items, tag });
        }
        if !matches!(&self.peek().kind, TokKind::Ident(w) if !keywords::is_reserved(w)) {
            return Err(self.unexpected(&["assignment target"]));
        }
        let id = self.ident()?;
        self.selects(Expr::Ident(id))
    }

    fn selects(&mut self, mut base: Expr) -> PResult<Expr> {
        while self.peek().is_punct("[") {
            self.bump();
            let first = self.expr()?;
            if self.peek().is_punct("+:") || self.peek().is_punct("-:") {
                return Err(ParseError::Unsupported {
                    line: self.peek().line,
                    construct: "indexed part-select".into(),
                });
            }
            if self.eat_punct(":") {
                let lsb = self.expr()?;
                self.expect_punct("]")?;
                base = Expr::Slice {
                    base: Box::new(base),
                    msb: Box::new(first),
                    lsb: Box::new(lsb),
                };
            } else {
                self.expect_punct("]")?;
                base = Expr::Index {
                    base: Box::new(base),
                    index: Box::new(first),
                };
            }
        }
        Ok(base)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.eat_punct("?") {
            let then_expr = self.expr()?;
            self.expect_punct(":")?;
            let else_expr = self.expr()?;
            return Ok(Expr::Ternary {
                cond: Box::new(cond),
                then_expr: Box::new(then_expr),
                else_expr: Box::new(else_expr),
            });
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let Some(op) = binary_op(self.peek()) else {
                break;
            };
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match &self.peek().kind {
            TokKind::Punct(p) => match *p {
                "+" => Some(UnaryOp::Plus),
                "-" => Some(UnaryOp::Minus),
                "!" => Some(UnaryOp::LogicalNot),
                "~" => Some(UnaryOp::BitNot),
                "&" => Some(UnaryOp::ReduceAnd),
                "~&" => Some(UnaryOp::ReduceNand),
                "|" => Some(UnaryOp::ReduceOr),
                "~|" => Some(UnaryOp::ReduceNor),
                "^" => Some(UnaryOp::ReduceXor),
                "~^" | "^~" => Some(UnaryOp::ReduceXnor),
                _ => None,
            },
            _ => None,
        };
        if let Some(op) = op {
            let (_, tag) = self.bump_tag();
            let operand = self.unary()?;
            return Ok(Expr::Unary {
                op,
                operand: Box::new(operand),
                tag,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().kind.clone() {
            TokKind::Number(text) => {
                let (t, tag) = self.bump_tag();
                let num = parse_number(&text, tag).ok_or(ParseError::Syntax {
                    line: t.line,
                    col: t.col,
                    expected: vec!["valid numeric literal".into()],
                })?;
                Ok(Expr::Number(num))
            }
            TokKind::Ident(w) if !keywords::is_reserved(&w) => {
                let id = self.ident()?;
                if self.peek().is_punct("(") {
                    return Err(ParseError::Unsupported {
                        line: id.tag.line,
                        construct: "function call".into(),
                    });
                }
                self.selects(Expr::Ident(id))
            }
            TokKind::Punct("(") => {
                let (_, tag) = self.bump_tag();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                Ok(Expr::Paren {
                    inner: Box::new(inner),
                    tag,
                })
            }
            TokKind::Punct("{") => {
                let (_, tag) = self.bump_tag();
                let first = self.expr()?;
                if self.peek().is_punct("{") {
                    self.bump();
                    let mut items = vec![self.expr()?];
                    while self.eat_punct(",") {
                        items.push(self.expr()?);
                    }
                    self.expect_punct("}")?;
                    self.expect_punct("}")?;
                    return Ok(Expr::Repeat {
                        count: Box::new(first),
                        items,
                        tag,
                    });
                }
                let mut items = vec![first];
                while self.eat_punct(",") {
                    items.push(self.expr()?);
                }
                self.expect_punct("}")?;
                Ok(Expr::Concat { items, tag })
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }
}

fn direction_of(t: &Token) -> Option<Direction> {
    match &t.kind {
        TokKind::Ident(w) if w == "input" => Some(Direction::Input),
        TokKind::Ident(w) if w == "output" => Some(Direction::Output),
        TokKind::Ident(w) if w == "inout" => Some(Direction::Inout),
        _ => None,
    }
}

fn binary_op(t: &Token) -> Option<BinaryOp> {
    let TokKind::Punct(p) = &t.kind else {
        return None;
    };
    Some(match *p {
        "*" => BinaryOp::Mul,
        "/" => BinaryOp::Div,
        "%" => BinaryOp::Mod,
        "+" => BinaryOp::Add,
        "-" => BinaryOp::Sub,
        "<<" => BinaryOp::Shl,
        ">>" => BinaryOp::Shr,
        "<<<" => BinaryOp::AShl,
        ">>>" => BinaryOp::AShr,
        "<" => BinaryOp::Lt,
        "<=" => BinaryOp::Le,
        ">" => BinaryOp::Gt,
        ">=" => BinaryOp::Ge,
        "==" => BinaryOp::Eq,
        "!=" => BinaryOp::Ne,
        "===" => BinaryOp::CaseEq,
        "!==" => BinaryOp::CaseNe,
        "&" => BinaryOp::BitAnd,
        "^" => BinaryOp::BitXor,
        "~^" | "^~" => BinaryOp::BitXnor,
        "|" => BinaryOp::BitOr,
        "&&" => BinaryOp::LogicalAnd,
        "||" => BinaryOp::LogicalOr,
        _ => return None,
    })
}

pub(crate) fn parse_number(text: &str, tag: Tag) -> Option<Number> {
    let Some(q) = text.find('\'') else {
        if text.starts_with('_') {
            return None;
        }
        return Some(Number {
            size: None,
            signed: false,
            base: None,
            digits: text.to_string(),
            tag,
        });
    };
    let size_txt: String = text[..q].chars().filter(|c| *c != '_').collect();
    let size = if size_txt.is_empty() {
        None
    } else {
        let s: u32 = size_txt.parse().ok()?;
        if s == 0 {
            return None;
        }
        Some(s)
    };
    let mut rest = text[q + 1..].chars().peekable();
    let signed = matches!(rest.peek(), Some('s') | Some('S'));
    if signed {
        rest.next();
    }
    let base = match rest.next()?.to_ascii_lowercase() {
        'b' => Base::Binary,
        'o' => Base::Octal,
        'd' => Base::Decimal,
        'h' => Base::Hex,
        _ => return None,
    };
    let digits: String = rest.collect();
    let radix = base.radix();
    let valid = digits.chars().all(|c| {
        c == '_' || c.is_digit(radix) || matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?')
    });
    if !valid || digits.starts_with('_') {
        return None;
    }
    Some(Number {
        size,
        signed,
        base: Some(base),
        digits,
        tag,
    })
}

fn check_ports_unique(m: &Module) -> Result<(), ParseError> {
    let mut seen = HashSet::new();
    let idents: Vec<&Ident> = match &m.ports {
        PortList::None => Vec::new(),
        PortList::Names(v) => v.iter().collect(),
        PortList::Ansi(v) => v.iter().map(|p| &p.name).collect(),
    };
    for id in idents {
        if !seen.insert(id.name.as_str()) {
            return Err(ParseError::Duplicate {
                line: id.tag.line,
                name: id.name.clone(),
            });
        }
    }
    Ok(())
}

/// Every referenced identifier must be declared somewhere in its module.
fn check_declarations(m: &Module) -> Result<(), ParseError> {
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    let header: BTreeSet<&str> = match &m.ports {
        PortList::Names(v) => v.iter().map(|i| i.name.as_str()).collect(),
        PortList::Ansi(v) => v.iter().map(|p| p.name.name.as_str()).collect(),
        PortList::None => BTreeSet::new(),
    };
    declared.extend(header.iter().copied());
    for p in &m.params {
        declared.insert(&p.name.name);
    }
    let mut net_names = HashSet::new();
    for it in &m.items {
        match &it.kind {
            ItemKind::PortDecl { names, .. } => {
                for n in names {
                    if !header.contains(n.name.as_str()) {
                        return Err(ParseError::Undeclared {
                            line: n.tag.line,
                            name: n.name.clone(),
                        });
                    }
                }
            }
            ItemKind::Net { names, .. } => {
                for n in names {
                    if !net_names.insert(n.name.name.as_str()) {
                        return Err(ParseError::Duplicate {
                            line: n.name.tag.line,
                            name: n.name.name.clone(),
                        });
                    }
                    declared.insert(&n.name.name);
                }
            }
            ItemKind::Param { assigns, .. } => {
                for a in assigns {
                    if !declared.insert(&a.name.name) {
                        return Err(ParseError::Duplicate {
                            line: a.name.tag.line,
                            name: a.name.name.clone(),
                        });
                    }
                }
            }
            ItemKind::Instance { name, .. } => {
                declared.insert(&name.name);
            }
            _ => {}
        }
    }
    if let PortList::Names(names) = &m.ports {
        for n in names {
            let has_dir = m.items.iter().any(|it| {
                matches!(&it.kind, ItemKind::PortDecl { names, .. } if names.iter().any(|d| d.name == n.name))
            });
            if !has_dir {
                return Err(ParseError::Undeclared {
                    line: n.tag.line,
                    name: n.name.clone(),
                });
            }
        }
    }
    let mut err = None;
    let mut check = |id: &Ident| {
        if err.is_none() && !declared.contains(id.name.as_str()) {
            err = Some(ParseError::Undeclared {
                line: id.tag.line,
                name: id.name.clone(),
            });
        }
    };
    super::visit::for_each_reference(m, &mut check);
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
