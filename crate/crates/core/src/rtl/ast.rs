// SPDX-License-Identifier: Apache-2.0

//! Syntax tree for the supported Verilog subset.
//!
//! Every token that can begin a physical line carries a [`Tag`] holding its
//! source line and any comments that preceded it. Tags and spans are layout
//! information: they are ignored by `PartialEq`, so two trees compare equal
//! when they have the same structure, names, literals and comment text.

use std::fmt;

/// A source comment, kept verbatim (including `//` or `/* */`).
#[derive(Debug, Clone)]
pub struct Comment {
    pub text: String,
    pub line: u32,
}

impl PartialEq for Comment {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}
impl Eq for Comment {}

/// Location of a line-starting token. `line == 0` marks a synthesized token.
#[derive(Debug, Clone, Default)]
pub struct Tag {
    pub line: u32,
    pub comments: Vec<Comment>,
}

impl Tag {
    pub fn at(line: u32) -> Self {
        Tag {
            line,
            comments: Vec::new(),
        }
    }

    pub fn synthetic() -> Self {
        Tag::default()
    }

    pub fn is_synthetic(&self) -> bool {
        self.line == 0
    }
}

impl PartialEq for Tag {
    fn eq(&self, other: &Self) -> bool {
        self.comments == other.comments
    }
}
impl Eq for Tag {}

/// Inclusive range of physical lines covered by a node.
#[derive(Debug, Clone, Copy, Default)]
pub struct LineSpan {
    pub first: u32,
    pub last: u32,
}

impl LineSpan {
    pub fn new(first: u32, last: u32) -> Self {
        LineSpan { first, last }
    }

    pub fn contains(&self, line: u32) -> bool {
        self.first <= line && line <= self.last
    }

    pub fn contains_span(&self, other: &LineSpan) -> bool {
        self.first <= other.first && other.last <= self.last
    }
}

// Spans are layout; structural comparison ignores them.
impl PartialEq for LineSpan {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}
impl Eq for LineSpan {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub tag: Tag,
}

impl Ident {
    pub fn new(name: impl Into<String>, line: u32) -> Self {
        Ident {
            name: name.into(),
            tag: Tag::at(line),
        }
    }

    pub fn synthetic(name: impl Into<String>) -> Self {
        Ident {
            name: name.into(),
            tag: Tag::synthetic(),
        }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Binary,
    Octal,
    Decimal,
    Hex,
}

impl Base {
    pub fn letter(self) -> char {
        match self {
            Base::Binary => 'b',
            Base::Octal => 'o',
            Base::Decimal => 'd',
            Base::Hex => 'h',
        }
    }

    pub fn radix(self) -> u32 {
        match self {
            Base::Binary => 2,
            Base::Octal => 8,
            Base::Decimal => 10,
            Base::Hex => 16,
        }
    }
}

/// Numeric literal kept in its written form so printing is exact.
///
/// `base == None` is a plain unsized decimal such as `12`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Number {
    pub size: Option<u32>,
    pub signed: bool,
    pub base: Option<Base>,
    pub digits: String,
    pub tag: Tag,
}

impl Number {
    pub fn decimal(value: u128) -> Self {
        Number {
            size: None,
            signed: false,
            base: None,
            digits: value.to_string(),
            tag: Tag::synthetic(),
        }
    }

    pub fn sized(size: u32, base: Base, value: u128) -> Self {
        let digits = match base {
            Base::Binary => format!("{:0width$b}", value, width = size as usize),
            Base::Octal => format!("{:o}", value),
            Base::Decimal => value.to_string(),
            Base::Hex => format!("{:0width$X}", value, width = size.div_ceil(4) as usize),
        };
        Number {
            size: Some(size),
            signed: false,
            base: Some(base),
            digits,
            tag: Tag::synthetic(),
        }
    }

    /// True when any digit is `x`, `z` or `?`.
    pub fn has_unknown(&self) -> bool {
        self.digits
            .chars()
            .any(|c| matches!(c.to_ascii_lowercase(), 'x' | 'z' | '?'))
    }

    /// Numeric value, if free of x/z digits and representable in 128 bits.
    pub fn value(&self) -> Option<u128> {
        if self.has_unknown() {
            return None;
        }
        let radix = self.base.map(Base::radix).unwrap_or(10);
        let mut acc: u128 = 0;
        for c in self.digits.chars() {
            if c == '_' {
                continue;
            }
            let d = c.to_digit(radix)? as u128;
            acc = acc.checked_mul(radix as u128)?.checked_add(d)?;
        }
        match self.size {
            Some(s) if s < 128 => Some(acc & ((1u128 << s) - 1)),
            _ => Some(acc),
        }
    }

    /// Self-determined width: the declared size, or 32 for unsized literals.
    pub fn width(&self) -> u32 {
        self.size.unwrap_or(32)
    }

    /// Rewrite the value in place keeping size, base and digit count.
    /// Returns false when the value does not fit.
    pub fn set_value(&mut self, value: u128) -> bool {
        if let Some(s) = self.size {
            if s < 128 && value >> s != 0 {
                return false;
            }
        }
        let old_len = self.digits.chars().filter(|c| *c != '_').count();
        let text = match self.base {
            None | Some(Base::Decimal) => value.to_string(),
            Some(Base::Binary) => format!("{:0w$b}", value, w = old_len),
            Some(Base::Octal) => format!("{:0w$o}", value, w = old_len),
            Some(Base::Hex) => {
                let upper = self.digits.chars().any(|c| c.is_ascii_uppercase());
                if upper {
                    format!("{:0w$X}", value, w = old_len)
                } else {
                    format!("{:0w$x}", value, w = old_len)
                }
            }
        };
        self.digits = text;
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Plus,
    Minus,
    LogicalNot,
    BitNot,
    ReduceAnd,
    ReduceNand,
    ReduceOr,
    ReduceNor,
    ReduceXor,
    ReduceXnor,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Plus => "+",
            UnaryOp::Minus => "-",
            UnaryOp::LogicalNot => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::ReduceAnd => "&",
            UnaryOp::ReduceNand => "~&",
            UnaryOp::ReduceOr => "|",
            UnaryOp::ReduceNor => "~|",
            UnaryOp::ReduceXor => "^",
            UnaryOp::ReduceXnor => "~^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Mul,
    Div,
    Mod,
    Add,
    Sub,
    Shl,
    Shr,
    AShl,
    AShr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    CaseEq,
    CaseNe,
    BitAnd,
    BitXor,
    BitXnor,
    BitOr,
    LogicalAnd,
    LogicalOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::AShl => "<<<",
            BinaryOp::AShr => ">>>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::CaseEq => "===",
            BinaryOp::CaseNe => "!==",
            BinaryOp::BitAnd => "&",
            BinaryOp::BitXor => "^",
            BinaryOp::BitXnor => "~^",
            BinaryOp::BitOr => "|",
            BinaryOp::LogicalAnd => "&&",
            BinaryOp::LogicalOr => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 10,
            BinaryOp::Add | BinaryOp::Sub => 9,
            BinaryOp::Shl | BinaryOp::Shr | BinaryOp::AShl | BinaryOp::AShr => 8,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 7,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::CaseEq | BinaryOp::CaseNe => 6,
            BinaryOp::BitAnd => 5,
            BinaryOp::BitXor | BinaryOp::BitXnor => 4,
            BinaryOp::BitOr => 3,
            BinaryOp::LogicalAnd => 2,
            BinaryOp::LogicalOr => 1,
        }
    }

    pub fn is_equality(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::CaseEq | BinaryOp::CaseNe
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(Ident),
    Number(Number),
    /// `base[index]`, a bit-select or memory word select.
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    /// `base[msb:lsb]`
    Slice {
        base: Box<Expr>,
        msb: Box<Expr>,
        lsb: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
        tag: Tag,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Ternary {
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
    },
    Concat {
        items: Vec<Expr>,
        tag: Tag,
    },
    Repeat {
        count: Box<Expr>,
        items: Vec<Expr>,
        tag: Tag,
    },
    Paren {
        inner: Box<Expr>,
        tag: Tag,
    },
}

impl Expr {
    pub fn ident(name: impl Into<String>) -> Expr {
        Expr::Ident(Ident::synthetic(name))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary {
            op,
            operand: Box::new(operand),
            tag: Tag::synthetic(),
        }
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Primaries that never need parentheses as an operand.
    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Expr::Ident(_)
                | Expr::Number(_)
                | Expr::Index { .. }
                | Expr::Slice { .. }
                | Expr::Concat { .. }
                | Expr::Repeat { .. }
                | Expr::Paren { .. }
        )
    }

    pub fn paren(inner: Expr) -> Expr {
        Expr::Paren {
            inner: Box::new(inner),
            tag: Tag::synthetic(),
        }
    }

    /// Visit every identifier in evaluation order.
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a Ident)) {
        match self {
            Expr::Ident(id) => f(id),
            Expr::Number(_) => {}
            Expr::Index { base, index } => {
                base.for_each_ident(f);
                index.for_each_ident(f);
            }
            Expr::Slice { base, msb, lsb } => {
                base.for_each_ident(f);
                msb.for_each_ident(f);
                lsb.for_each_ident(f);
            }
            Expr::Unary { operand, .. } => operand.for_each_ident(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.for_each_ident(f);
                rhs.for_each_ident(f);
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
            } => {
                cond.for_each_ident(f);
                then_expr.for_each_ident(f);
                else_expr.for_each_ident(f);
            }
            Expr::Concat { items, .. } => items.iter().for_each(|e| e.for_each_ident(f)),
            Expr::Repeat { count, items, .. } => {
                count.for_each_ident(f);
                items.iter().for_each(|e| e.for_each_ident(f));
            }
            Expr::Paren { inner, .. } => inner.for_each_ident(f),
        }
    }

    pub fn for_each_ident_mut(&mut self, f: &mut impl FnMut(&mut Ident)) {
        match self {
            Expr::Ident(id) => f(id),
            Expr::Number(_) => {}
            Expr::Index { base, index } => {
                base.for_each_ident_mut(f);
                index.for_each_ident_mut(f);
            }
            Expr::Slice { base, msb, lsb } => {
                base.for_each_ident_mut(f);
                msb.for_each_ident_mut(f);
                lsb.for_each_ident_mut(f);
            }
            Expr::Unary { operand, .. } => operand.for_each_ident_mut(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.for_each_ident_mut(f);
                rhs.for_each_ident_mut(f);
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
            } => {
                cond.for_each_ident_mut(f);
                then_expr.for_each_ident_mut(f);
                else_expr.for_each_ident_mut(f);
            }
            Expr::Concat { items, .. } => items.iter_mut().for_each(|e| e.for_each_ident_mut(f)),
            Expr::Repeat { count, items, .. } => {
                count.for_each_ident_mut(f);
                items.iter_mut().for_each(|e| e.for_each_ident_mut(f));
            }
            Expr::Paren { inner, .. } => inner.for_each_ident_mut(f),
        }
    }

    /// Lines of every tagged token inside the expression.
    pub fn tag_lines(&self, out: &mut Vec<u32>) {
        match self {
            Expr::Ident(id) => out.push(id.tag.line),
            Expr::Number(n) => out.push(n.tag.line),
            Expr::Index { base, index } => {
                base.tag_lines(out);
                index.tag_lines(out);
            }
            Expr::Slice { base, msb, lsb } => {
                base.tag_lines(out);
                msb.tag_lines(out);
                lsb.tag_lines(out);
            }
            Expr::Unary { operand, tag, .. } => {
                out.push(tag.line);
                operand.tag_lines(out);
            }
            Expr::Binary { lhs, rhs, .. } => {
                lhs.tag_lines(out);
                rhs.tag_lines(out);
            }
            Expr::Ternary {
                cond,
                then_expr,
                else_expr,
            } => {
                cond.tag_lines(out);
                then_expr.tag_lines(out);
                else_expr.tag_lines(out);
            }
            Expr::Concat { items, tag } => {
                out.push(tag.line);
                items.iter().for_each(|e| e.tag_lines(out));
            }
            Expr::Repeat { count, items, tag } => {
                out.push(tag.line);
                count.tag_lines(out);
                items.iter().for_each(|e| e.tag_lines(out));
            }
            Expr::Paren { inner, tag } => {
                out.push(tag.line);
                inner.tag_lines(out);
            }
        }
    }

    /// The identifier this expression names when it is a plain identifier.
    pub fn as_ident(&self) -> Option<&Ident> {
        match self {
            Expr::Ident(id) => Some(id),
            Expr::Paren { inner, .. } => inner.as_ident(),
            _ => None,
        }
    }

    /// Strip any number of enclosing parentheses.
    pub fn unparen(&self) -> &Expr {
        match self {
            Expr::Paren { inner, .. } => inner.unparen(),
            e => e,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Input,
    Output,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetKind {
    Wire,
    Reg,
    Integer,
}

impl NetKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NetKind::Wire => "wire",
            NetKind::Reg => "reg",
            NetKind::Integer => "integer",
        }
    }
}

/// `[msb:lsb]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Range {
    pub msb: Expr,
    pub lsb: Expr,
}

/// One port in an ANSI-style header. `header` is absent when the port
/// inherits direction and type from the previous one (`input a, b`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsiPort {
    pub header: Option<PortHeader>,
    pub name: Ident,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortHeader {
    pub direction: Direction,
    pub kind: Option<NetKind>,
    pub signed: bool,
    pub range: Option<Range>,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortList {
    /// `module m;`
    None,
    /// `module m(a, b);` with directions declared in the body.
    Names(Vec<Ident>),
    /// `module m(input a, output reg [7:0] b);`
    Ansi(Vec<AnsiPort>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamAssign {
    pub name: Ident,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclName {
    pub name: Ident,
    /// Unpacked dimension for memories: `reg [7:0] mem [0:255];`
    pub array: Option<Range>,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connection {
    Named { port: Ident, expr: Option<Expr> },
    Positional(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Posedge,
    Negedge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventExpr {
    pub edge: Option<Edge>,
    pub signal: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sensitivity {
    /// `@*`
    Star,
    /// `@(*)`
    ParenStar,
    /// `@(posedge clk or negedge rst)`; `comma` records the separator style.
    List { events: Vec<EventExpr>, comma: bool },
}

impl Sensitivity {
    pub fn is_edge_triggered(&self) -> bool {
        match self {
            Sensitivity::List { events, .. } => events.iter().any(|e| e.edge.is_some()),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub kw: Tag,
    pub name: Ident,
    /// ANSI parameter port list `#(parameter W = 8)`.
    pub params: Vec<ParamAssign>,
    pub ports: PortList,
    pub items: Vec<Item>,
    pub end: Tag,
    pub span: LineSpan,
}

/// Resolved port as seen from outside the module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortInfo {
    pub name: String,
    pub direction: Direction,
    pub width: Option<Range>,
}

impl Module {
    /// Ports in header order with direction and width resolved from the
    /// body for non-ANSI headers.
    pub fn port_infos(&self) -> Vec<PortInfo> {
        match &self.ports {
            PortList::None => Vec::new(),
            PortList::Ansi(ports) => {
                let mut out = Vec::new();
                let mut current: Option<&PortHeader> = None;
                for p in ports {
                    if let Some(h) = &p.header {
                        current = Some(h);
                    }
                    let h = current.expect("first ANSI port always has a header");
                    out.push(PortInfo {
                        name: p.name.name.clone(),
                        direction: h.direction,
                        width: h.range.clone(),
                    });
                }
                out
            }
            PortList::Names(names) => names
                .iter()
                .map(|n| {
                    let decl = self.items.iter().find_map(|it| match &it.kind {
                        ItemKind::PortDecl {
                            direction,
                            range,
                            names: decl_names,
                            ..
                        } if decl_names.iter().any(|d| d.name == n.name) => {
                            Some((*direction, range.clone()))
                        }
                        _ => None,
                    });
                    let (direction, width) = decl.unwrap_or((Direction::Inout, None));
                    PortInfo {
                        name: n.name.clone(),
                        direction,
                        width,
                    }
                })
                .collect(),
        }
    }

    pub fn port_names(&self) -> Vec<String> {
        self.port_infos().into_iter().map(|p| p.name).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub kind: ItemKind,
    pub span: LineSpan,
}

impl Item {
    pub fn new(kind: ItemKind) -> Self {
        Item {
            kind,
            span: LineSpan::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemKind {
    /// Non-ANSI body port declaration: `input [7:0] a, b;`
    PortDecl {
        tag: Tag,
        direction: Direction,
        kind: Option<NetKind>,
        signed: bool,
        range: Option<Range>,
        names: Vec<Ident>,
    },
    Net {
        tag: Tag,
        kind: NetKind,
        signed: bool,
        range: Option<Range>,
        names: Vec<DeclName>,
    },
    Param {
        tag: Tag,
        local: bool,
        range: Option<Range>,
        assigns: Vec<ParamAssign>,
    },
    Assign {
        tag: Tag,
        assigns: Vec<(Expr, Expr)>,
    },
    Always {
        tag: Tag,
        sensitivity: Sensitivity,
        body: Stmt,
    },
    Instance {
        module: Ident,
        params: Vec<Connection>,
        name: Ident,
        connections: Vec<Connection>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: LineSpan,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt {
            kind,
            span: LineSpan::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Blocking,
    NonBlocking,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Blocking => "=",
            AssignOp::NonBlocking => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseItem {
    /// Empty for the `default` arm.
    pub labels: Vec<Expr>,
    /// Tag of the `default` keyword when this is the default arm.
    pub default_tag: Option<Tag>,
    pub body: Stmt,
}

impl CaseItem {
    pub fn is_default(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Block {
        begin: Tag,
        stmts: Vec<Stmt>,
        end: Tag,
    },
    If {
        tag: Tag,
        cond: Expr,
        then_stmt: Box<Stmt>,
        else_tag: Option<Tag>,
        else_stmt: Option<Box<Stmt>>,
    },
    Case {
        tag: Tag,
        selector: Expr,
        items: Vec<CaseItem>,
        end: Tag,
    },
    Assign {
        op: AssignOp,
        lhs: Expr,
        rhs: Expr,
    },
    /// A lone `;`.
    Null { tag: Tag },
}

impl Stmt {
    /// Pre-order walk over this statement and all nested statements.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Block { stmts, .. } => stmts.iter().for_each(|s| s.walk(f)),
            StmtKind::If {
                then_stmt,
                else_stmt,
                ..
            } => {
                then_stmt.walk(f);
                if let Some(e) = else_stmt {
                    e.walk(f);
                }
            }
            StmtKind::Case { items, .. } => items.iter().for_each(|i| i.body.walk(f)),
            StmtKind::Assign { .. } | StmtKind::Null { .. } => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        match &mut self.kind {
            StmtKind::Block { stmts, .. } => stmts.iter_mut().for_each(|s| s.walk_mut(f)),
            StmtKind::If {
                then_stmt,
                else_stmt,
                ..
            } => {
                then_stmt.walk_mut(f);
                if let Some(e) = else_stmt {
                    e.walk_mut(f);
                }
            }
            StmtKind::Case { items, .. } => items.iter_mut().for_each(|i| i.body.walk_mut(f)),
            StmtKind::Assign { .. } | StmtKind::Null { .. } => {}
        }
    }

    /// Expressions appearing directly in this statement (not nested ones).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::If { cond, .. } => vec![cond],
            StmtKind::Case {
                selector, items, ..
            } => {
                let mut v = vec![selector];
                for it in items {
                    v.extend(it.labels.iter());
                }
                v
            }
            StmtKind::Assign { lhs, rhs, .. } => vec![lhs, rhs],
            _ => Vec::new(),
        }
    }
}

/// A parsed source file.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub modules: Vec<Module>,
    /// Comments after the last module.
    pub trailing: Vec<Comment>,
    /// Physical line count of the text this tree was parsed from.
    pub source_lines: u32,
}

impl PartialEq for SyntaxTree {
    fn eq(&self, other: &Self) -> bool {
        self.modules == other.modules && self.trailing == other.trailing
    }
}
impl Eq for SyntaxTree {}

impl SyntaxTree {
    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name.name == name)
    }
}
