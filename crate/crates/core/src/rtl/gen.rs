// SPDX-License-Identifier: Apache-2.0

//! Seeded generator of random, valid source files in the supported subset.
//! Used to fuzz the parser and printer.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BINOPS: &[&str] = &[
    "*", "/", "%", "+", "-", "<<", ">>", "<<<", ">>>", "<", "<=", ">", ">=", "==", "!=", "===", "!==", "&", "^",
    "~^", "|", "&&", "||",
];
const UNOPS: &[&str] = &["-", "!", "~", "&", "~&", "|", "~|", "^", "~^"];
const COMMENTS: &[&str] = &["// note", "// keep stable", "/* block */", "// TODO-free", "/* a\n   b */"];

struct Sig {
    name: String,
    width: u32,
    // Assignable from procedural code.
    reg: bool,
    mem: bool,
}

struct Gen {
    rng: ChaCha8Rng,
    sigs: Vec<Sig>,
    params: Vec<String>,
    next: u32,
    out: String,
    indent: usize,
}

impl Gen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn line(&mut self, s: &str) {
        if self.rng.gen_bool(0.08) {
            let c = *COMMENTS.choose(&mut self.rng).unwrap();
            self.push_raw(c);
        }
        self.push_raw(s);
    }

    fn push_raw(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn number(&mut self) -> String {
        match self.rng.gen_range(0..5) {
            0 => self.rng.gen_range(0..100u32).to_string(),
            1 => format!("{}'b{:b}", 4, self.rng.gen_range(0..16u32)),
            2 => format!("8'h{:02X}", self.rng.gen_range(0..256u32)),
            3 => format!("{}'d{}", 6, self.rng.gen_range(0..64u32)),
            _ => format!("3'o{:o}", self.rng.gen_range(0..8u32)),
        }
    }

    fn readable(&mut self) -> Option<usize> {
        let idx: Vec<usize> = (0..self.sigs.len()).filter(|&i| !self.sigs[i].mem).collect();
        idx.choose(&mut self.rng).copied()
    }

    fn primary(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 | 1 => self.number(),
            2 if !self.params.is_empty() => self.params.choose(&mut self.rng).unwrap().clone(),
            _ => match self.readable() {
                Some(i) => {
                    let (name, w) = (self.sigs[i].name.clone(), self.sigs[i].width);
                    match self.rng.gen_range(0..4) {
                        0 if w > 1 => format!("{name}[{}]", self.rng.gen_range(0..w)),
                        1 if w > 2 => {
                            let lsb = self.rng.gen_range(0..w - 1);
                            format!("{name}[{}:{lsb}]", self.rng.gen_range(lsb + 1..w))
                        }
                        _ => name,
                    }
                }
                None => self.number(),
            },
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 {
            return self.primary();
        }
        match self.rng.gen_range(0..8) {
            0 | 1 => self.primary(),
            2 => {
                let op = *UNOPS.choose(&mut self.rng).unwrap();
                let e = self.expr(depth - 1);
                if e.starts_with(['-', '!', '~', '&', '|', '^']) {
                    format!("{op}({e})")
                } else {
                    format!("{op}{e}")
                }
            }
            3 => format!("({})", self.expr(depth - 1)),
            4 => {
                let (c, a, b) = (self.expr(depth - 1), self.expr(depth - 1), self.expr(depth - 1));
                format!("({c}) ? {a} : ({b})")
            }
            5 => {
                let n = self.rng.gen_range(1..4);
                let items: Vec<String> = (0..n).map(|_| self.sized_atom()).collect();
                if self.rng.gen_bool(0.3) {
                    format!("{{{}{{{}}}}}", self.rng.gen_range(1..4), items.join(", "))
                } else {
                    format!("{{{}}}", items.join(", "))
                }
            }
            _ => {
                let op = *BINOPS.choose(&mut self.rng).unwrap();
                let (a, b) = (self.expr(depth - 1), self.expr(depth - 1));
                format!("{a} {op} {b}")
            }
        }
    }

    // Concatenation operands must be sized.
    fn sized_atom(&mut self) -> String {
        match self.readable() {
            Some(i) if self.rng.gen_bool(0.7) => self.sigs[i].name.clone(),
            _ => format!("4'h{:X}", self.rng.gen_range(0..16u32)),
        }
    }

    fn target(&mut self, reg: bool) -> Option<String> {
        let idx: Vec<usize> = (0..self.sigs.len()).filter(|&i| self.sigs[i].reg == reg).collect();
        let i = *idx.choose(&mut self.rng)?;
        let s = &self.sigs[i];
        Some(if s.mem {
            format!("{}[{}]", s.name, self.rng.gen_range(0..4))
        } else if s.width > 1 && self.rng.gen_bool(0.2) {
            format!("{}[{}]", s.name, self.rng.gen_range(0..s.width))
        } else {
            s.name.clone()
        })
    }

    fn stmt(&mut self, depth: u32, op: &str) {
        let choice = if depth == 0 { 0 } else { self.rng.gen_range(0..6) };
        match choice {
            1 => {
                let c = self.expr(2);
                self.line(&format!("if ({c})"));
                self.nested(depth, op);
                if self.rng.gen_bool(0.5) {
                    self.line("else");
                    self.nested(depth, op);
                }
            }
            2 => {
                let sel = self.expr(1);
                self.line(&format!("case ({sel})"));
                self.indent += 1;
                let mut labels: Vec<u32> = (0..16).collect();
                labels.shuffle(&mut self.rng);
                for l in labels.into_iter().take(self.rng.gen_range(1..4)) {
                    self.line(&format!("4'd{l}:"));
                    self.nested(depth, op);
                }
                if self.rng.gen_bool(0.5) {
                    self.line("default:");
                    self.nested(depth, op);
                }
                self.indent -= 1;
                self.line("endcase");
            }
            3 => {
                self.line("begin");
                self.indent += 1;
                for _ in 0..self.rng.gen_range(0..4) {
                    self.stmt(depth - 1, op);
                }
                self.indent -= 1;
                self.line("end");
            }
            4 if self.rng.gen_bool(0.2) => self.line(";"),
            _ => match self.target(true) {
                Some(t) => {
                    let e = self.expr(3);
                    self.line(&format!("{t} {op} {e};"));
                }
                None => self.line(";"),
            },
        }
    }

    fn nested(&mut self, depth: u32, op: &str) {
        self.indent += 1;
        self.stmt(depth - 1, op);
        self.indent -= 1;
    }

    fn width(&mut self) -> u32 {
        *[1, 1, 4, 8, 16].choose(&mut self.rng).unwrap()
    }

    fn range(w: u32) -> String {
        if w == 1 {
            String::new()
        } else {
            format!(" [{}:0]", w - 1)
        }
    }

    fn module(&mut self, name: &str, callee: Option<(&str, &[(String, bool, u32)])>) -> Vec<(String, bool, u32)> {
        self.sigs.clear();
        self.params.clear();
        let ansi = self.rng.gen_bool(0.5);
        let mut ports: Vec<(String, bool, u32)> = vec![("clk".into(), true, 1)];
        for _ in 0..self.rng.gen_range(1..4) {
            let p = self.fresh("in");
            let w = self.width();
            ports.push((p, true, w));
        }
        for _ in 0..self.rng.gen_range(1..3) {
            let p = self.fresh("out");
            let w = self.width();
            ports.push((p, false, w));
        }
        let out_reg: Vec<bool> = ports.iter().map(|p| !p.1 && self.rng.gen_bool(0.5)).collect();
        let header_param = self.rng.gen_bool(0.3);
        let hp = if header_param {
            let p = self.fresh("W");
            self.params.push(p.clone());
            format!(" #(parameter {p} = {})", self.rng.gen_range(1..9))
        } else {
            String::new()
        };
        if ansi {
            let decls: Vec<String> = ports
                .iter()
                .zip(&out_reg)
                .map(|((n, input, w), r)| {
                    let dir = if *input { "input" } else { "output" };
                    let reg = if *r { " reg" } else { "" };
                    format!("{dir}{reg}{} {n}", Self::range(*w))
                })
                .collect();
            self.line(&format!("module {name}{hp}({});", decls.join(", ")));
        } else {
            let names: Vec<&str> = ports.iter().map(|p| p.0.as_str()).collect();
            self.line(&format!("module {name}{hp}({});", names.join(", ")));
        }
        self.indent += 1;
        if !ansi {
            for ((n, input, w), r) in ports.iter().zip(&out_reg) {
                let dir = if *input { "input" } else { "output" };
                let reg = if *r { " reg" } else { "" };
                self.line(&format!("{dir}{reg}{} {n};", Self::range(*w)));
            }
        }
        for ((n, _, w), r) in ports.iter().zip(&out_reg) {
            self.sigs.push(Sig {
                name: n.clone(),
                width: *w,
                reg: *r,
                mem: false,
            });
        }
        let undriven_outs: Vec<String> = ports
            .iter()
            .zip(&out_reg)
            .filter(|((_, input, _), r)| !*input && !**r)
            .map(|((n, ..), _)| n.clone())
            .collect();

        if self.rng.gen_bool(0.5) {
            let p = self.fresh("P");
            let kw = if self.rng.gen_bool(0.5) { "localparam" } else { "parameter" };
            let v = self.number();
            self.line(&format!("{kw} {p} = {v};"));
            self.params.push(p);
        }
        let mut wires = Vec::new();
        for _ in 0..self.rng.gen_range(1..5) {
            let w = self.width();
            let reg = self.rng.gen_bool(0.6);
            let n = self.fresh(if reg { "r" } else { "w" });
            let kind = if reg { "reg" } else { "wire" };
            if reg && self.rng.gen_bool(0.15) {
                self.line(&format!("{kind}{} {n} [0:3];", Self::range(w)));
                self.sigs.push(Sig {
                    name: n,
                    width: w,
                    reg: true,
                    mem: true,
                });
                continue;
            }
            self.line(&format!("{kind}{} {n};", Self::range(w)));
            if !reg {
                wires.push(n.clone());
            }
            self.sigs.push(Sig {
                name: n,
                width: w,
                reg,
                mem: false,
            });
        }
        if self.rng.gen_bool(0.2) {
            let n = self.fresh("i");
            self.line(&format!("integer {n};"));
            self.sigs.push(Sig {
                name: n,
                width: 32,
                reg: true,
                mem: false,
            });
        }
        if let Some((cname, cports)) = callee {
            let inst = self.fresh("u");
            let conns: Vec<String> = cports
                .iter()
                .map(|(p, input, _)| {
                    if *input {
                        format!(".{p}({})", self.primary())
                    } else {
                        format!(".{p}()")
                    }
                })
                .collect();
            self.line(&format!("{cname} {inst} ({});", conns.join(", ")));
        }
        for t in wires.into_iter().chain(undriven_outs) {
            let e = self.expr(3);
            self.line(&format!("assign {t} = {e};"));
        }
        for _ in 0..self.rng.gen_range(1..4) {
            let (sens, op) = match self.rng.gen_range(0..4) {
                0 => ("@(posedge clk)".to_string(), "<="),
                1 => ("@*".to_string(), "="),
                2 => ("@(*)".to_string(), "="),
                _ => {
                    let i = self.readable().unwrap();
                    let s = self.sigs[i].name.clone();
                    let sep = if self.rng.gen_bool(0.5) { "or" } else { "," };
                    (format!("@(negedge clk {sep} {s})"), "<=")
                }
            };
            self.line(&format!("always {sens}"));
            self.indent += 1;
            let d = self.rng.gen_range(1..4);
            self.stmt(d, op);
            self.indent -= 1;
        }
        self.indent -= 1;
        self.line("endmodule");
        ports
    }
}

/// A random source file of one or two modules. The same seed always gives
/// the same text.
pub fn random_source(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        sigs: Vec::new(),
        params: Vec::new(),
        next: 0,
        out: String::new(),
        indent: 0,
    };
    let leaf = g.module("leaf", None);
    if g.rng.gen_bool(0.5) {
        g.out.push('\n');
        g.module("top", Some(("leaf", &leaf)));
    }
    if g.rng.gen_bool(0.2) {
        g.out.push_str("// trailing\n");
    }
    g.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtl::{parse_str, print};

    #[test]
    fn generated_sources_parse_and_round_trip() {
        for seed in 0..300 {
            let src = random_source(seed);
            let t = parse_str(&src).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{src}"));
            let out = print(&t);
            let t2 = parse_str(&out).unwrap_or_else(|e| panic!("seed {seed}: reparse {e}\n{out}"));
            assert_eq!(t, t2, "seed {seed}\n{src}");
            assert_eq!(print(&t2), out, "seed {seed}");
        }
    }

    #[test]
    fn seeded() {
        assert_eq!(random_source(9), random_source(9));
        assert_ne!(random_source(9), random_source(10));
    }
}
