// SPDX-License-Identifier: Apache-2.0

//! Stimulus scripts for the built-in simulator.
//!
//! ```text
//! # comment
//! module sram_ctrl      top module (optional with a single module)
//! clock clk             clock input, starts low
//! watch dout ready      signals printed on every tick
//! seed 7                seed for `random` (default 1)
//! set rst 1             drive an input
//! tick 3                three clock cycles, one trace line each
//! skip 2                two clock cycles without trace lines
//! random 20 addr din    20 cycles with fresh random values each cycle
//! print                 trace line without a clock edge
//! ```
//!
//! A trace line reads `<cycle> <sig>=<hex> ...` with hex digits padded to
//! the signal width, the same text `$display("%0d sig=%h", ...)` produces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{mask, SimError, Simulator};
use crate::rtl::{parse_number, Direction, SyntaxTree, Tag};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StimCmd {
    Set(String, u128),
    Tick(u32),
    Skip(u32),
    Random { cycles: u32, signals: Vec<String> },
    Print,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stim {
    pub module: Option<String>,
    pub clock: Option<String>,
    pub watch: Vec<String>,
    pub seed: u64,
    pub cmds: Vec<(usize, StimCmd)>,
}

fn err(line: usize, msg: impl Into<String>) -> SimError {
    SimError::Stim { line, msg: msg.into() }
}

fn parse_value(s: &str) -> Option<u128> {
    if let Some(h) = s.strip_prefix("0x") {
        return u128::from_str_radix(&h.replace('_', ""), 16).ok();
    }
    parse_number(s, Tag::synthetic())?.value()
}

pub fn parse_stim(text: &str) -> Result<Stim, SimError> {
    let mut stim = Stim {
        module: None,
        clock: None,
        watch: Vec::new(),
        seed: 1,
        cmds: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&cmd, args)) = words.split_first() else {
            continue;
        };
        let count = |args: &[&str]| -> Result<u32, SimError> {
            match args.first() {
                None => Ok(1),
                Some(a) => a.parse().map_err(|_| err(n, format!("bad count `{a}`"))),
            }
        };
        match cmd {
            "module" => stim.module = Some(args.first().ok_or_else(|| err(n, "missing module name"))?.to_string()),
            "clock" => stim.clock = Some(args.first().ok_or_else(|| err(n, "missing clock name"))?.to_string()),
            "watch" => stim.watch.extend(args.iter().map(|s| s.to_string())),
            "seed" => {
                stim.seed = args
                    .first()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| err(n, "bad seed"))?
            }
            "set" => {
                let [name, value] = args else {
                    return Err(err(n, "usage: set <signal> <value>"));
                };
                let v = parse_value(value).ok_or_else(|| err(n, format!("bad value `{value}`")))?;
                stim.cmds.push((n, StimCmd::Set(name.to_string(), v)));
            }
            "tick" => stim.cmds.push((n, StimCmd::Tick(count(args)?))),
            "skip" => stim.cmds.push((n, StimCmd::Skip(count(args)?))),
            "random" => {
                if args.len() < 2 {
                    return Err(err(n, "usage: random <cycles> <signal>..."));
                }
                stim.cmds.push((
                    n,
                    StimCmd::Random {
                        cycles: count(args)?,
                        signals: args[1..].iter().map(|s| s.to_string()).collect(),
                    },
                ));
            }
            "print" => stim.cmds.push((n, StimCmd::Print)),
            other => return Err(err(n, format!("unknown command `{other}`"))),
        }
    }
    Ok(stim)
}

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Set(String, u128),
    /// Clock cycle, printing a trace line if set.
    Tick(bool),
    Print,
}

fn is_input(sim: &Simulator, name: &str) -> bool {
    sim.ports()
        .iter()
        .any(|(p, d, _)| p == name && *d == Direction::Input)
}

/// Flatten commands into single steps, drawing random values.
fn expand(stim: &Stim, sim: &Simulator) -> Result<Vec<Step>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(stim.seed);
    let mut out = Vec::new();
    let input = |line: usize, name: &str| -> Result<u32, SimError> {
        if Some(name) == stim.clock.as_deref() || !is_input(sim, name) {
            return Err(err(line, format!("`{name}` is not a drivable input")));
        }
        Ok(sim.width_of(name).unwrap_or(1))
    };
    for (line, c) in &stim.cmds {
        match c {
            StimCmd::Set(name, v) => {
                input(*line, name)?;
                out.push(Step::Set(name.clone(), *v));
            }
            StimCmd::Tick(n) => out.extend((0..*n).map(|_| Step::Tick(true))),
            StimCmd::Skip(n) => out.extend((0..*n).map(|_| Step::Tick(false))),
            StimCmd::Random { cycles, signals } => {
                let widths: Vec<u32> = signals
                    .iter()
                    .map(|s| input(*line, s))
                    .collect::<Result<_, _>>()?;
                for _ in 0..*cycles {
                    for (s, w) in signals.iter().zip(&widths) {
                        out.push(Step::Set(s.clone(), rng.gen::<u128>() & mask(*w)));
                    }
                    out.push(Step::Tick(true));
                }
            }
            StimCmd::Print => out.push(Step::Print),
        }
        if matches!(c, StimCmd::Tick(_) | StimCmd::Skip(_) | StimCmd::Random { .. }) && stim.clock.is_none() {
            return Err(err(*line, "tick without a clock"));
        }
    }
    Ok(out)
}

fn hex_digits(w: u32) -> usize {
    w.div_ceil(4).max(1) as usize
}

/// Run a script and return the trace.
pub fn run_stim(tree: &SyntaxTree, stim: &Stim) -> Result<Vec<String>, SimError> {
    let mut sim = Simulator::new(tree, stim.module.as_deref())?;
    for w in &stim.watch {
        if sim.width_of(w).is_none() {
            return Err(err(0, format!("unknown watched signal `{w}`")));
        }
    }
    let steps = expand(stim, &sim)?;
    sim.propagate()?;
    let mut cycle = 0u64;
    let mut trace = Vec::new();
    let line = |sim: &Simulator, cycle: u64| {
        let mut s = cycle.to_string();
        for w in &stim.watch {
            let width = sim.width_of(w).unwrap_or(1);
            s.push_str(&format!(" {w}={:0d$x}", sim.get(w).unwrap_or(0), d = hex_digits(width)));
        }
        s
    };
    for st in steps {
        match st {
            Step::Set(name, v) => sim.set(&name, v)?,
            Step::Tick(print) => {
                let clk = stim.clock.as_deref().expect("checked in expand");
                cycle += 1;
                sim.set(clk, 1)?;
                if print {
                    trace.push(line(&sim, cycle));
                }
                sim.set(clk, 0)?;
            }
            Step::Print => trace.push(line(&sim, cycle)),
        }
    }
    Ok(trace)
}

/// An equivalent Verilog testbench for an external simulator. Its
/// `$display` output matches the trace of [`run_stim`].
pub fn to_verilog_testbench(tree: &SyntaxTree, stim: &Stim) -> Result<String, SimError> {
    let sim = Simulator::new(tree, stim.module.as_deref())?;
    let steps = expand(stim, &sim)?;
    let top = match &stim.module {
        Some(m) => m.clone(),
        None => tree.modules[0].name.name.clone(),
    };
    let decl = |w: u32| if w == 1 { String::new() } else { format!(" [{}:0]", w - 1) };
    let mut out = String::new();
    out.push_str("module tb;\n");
    for (name, dir, w) in sim.ports() {
        let kind = match dir {
            Direction::Input => "reg",
            _ => "wire",
        };
        out.push_str(&format!("    {kind}{} {name};\n", decl(*w)));
    }
    let conns: Vec<String> = sim.ports().iter().map(|(n, _, _)| format!(".{n}({n})")).collect();
    out.push_str(&format!("    {top} dut({});\n", conns.join(", ")));
    let fmt: String = stim.watch.iter().map(|w| format!(" {w}=%h")).collect();
    let args: String = stim.watch.iter().map(|w| format!(", {w}")).collect();
    out.push_str("    initial begin\n");
    for (name, dir, _) in sim.ports() {
        if *dir == Direction::Input {
            out.push_str(&format!("        {name} = 0;\n"));
        }
    }
    out.push_str("        #1;\n");
    let mut cycle = 0u64;
    for st in steps {
        match st {
            Step::Set(name, v) => {
                let w = sim.width_of(&name).unwrap_or(1);
                out.push_str(&format!("        {name} = {w}'h{v:x};\n        #1;\n"));
            }
            Step::Tick(print) => {
                let clk = stim.clock.as_deref().expect("checked in expand");
                cycle += 1;
                out.push_str(&format!("        {clk} = 1;\n        #1;\n"));
                if print {
                    out.push_str(&format!("        $display(\"%0d{fmt}\", {cycle}{args});\n"));
                }
                out.push_str(&format!("        {clk} = 0;\n        #1;\n"));
            }
            Step::Print => out.push_str(&format!("        $display(\"%0d{fmt}\", {cycle}{args});\n")),
        }
    }
    out.push_str("        $finish;\n    end\nendmodule\n");
    Ok(out)
}
