// SPDX-License-Identifier: Apache-2.0

use super::*;

const LISTING1_BODY: &str = "always @(posedge clk) begin
    if(!resetn)
        pc <= 8'b0;
    else if (received_data == 8'hAB)
        pc[0] <= 1'b1;
end
always @(posedge clk)
    if (fsm_state == FSM_STOP)
        if (pc[0])
            uart_rx_data <= received_data ^ 8'hFF;
        else
            uart_rx_data <= received_data;

";

fn listing1_module() -> String {
    format!(
        "module uart_rx(input clk, input resetn, input [7:0] received_data, input [2:0] fsm_state,\n    output reg [7:0] uart_rx_data);\nlocalparam FSM_STOP = 3'd4;\nreg [7:0] pc;\n{LISTING1_BODY}endmodule\n"
    )
}

fn roundtrip(src: &str) {
    let t = parse_str(src).unwrap();
    let (out, map) = print_with_map(&t);
    let t2 = parse_str(&out).unwrap_or_else(|e| panic!("reparse failed: {e}\n{out}"));
    assert_eq!(t, t2, "round trip changed the tree\n{out}");
    assert_eq!(print(&t2), out, "printer is not idempotent");
    map.check(count_lines(src), count_lines(&out)).unwrap();
}

#[test]
fn empty_module() {
    let t = parse_str("module m; endmodule").unwrap();
    assert_eq!(t.modules.len(), 1);
    assert!(t.modules[0].port_infos().is_empty());
    assert!(t.modules[0].items.is_empty());
    roundtrip("module m; endmodule");
}

#[test]
fn generate_is_unsupported() {
    let src = "module m;\nwire a;\ngenerate\nendgenerate\nendmodule\n";
    assert_eq!(
        parse_str(src),
        Err(ParseError::Unsupported {
            line: 3,
            construct: "generate".into()
        })
    );
}

#[test]
fn listing1_spans() {
    let src = listing1_module();
    let t = parse_str(&src).unwrap();
    let m = &t.modules[0];
    let spans: Vec<(u32, u32)> = m
        .items
        .iter()
        .filter(|i| matches!(i.kind, ItemKind::Always { .. }))
        .map(|i| (i.span.first, i.span.last))
        .collect();
    // listing line n sits at file line n + 4
    assert_eq!(spans, vec![(5, 10), (11, 16)]);
    assert_eq!(count_lines(LISTING1_BODY), 13);
    roundtrip(&src);
}

#[test]
fn spans_nest() {
    let t = parse_str(&listing1_module()).unwrap();
    let m = &t.modules[0];
    for it in &m.items {
        assert!(m.span.contains_span(&it.span));
        if let ItemKind::Always { body, .. } = &it.kind {
            assert!(it.span.contains_span(&body.span));
            body.walk(&mut |s| {
                if let StmtKind::If {
                    then_stmt,
                    else_stmt,
                    ..
                } = &s.kind
                {
                    assert!(s.span.contains_span(&then_stmt.span));
                    if let Some(e) = else_stmt {
                        assert!(s.span.contains_span(&e.span));
                    }
                }
            });
        }
    }
}

#[test]
fn syntax_error_position() {
    let err = parse_str("module m;\nwire a\nendmodule\n").unwrap_err();
    match err {
        ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (3, 1)),
        e => panic!("{e:?}"),
    }
}

#[test]
fn undeclared_and_duplicates() {
    assert_eq!(
        parse_str("module m(input a, output b);\nassign b = c;\nendmodule"),
        Err(ParseError::Undeclared {
            line: 2,
            name: "c".into()
        })
    );
    assert!(matches!(
        parse_str("module m(input a, input a); endmodule"),
        Err(ParseError::Duplicate { .. })
    ));
}

#[test]
fn unsupported_constructs() {
    for (src, line) in [
        ("module m;\n`define X 1\nendmodule", 2),
        ("module m;\ninitial begin end\nendmodule", 2),
        ("module m(input [3:0] a, output reg b);\nalways @* casez (a) default: b = 0; endcase\nendmodule", 2),
        ("module m(input a, output b);\nassign b = $random;\nendmodule", 2),
        ("module m(input [7:0] a, output b);\nassign b = a[0+:2];\nendmodule", 2),
    ] {
        match parse_str(src) {
            Err(ParseError::Unsupported { line: l, .. }) => assert_eq!(l, line, "{src}"),
            other => panic!("{src}: {other:?}"),
        }
    }
}

#[test]
fn too_large() {
    let big = " ".repeat(100);
    assert!(matches!(
        parse_with_limit(&big, 10),
        Err(ParseError::TooLarge { bytes: 100, .. })
    ));
}

#[test]
fn comments_travel_with_statements() {
    let src = "// header\nmodule m(input clk, output reg q);\n  // the flop\n  always @(posedge clk) q <= ~q; // toggle\n  /* multi\n     line */\nendmodule\n// tail\n";
    let t = parse_str(src).unwrap();
    let out = print(&t);
    for c in ["// header", "// the flop", "// toggle", "/* multi", "line */", "// tail"] {
        assert!(out.contains(c), "missing {c}\n{out}");
    }
    assert!(out.contains("q <= ~q; // toggle"), "{out}");
    roundtrip(src);
}

#[test]
fn statements_get_their_own_lines() {
    let src = "module m(input clk, input d, output reg a, output reg b, output reg c);\nalways @(posedge clk) begin a <= d; b <= a; c <= b; end\nendmodule\n";
    let out = print(&parse_str(src).unwrap());
    let stmt_lines = out.lines().filter(|l| l.trim_end().ends_with(';') && l.contains("<=")).count();
    assert_eq!(stmt_lines, 3, "{out}");
    assert!(out.contains("\n        a <= d;\n"), "{out}");
    roundtrip(src);
}

#[test]
fn crlf_input_prints_lf() {
    let src = "module m(input a, output b);\r\nassign b = a;\r\nendmodule\r\n";
    let out = print(&parse_str(src).unwrap());
    assert!(!out.contains('\r'));
    roundtrip(src);
}

#[test]
fn non_ansi_ports_and_memory() {
    let src = "module sram(clk, we, addr, din, dout);
input clk, we;
input [7:0] addr;
input [7:0] din;
output reg [7:0] dout;
reg [7:0] mem [0:255];
reg [7:0] mn;
parameter ADDR = 8'hAA;
always @(posedge clk) begin
    if (we)
        mem[addr] <= din;
    else if (addr == ADDR) begin
        mn <= mn + 1;
        dout <= mem[mn];
    end else
        dout <= mem[addr];
end
endmodule
";
    let t = parse_str(src).unwrap();
    let ports = t.modules[0].port_infos();
    assert_eq!(ports.len(), 5);
    assert_eq!(ports[4].direction, Direction::Output);
    let ids = collect_identifiers(&t);
    assert!(ids.internals.contains_key("mn"));
    assert!(ids.internals.contains_key("mem"));
    assert!(ids.internals.contains_key("ADDR"));
    assert!(ids.ports.contains_key("dout"));
    assert!(ids.modules.contains_key("sram"));
    assert_eq!(ids.internals["mn"].refs, vec![13, 13, 14]);
    assert_eq!(ids.internals["mn"].decls, vec![7]);
    roundtrip(src);
}

#[test]
fn partitions_are_disjoint() {
    let src = "module leaf #(parameter W = 4)(input [W-1:0] a, output [W-1:0] y);\nwire [W-1:0] t;\nassign t = ~a;\nassign y = t;\nendmodule\nmodule top(input [3:0] x, output [3:0] z);\nwire [3:0] a;\nassign a = x;\nleaf #(.W(4)) u0(.a(a), .y(z));\nendmodule\n";
    let t = parse_str(src).unwrap();
    let ids = collect_identifiers(&t);
    // `a` is a port of leaf, so it is protected everywhere
    assert!(ids.ports.contains_key("a"));
    assert!(!ids.internals.contains_key("a"));
    assert!(ids.ports.contains_key("W"));
    assert!(ids.internals.contains_key("u0"));
    assert!(ids.internals.contains_key("t"));
    let m: Vec<_> = ids.modules.keys().cloned().collect();
    assert_eq!(m, vec!["leaf", "top"]);
    roundtrip(src);
}

#[test]
fn expression_printing() {
    let src = "module m(input [7:0] a, input [7:0] b, output [15:0] y);\nassign y = {a[3:0], {2{b[1]}}, - -a[1], (a & b) | ~a, a ? b : 8'sd3};\nendmodule\n";
    let t = parse_str(src).unwrap();
    let out = print(&t);
    assert!(out.contains("{a[3:0], {2{b[1]}}, - -a[1], (a & b) | ~a, a ? b : 8'sd3}"), "{out}");
    roundtrip(src);
}

#[test]
fn layout_is_kept_across_lines() {
    let src = "module m(input a,\n         input b,\n         output y\n);\n\nassign y = a &\n           b;\n\nendmodule\n";
    let t = parse_str(src).unwrap();
    let (out, map) = print_with_map(&t);
    assert_eq!(map.get(7), &[7]);
    assert_eq!(map.get(5).len(), 1);
    assert_eq!(count_lines(&out), 9, "{out}");
    roundtrip(src);
}

#[test]
fn source_file_lines() {
    let f = SourceFile::new("x.v", "a\nb\r\nc");
    assert_eq!(f.lines, 3);
    assert_eq!(f.line(2), Some("b"));
    assert_eq!(f.line(3), Some("c"));
    assert_eq!(f.line(4), None);
    assert_eq!(SourceFile::new("y.v", "a\n").lines, 1);
}

