// SPDX-License-Identifier: Apache-2.0

/// Reserved words of Verilog-2005 plus the common SystemVerilog additions.
/// Generated names must avoid all of them.
pub const RESERVED: &[&str] = &[
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_onevent",
    "pulsestyle_ondetect", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "uwire", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor",
    "xor", "alias", "always_comb", "always_ff", "always_latch", "assert", "bit", "break", "byte",
    "class", "const", "continue", "do", "endclass", "endinterface", "endpackage", "enum",
    "export", "extends", "final", "foreach", "import", "int", "interface", "logic", "longint",
    "modport", "new", "null", "package", "packed", "return", "shortint", "static", "string",
    "struct", "super", "this", "typedef", "union", "unique", "var", "virtual", "void",
];

/// Keywords that name constructs outside the supported subset.
pub const UNSUPPORTED: &[&str] = &[
    "generate", "endgenerate", "genvar", "function", "endfunction", "task", "endtask", "initial",
    "for", "while", "repeat", "forever", "fork", "join", "casez", "casex", "deassign", "force",
    "release", "specify", "endspecify", "primitive", "endprimitive", "table", "real", "realtime",
    "time", "event", "wait", "disable", "defparam", "supply0", "supply1", "tri", "tri0", "tri1",
    "wand", "wor", "triand", "trior", "trireg", "uwire", "interface", "endinterface", "class",
    "package", "import", "typedef", "enum", "struct", "logic", "bit", "always_ff", "always_comb",
    "always_latch", "specparam", "macromodule", "config", "and", "or", "nand", "nor", "xor",
    "xnor", "not", "buf", "bufif0", "bufif1", "notif0", "notif1",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

pub fn is_unsupported(word: &str) -> bool {
    UNSUPPORTED.contains(&word)
}
