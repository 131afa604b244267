// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::report::SCHEMA_TEXT;
use crate::design::DesignUnit;
use crate::signatures::{SigKind, SignatureBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTask {
    Detection,
    /// Signature extraction from a clean/infected pair.
    Extraction,
    /// Signature extraction from a design with no ground truth.
    ZeroDay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub task: PromptTask,
    pub system_text: String,
    pub stage1_text: String,
    pub stage2_text: String,
    pub output_schema_text: String,
    /// Design text under analysis, for offline providers. Already embedded
    /// in `stage1_text`.
    pub source: String,
}

impl PromptBundle {
    /// Fixture key: SHA-256 over the four prompt texts.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for part in [
            &self.system_text,
            &self.stage1_text,
            &self.stage2_text,
            &self.output_schema_text,
        ] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }

    /// Everything but the system text, as one user message.
    pub fn user_text(&self) -> String {
        let mut out = self.stage1_text.clone();
        for part in [&self.stage2_text, &self.output_schema_text] {
            if !part.is_empty() {
                out.push('\n');
                out.push_str(part);
            }
        }
        out
    }
}

pub const SYSTEM_TEXT: &str = "\
You are a hardware security analyst. You review Verilog RTL for hardware \
Trojans: small malicious additions made of a rarely satisfied trigger and a \
payload that acts once the trigger fires.
";

/// Source text with `N: ` prefixes matching file line numbers.
pub fn numbered(text: &str) -> String {
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        out.push_str(&format!("{}: {}\n", i + 1, line));
    }
    out
}

/// One canonical example per Trojan type.
pub const TYPE_EXAMPLES: [(&str, &str); 3] = [
    (
        "Type-1, functionality change: the result is inverted once a magic operand was seen.",
        "always @(posedge clk)\n    if (op_a == 16'hD00D)\n        armed <= 1'b1;\nassign result = armed ? ~sum : sum;\n",
    ),
    (
        "Type-2, information leakage: a command pattern routes key bits to a debug port.",
        "always @(posedge clk)\n    if (cmd == 8'hC3)\n        dump <= 1'b1;\nassign dbg_out = dump ? secret_key[7:0] : 8'h00;\n",
    ),
    (
        "Type-3, denial of service: a long-running counter stalls the arbiter for good.",
        "always @(posedge clk)\n    if (count == 24'hFFFFF0)\n        stall <= 1'b1;\nassign grant = req & ~stall;\n",
    ),
];

fn signature_block(bank: &SignatureBank, top_n: usize) -> String {
    let pick = |k: SigKind| bank.entries.iter().filter(move |e| e.sig.kind == k).take(top_n);
    let mut trig = pick(SigKind::Trigger);
    let mut pay = pick(SigKind::Payload);
    let mut out = String::from("Known Trojan signatures, highest weight first:\n");
    loop {
        let (t, p) = (trig.next(), pay.next());
        if t.is_none() && p.is_none() {
            break;
        }
        for e in t.into_iter().chain(p) {
            out.push_str(&format!("- [{}] {}\n", e.sig.kind, e.sig.text));
        }
    }
    out
}

/// Two-stage detection prompt. With `top_n = 0` no signatures are given.
pub fn build_prompt(design: &DesignUnit, bank: &SignatureBank, top_n: usize) -> PromptBundle {
    let mut stage1 = String::from(
        "Stage 1: presence and localization.\n\
         Decide whether the design below contains hardware Trojans. For each one, \
         give the line numbers of its trigger logic and of its payload logic.\n\n",
    );
    if top_n > 0 {
        stage1.push_str(&signature_block(bank, top_n));
        stage1.push('\n');
    }
    stage1.push_str(&format!("Design `{}` ({} lines):\n", design.id, design.lines()));
    stage1.push_str(&numbered(&design.file.text));

    let mut stage2 = String::from(
        "Stage 2: classification.\n\
         Give every Trojan found in stage 1 exactly one type. One example per type:\n",
    );
    for (caption, code) in TYPE_EXAMPLES {
        stage2.push_str(&format!("\n{caption}\n{code}"));
    }

    PromptBundle {
        task: PromptTask::Detection,
        system_text: SYSTEM_TEXT.to_string(),
        stage1_text: stage1,
        stage2_text: stage2,
        output_schema_text: SCHEMA_TEXT.to_string(),
        source: design.file.text.clone(),
    }
}
