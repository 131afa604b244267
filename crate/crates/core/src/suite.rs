// SPDX-License-Identifier: Apache-2.0

//! The bundled toy benchmark: three small designs with planted Trojans of
//! each type, their ground truth and stimulus scripts.

use std::path::PathBuf;

use crate::annotations::AnnotationSet;
use crate::design::DesignUnit;
use crate::rtl::count_lines;

#[derive(Debug, Clone, Copy)]
pub struct BundledDesign {
    pub id: &'static str,
    /// File stem shared by the design, annotation, stimulus and testbench.
    pub stem: &'static str,
    pub module: &'static str,
    pub source: &'static str,
    pub annotation: &'static str,
    pub stim: &'static str,
}

pub const BUNDLED: [BundledDesign; 3] = [
    BundledDesign {
        id: "SRAM-T110",
        stem: "sram_t110",
        module: "sram_ctrl",
        source: include_str!("../suite/designs/sram_t110.v"),
        annotation: include_str!("../suite/annotations/sram_t110.json"),
        stim: include_str!("../suite/stim/sram_t110.stim"),
    },
    BundledDesign {
        id: "UART-T200",
        stem: "uart_t200",
        module: "uart_rx",
        source: include_str!("../suite/designs/uart_t200.v"),
        annotation: include_str!("../suite/annotations/uart_t200.json"),
        stim: include_str!("../suite/stim/uart_t200.stim"),
    },
    BundledDesign {
        id: "AES-T220",
        stem: "aes_t220",
        module: "aes_core",
        source: include_str!("../suite/designs/aes_t220.v"),
        annotation: include_str!("../suite/annotations/aes_t220.json"),
        stim: include_str!("../suite/stim/aes_t220.stim"),
    },
];

/// Planted one-bit output mutant of the SRAM design.
pub const SRAM_MUTANT: &str = include_str!("../suite/mutants/sram_t110_dout0.v");

/// On-disk location of the bundled suite in the source tree.
pub fn suite_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("suite")
}

impl BundledDesign {
    pub fn design_path(&self) -> PathBuf {
        suite_dir().join("designs").join(format!("{}.v", self.stem))
    }

    pub fn annotation_path(&self) -> PathBuf {
        suite_dir().join("annotations").join(format!("{}.json", self.stem))
    }

    pub fn stim_path(&self) -> PathBuf {
        suite_dir().join("stim").join(format!("{}.stim", self.stem))
    }

    pub fn testbench_path(&self) -> PathBuf {
        suite_dir().join("tb").join(format!("tb_{}.v", self.stem))
    }

    pub fn unit(&self) -> DesignUnit {
        DesignUnit::from_text(self.id, self.design_path(), self.source).expect("bundled design parses")
    }

    pub fn annotations(&self) -> AnnotationSet {
        AnnotationSet::from_json_str(self.annotation, count_lines(self.source)).expect("bundled annotation is valid")
    }
}

pub fn bundled(id: &str) -> Option<&'static BundledDesign> {
    BUNDLED.iter().find(|b| b.id == id)
}
