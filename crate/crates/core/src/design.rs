// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use crate::rtl::{self, ParseError, SourceFile, SyntaxTree};

/// One RTL source file with its parsed form.
#[derive(Debug, Clone)]
pub struct DesignUnit {
    pub id: String,
    pub file: SourceFile,
    pub tree: SyntaxTree,
}

impl DesignUnit {
    pub fn new(id: impl Into<String>, file: SourceFile) -> Result<Self, ParseError> {
        let tree = rtl::parse(&file)?;
        Ok(DesignUnit {
            id: id.into(),
            file,
            tree,
        })
    }

    pub fn from_text(id: impl Into<String>, path: impl AsRef<Path>, text: &str) -> Result<Self, ParseError> {
        DesignUnit::new(id, SourceFile::new(path.as_ref(), text))
    }

    /// Line count of the source.
    pub fn lines(&self) -> u32 {
        self.file.lines
    }
}
