// SPDX-License-Identifier: Apache-2.0

//! Manifest samples loaded, parsed and optionally perturbed.

use std::path::PathBuf;

use anyhow::{Context, Result};
use trojanlens::annotations::AnnotationSet;
use trojanlens::design::DesignUnit;
use trojanlens::perturb::{perturb, remap_annotations, PerturbResult};
use trojanlens::rtl::SourceFile;

use crate::artifacts::load_design;
use crate::config::Config;
use crate::manifest::SampleSpec;

pub struct Prepared {
    pub design: DesignUnit,
    pub annotations: AnnotationSet,
    /// Present when the sample was perturbed before detection.
    pub perturbed: Option<PerturbResult>,
}

/// Design ids come from the annotation file. A seeded sample is perturbed
/// with the config's passes and density, and its ground truth is carried
/// across the line map.
pub fn prepare(spec: &SampleSpec, cfg: &Config) -> Result<Prepared> {
    let ann_text = std::fs::read_to_string(&spec.annotations)
        .with_context(|| format!("reading {}", spec.annotations.display()))?;
    let original = load_design(&spec.design, "")?;
    let mut annotations = AnnotationSet::from_json_str(&ann_text, original.lines())
        .with_context(|| format!("annotations {}", spec.annotations.display()))?;
    let mut design = original;
    design.id = annotations.design_id.clone();
    let Some(seed) = spec.perturb_seed else {
        return Ok(Prepared {
            design,
            annotations,
            perturbed: None,
        });
    };
    let pc = cfg.perturb_config(Some(seed), None, None)?;
    let res = perturb(&design, &pc).with_context(|| format!("perturbing {}", spec.design.display()))?;
    annotations = remap_annotations(&annotations, &res.line_map)
        .with_context(|| format!("remapping {}", spec.annotations.display()))?;
    annotations.source = PathBuf::from("design.v");
    let design = DesignUnit::new(
        design.id.clone(),
        SourceFile::new(spec.design.clone(), res.perturbed.text.clone()),
    )
    .context("reparsing the perturbed design")?;
    Ok(Prepared {
        design,
        annotations,
        perturbed: Some(res),
    })
}

pub fn prepare_all(specs: &[SampleSpec], cfg: &Config) -> Result<Vec<Prepared>> {
    specs.iter().map(|s| prepare(s, cfg)).collect()
}
