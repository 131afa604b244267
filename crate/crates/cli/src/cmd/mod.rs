// SPDX-License-Identifier: Apache-2.0

pub mod detect;
pub mod equivcheck;
pub mod evaluate;
pub mod perturb;
pub mod record;
pub mod signatures;
