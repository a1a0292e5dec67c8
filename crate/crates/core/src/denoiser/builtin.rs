//! Rate-1/2 (3,6)-regular codes shipped with the crate, regenerated by
//! `cargo run --example gen_codes`.

use super::{parse_alist, read_alist, LdpcCode};
use crate::error::{Error, Result};

const CODES: &[(&str, &str)] = &[
    ("r12-n128", include_str!("../../codes/r12-n128.alist")),
    ("r12-n256", include_str!("../../codes/r12-n256.alist")),
    ("r12-n512", include_str!("../../codes/r12-n512.alist")),
    ("r12-n1056", include_str!("../../codes/r12-n1056.alist")),
    ("r12-n2304", include_str!("../../codes/r12-n2304.alist")),
];

pub const PREFIX: &str = "builtin:";

/// Names accepted after `builtin:`.
pub fn ids() -> impl Iterator<Item = &'static str> {
    CODES.iter().map(|(id, _)| *id)
}

/// Raw alist text of a bundled code.
pub fn alist_text(id: &str) -> Option<&'static str> {
    CODES.iter().find(|(name, _)| *name == id).map(|(_, text)| *text)
}

pub fn builtin(id: &str) -> Result<LdpcCode> {
    let text = alist_text(id).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown builtin code {id:?}; available: {}",
            ids().collect::<Vec<_>>().join(", ")
        ))
    })?;
    parse_alist(text)
}

/// Resolves `builtin:<id>` or a path to an alist file.
pub fn load_code(spec: &str) -> Result<LdpcCode> {
    match spec.strip_prefix(PREFIX) {
        Some(id) => builtin(id),
        None => read_alist(std::path::Path::new(spec)),
    }
}
