//! Tools for controllable sentence simplification: corpus loading and
//! splitting, control-token annotation, automatic metrics, search over
//! control values, and human-evaluation bookkeeping.
//!
//! ```
//! use simpkit::metrics::sari;
//!
//! let src = "the physician administered the medication";
//! let refs = ["the doctor gave the medicine"];
//! assert!(sari(src, "the doctor gave the medicine", &refs)? > sari(src, src, &refs)?);
//! # Ok::<(), simpkit::Error>(())
//! ```

pub mod agreement;
pub mod bridge;
pub mod conllu;
pub mod control_tokens;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod search;
pub mod text;

pub use error::{Error, ErrorKind, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/control-tokens.md")]
    mod control_tokens {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/agreement.md")]
    mod agreement {}
    #[doc = include_str!("../../../book/src/bridge.md")]
    mod bridge {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
