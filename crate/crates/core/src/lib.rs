//! Certified computations in relatively free nil algebras.

pub mod lincomb;
pub mod linalg;
pub mod relations;
pub mod rewrite;
pub mod scalar;
pub mod word;
pub mod certificate;
pub mod oracle;
pub mod functionals;
pub mod nilpotency;
pub mod sigma;
pub mod decomp;
pub mod report;
pub mod cache;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/words.md")]
    mod words {}
    #[doc = include_str!("../../../book/src/zero-tests.md")]
    mod zero_tests {}
    #[doc = include_str!("../../../book/src/nilpotency.md")]
    mod nilpotency {}
    #[doc = include_str!("../../../book/src/traces.md")]
    mod traces {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
