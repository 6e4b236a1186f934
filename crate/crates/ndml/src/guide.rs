//! The chapters of the guide in `book/`, compiled here so their code
//! blocks run as documentation tests and stay in sync with the library.

#[doc = include_str!("../../../book/src/language.md")]
pub mod language {}

#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}

#[doc = include_str!("../../../book/src/checking.md")]
pub mod checking {}

#[doc = include_str!("../../../book/src/display.md")]
pub mod display {}

#[doc = include_str!("../../../book/src/cut-elimination.md")]
pub mod cut_elimination {}

#[doc = include_str!("../../../book/src/semantics.md")]
pub mod semantics {}

#[doc = include_str!("../../../book/src/correspondence.md")]
pub mod correspondence {}
