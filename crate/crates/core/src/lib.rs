#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brackets;
pub mod catalog;
pub mod cli;
pub mod engine;
pub mod integrand;
pub mod jet;
pub mod oracle;
pub mod rational;
pub mod report;
pub mod series;
pub mod special;
