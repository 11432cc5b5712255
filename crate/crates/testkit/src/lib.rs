//! Reference implementations and fixture generators used only by tests.
//!
//! The oracles here are written straight from the rules they check, with no
//! shared code paths into `lecturedeck-core` beyond its plain data types.

pub mod fixtures;
pub mod oracle;
