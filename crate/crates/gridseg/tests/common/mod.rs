#![allow(dead_code)]

pub mod cases;
pub mod lp_oracle;
