#![allow(dead_code)]

pub mod evaluation;
pub mod golden;
pub mod parsing;
pub mod privacy;
pub mod properties;
pub mod service;
