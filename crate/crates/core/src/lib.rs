//! Approximation algorithms for facility location with penalties, concave
//! connection costs and star inventory routing, plus exact oracles and a
//! factor-revealing program laboratory.

pub mod instances;
pub mod lp;
pub mod jms;
pub mod lotsizing;
pub mod reductions;
pub mod oracle;
pub mod frlp;
