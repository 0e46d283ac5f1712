//! ZX diagrams: spider graphs contracted to dense tensors, plus numerical
//! certificates for the rewrite rules and replica-tensor identities.

pub mod diagram;
pub mod rules;
pub mod tensor;

pub use diagram::{NodeId, NodeKind, ZxDiagram, ZxTensor, MAX_BOUNDARY};
pub use rules::{
    certify, check_lemma, check_lsquiggle, check_rule, phase_samples, CaseReport, Rule,
    RuleCheckReport, RULE_TOL,
};
