//! Rational points of missing-digit Cantor sets: exact membership, intrinsic
//! Dirichlet approximation with checkable certificates, denominator census,
//! and approximation-quality experiments.

pub mod budget;
pub mod census;
pub mod dirichlet;
pub mod error;
pub mod expansion;
pub mod forms;
pub mod lab;
pub mod membership;
pub mod rational;
pub mod scheme;
pub mod stream;

pub use budget::Budget;
pub use census::{CensusOptions, CensusRecord, Convention, PhiValue, Strategy};
pub use dirichlet::{
    dirichlet_approx, verify_certificate, ApproxCertificate, Check, Collision, Ladder,
};
pub use error::{Error, Result};
pub use expansion::ExpansionAnalysis;
pub use membership::{is_member, MembershipWitness, Verdict};
pub use rational::BigRational;
pub use scheme::CantorScheme;
pub use stream::{Approximand, DigitStream, StreamSpec};
