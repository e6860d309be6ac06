//! Rate certificates, trajectory checkers and the numeric oracles they
//! depend on.

mod certificate;
mod checks;
mod lemmas;
mod psi;

pub use certificate::{certificate, CertificateKind, RateCertificate};
pub use checks::{
    check_monotone, check_rate, reports_to_csv, reports_to_text, CheckReport, CheckRow,
};
pub use lemmas::{
    adagrad_oracle, bregman, perspective_convexity_probe, positive_part_ratio, titu_oracle,
};
pub use psi::{psi, psi_inv};
