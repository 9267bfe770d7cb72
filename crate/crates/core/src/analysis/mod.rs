//! Checkable forms of the restricted-isometry machinery: RIP constants,
//! block coherence, the chaos matrix `C` and vector `v`, the three-term
//! expansion of `‖ΦD_ξx‖²`, Rademacher tail bounds and the parameter
//! formulas tying sparsity order and RIP level to `p`, `η` and `ε`.

pub mod estimates;
pub mod norms;
pub mod rip;
pub mod tails;
pub mod theorem;

pub use estimates::{
    disjoint_block_coherence, expansion_terms, expansion_terms_dense, max_disjoint_coherence,
    prop_c_check, prop_c_check_with_delta, prop_c_quantities, CoherenceScan, ExpansionTerms,
    PropCReport, DEFAULT_PAIR_CAP,
};
pub use norms::{frobenius_norm, spectral_norm, spectral_norm_power, spectral_norm_svd};
pub use rip::{
    rip_constant_exact, rip_constant_exact_with_cap, rip_constant_lower_bound,
    rip_upper_bound_gershgorin, support_distortion, RipEstimate, RipMethod,
};
pub use tails::{chaos_bound, hoeffding_bound, tail_check, TailCheck, TailInstance};
pub use theorem::{
    distortion, min_sparsity_for_points, proof_term_check, required_delta, ProofConditions,
    ProofTermReport, TheoremConstants,
};
