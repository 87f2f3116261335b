//! Virasoro-side constructions on normalized univalent maps.
//!
//! Basis convention: `ν_k = -i e^{ikθ}`. On this basis the Witt bracket is
//! `[ν_m, ν_n] = (n - m) ν_{m+n}` and the Gelfand-Fuks cocycle is
//! `ω(ν_m, ν_{-m}) = (-i/2) m(m²-1)`; see [`NU_BASIS_CENTRAL_CONSTANT`].

mod field;
mod neretin;
mod polynomial;
mod variation;

pub use field::{
    gelfand_fuks, normalized_mode_central, virasoro_bracket, witt_bracket, CircleVectorField, VirasoroElement,
    EXPONENTIAL_CENTRAL_CONSTANT, NU_BASIS_CENTRAL_CONSTANT,
};
pub use neretin::{
    bieberbach_functionals, neretin_generatrix, neretin_recursion, neretin_recursion_exact, psi_pairing,
    BieberbachFunctionals,
};
pub use polynomial::{
    kirillov_coordinate_operator, monomial_weight, monomials_of_weight, Coefficient, CoordinatePolynomial, Monomial,
    TermRecord,
};
pub use variation::{
    closed_form_variation, goluzin_schiffer, variation_coefficients, variation_commutator, variation_residue,
    ContourSettings,
};

/// Default central charge.
pub const DEFAULT_CHARGE: f64 = 1.0;
