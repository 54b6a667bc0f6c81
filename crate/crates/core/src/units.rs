//! Unit conventions and conversion constants.
//!
//! Time is measured in ns, angular rates in rad/ns, energies in μeV.

/// Reduced Planck constant in μeV·ns.
pub const HBAR_UEV_NS: f64 = 0.658212;

/// Convert an energy in μeV to an angular rate in rad/ns.
pub fn uev_to_rad_per_ns(energy_uev: f64) -> f64 {
    energy_uev / HBAR_UEV_NS
}

/// Convert an angular rate in rad/ns to an energy in μeV.
pub fn rad_per_ns_to_uev(rate: f64) -> f64 {
    rate * HBAR_UEV_NS
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uev_conversion_round_trips() {
        assert_relative_eq!(rad_per_ns_to_uev(uev_to_rad_per_ns(17.3)), 17.3, epsilon = 1e-12);
    }

    #[test]
    fn sixty_five_uev_in_angular_units() {
        // 65 μeV / ħ, the full Raman tuning span expressed as a detuning.
        let w = uev_to_rad_per_ns(65.0);
        assert_relative_eq!(w, 65.0 / HBAR_UEV_NS, epsilon = 1e-12);
        assert!((w - 98.75).abs() < 0.01, "expected ~98.75 rad/ns, got {w}");
    }
}
