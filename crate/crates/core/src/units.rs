//! Unit system used throughout the crate: energy in eV, time in fs,
//! length in Å. Mass therefore carries units of eV·fs²/Å².

/// Reduced Planck constant in eV·fs.
pub const HBAR: f64 = 0.658_211_956_9;

/// Speed of light in Å/fs.
pub const SPEED_OF_LIGHT: f64 = 2_997.924_58;

/// Room temperature thermal energy (300 K) in eV.
pub const KT_ROOM: f64 = 0.0259;

/// Converts a rest energy given in MeV (i.e. a mass in MeV/c²) to eV·fs²/Å².
pub fn mass_from_mev(rest_energy_mev: f64) -> f64 {
    rest_energy_mev * 1.0e6 / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

/// The 938 MeV/c² particle mass used by every experiment in the catalog.
pub fn proton_like_mass() -> f64 {
    mass_from_mev(938.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_conversion_matches_hand_calculation() {
        // 1 MeV/c² = 1e6 eV / (2.99792458e18 Å/s)² ; 1 s² = 1e30 fs²
        let c_si = 2.997_924_58e18_f64; // Å/s
        let mass_ev_s2_per_a2 = 938.0e6 / (c_si * c_si);
        let oracle = mass_ev_s2_per_a2 * 1.0e30;
        assert!((proton_like_mass() - oracle).abs() < 1e-9 * oracle);
        assert!((proton_like_mass() - 104.39).abs() < 0.05);
    }
}
