//! Unit conventions: lengths in nm, energies in keV, angles in mrad, rates in
//! units of the natural linewidth. Photon energies become wavenumbers through
//! `hbar c`.

/// `hbar c` in eV nm.
pub const HBAR_C_EV_NM: f64 = 197.3269804;

/// `hbar c` in keV nm.
pub const HBAR_C_KEV_NM: f64 = HBAR_C_EV_NM * 1e-3;

/// Vacuum wavenumber (nm^-1) of a photon with energy `omega` (keV).
#[inline]
pub fn energy_to_wavenumber(omega_kev: f64) -> f64 {
    omega_kev / HBAR_C_KEV_NM
}

/// Photon energy (keV) for a vacuum wavelength in nm.
#[inline]
pub fn wavelength_to_energy(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * HBAR_C_KEV_NM / lambda_nm
}

#[inline]
pub fn mrad_to_rad(theta: f64) -> f64 {
    theta * 1e-3
}

/// Normal incidence, in mrad.
pub const NORMAL_INCIDENCE_MRAD: f64 = std::f64::consts::FRAC_PI_2 * 1e3;
