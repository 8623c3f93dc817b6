#pragma once

#include <cmath>
#include <numbers>

// Internal units: wavelength in nm, time in fs, angular frequency in rad/fs.
namespace spdc::units {

inline constexpr double speed_of_light = 299.792458;  // nm/fs
inline constexpr double two_pi_c = 2.0 * std::numbers::pi * speed_of_light;

/// FWHM = fwhm_per_sigma * standard deviation for a Gaussian.
inline const double fwhm_per_sigma = 2.0 * std::sqrt(2.0 * std::log(2.0));

inline double omega_from_wavelength(double lambda_nm) { return two_pi_c / lambda_nm; }
inline double wavelength_from_omega(double omega) { return two_pi_c / omega; }

/// |dω/dλ| at lambda_nm.
inline double omega_per_nm(double lambda_nm) { return two_pi_c / (lambda_nm * lambda_nm); }

/// Intensity standard deviation in rad/fs of a spectrum with the given
/// wavelength FWHM, linearised around its center.
inline double sigma_omega(double fwhm_nm, double center_nm) {
    return omega_per_nm(center_nm) * fwhm_nm / fwhm_per_sigma;
}

inline double fwhm_nm_from_sigma_omega(double sigma, double center_nm) {
    return sigma * fwhm_per_sigma / omega_per_nm(center_nm);
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace spdc::units
