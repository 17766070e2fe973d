#pragma once

// Underwater optical channel: absorption, scattering and extinction of sea
// water, and the line-of-sight received power link budget.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uowsn {

enum class WaterPreset { PureSea, ClearOcean, Coastal, Harbor, Custom };

std::string_view to_string(WaterPreset p);
/// Accepts "pure-sea", "clear-ocean", "coastal", "harbor", "custom".
WaterPreset parse_water_preset(std::string_view name);

/// Absorption / scattering split of a preset water type at 532 nm (1/m).
struct PresetCoefficients {
  double absorption;
  double scattering;
  double extinction() const { return absorption + scattering; }
};

/// Fixed coefficients of the named presets. Throws DomainError for Custom.
PresetCoefficients preset_coefficients(WaterPreset p);

struct WaterModel {
  double lambda_nm = 532.0;
  /// Chlorophyll concentration (mg/m^3).
  double c_c = 0.0;
  /// Dissolved-matter concentration parameter, 0 <= c_e <= 12.
  double c_e = 0.0;
  double c_o = 1.0;
  WaterPreset preset = WaterPreset::Custom;
  /// Exponents of the fulvic / humic acid absorption terms (1/nm).
  double alpha_f = 0.0189;
  double alpha_h = 0.01105;
  /// Optional chlorophyll specific absorption curve (nm, m^2/mg), linearly
  /// interpolated; absent means no chlorophyll absorption.
  std::vector<std::pair<double, double>> chlorophyll_specific_absorption;
  /// Explicit absorption / scattering; replaces both the preset constants and
  /// the Haltrin model when set.
  std::optional<PresetCoefficients> preset_override;

  static WaterModel from_preset(WaterPreset p);

  /// Throws DomainError when a field violates its range.
  void validate() const;
};

struct OpticalLink {
  double p_t = 0.1;       // W (-10 dBW)
  double rho_t = 0.9;     // transmitter optical efficiency
  double rho_r = 0.9;     // receiver optical efficiency
  double theta_0 = 0.1745329251994330;  // divergence half-angle, rad (10 deg)
  double b_r = 0.01;      // receiver aperture area, m^2
  double theta = 0.0;     // trajectory angle between nodes, rad

  void validate() const;
  /// Geometric prefactor P_t rho_t rho_r B_r cos(theta) / (2 pi (1 - cos theta_0)).
  double prefactor() const;
};

namespace haltrin {
inline constexpr double kFulvicAbsorption = 35.959;  // m^2/mg
inline constexpr double kHumicAbsorption = 18.828;   // m^2/mg
}  // namespace haltrin

/// Pure-water absorption, tabulated over 400-700 nm. Throws OutOfRangeError
/// outside the table.
double pure_water_absorption(double lambda_nm);

double fulvic_concentration(double c_e, double c_o);
double humic_concentration(double c_e, double c_o);
double small_particle_concentration(double c_e, double c_o);
double large_particle_concentration(double c_e, double c_o);

/// Absorption b(lambda) = b_wa + b_ca + b_fa c_fa e^{-a_f l} + b_ha c_ha e^{-a_h l}.
/// Presets return their fixed absorption.
double absorption_coefficient(const WaterModel& w);
/// Scattering s(lambda) = s_ws + s_ss c_ss + s_sl c_ls.
/// Presets return their fixed scattering.
double scattering_coefficient(const WaterModel& w);
double extinction_coefficient(const WaterModel& w);

/// Received optical power (W) at distance d (m) through water with
/// extinction e (1/m). Throws DomainError for d <= 0.
double received_power(const OpticalLink& link, double extinction, double d);

inline double to_dbw(double watts) { return 10.0 * std::log10(watts); }

}  // namespace uowsn
