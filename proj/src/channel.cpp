#include "uowsn/channel.hpp"

#include "uowsn/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace uowsn {

namespace {

// Pure water absorption (1/m) at 10 nm spacing, Pope & Fry (1997).
constexpr double kTableStart = 400.0;
constexpr double kTableStep = 10.0;
constexpr std::array<double, 31> kPureWater = {
    0.00663, 0.00473, 0.00454, 0.00495, 0.00635, 0.00922, 0.00979, 0.01060,
    0.01270, 0.01500, 0.02040, 0.03250, 0.04090, 0.04170, 0.04340, 0.05650,
    0.06190, 0.06950, 0.08960, 0.13510, 0.22240, 0.26440, 0.27550, 0.29160,
    0.31080, 0.34000, 0.41000, 0.43900, 0.46500, 0.51600, 0.62400};

double interpolate(const std::vector<std::pair<double, double>>& curve,
                   double x) {
  if (curve.empty()) return 0.0;
  if (x <= curve.front().first) return curve.front().second;
  if (x >= curve.back().first) return curve.back().second;
  auto hi = std::upper_bound(
      curve.begin(), curve.end(), x,
      [](double v, const std::pair<double, double>& p) { return v < p.first; });
  auto lo = hi - 1;
  const double t = (x - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

}  // namespace

std::string_view to_string(WaterPreset p) {
  switch (p) {
    case WaterPreset::PureSea: return "pure-sea";
    case WaterPreset::ClearOcean: return "clear-ocean";
    case WaterPreset::Coastal: return "coastal";
    case WaterPreset::Harbor: return "harbor";
    case WaterPreset::Custom: return "custom";
  }
  return "custom";
}

WaterPreset parse_water_preset(std::string_view name) {
  for (auto p : {WaterPreset::PureSea, WaterPreset::ClearOcean,
                 WaterPreset::Coastal, WaterPreset::Harbor,
                 WaterPreset::Custom}) {
    if (to_string(p) == name) return p;
  }
  throw DomainError("unknown water preset '" + std::string(name) + "'");
}

PresetCoefficients preset_coefficients(WaterPreset p) {
  // Absorption and scattering at 532 nm (Mobley lineage as used by Arnon).
  switch (p) {
    case WaterPreset::PureSea: return {0.053, 0.003};
    case WaterPreset::ClearOcean: return {0.114, 0.037};
    case WaterPreset::Coastal: return {0.088, 0.217};
    case WaterPreset::Harbor: return {0.295, 1.875};
    case WaterPreset::Custom: break;
  }
  throw DomainError("custom water has no preset coefficients");
}

WaterModel WaterModel::from_preset(WaterPreset p) {
  WaterModel w;
  w.preset = p;
  return w;
}

void WaterModel::validate() const {
  if (!(c_e >= 0.0 && c_e <= 12.0))
    throw DomainError("water: c_e must lie in [0, 12]");
  if (!(c_o > 0.0)) throw DomainError("water: c_o must be positive");
  if (!(c_c >= 0.0)) throw DomainError("water: c_c must be nonnegative");
  if (!(lambda_nm > 0.0)) throw DomainError("water: wavelength must be positive");
  if (!(alpha_f >= 0.0 && alpha_h >= 0.0))
    throw DomainError("water: alpha_f and alpha_h must be nonnegative");
  if (preset_override) {
    if (!(preset_override->absorption >= 0.0 &&
          preset_override->scattering >= 0.0))
      throw DomainError("water: preset coefficients must be nonnegative");
  }
}

void OpticalLink::validate() const {
  if (!(p_t > 0.0)) throw DomainError("link: p_t must be positive");
  if (!(rho_t > 0.0 && rho_t <= 1.0) || !(rho_r > 0.0 && rho_r <= 1.0))
    throw DomainError("link: optical efficiencies must lie in (0, 1]");
  if (!(theta_0 > 0.0 && theta_0 < std::numbers::pi / 2))
    throw DomainError("link: theta_0 must lie in (0, pi/2)");
  if (!(b_r > 0.0)) throw DomainError("link: b_r must be positive");
  if (!(theta >= 0.0 && theta < std::numbers::pi / 2))
    throw DomainError("link: theta must lie in [0, pi/2)");
}

double OpticalLink::prefactor() const {
  return p_t * rho_t * rho_r * b_r * std::cos(theta) /
         (2.0 * std::numbers::pi * (1.0 - std::cos(theta_0)));
}

double pure_water_absorption(double lambda_nm) {
  const double last = kTableStart + kTableStep * (kPureWater.size() - 1);
  if (!(lambda_nm >= kTableStart && lambda_nm <= last))
    throw OutOfRangeError("pure water absorption is tabulated over 400-700 nm");
  const double pos = (lambda_nm - kTableStart) / kTableStep;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos),
                                       kPureWater.size() - 2);
  const double t = pos - static_cast<double>(i);
  return kPureWater[i] + t * (kPureWater[i + 1] - kPureWater[i]);
}

double fulvic_concentration(double c_e, double c_o) {
  return 1.74098 * c_e * std::exp(0.12327 * c_e / c_o);
}

double humic_concentration(double c_e, double c_o) {
  return 0.19334 * c_e * std::exp(0.12343 * c_e / c_o);
}

double small_particle_concentration(double c_e, double c_o) {
  return 0.01739 * c_e * std::exp(0.11631 * c_e / c_o);
}

double large_particle_concentration(double c_e, double c_o) {
  return c_e * std::exp(0.03092 * c_e / c_o);
}

double absorption_coefficient(const WaterModel& w) {
  w.validate();
  if (w.preset_override) return w.preset_override->absorption;
  if (w.preset != WaterPreset::Custom)
    return preset_coefficients(w.preset).absorption;
  const double l = w.lambda_nm;
  const double chlorophyll =
      w.c_c * interpolate(w.chlorophyll_specific_absorption, l);
  return pure_water_absorption(l) + chlorophyll +
         haltrin::kFulvicAbsorption * fulvic_concentration(w.c_e, w.c_o) *
             std::exp(-w.alpha_f * l) +
         haltrin::kHumicAbsorption * humic_concentration(w.c_e, w.c_o) *
             std::exp(-w.alpha_h * l);
}

double scattering_coefficient(const WaterModel& w) {
  w.validate();
  if (w.preset_override) return w.preset_override->scattering;
  if (w.preset != WaterPreset::Custom)
    return preset_coefficients(w.preset).scattering;
  const double ratio = 400.0 / w.lambda_nm;
  const double s_ws = 0.005826 * std::pow(ratio, 4.322);
  const double s_ss = 1.151302 * std::pow(ratio, 1.7);
  const double s_sl = 0.341074 * std::pow(ratio, 0.3);
  return s_ws + s_ss * small_particle_concentration(w.c_e, w.c_o) +
         s_sl * large_particle_concentration(w.c_e, w.c_o);
}

double extinction_coefficient(const WaterModel& w) {
  return absorption_coefficient(w) + scattering_coefficient(w);
}

double received_power(const OpticalLink& link, double extinction, double d) {
  if (!(d > 0.0)) throw DomainError("received_power: distance must be positive");
  const double cos_theta = std::cos(link.theta);
  return link.prefactor() * std::exp(-extinction * d / cos_theta) / (d * d);
}

}  // namespace uowsn
