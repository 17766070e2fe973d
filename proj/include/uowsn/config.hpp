#pragma once

// INI configuration shared by every CLI subcommand. Sections: water, link,
// noise, solver, placement, sim. Unknown sections or keys are rejected.

#include "uowsn/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace uowsn {

struct AppConfig {
  ExperimentSetup setup;
  int runs = 100;
  int case_id = 4;
  /// True when the file has a [water] section; channel-curve then plots that
  /// single water instead of the four presets.
  bool water_given = false;

  /// Checks every part against its module's invariants; throws ConfigError.
  void validate() const;
};

/// Parses INI text. `source` names the origin in error messages.
AppConfig parse_config(std::istream& in, const std::string& source = "config");

/// Throws IoError for a missing file, ConfigError for bad content.
AppConfig load_config(const std::filesystem::path& path);

}  // namespace uowsn
