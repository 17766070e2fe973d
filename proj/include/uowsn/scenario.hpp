#pragma once

#include "uowsn/types.hpp"

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace uowsn {

enum class Role { Seabed, Relay, Buoy };

std::string_view to_string(Role r);
Role parse_role(std::string_view name);

/// Axis-aligned deployment box [0, extent] per axis. z is depth below the
/// surface, so z = 0 is the sea surface and z = extent.z() the seabed.
struct Region {
  Vec3 extent = Vec3::Constant(100.0);

  double depth() const { return extent.z(); }
  double diagonal() const { return extent.norm(); }
  bool contains(const Vec3& p, double slack = 1e-9) const {
    return (p.array() >= -slack).all() &&
           (p.array() <= extent.array() + slack).all();
  }
};

/// Ground-truth network. Nodes are stored seabed sensors first, then relays,
/// then buoys (anchors), so rows [0, m + n) are the unknowns.
struct Scenario {
  Positions positions;
  std::vector<Role> roles;
  int m = 0;
  int n = 0;
  int o = 0;
  Region region;
  double transmission_range = 80.0;
  std::uint64_t seed = 0;

  int size() const { return m + n + o; }
  int unknown_count() const { return m + n; }
  std::vector<int> anchor_indices() const;
  Positions anchors() const { return positions.bottomRows(o); }
  Positions unknowns() const { return positions.topRows(m + n); }

  /// Throws DomainError when counts, roles or positions are inconsistent.
  void validate() const;
};

/// Observation graph at the given range: pair (i, j) linked iff the true
/// distance is at most range.
MaskMatrix range_mask(const Positions& positions, double range);

/// Connected components of a symmetric mask, each sorted ascending.
std::vector<std::vector<int>> connected_components(const MaskMatrix& mask);

}  // namespace uowsn
