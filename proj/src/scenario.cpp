#include "uowsn/scenario.hpp"

#include <algorithm>
#include <string>

namespace uowsn {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Seabed: return "seabed";
    case Role::Relay: return "relay";
    case Role::Buoy: return "buoy";
  }
  return "relay";
}

Role parse_role(std::string_view name) {
  for (auto r : {Role::Seabed, Role::Relay, Role::Buoy})
    if (to_string(r) == name) return r;
  throw DomainError("unknown node role '" + std::string(name) + "'");
}

std::vector<int> Scenario::anchor_indices() const {
  std::vector<int> idx(o);
  for (int k = 0; k < o; ++k) idx[k] = m + n + k;
  return idx;
}

void Scenario::validate() const {
  if (m < 0 || n < 0 || o < 0) throw DomainError("scenario: negative node count");
  const int total = size();
  if (positions.rows() != total || static_cast<int>(roles.size()) != total)
    throw DomainError("scenario: m + n + o does not match the node arrays");
  for (int i = 0; i < total; ++i) {
    const Role expected = i < m ? Role::Seabed
                          : i < m + n ? Role::Relay
                                      : Role::Buoy;
    if (roles[i] != expected)
      throw DomainError("scenario: nodes must be ordered seabed, relay, buoy");
    if (!positions.row(i).allFinite())
      throw DomainError("scenario: non-finite position at node " +
                        std::to_string(i));
    if (!region.contains(positions.row(i).transpose()))
      throw DomainError("scenario: node " + std::to_string(i) +
                        " lies outside the region");
  }
  if (!(transmission_range >= 0.0))
    throw DomainError("scenario: transmission range must be nonnegative");
  if (!(region.extent.array() > 0.0).all())
    throw DomainError("scenario: region must be nonempty");
}

MaskMatrix range_mask(const Positions& positions, double range) {
  const auto n = positions.rows();
  MaskMatrix mask = MaskMatrix::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool linked = (positions.row(i) - positions.row(j)).norm() <= range;
      mask(i, j) = mask(j, i) = linked;
    }
  }
  return mask;
}

std::vector<std::vector<int>> connected_components(const MaskMatrix& mask) {
  const int n = static_cast<int>(mask.rows());
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      components[id].push_back(u);
      for (int v = 0; v < n; ++v) {
        if (mask(u, v) && label[v] < 0) {
          label[v] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(components[id].begin(), components[id].end());
  }
  return components;
}

}  // namespace uowsn
