#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bowen/systems.hpp"

namespace bowen::detail {

// Uniform grid hash over up to four axes (16 bits each). Periodic axes have
// period one; the effective cell side is never below 1/4096 nor below the
// requested radius, so neighbours within `radius` per axis sit in adjacent cells.
class CellIndex {
 public:
  static constexpr int kMaxAxes = 4;

  CellIndex(const std::vector<bool>& periodic, double radius) : periodic_(periodic) {
    const double r = std::max(radius, 1.0 / 4096.0);
    m_ = std::max(1, static_cast<int>(std::floor(1.0 / r)));
    side_ = r;
  }

  int axes() const { return static_cast<int>(periodic_.size()); }

  std::uint64_t key(const double* c) const {
    std::uint64_t k = 0;
    for (int a = 0; a < axes(); ++a) k = (k << 16) | static_cast<std::uint16_t>(cell(a, c[a]));
    return k;
  }

  // Keys of the 3^axes block around c, without duplicates.
  void neighbor_keys(const double* c, std::vector<std::uint64_t>& out) const {
    out.clear();
    out.push_back(0);
    for (int a = 0; a < axes(); ++a) {
      const int base = cell(a, c[a]);
      int cand[3];
      int nc = 0;
      for (int d = -1; d <= 1; ++d) {
        int v = base + d;
        if (periodic_[static_cast<std::size_t>(a)]) v = ((v % m_) + m_) % m_;
        bool dup = false;
        for (int i = 0; i < nc; ++i) dup = dup || cand[i] == v;
        if (!dup) cand[nc++] = v;
      }
      const std::size_t prev = out.size();
      std::vector<std::uint64_t> next;
      next.reserve(prev * static_cast<std::size_t>(nc));
      for (std::size_t i = 0; i < prev; ++i)
        for (int j = 0; j < nc; ++j) next.push_back((out[i] << 16) | static_cast<std::uint16_t>(cand[j]));
      out.swap(next);
    }
  }

  void insert(std::uint64_t k, std::uint32_t idx) { cells_[k].push_back(idx); }

  const std::vector<std::uint32_t>* find(std::uint64_t k) const {
    auto it = cells_.find(k);
    return it == cells_.end() ? nullptr : &it->second;
  }

  void clear() { cells_.clear(); }

 private:
  int cell(int a, double x) const {
    if (periodic_[static_cast<std::size_t>(a)]) {
      int c = static_cast<int>(std::floor(x * m_));
      return ((c % m_) + m_) % m_;
    }
    const long c = static_cast<long>(std::floor(x / side_)) + 32768;
    return static_cast<int>(std::clamp(c, 0L, 65535L));
  }

  std::vector<bool> periodic_;
  int m_ = 1;
  double side_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace bowen::detail
