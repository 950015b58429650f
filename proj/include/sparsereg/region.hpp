#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sparsereg {

enum class Region { left_hemisphere, corpus_callosum, right_hemisphere };

inline constexpr std::array<Region, 3> kRegions{Region::left_hemisphere, Region::corpus_callosum,
                                                Region::right_hemisphere};

/// Short code used in file names and partition files: LB, CC, RB.
std::string_view region_code(Region region);
Region parse_region(std::string_view text);

/// Assignment of FA response columns to brain regions.
struct RegionPartition {
  std::vector<std::pair<std::string, Region>> entries;  // file order

  std::vector<std::string> columns(Region region) const;
  std::array<std::size_t, 3> counts() const;
};

inline constexpr std::array<std::size_t, 3> kDefaultRegionCounts{23, 11, 23};

/// Reads the two-column CSV (response_name, region). When `expected` is
/// given, the per-region counts must match it.
RegionPartition parse_partition_csv(std::string_view text,
                                    const std::array<std::size_t, 3>* expected = &kDefaultRegionCounts);
RegionPartition load_partition(const std::string& path,
                               const std::array<std::size_t, 3>* expected = &kDefaultRegionCounts);
std::string partition_csv(const RegionPartition& partition);

}  // namespace sparsereg
