#include "sparsereg/region.hpp"

#include <set>
#include <sstream>

#include "sparsereg/error.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

std::string_view region_code(Region region) {
  switch (region) {
    case Region::left_hemisphere: return "LB";
    case Region::corpus_callosum: return "CC";
    case Region::right_hemisphere: return "RB";
  }
  return "LB";
}

Region parse_region(std::string_view text) {
  if (text == "LB" || text == "LeftHemisphere") return Region::left_hemisphere;
  if (text == "CC" || text == "CorpusCallosum") return Region::corpus_callosum;
  if (text == "RB" || text == "RightHemisphere") return Region::right_hemisphere;
  throw DataError("unknown region '" + std::string(text) + "'");
}

std::vector<std::string> RegionPartition::columns(Region region) const {
  std::vector<std::string> out;
  for (const auto& [name, r] : entries)
    if (r == region) out.push_back(name);
  return out;
}

std::array<std::size_t, 3> RegionPartition::counts() const {
  std::array<std::size_t, 3> c{0, 0, 0};
  for (const auto& [name, r] : entries) ++c[static_cast<std::size_t>(r)];
  return c;
}

RegionPartition parse_partition_csv(std::string_view text,
                                    const std::array<std::size_t, 3>* expected) {
  RegionPartition partition;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("partition line " + std::to_string(line_no) + ": expected two fields");
    const std::string name = line.substr(0, comma);
    const std::string region = line.substr(comma + 1);
    if (line_no == 1 && name == "response_name") continue;
    if (!seen.insert(name).second)
      throw DataError("partition: response '" + name + "' listed twice");
    partition.entries.emplace_back(name, parse_region(region));
  }
  if (expected) {
    const auto c = partition.counts();
    if (c != *expected)
      throw DataError("partition counts (" + std::to_string(c[0]) + "," + std::to_string(c[1]) +
                      "," + std::to_string(c[2]) + ") do not match expected (" +
                      std::to_string((*expected)[0]) + "," + std::to_string((*expected)[1]) +
                      "," + std::to_string((*expected)[2]) + ")");
  }
  return partition;
}

RegionPartition load_partition(const std::string& path,
                               const std::array<std::size_t, 3>* expected) {
  return parse_partition_csv(read_text_file(path), expected);
}

std::string partition_csv(const RegionPartition& partition) {
  std::string out = "response_name,region\n";
  for (const auto& [name, r] : partition.entries)
    out += name + "," + std::string(region_code(r)) + "\n";
  return out;
}

}  // namespace sparsereg
