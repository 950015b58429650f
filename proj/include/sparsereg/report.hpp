#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace sparsereg {

/// Six significant digits ("%.6g"), with negative zero printed as "0".
std::string format_number(double value);

std::string sha256_hex(std::string_view data);

/// In-memory report tree committed to disk in one step: files are written to
/// a sibling staging directory which is renamed over the destination only
/// once everything is on disk. A failed commit leaves no destination behind.
class ReportTree {
 public:
  /// Adds a file; content gets a trailing newline if it lacks one.
  void add(const std::string& relative_path, std::string content);
  bool contains(const std::string& relative_path) const;
  const std::string& content(const std::string& relative_path) const;
  const std::map<std::string, std::string>& files() const { return files_; }

  /// {"files": {path: sha256}} over every file added so far, sorted by path.
  std::string manifest_json() const;

  /// Writes all files plus manifest.json under `destination`, replacing any
  /// existing directory there.
  void commit(const std::filesystem::path& destination) const;

 private:
  std::map<std::string, std::string> files_;
};

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sparsereg
