#include "sparsereg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "sparsereg/error.hpp"

namespace sparsereg {

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

void ReportTree::add(const std::string& relative_path, std::string content) {
  if (relative_path.empty() || relative_path.front() == '/' ||
      relative_path.find("..") != std::string::npos)
    throw Error("report: invalid relative path '" + relative_path + "'");
  if (content.empty() || content.back() != '\n') content.push_back('\n');
  files_[relative_path] = std::move(content);
}

bool ReportTree::contains(const std::string& relative_path) const {
  return files_.count(relative_path) != 0;
}

const std::string& ReportTree::content(const std::string& relative_path) const {
  auto it = files_.find(relative_path);
  if (it == files_.end()) throw Error("report: no file '" + relative_path + "'");
  return it->second;
}

std::string ReportTree::manifest_json() const {
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [path, content] : files_) files[path] = sha256_hex(content);
  nlohmann::ordered_json j;
  j["files"] = files;
  return j.dump(2) + "\n";
}

void ReportTree::commit(const std::filesystem::path& destination) const {
  namespace fs = std::filesystem;
  const fs::path dest = fs::absolute(destination).lexically_normal();
  const fs::path parent = dest.parent_path();
  fs::create_directories(parent);
  std::random_device rd;
  fs::path staging;
  for (int attempt = 0;; ++attempt) {
    staging = parent / ("." + dest.filename().string() + ".staging-" + std::to_string(rd()));
    if (fs::create_directory(staging)) break;
    if (attempt > 16) throw Error("report: cannot create staging directory in " + parent.string());
  }
  try {
    for (const auto& [path, content] : files_) {
      const fs::path target = staging / path;
      fs::create_directories(target.parent_path());
      write_text_file(target, content);
    }
    write_text_file(staging / "manifest.json", manifest_json());
    if (fs::exists(dest)) fs::remove_all(dest);
    fs::rename(staging, dest);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sparsereg
