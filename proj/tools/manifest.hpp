#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace vsa_cli {

/// Sorted key=value run record written next to the outputs of every subcommand.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }

  /// Adds `<prefix>.<name>=sha256:<hex>` for the file.
  void digest(const std::string& prefix, const std::filesystem::path& file);
  void write(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> entries_;
};

std::string sha256_hex(const std::filesystem::path& file);

}  // namespace vsa_cli
