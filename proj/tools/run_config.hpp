// Copyright 2026 The segan-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace segan::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Source { kDefault, kFile, kFlag };

const char* to_string(Source s) noexcept;

// Dotted-key settings ("train.lr") resolved as flag > file > default. Keys
// must be declared before they can be set from any source.
class RunConfig {
 public:
  void declare(const std::string& key, const std::string& default_value, const std::string& help);
  bool has(const std::string& key) const { return entries_.contains(key); }
  const std::string& help(const std::string& key) const;
  const std::string& default_value(const std::string& key) const;

  // key=value lines; blank lines and '#' comments (full-line or trailing)
  // are ignored. Throws ConfigError on unknown keys, duplicates or lines
  // without '=', naming the file and line.
  void load_file(const std::filesystem::path& path);
  void load_string(const std::string& text, const std::string& origin = "<string>");

  void set_flag(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  Source source(const std::string& key) const;

  // Typed accessors; throw ConfigError naming the key on malformed values.
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated
  std::vector<std::size_t> get_size_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // Keys under `sections` (all keys when empty) as "key = value (source)".
  void dump(std::ostream& out, const std::vector<std::string>& sections = {}) const;

  std::vector<std::string> keys() const;

 private:
  struct Entry {
    std::string default_value;
    std::string help;
    std::string file_value;
    std::string flag_value;
    Source source = Source::kDefault;
  };
  const Entry& entry(const std::string& key) const;
  Entry& entry(const std::string& key);

  std::map<std::string, Entry> entries_;
};

// Every setting the command line understands, with built-in defaults.
RunConfig default_run_config();

}  // namespace segan::cli
