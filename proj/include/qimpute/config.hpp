// Copyright 2026 The qimpute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qimpute {

/// Flat `key = value` configuration with dotted section names
/// (e.g. `train.lr = 1e-3`). '#' starts a comment.
class KeyValueConfig {
  public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
    bool has(std::string_view key) const { return values_.find(key) != values_.end(); }
    std::optional<std::string> get(std::string_view key) const;

    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
    /// Comma-separated list.
    std::vector<std::string> get_list(std::string_view key,
                                      std::vector<std::string> fallback) const;

    /// Throws std::invalid_argument naming the first key not in `known`.
    void check_keys(const std::set<std::string, std::less<>>& known) const;

    const std::map<std::string, std::string, std::less<>>& values() const noexcept {
        return values_;
    }

  private:
    std::map<std::string, std::string, std::less<>> values_;
};

} // namespace qimpute
