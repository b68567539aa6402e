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
#include "qimpute/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qimpute/error.hpp"

namespace qimpute {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw LoadError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty())
            throw LoadError("config line " + std::to_string(line_no) + ": empty key");
        cfg.set(std::move(key), trim(std::string_view(t).substr(eq + 1)));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str());
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
    auto v = get(key);
    return v ? *v : std::move(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size() || !std::isfinite(out))
        throw std::invalid_argument("config key '" + std::string(key) + "': '" + *v +
                                    "' is not a number");
    return out;
}

std::uint64_t KeyValueConfig::get_uint(std::string_view key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size())
        throw std::invalid_argument("config key '" + std::string(key) + "': '" + *v +
                                    "' is not a non-negative integer");
    return out;
}

std::vector<std::string> KeyValueConfig::get_list(std::string_view key,
                                                  std::vector<std::string> fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    std::string_view rest = *v;
    while (true) {
        const auto comma = rest.find(',');
        std::string item = trim(rest.substr(0, comma));
        if (!item.empty()) out.push_back(std::move(item));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

void KeyValueConfig::check_keys(const std::set<std::string, std::less<>>& known) const {
    for (const auto& [k, v] : values_)
        if (known.find(k) == known.end())
            throw std::invalid_argument("unknown config key '" + k + "'");
}

} // namespace qimpute
