// SPDX-License-Identifier: Apache-2.0
//
// cransim - link-level simulator for C-RAN uplink multiuser detection
// Copyright (C) 2026 the cransim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "types.hpp"

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace cransim {

/// Flat `key = value` configuration file. Lines starting with '#' (and
/// everything after an inline '#') are comments; blank lines are ignored.
class ConfigMap {
  public:
    static ConfigMap parse(std::istream& in)
    {
        ConfigMap cfg;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            std::string trimmed = trim(line);
            if (trimmed.empty())
                continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static ConfigMap parse_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file: " + path);
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing config key: " + key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const
    {
        if (!has(key))
            return fallback;
        return to_double(key, get_string(key));
    }

    long long get_int(const std::string& key, long long fallback) const
    {
        if (!has(key))
            return fallback;
        const std::string& s = get_string(key);
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not an integer: " + s);
        }
        if (pos != s.size())
            throw ConfigError("config key " + key + ": not an integer: " + s);
        return v;
    }

    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const
    {
        if (!has(key))
            return fallback;
        const std::string& s = get_string(key);
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not an unsigned integer: " + s);
        }
        if (pos != s.size())
            throw ConfigError("config key " + key + ": not an unsigned integer: " + s);
        return v;
    }

    /// Comma-separated list of tokens; empty value yields an empty list.
    std::vector<std::string> get_list(const std::string& key) const
    {
        std::vector<std::string> out;
        if (!has(key))
            return out;
        std::stringstream ss(get_string(key));
        std::string token;
        while (std::getline(ss, token, ',')) {
            token = trim(token);
            if (!token.empty())
                out.push_back(token);
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& token : get_list(key))
            out.push_back(to_double(key, token));
        return out;
    }

  private:
    static std::string trim(const std::string& s)
    {
        auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos)
            return {};
        auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    static double to_double(const std::string& key, const std::string& s)
    {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": not a number: " + s);
        }
        if (pos != s.size())
            throw ConfigError("config key " + key + ": not a number: " + s);
        return v;
    }

    std::map<std::string, std::string> values_;
};

} // namespace cransim
