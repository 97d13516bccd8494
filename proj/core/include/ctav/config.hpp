/*
 * Copyright (C) 2026 The ctavatar authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <map>
#include <string>

namespace ctav {

/// Plain-text key=value configuration. defaults() carries every tunable with
/// its desk-scale value; preset("full") overlays the full-scale shapes.
class Config {
public:
    static Config defaults();
    /// "default" or "full".
    static Config preset(const std::string& name);
    static Config from_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double v);
    void set_int(const std::string& key, long long v);
    void set_bool(const std::string& key, bool v);

    const std::string& get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// Parses "key=value"; '#' starts a comment. Throws ConfigInvalid.
    void parse_line(const std::string& line);
    void load_file(const std::string& path);
    void save_file(const std::string& path) const;

    /// Sorted "key=value" lines (doubles printed round-trip exact).
    std::string dump() const;

    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace ctav
