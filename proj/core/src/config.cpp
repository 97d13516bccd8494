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
#include "ctav/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctav/errors.hpp"

namespace ctav {

Config Config::defaults() {
    Config c;
    // model shapes (desk scale)
    c.set("model.splats_per_face", "1");
    c.set("model.splat_init_scale", "0.35");
    c.set("model.offset_mode", "opacity");  // opacity | geometry
    c.set("triplane.resolution", "64");
    c.set("triplane.dim_xy", "16");
    c.set("triplane.dim_side", "8");
    c.set("triplane.pad", "0.1");
    c.set("lines.enabled", "true");
    c.set("lines.resolution", "32");
    c.set("lines.dim", "8");
    c.set("lines.expressions", "0");  // 0 = one line triple per rig blendshape
    c.set("lines.jaw_bases", "4");
    c.set("lines.pad", "0.1");
    c.set("mlp.hidden_layers", "2");
    c.set("mlp.hidden_dim", "32");
    c.set("posenc.frequencies", "4");
    c.set("posenc.include_input", "true");
    c.set("init.grid_scale", "1e-4");
    // losses
    c.set("loss.lambda_dssim", "0.2");
    c.set("loss.lambda_pos", "0.01");
    c.set("loss.lambda_scale", "1");
    c.set("loss.lambda_op", "1");
    c.set("loss.eps_pos", "1");
    c.set("loss.eps_scale", "0.6");
    c.set("loss.tau_fraction", "0.02");  // of the rig bounding-box diagonal
    // training
    c.set("train.iterations", "20000");
    c.set("train.lr_features", "2e-3");
    c.set("train.lr_mlp", "1e-4");
    c.set("train.lr_geometry", "5e-3");
    c.set("train.adam_beta1", "0.9");
    c.set("train.adam_beta2", "0.999");
    c.set("train.adam_eps", "1e-8");
    c.set("train.seed", "1");
    c.set("train.eval_interval", "500");
    c.set("train.eval_cameras", "1");
    c.set("train.threads", "0");  // 0 = hardware concurrency
    c.set("train.balanced", "true");
    c.set("train.penalty", "true");
    c.set("train.log_every", "1");
    c.set("sampler.clusters", "16");
    return c;
}

Config Config::preset(const std::string& name) {
    Config c = defaults();
    if (name == "default" || name == "desk" || name.empty()) return c;
    if (name == "full") {
        c.set("triplane.resolution", "128");
        c.set("triplane.dim_xy", "32");
        c.set("triplane.dim_side", "16");
        c.set("lines.resolution", "64");
        c.set("lines.dim", "32");
        c.set("lines.expressions", "80");
        c.set("lines.jaw_bases", "16");
        c.set("mlp.hidden_dim", "128");
        return c;
    }
    throw ConfigInvalid("unknown preset: " + name);
}

Config Config::from_file(const std::string& path) {
    Config c = defaults();
    c.load_file(path);
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ConfigInvalid("empty config key");
    values_[key] = value;
}

void Config::set_double(const std::string& key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    set(key, buf);
}

void Config::set_int(const std::string& key, long long v) {
    set(key, std::to_string(v));
}

void Config::set_bool(const std::string& key, bool v) { set(key, v ? "true" : "false"); }

const std::string& Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigInvalid("missing config key: " + key);
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string& s = get_string(key);
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("not a number: " + key + "=" + s);
    }
}

long long Config::get_int(const std::string& key) const {
    const std::string& s = get_string(key);
    try {
        size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("not an integer: " + key + "=" + s);
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string& s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigInvalid("not a boolean: " + key + "=" + s);
}

void Config::parse_line(const std::string& line) {
    std::string s = line;
    const size_t hash = s.find('#');
    if (hash != std::string::npos) s.resize(hash);
    const auto notspace = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    if (s.empty()) return;
    const size_t eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigInvalid("expected key=value, got: " + line);
    }
    std::string key = s.substr(0, eq);
    std::string value = s.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
    set(key, value);
}

void Config::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoFailure("cannot open config: " + path);
    std::string line;
    while (std::getline(is, line)) parse_line(line);
}

void Config::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoFailure("cannot open config for writing: " + path);
    os << dump();
    if (!os) throw IoFailure("failed writing config: " + path);
}

std::string Config::dump() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << "=" << v << "\n";
    return os.str();
}

}  // namespace ctav
