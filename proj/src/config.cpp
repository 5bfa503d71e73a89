#include "vpinv/config.hpp"

#include <omp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vpinv/error.hpp"
#include "vpinv/io.hpp"

namespace vpinv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
    throw Error(ErrorCode::invalid_config, "config key '" + key + "' = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v))
        bad(key, text, "not a finite number");
    return v;
}

long long to_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) bad(key, text, "not an integer");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    bad(key, text, "expected true or false");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) bad(key, text, "empty list");
    return out;
}

void require(bool ok, const char* key, const std::string& value, const char* why) {
    if (!ok) bad(key, value, why);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const std::vector<std::string>& ExperimentConfig::keys() {
    static const std::vector<std::string> k = {
        "radius", "profile", "nx", "n", "c0", "c0p", "n_v", "speeds", "n_a", "n_s",
        "offset_fraction", "mode", "tol", "max_iter", "central_step_scale", "self_field",
        "verify_peak", "max_failure_fraction", "angle", "offset", "speed", "output_dir", "seed",
        "workers"};
    return k;
}

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    if (key == "radius") radius = to_double(key, value);
    else if (key == "profile") profile = value;
    else if (key == "nx") nx = static_cast<int>(to_int(key, value));
    else if (key == "n") n = static_cast<int>(to_int(key, value));
    else if (key == "c0") c0 = to_double(key, value);
    else if (key == "c0p") c0p = to_double(key, value);
    else if (key == "n_v") n_v = static_cast<int>(to_int(key, value));
    else if (key == "speeds") speeds = to_list(key, value);
    else if (key == "n_a") n_a = static_cast<int>(to_int(key, value));
    else if (key == "n_s") n_s = static_cast<int>(to_int(key, value));
    else if (key == "offset_fraction") offset_fraction = to_double(key, value);
    else if (key == "mode") mode = value;
    else if (key == "tol") tol = to_double(key, value);
    else if (key == "max_iter") max_iter = static_cast<int>(to_int(key, value));
    else if (key == "central_step_scale") central_step_scale = to_double(key, value);
    else if (key == "self_field") self_field = to_bool(key, value);
    else if (key == "verify_peak") verify_peak = to_bool(key, value);
    else if (key == "max_failure_fraction") max_failure_fraction = to_double(key, value);
    else if (key == "angle") angle = to_double(key, value);
    else if (key == "offset") offset = to_double(key, value);
    else if (key == "speed") speed = to_double(key, value);
    else if (key == "output_dir") output_dir = value;
    else if (key == "seed") {
        const long long s = to_int(key, value);
        require(s >= 0, "seed", value, "must be non-negative");
        seed = static_cast<std::uint64_t>(s);
    } else if (key == "workers") workers = static_cast<int>(to_int(key, value));
    else throw Error(ErrorCode::invalid_config, "unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
    require(radius > 0.0 && radius <= 100.0, "radius", format_double(radius), "must lie in (0, 100]");
    require(nx >= 8 && nx <= 1024, "nx", std::to_string(nx), "must lie in [8, 1024]");
    require(n >= 4 && n <= 4096, "n", std::to_string(n), "must lie in [4, 4096]");
    require(c0 > 0.0 && c0 <= 100.0, "c0", format_double(c0), "must lie in (0, 100]");
    require(c0p > 0.0 && c0p <= 1e3, "c0p", format_double(c0p), "must lie in (0, 1000]");
    require(n_v >= 1 && n_v <= 256, "n_v", std::to_string(n_v), "must lie in [1, 256]");
    for (double s : speeds) require(s > 0.0 && s <= 1e6, "speeds", format_double(s), "must lie in (0, 1e6]");
    for (std::size_t i = 1; i < speeds.size(); ++i)
        require(speeds[i] > speeds[i - 1], "speeds", format_double(speeds[i]), "must be strictly increasing");
    require(n_a >= 2 && n_a <= 4096, "n_a", std::to_string(n_a), "must lie in [2, 4096]");
    require(n_s >= 2 && n_s <= 4096, "n_s", std::to_string(n_s), "must lie in [2, 4096]");
    require(offset_fraction > 0.0 && offset_fraction < 1.0, "offset_fraction",
            format_double(offset_fraction), "must lie in (0, 1)");
    require(mode == "simulate" || mode == "oracle", "mode", mode, "must be simulate or oracle");
    require(mode != "simulate" || speeds.size() >= 2, "speeds", "", "simulate mode needs at least two speeds");
    require(tol >= 0.0, "tol", format_double(tol), "must be non-negative");
    require(max_iter >= 1 && max_iter <= 1000, "max_iter", std::to_string(max_iter), "must lie in [1, 1000]");
    require(central_step_scale > 0.0 && central_step_scale <= 1.0, "central_step_scale",
            format_double(central_step_scale), "must lie in (0, 1]");
    require(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0, "max_failure_fraction",
            format_double(max_failure_fraction), "must lie in [0, 1]");
    require(speed > 0.0 && speed <= 1e6, "speed", format_double(speed), "must lie in (0, 1e6]");
    require(!output_dir.empty(), "output_dir", output_dir, "must not be empty");
    require(workers >= 0 && workers <= 4096, "workers", std::to_string(workers), "must lie in [0, 4096]");
    require(!profile.empty(), "profile", profile, "must not be empty");
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream o;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
        return s;
    };
    o << "radius = " << format_double(radius) << "\n"
      << "profile = " << profile << "\n"
      << "nx = " << nx << "\n"
      << "n = " << n << "\n"
      << "c0 = " << format_double(c0) << "\n"
      << "c0p = " << format_double(c0p) << "\n"
      << "n_v = " << n_v << "\n"
      << "speeds = " << list(speeds) << "\n"
      << "n_a = " << n_a << "\n"
      << "n_s = " << n_s << "\n"
      << "offset_fraction = " << format_double(offset_fraction) << "\n"
      << "mode = " << mode << "\n"
      << "tol = " << format_double(tol) << "\n"
      << "max_iter = " << max_iter << "\n"
      << "central_step_scale = " << format_double(central_step_scale) << "\n"
      << "self_field = " << (self_field ? "true" : "false") << "\n"
      << "verify_peak = " << (verify_peak ? "true" : "false") << "\n"
      << "max_failure_fraction = " << format_double(max_failure_fraction) << "\n"
      << "angle = " << format_double(angle) << "\n"
      << "offset = " << format_double(offset) << "\n"
      << "speed = " << format_double(speed) << "\n"
      << "output_dir = " << output_dir << "\n"
      << "seed = " << seed << "\n"
      << "workers = " << workers << "\n";
    return o.str();
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(serialize()); }

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::invalid_config,
                        "config line " + std::to_string(lineno) + ": expected key = value");
        }
        c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

DopingProfile parse_profile(const std::string& spec_in) {
    const std::string spec = trim(spec_in);
    if (spec == "zero") return DopingProfile::constant(0.0);
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "grid") {
        if (args.empty()) bad("profile", spec, "grid profile needs a path");
        return DopingProfile::sampled(read_grid_csv(args).scalar());
    }
    const std::vector<double> p = args.empty() ? std::vector<double>{} : to_list("profile", args);
    if (kind == "constant") {
        if (p.size() != 1) bad("profile", spec, "constant takes one value");
        return DopingProfile::constant(p[0]);
    }
    if (kind == "gaussian") {
        if (p.size() != 4) bad("profile", spec, "gaussian takes A,cx,cy,sigma");
        if (!(p[3] > 0.0)) bad("profile", spec, "gaussian width must be positive");
        return DopingProfile::gaussian(p[0], {p[1], p[2]}, p[3]);
    }
    if (kind == "radial") {
        if (p.empty()) bad("profile", spec, "radial takes at least one coefficient");
        return DopingProfile::radial_polynomial(p);
    }
    bad("profile", spec, "unknown profile kind");
}

void apply_workers(int workers) {
    if (workers > 0) omp_set_num_threads(workers);
}

}  // namespace vpinv
