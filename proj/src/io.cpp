#include "vpinv/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "vpinv/error.hpp"

namespace vpinv {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create directory " + dir + ": " + ec.message());
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
    return in;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

[[noreturn]] void malformed(const std::string& path, int line, const std::string& why) {
    throw Error(ErrorCode::io_error, path + ":" + std::to_string(line) + ": " + why);
}

double num(const std::string& path, int line, const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) malformed(path, line, "bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        malformed(path, line, "bad number '" + s + "'");
    }
}

void write_grid_common(const std::string& path, const GridLayout& L, int comps,
                       const std::string& hash, const std::vector<double>& a,
                       const std::vector<double>* b, const std::vector<std::uint8_t>& mask) {
    auto out = open_out(path);
    const double lo = L.origin();
    const double hi = L.origin() + L.side() * L.h();
    out << "# dims," << L.side() << "," << L.side() << "," << comps << "," << L.cells << "," << L.pad
        << "\n";
    out << "# extent," << fmt17(lo) << "," << fmt17(hi) << "," << fmt17(lo) << "," << fmt17(hi) << ","
        << fmt17(L.radius) << "\n";
    out << "# config_hash," << hash << "\n";
    out << (comps == 1 ? "i,j,x,y,value,mask\n" : "i,j,x,y,e1,e2,mask\n");
    for (int j = 0; j < L.side(); ++j) {
        for (int i = 0; i < L.side(); ++i) {
            const std::size_t k = L.index(i, j);
            const Vec2 c = L.center(i, j);
            out << i << "," << j << "," << fmt17(c.x) << "," << fmt17(c.y) << "," << fmt17(a[k]);
            if (b) out << "," << fmt17((*b)[k]);
            out << "," << static_cast<int>(mask[k]) << "\n";
        }
    }
}

}  // namespace

ScalarGrid GridFile::scalar() const {
    ScalarGrid g(layout);
    g.values = c1;
    g.mask = mask;
    return g;
}

void write_grid_csv(const std::string& path, const ScalarGrid& grid, const std::string& hash) {
    write_grid_common(path, grid.layout, 1, hash, grid.values, nullptr, grid.mask);
}

void write_grid_csv(const std::string& path, const FieldGrid& field, const std::string& hash) {
    std::vector<double> a(field.values().size());
    std::vector<double> b(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] = field.values()[k].x;
        b[k] = field.values()[k].y;
    }
    write_grid_common(path, field.layout(), 2, hash, a, &b, field.valid());
}

GridFile read_grid_csv(const std::string& path) {
    auto in = open_in(path);
    GridFile g;
    std::string line;
    int lineno = 0;
    auto header = [&](const char* tag) {
        if (!std::getline(in, line)) malformed(path, lineno + 1, "missing header");
        ++lineno;
        const std::string prefix = std::string("# ") + tag + ",";
        if (line.rfind(prefix, 0) != 0) malformed(path, lineno, std::string("expected '# ") + tag + "'");
        return split(line.substr(prefix.size()));
    };
    const auto dims = header("dims");
    if (dims.size() != 5) malformed(path, lineno, "dims needs 5 fields");
    const auto extent = header("extent");
    if (extent.size() != 5) malformed(path, lineno, "extent needs 5 fields");
    const auto hash = header("config_hash");
    g.config_hash = hash.empty() ? "" : hash[0];
    const int side = static_cast<int>(num(path, 1, dims[0]));
    g.components = static_cast<int>(num(path, 1, dims[2]));
    g.layout.cells = static_cast<int>(num(path, 1, dims[3]));
    g.layout.pad = static_cast<int>(num(path, 1, dims[4]));
    g.layout.radius = num(path, 2, extent[4]);
    if (side != g.layout.side() || (g.components != 1 && g.components != 2) || g.layout.cells < 1 ||
        !(g.layout.radius > 0.0))
        malformed(path, 1, "inconsistent dims");
    if (!std::getline(in, line)) malformed(path, lineno + 1, "missing column row");
    ++lineno;
    const std::size_t n = g.layout.size();
    g.c1.assign(n, 0.0);
    if (g.components == 2) g.c2.assign(n, 0.0);
    g.mask.assign(n, 0);
    std::size_t rows = 0;
    const std::size_t width = 5 + g.components;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != width) malformed(path, lineno, "expected " + std::to_string(width) + " columns");
        const int i = static_cast<int>(num(path, lineno, f[0]));
        const int j = static_cast<int>(num(path, lineno, f[1]));
        if (i < 0 || j < 0 || i >= side || j >= side) malformed(path, lineno, "node index out of range");
        const std::size_t k = g.layout.index(i, j);
        g.c1[k] = num(path, lineno, f[4]);
        if (g.components == 2) g.c2[k] = num(path, lineno, f[5]);
        g.mask[k] = num(path, lineno, f[width - 1]) != 0.0;
        ++rows;
    }
    if (rows != n) malformed(path, lineno, "expected " + std::to_string(n) + " rows, got " + std::to_string(rows));
    return g;
}

void write_sinogram_csv(const std::string& path, const Sinogram& sino, const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash," << hash << "\n";
    out << "n_a,n_s,R_d\n" << sino.n_a << "," << sino.n_s << "," << fmt17(sino.radius) << "\n";
    out << "angle_index,offset_index,alpha,s,v1,v2,parallel_residual\n";
    for (int i = 0; i < sino.n_a; ++i) {
        for (int j = 0; j < sino.n_s; ++j) {
            const Vec2 v = sino.at(i, j);
            out << i << "," << j << "," << fmt17(sino.angle(i)) << "," << fmt17(sino.offset(j)) << ","
                << fmt17(v.x) << "," << fmt17(v.y) << "," << fmt17(sino.parallel_residual[sino.index(i, j)])
                << "\n";
        }
    }
}

Sinogram read_sinogram_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    int lineno = 0;
    auto next = [&]() {
        do {
            if (!std::getline(in, line)) return false;
            ++lineno;
        } while (line.empty() || line[0] == '#');
        return true;
    };
    if (!next() || line != "n_a,n_s,R_d") malformed(path, lineno, "expected 'n_a,n_s,R_d'");
    if (!next()) malformed(path, lineno, "missing dimensions row");
    const auto dims = split(line);
    if (dims.size() != 3) malformed(path, lineno, "dimensions row needs 3 fields");
    const int n_a = static_cast<int>(num(path, lineno, dims[0]));
    const int n_s = static_cast<int>(num(path, lineno, dims[1]));
    const double radius = num(path, lineno, dims[2]);
    if (n_a < 2 || n_s < 2 || !(radius > 0.0)) malformed(path, lineno, "invalid dimensions");
    if (!next()) malformed(path, lineno, "missing column row");
    const std::size_t total = static_cast<std::size_t>(n_a) * n_s;
    std::vector<Vec2> values(total);
    std::vector<double> alpha(total), s(total);
    std::vector<std::uint8_t> seen(total, 0);
    while (next()) {
        const auto f = split(line);
        if (f.size() != 7) malformed(path, lineno, "expected 7 columns");
        const int i = static_cast<int>(num(path, lineno, f[0]));
        const int j = static_cast<int>(num(path, lineno, f[1]));
        if (i < 0 || j < 0 || i >= n_a || j >= n_s) malformed(path, lineno, "index out of range");
        const std::size_t k = static_cast<std::size_t>(i) * n_s + j;
        alpha[k] = num(path, lineno, f[2]);
        s[k] = num(path, lineno, f[3]);
        values[k] = {num(path, lineno, f[4]), num(path, lineno, f[5])};
        seen[k] = 1;
    }
    for (std::size_t k = 0; k < total; ++k)
        if (!seen[k]) malformed(path, lineno, "missing sinogram entries");
    const double s_max = -s[0];
    if (!(s_max > 0.0 && s_max < radius))
        throw Error(ErrorCode::non_uniform_sampling, path + ": offsets must be symmetric inside the disk");
    Sinogram sino(n_a, n_s, radius, s_max / radius);
    const double tol_a = 1e-9 * sino.angle_step();
    const double tol_s = 1e-9 * sino.offset_step();
    for (int i = 0; i < n_a; ++i) {
        for (int j = 0; j < n_s; ++j) {
            const std::size_t k = sino.index(i, j);
            if (std::abs(alpha[k] - sino.angle(i)) > tol_a || std::abs(s[k] - sino.offset(j)) > tol_s) {
                throw Error(ErrorCode::non_uniform_sampling,
                            path + ": entry (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is off the uniform angle/offset lattice");
            }
            sino.values[k] = values[k];
        }
    }
    sino.update_residuals();
    return sino;
}

void write_trajectory_csv(const std::string& path, const std::vector<PathSample>& samples,
                          const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash," << hash << "\n" << "t,x1,x2,v1,v2\n";
    for (const auto& p : samples)
        out << fmt17(p.t) << "," << fmt17(p.x.x) << "," << fmt17(p.x.y) << "," << fmt17(p.v.x) << ","
            << fmt17(p.v.y) << "\n";
}

void write_residual_csv(const std::string& path, const std::vector<double>& residuals,
                        const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash," << hash << "\n" << "iteration,residual\n";
    for (std::size_t i = 0; i < residuals.size(); ++i) out << i + 1 << "," << fmt17(residuals[i]) << "\n";
}

void write_metrics_csv(const std::string& path, const Metrics& m, const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash," << hash << "\n" << Metrics::csv_header() << "\n" << m.csv_row() << "\n";
}

void write_convergence_csv(const std::string& path, const std::vector<ChordRecord>& records,
                           const std::string& hash) {
    auto out = open_out(path);
    out << "# config_hash," << hash << "\n"
        << "angle_index,offset_index,alpha,s,speed,m1,m2,m_parallel,m_perp,t_plus,lambda_hat,iterations\n";
    for (const auto& r : records) {
        const Vec2 theta{std::cos(r.angle), std::sin(r.angle)};
        for (std::size_t k = 0; k < r.speeds.size(); ++k) {
            out << r.angle_index << "," << r.offset_index << "," << fmt17(r.angle) << ","
                << fmt17(r.offset) << "," << fmt17(r.speeds[k]) << "," << fmt17(r.m[k].x) << ","
                << fmt17(r.m[k].y) << "," << fmt17(dot(r.m[k], theta)) << ","
                << fmt17(dot(r.m[k], perp(theta))) << "," << fmt17(r.t_plus[k]) << ","
                << fmt17(r.lambda_hat[k]) << "," << r.iterations[k] << "\n";
        }
    }
}

namespace {

nlohmann::json vec(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

}  // namespace

std::string measurement_json(const Measurement& ms, const std::string& hash) {
    nlohmann::json j;
    j["config_hash"] = hash;
    j["angle"] = ms.chord.angle;
    j["offset"] = ms.chord.offset;
    j["speed"] = ms.speed;
    j["eps"] = ms.eps;
    j["threshold"] = ms.threshold;
    j["status"] = to_string(ms.exit.status);
    j["t_plus"] = ms.exit.t_plus;
    j["t_star"] = ms.t_star;
    j["x_plus"] = vec(ms.exit.x_plus);
    j["v_plus"] = vec(ms.exit.v_plus);
    j["m"] = vec(ms.m);
    j["m_parallel"] = ms.m_parallel;
    j["m_perp"] = ms.m_perp;
    j["iterations"] = ms.iterations;
    j["lambda_hat"] = ms.lambda_hat;
    j["residuals"] = ms.residuals;
    j["trapped_pairs"] = ms.quality.trapped;
    j["left_grid_pairs"] = ms.quality.left_grid;
    if (ms.peak) {
        j["peak"] = {{"x", vec(ms.peak->x_peak)},
                     {"v", vec(ms.peak->v_peak)},
                     {"f", ms.peak->f_peak},
                     {"position_error", ms.peak->position_error},
                     {"velocity_error", ms.peak->velocity_error},
                     {"resolution", ms.peak->resolution}};
    }
    return j.dump();
}

std::string chord_record_json(const ChordRecord& rec, const std::string& hash) {
    nlohmann::json j;
    j["config_hash"] = hash;
    j["angle_index"] = rec.angle_index;
    j["offset_index"] = rec.offset_index;
    j["angle"] = rec.angle;
    j["offset"] = rec.offset;
    j["failed"] = rec.failed;
    if (rec.failed) j["error"] = rec.error;
    j["value"] = vec(rec.value);
    j["speeds"] = rec.speeds;
    nlohmann::json ms = nlohmann::json::array();
    for (Vec2 m : rec.m) ms.push_back(vec(m));
    j["m"] = ms;
    j["t_plus"] = rec.t_plus;
    j["lambda_hat"] = rec.lambda_hat;
    j["iterations"] = rec.iterations;
    if (!rec.speeds.empty()) j["order_hat"] = std::isfinite(rec.order_hat) ? nlohmann::json(rec.order_hat) : nlohmann::json();
    return j.dump();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    auto out = open_out(path);
    for (const auto& l : lines) out << l << "\n";
}

}  // namespace vpinv
