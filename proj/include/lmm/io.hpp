#pragma once

#include "clarke.hpp"
#include "courrege.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lmm::io {

using nlohmann::json;

inline json to_json(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json to_json(const Mat& m) {
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        a.push_back(r);
    }
    return a;
}

inline json to_json(const DiscreteMeasure& mu) {
    json a = json::array();
    for (const auto& at : mu.atoms) a.push_back({{"y", to_json(at.y)}, {"mass", at.mass}});
    return a;
}

inline json to_json(const CourregeDecomposition& d) {
    json a_sched = json::array();
    for (std::size_t i = 0; i < d.a_deltas.size(); ++i)
        a_sched.push_back({{"delta", d.a_deltas[i]}, {"A", to_json(d.a_schedule[i])}});
    return {{"A", to_json(d.A)},
            {"B", to_json(d.B)},
            {"C", d.C},
            {"mu", to_json(d.mu)},
            {"gcp", d.gcp},
            {"residual", d.residual},
            {"delta_A", d.delta_A},
            {"delta_B", d.delta_B},
            {"a_converged", d.a_converged},
            {"a_schedule", a_sched}};
}

inline json grid_json(const DyadicGrid& g) {
    return {{"level", g.level()}, {"dim", g.dim()}, {"box_radius", g.box_radius()}};
}

// sparse row kernels in offset form
inline json to_json(const LinearSample& L, double drop = 0.0) {
    json rows = json::array();
    for (long r = 0; r < L.grid.size(); ++r) {
        Idx xi = L.grid.node(r);
        json ker = json::array();
        for (long j = 0; j < L.grid.size(); ++j) {
            if (j != r && std::abs(L.M(r, j)) <= drop) continue;
            Idx z = L.grid.node(j) - xi;
            ker.push_back({{"offset", std::vector<long>(z.data(), z.data() + z.size())}, {"w", L.M(r, j)}});
        }
        rows.push_back({{"node", std::vector<long>(xi.data(), xi.data() + xi.size())}, {"kernel", ker}});
    }
    return {{"grid", grid_json(L.grid)}, {"step", L.step}, {"seed", L.seed}, {"defect", L.defect},
            {"kink", L.kink}, {"rows", rows}};
}

namespace detail {
inline std::string where(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// line of the n-th occurrence of key inside the text; used to point at a bad kernel entry
inline std::string entry_line(const std::string& text, const std::string& key, std::size_t n) {
    std::size_t pos = 0, seen = 0;
    std::string pat = "\"" + key + "\"";
    while ((pos = text.find(pat, pos)) != std::string::npos) {
        if (seen == n) return where(text, pos);
        ++seen;
        pos += pat.size();
    }
    return "entry " + std::to_string(n);
}

inline Vec read_vec(const json& j, int d, const std::string& what) {
    if (!j.is_array() || int(j.size()) != d) throw Error(what + " must be an array of length " + std::to_string(d));
    Vec v(d);
    for (int i = 0; i < d; ++i) {
        if (!j[i].is_number()) throw Error(what + " must contain numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}
}  // namespace detail

// {"dim": d, "h": h, "x0": [...], "kernel": [{"offset": [ints], "w": w} | {"y": [reals], "w": w}, ...]}
inline PointFunctional parse_stencil(const std::string& text, const std::string& source = "stencil") {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(source + ": parse error at " + detail::where(text, e.byte) + ": " + e.what());
    }
    auto fail = [&](const std::string& msg) { throw Error(source + ": " + msg); };
    if (!j.is_object()) fail("top level must be an object");
    if (!j.contains("dim") || !j["dim"].is_number_integer()) fail("missing integer field \"dim\"");
    int d = j["dim"].get<int>();
    if (d < 1 || d > 3) fail("\"dim\" must be 1, 2 or 3");
    double h = 0;
    if (j.contains("h")) {
        if (!j["h"].is_number() || j["h"].get<double>() <= 0) fail("\"h\" must be a positive number");
        h = j["h"].get<double>();
    }
    PointFunctional l{Vec::Zero(d), {}};
    try {
        if (j.contains("x0")) l.x0 = detail::read_vec(j["x0"], d, "\"x0\"");
    } catch (const Error& e) {
        fail(e.what());
    }
    if (!j.contains("kernel") || !j["kernel"].is_array() || j["kernel"].empty()) fail("missing nonempty array \"kernel\"");
    std::size_t n_off = 0, n_y = 0;
    for (std::size_t k = 0; k < j["kernel"].size(); ++k) {
        const json& e = j["kernel"][k];
        bool has_off = e.is_object() && e.contains("offset");
        std::string at = has_off ? detail::entry_line(text, "offset", n_off) : detail::entry_line(text, "y", n_y);
        try {
            if (!e.is_object() || !e.contains("w") || !e["w"].is_number())
                throw Error("entry needs a numeric \"w\"");
            KernelEntry ke;
            ke.w = e["w"].get<double>();
            if (!finite(ke.w)) throw Error("weight is not finite");
            if (has_off) {
                if (h <= 0) throw Error("integer offsets need \"h\"");
                ke.y = detail::read_vec(e["offset"], d, "\"offset\"") * h;
                ++n_off;
            } else if (e.contains("y")) {
                ke.y = detail::read_vec(e["y"], d, "\"y\"");
                ++n_y;
            } else {
                throw Error("entry needs \"offset\" or \"y\"");
            }
            l.kernel.push_back(ke);
        } catch (const Error& err) {
            fail("kernel entry " + std::to_string(k) + " (" + at + "): " + err.what());
        }
    }
    return l;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
        s += "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + num(r[i]);
            s += "\n";
        }
        return s;
    }
};

}  // namespace lmm::io
