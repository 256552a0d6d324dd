#include "finslercomp/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace finslercomp {

ojson number_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

ojson params_json(const ReportParams& p) {
    ojson j = ojson::object();
    j["N"] = number_json(p.N);
    j["eps"] = number_json(p.eps);
    j["K"] = number_json(p.K);
    j["a"] = number_json(p.a);
    j["b"] = number_json(p.b);
    j["c"] = number_json(p.c);
    return j;
}

ojson report_json(const CheckReport& r, std::size_t grid_cap) {
    ojson j = ojson::object();
    j["name"] = r.name;
    if (!r.scenario.empty()) j["scenario"] = r.scenario;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["tolerance"] = number_json(r.tolerance);
    j["max_violation"] = number_json(r.max_violation);
    if (r.params) j["params"] = params_json(*r.params);
    ojson vals = ojson::object();
    for (const auto& [k, v] : r.values) vals[k] = number_json(v);
    j["values"] = vals;
    j["notes"] = r.notes;
    std::size_t n = r.grid.size();
    std::size_t stride = n > grid_cap && grid_cap > 1 ? (n + grid_cap - 2) / (grid_cap - 1) : 1;
    ojson g = ojson::array(), res = ojson::array();
    for (std::size_t i = 0; i < n; i += stride) {
        g.push_back(number_json(r.grid[i]));
        res.push_back(number_json(r.residuals[i]));
    }
    if (n > 0 && (n - 1) % stride != 0) {
        g.push_back(number_json(r.grid.back()));
        res.push_back(number_json(r.residuals.back()));
    }
    j["grid_points"] = n;
    j["grid_stride"] = stride;
    j["grid"] = g;
    j["residuals"] = res;
    return j;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string shortest_repr(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("shortest_repr: conversion failed");
    return std::string(buf, p);
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
    out += "\n";
    std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out += (c ? "," : "") + shortest_repr(r < columns[c].size() ? columns[c][r] : std::nan(""));
        out += "\n";
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

}  // namespace finslercomp
