#pragma once

// Reading datasets (CSV or JSON), kernel and functional descriptors, and
// writing output files atomically.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "kernels.hpp"
#include "lininfo.hpp"

namespace gpill::io {

using nlohmann::json;

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

/// Strict decimal parse: the whole cell must be a finite number.
inline double parse_number(const std::string& cell, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw ParseError(where + ": '" + cell + "' is not a number");
    }
    if (used != cell.size()) throw ParseError(where + ": '" + cell + "' is not a number");
    if (!std::isfinite(v)) throw ParseError(where + ": value must be finite");
    return v;
}

}  // namespace detail

/// Dataset from CSV with header x_1,...,x_d,y and a zero mean. Blank lines
/// and lines starting with '#' are skipped.
inline Dataset read_dataset_csv(std::istream& is, const std::string& source = "<csv>") {
    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        header = detail::split_csv_line(t);
        break;
    }
    if (header.empty()) throw ParseError(source + ": empty dataset (no header)");
    const std::size_t d = header.size() - 1;
    if (d < 1 || header.back() != "y")
        throw ParseError(source + ":" + std::to_string(lineno) + ": header must be x_1,...,x_d,y");
    for (std::size_t j = 0; j < d; ++j)
        if (header[j] != "x_" + std::to_string(j + 1))
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected column 'x_" +
                             std::to_string(j + 1) + "', found '" + header[j] + "'");

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto cells = detail::split_csv_line(t);
        const std::string where = source + ":" + std::to_string(lineno);
        if (cells.size() != d + 1)
            throw ParseError(where + ": expected " + std::to_string(d + 1) + " fields, found " +
                             std::to_string(cells.size()));
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(detail::parse_number(c, where));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(source + ": empty dataset (header but no rows)");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        y(static_cast<Eigen::Index>(i)) = rows[i][d];
    }
    try {
        return {std::move(x), std::move(y)};
    } catch (const std::invalid_argument& e) {
        throw ParseError(source + ": " + e.what());
    }
}

inline void write_dataset_csv(std::ostream& os, const Dataset& data) {
    for (Eigen::Index j = 0; j < data.dimension(); ++j) os << "x_" << j + 1 << ',';
    os << "y\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dimension(); ++j) os << data.points()(i, j) << ',';
        os << data.values()(i) << '\n';
    }
}

// ---------------------------------------------------------------------------
// JSON

inline json mean_to_json(const MeanSpec& mean) {
    if (std::holds_alternative<ZeroMean>(mean)) return {{"type", "zero"}};
    if (const auto* c = std::get_if<ConstantMean>(&mean)) return {{"type", "constant"}, {"c", c->c}};
    const auto& b = std::get<BasisMean>(mean);
    json basis = json::array();
    for (const auto& m : b.basis) basis.push_back(m.exponents);
    json out{{"type", "basis"}, {"monomials", basis}};
    if (b.coefficients) out["coefficients"] = std::vector<double>(b.coefficients->begin(), b.coefficients->end());
    return out;
}

/// {"type":"zero"} | {"type":"constant","c":..} |
/// {"type":"basis","degree":k[,"include_constant":bool]|"monomials":[[..],..][,"coefficients":[..]]}
inline MeanSpec mean_from_json(const json& j, int dimension) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "zero") return ZeroMean{};
    if (type == "constant") return ConstantMean{j.at("c").get<double>()};
    if (type != "basis") throw ParseError("unknown mean type '" + type + "'");
    std::vector<Monomial> basis;
    if (j.contains("monomials")) {
        for (const auto& m : j.at("monomials")) basis.push_back({m.get<std::vector<int>>()});
    } else {
        basis = monomials_up_to(dimension, j.at("degree").get<int>(), j.value("include_constant", true));
    }
    BasisMean out{basis, std::nullopt};
    if (j.contains("coefficients")) {
        const auto c = j.at("coefficients").get<std::vector<double>>();
        if (c.size() != basis.size()) throw ParseError("mean coefficients do not match the basis size");
        out.coefficients = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
    return out;
}

/// {"points": [[x..],..] or [x,..] for one dimension, "values": [..], "mean": {..}}
inline Dataset dataset_from_json(const json& j) {
    const auto& pts = j.at("points");
    const auto& vals = j.at("values");
    if (!pts.is_array() || pts.empty()) throw ParseError("empty dataset");
    const bool one_d = !pts.front().is_array();
    const auto n = static_cast<Eigen::Index>(pts.size());
    const auto d = one_d ? Eigen::Index{1} : static_cast<Eigen::Index>(pts.front().size());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pts[static_cast<std::size_t>(i)];
        if (one_d) {
            x(i, 0) = p.get<double>();
        } else {
            if (static_cast<Eigen::Index>(p.size()) != d) throw ParseError("points have inconsistent dimension");
            for (Eigen::Index k = 0; k < d; ++k) x(i, k) = p[static_cast<std::size_t>(k)].get<double>();
        }
    }
    const auto v = vals.get<std::vector<double>>();
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    MeanSpec mean = j.contains("mean") ? mean_from_json(j.at("mean"), static_cast<int>(d)) : MeanSpec{ZeroMean{}};
    try {
        return {std::move(x), std::move(y), std::move(mean)};
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

inline json dataset_to_json(const Dataset& data) {
    json pts = json::array();
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        if (data.dimension() == 1) {
            pts.push_back(data.points()(i, 0));
        } else {
            json p = json::array();
            for (Eigen::Index k = 0; k < data.dimension(); ++k) p.push_back(data.points()(i, k));
            pts.push_back(p);
        }
    }
    return {{"points", pts},
            {"values", std::vector<double>(data.values().begin(), data.values().end())},
            {"mean", mean_to_json(data.mean())}};
}

/// CSV or JSON by file extension.
inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read '" + path.string() + "'");
    if (path.extension() == ".json") {
        try {
            return dataset_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    }
    return read_dataset_csv(in, path.string());
}

inline json kernel_to_json(const KernelSpec& k) {
    json j{{"family", std::string(family_name(k.family()))}};
    if (k.family() == KernelFamily::Matern) j["nu"] = nu_value(k.nu());
    j["sigma"] = k.sigma();
    j["lengthscale"] = k.lengthscale();
    return j;
}

inline KernelSpec kernel_from_json(const json& j) {
    try {
        const KernelFamily f = family_from_name(j.at("family").get<std::string>());
        const MaternNu nu = f == KernelFamily::Matern ? matern_nu_from_value(j.value("nu", 1.5)) : MaternNu::Half;
        return {f, nu, j.value("sigma", 1.0), j.value("lengthscale", 1.0)};
    } catch (const json::exception& e) {
        throw ParseError(std::string("kernel: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("kernel: ") + e.what());
    }
}

/// [{"type":"deriv","x":1.0},{"type":"eval","x":1.2},...]
inline std::vector<lininfo::InformationFunctional> functionals_from_json(const json& j) {
    std::vector<lininfo::InformationFunctional> fs;
    for (const auto& f : j) {
        const std::string type = f.at("type").get<std::string>();
        const double x = f.at("x").get<double>();
        if (type == "deriv") fs.emplace_back(lininfo::DerivEval{x});
        else if (type == "eval") fs.emplace_back(lininfo::PointEval{x});
        else throw ParseError("unknown functional type '" + type + "'");
    }
    try {
        lininfo::validate_layout(fs);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return fs;
}

inline json functionals_to_json(const std::vector<lininfo::InformationFunctional>& fs) {
    json out = json::array();
    for (const auto& f : fs)
        out.push_back({{"type", std::holds_alternative<lininfo::DerivEval>(f) ? "deriv" : "eval"},
                       {"x", lininfo::location(f)}});
    return out;
}

/// Writes `content` to a temporary file in the target directory, then
/// renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : ".";
    std::filesystem::create_directories(dir);
    const std::filesystem::path tmp = dir / ("." + path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace gpill::io
