#pragma once

// Serialisation: dataset CSV files, JSON metadata and JSON result documents.
// Doubles are written with 17 significant digits so every binary64 value
// survives a round trip exactly.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aggregators.hpp"
#include "error.hpp"
#include "grouping.hpp"
#include "maximin.hpp"
#include "rng.hpp"
#include "sim.hpp"

namespace magging::io {

using json = nlohmann::json;

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json vector_json(const Eigen::Ref<const Vector>& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

/// Matrix as a list of rows.
inline json matrix_json(const Eigen::Ref<const Matrix>& m)
{
    json a = json::array();
    for (Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
    return a;
}

inline Vector vector_from_json(const json& j, const std::string& what)
{
    if (!j.is_array()) throw InputError(what + ": expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(what + ": expected an array of numbers");
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

inline Matrix matrix_from_json(const json& j, const std::string& what)
{
    if (!j.is_array()) throw InputError(what + ": expected a list of rows");
    if (j.empty()) return Matrix(0, 0);
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(static_cast<Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vector row = vector_from_json(j[r], what);
        if (row.size() != cols) throw InputError(what + ": ragged rows");
        m.row(static_cast<Index>(r)) = row.transpose();
    }
    return m;
}

// ---------------------------------------------------------------- Grouping

inline json to_json(const Grouping& g)
{
    json groups = json::array();
    for (const auto& idx : g.groups) groups.push_back(idx);
    return {{"strategy", to_string(g.strategy)},
            {"n", g.n},
            {"groups", groups},
            {"seed", g.seed ? json(*g.seed) : json(nullptr)}};
}

inline Grouping grouping_from_json(const json& j)
{
    try {
        Grouping g;
        g.strategy = group_strategy_from_string(j.at("strategy").get<std::string>());
        g.n = j.at("n").get<Index>();
        for (const auto& idx : j.at("groups")) g.groups.push_back(idx.get<IndexSet>());
        if (!j.at("seed").is_null()) g.seed = j.at("seed").get<std::uint64_t>();
        g.validate();
        return g;
    } catch (const json::exception& e) {
        throw InputError(std::string("grouping JSON: ") + e.what());
    }
}

// ------------------------------------------------------- results and reports

inline json to_json(const AggregationResult& r)
{
    json diag = json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = v;
    json out = {{"scheme", r.scheme}, {"weights", vector_json(r.weights)}, {"theta", vector_json(r.theta)}, {"diagnostics", diag}};
    if (r.intercept != 0.0) out["intercept"] = r.intercept;
    return out;
}

inline AggregationResult aggregation_from_json(const json& j)
{
    try {
        AggregationResult r;
        r.scheme = j.at("scheme").get<std::string>();
        r.weights = vector_from_json(j.at("weights"), "weights");
        r.theta = vector_from_json(j.at("theta"), "theta");
        r.intercept = j.value("intercept", 0.0);
        for (const auto& [k, v] : j.at("diagnostics").items()) r.diagnostics[k] = v.get<double>();
        return r;
    } catch (const json::exception& e) {
        throw InputError(std::string("aggregation JSON: ") + e.what());
    }
}

inline json to_json(const BoundCertificate& c)
{
    return {{"eta1", c.eta1},
            {"eta2", c.eta2},
            {"kappa", c.kappa},
            {"bound", c.bound},
            {"lhs", c.lhs},
            {"holds", c.holds},
            {"min_group_size", c.min_group_size},
            {"b_maximin", vector_json(c.b_maximin)}};
}

inline json to_json(const Ensemble& ens)
{
    json thetas = json::array();
    for (const auto& t : ens.thetas) thetas.push_back(vector_json(t));
    json fits = json::array();
    for (const auto& f : ens.fits)
        fits.push_back({{"lambda", f.lambda}, {"iterations", f.iterations}, {"converged", f.converged}});
    json spec = {{"kind", to_string(ens.spec.kind)},
                 {"lambda", ens.spec.lambda ? json(*ens.spec.lambda) : json(nullptr)},
                 {"tolerance", ens.spec.tolerance},
                 {"max_iterations", ens.spec.max_iterations},
                 {"intercept", ens.spec.intercept},
                 {"standardize", ens.spec.standardize}};
    json out = {{"G", ens.size()}, {"estimator", spec}, {"thetas", thetas}, {"fits", fits}, {"grouping", to_json(ens.grouping)}};
    if (ens.spec.intercept) out["intercepts"] = ens.intercepts;
    return out;
}

// -------------------------------------------------------------- dataset CSV

struct Dataset {
    Matrix x;
    Vector y;
    std::optional<std::vector<std::int64_t>> groups;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r' || cell.back() == '\t')) cell.pop_back();
        std::size_t b = 0;
        while (b < cell.size() && (cell[b] == ' ' || cell[b] == '\t')) ++b;
        out.push_back(cell.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, const std::string& column)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty())
        throw InputError("line " + std::to_string(line_no) + ": column '" + column + "': cannot parse '" + s + "' as a number");
    if (!std::isfinite(v))
        throw InputError("line " + std::to_string(line_no) + ": column '" + column + "': non-finite value");
    return v;
}

} // namespace detail

/// Reads the dataset schema: header row with `y`, `x1..xp` and optionally
/// `group` (integer labels), in any column order.
inline Dataset read_dataset(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3); // UTF-8 BOM
        if (!line.empty()) break;
    }
    if (line.empty()) throw InputError("dataset: empty input (missing header row)");
    const auto header = detail::split_csv_line(line);

    long y_col = -1;
    long group_col = -1;
    std::vector<long> x_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& h = header[c];
        if (h == "y") {
            if (y_col >= 0) throw InputError("line " + std::to_string(line_no) + ": duplicate column 'y'");
            y_col = static_cast<long>(c);
        } else if (h == "group") {
            group_col = static_cast<long>(c);
        } else if (h.size() >= 2 && h[0] == 'x' && h.find_first_not_of("0123456789", 1) == std::string::npos) {
            const auto k = std::stoul(h.substr(1));
            if (k == 0) throw InputError("line " + std::to_string(line_no) + ": predictor columns start at x1");
            if (x_cols.size() < k) x_cols.resize(k, -1);
            if (x_cols[k - 1] >= 0) throw InputError("line " + std::to_string(line_no) + ": duplicate column '" + h + "'");
            x_cols[k - 1] = static_cast<long>(c);
        } else {
            throw InputError("line " + std::to_string(line_no) + ": unexpected column '" + h + "'");
        }
    }
    if (y_col < 0) throw InputError("line " + std::to_string(line_no) + ": missing column 'y'");
    if (x_cols.empty()) throw InputError("line " + std::to_string(line_no) + ": no predictor columns x1..xp");
    for (std::size_t k = 0; k < x_cols.size(); ++k)
        if (x_cols[k] < 0) throw InputError("line " + std::to_string(line_no) + ": missing column 'x" + std::to_string(k + 1) + "'");

    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::int64_t> gs;
    const std::size_t p = x_cols.size();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields, found "
                             + std::to_string(cells.size()));
        ys.push_back(detail::parse_double(cells[static_cast<std::size_t>(y_col)], line_no, "y"));
        for (std::size_t k = 0; k < p; ++k)
            xs.push_back(detail::parse_double(cells[static_cast<std::size_t>(x_cols[k])], line_no, "x" + std::to_string(k + 1)));
        if (group_col >= 0) {
            const auto& s = cells[static_cast<std::size_t>(group_col)];
            std::int64_t g = 0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), g);
            if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
                throw InputError("line " + std::to_string(line_no) + ": column 'group': '" + s + "' is not an integer label");
            gs.push_back(g);
        }
    }
    if (ys.empty()) throw InputError("dataset: no data rows");

    Dataset d;
    const auto n = static_cast<Index>(ys.size());
    d.y = Eigen::Map<const Vector>(ys.data(), n);
    d.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), n,
                                                                                                   static_cast<Index>(p));
    if (group_col >= 0) d.groups = std::move(gs);
    return d;
}

inline Dataset read_dataset(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_dataset(in);
}

inline void write_dataset(std::ostream& out, const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                          const std::vector<std::int64_t>* groups = nullptr)
{
    out << "y";
    for (Index j = 0; j < x.cols(); ++j) out << ",x" << (j + 1);
    if (groups) out << ",group";
    out << '\n';
    for (Index i = 0; i < x.rows(); ++i) {
        out << format_double(y(i));
        for (Index j = 0; j < x.cols(); ++j) out << ',' << format_double(x(i, j));
        if (groups) out << ',' << (*groups)[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

// -------------------------------------------------------- simulation files

/// Metadata document accompanying a simulated dataset.
inline json sim_metadata(const SimOutput& sim, const json& config = json::object())
{
    json true_b;
    if (sim.true_b.rows() > 0) {
        true_b = {{"kind", "per_sample"}, {"values", matrix_json(sim.true_b)}};
    } else {
        true_b = {{"kind", "per_group"}, {"values", matrix_json(Matrix(sim.group_b.transpose()))}};
    }
    json meta = {{"n", sim.n()},
                 {"p", sim.p()},
                 {"seed", sim.seed},
                 {"scenario", to_string(sim.scenario)},
                 {"rng", Rng::kAlgorithm},
                 {"true_B", true_b},
                 {"sigma", matrix_json(sim.sigma)},
                 {"common_signal", sim.common_signal ? vector_json(*sim.common_signal) : json(nullptr)},
                 {"majority_b", sim.majority_b ? vector_json(*sim.majority_b) : json(nullptr)},
                 {"recording_length", sim.recording_length},
                 {"grouping", to_json(sim.grouping)},
                 {"config", config}};
    return meta;
}

/// Ground truth recovered from a metadata document.
struct SimTruth {
    Index n = 0;
    Index p = 0;
    Matrix true_b;  // per sample, may be empty
    Matrix group_b; // per group (columns), may be empty
    Matrix sigma;
    std::optional<Vector> common_signal;
    std::optional<Vector> majority_b;
    Index recording_length = 0;
    std::optional<Grouping> grouping;
    std::string scenario;

    bool has_truth() const { return true_b.rows() > 0 || group_b.cols() > 0; }

    /// b_g* for each group, given the sample labels for per-group truth.
    std::vector<Vector> group_optimal(const Grouping& g, const std::vector<std::int64_t>* labels) const
    {
        std::vector<Vector> out;
        for (const auto& idx : g.groups)
            out.push_back(SimOutput::average_of(idx, [&](Index i) -> Vector {
                if (true_b.rows() > 0) return true_b.row(i).transpose();
                if (!labels) throw InputError("per-group ground truth needs the dataset's group column");
                const auto label = (*labels)[static_cast<std::size_t>(i)];
                if (label < 0 || label >= group_b.cols()) throw InputError("group label outside the ground-truth table");
                return group_b.col(static_cast<Index>(label));
            }));
        return out;
    }
};

inline SimTruth truth_from_metadata(const json& meta)
{
    try {
        SimTruth t;
        t.n = meta.at("n").get<Index>();
        t.p = meta.at("p").get<Index>();
        t.scenario = meta.value("scenario", "");
        if (meta.contains("true_B") && !meta.at("true_B").is_null()) {
            const auto& tb = meta.at("true_B");
            const auto kind = tb.at("kind").get<std::string>();
            const Matrix values = matrix_from_json(tb.at("values"), "true_B");
            if (kind == "per_sample")
                t.true_b = values;
            else if (kind == "per_group")
                t.group_b = values.transpose();
            else
                throw InputError("metadata: unknown true_B kind '" + kind + "'");
        }
        t.sigma = meta.contains("sigma") && !meta.at("sigma").is_null() ? matrix_from_json(meta.at("sigma"), "sigma")
                                                                         : Matrix::Identity(t.p, t.p);
        if (meta.contains("common_signal") && !meta.at("common_signal").is_null())
            t.common_signal = vector_from_json(meta.at("common_signal"), "common_signal");
        if (meta.contains("majority_b") && !meta.at("majority_b").is_null())
            t.majority_b = vector_from_json(meta.at("majority_b"), "majority_b");
        t.recording_length = meta.value("recording_length", Index{0});
        if (meta.contains("grouping") && !meta.at("grouping").is_null()) t.grouping = grouping_from_json(meta.at("grouping"));
        return t;
    } catch (const json::exception& e) {
        throw InputError(std::string("metadata: ") + e.what());
    }
}

inline json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("'" + path + "': " + e.what());
    }
}

/// Numeric CSV matrix (optional non-numeric header row skipped).
inline Matrix read_matrix_csv(std::istream& in, const std::string& what)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split_csv_line(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            double v = 0.0;
            const char* first = c.data() + (!c.empty() && c[0] == '+' ? 1 : 0);
            const auto [ptr, ec] = std::from_chars(first, c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size() || c.empty()) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty()) continue; // header
            throw InputError(what + ": line " + std::to_string(line_no) + ": non-numeric field");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(what + ": line " + std::to_string(line_no) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(what + ": no numeric rows");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    if (!m.allFinite()) throw InputError(what + ": non-finite value");
    return m;
}

inline Matrix read_matrix_csv(const std::string& path, const std::string& what)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_matrix_csv(in, what);
}

} // namespace magging::io
