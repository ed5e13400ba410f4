#include "matmech/spectral_algebra.hpp"

#include "matmech/errors.hpp"
#include "matmech/format.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace matmech {

FrequencyTable::FrequencyTable(Eigen::MatrixXd omega) : omega_(std::move(omega)) {
    if (omega_.rows() < 1 || omega_.rows() != omega_.cols())
        throw SizeError("frequency table must be square with N >= 1");
    if (!omega_.allFinite()) throw InvalidArgumentError("frequency table has non-finite entries");
}

TermValues::TermValues(std::vector<double> terms, Eigen::Index gauge)
    : terms_(std::move(terms)), gauge_(gauge) {
    if (terms_.empty()) throw SizeError("term values need at least one level");
    if (gauge_ < 0 || gauge_ >= size()) throw InvalidArgumentError("gauge index out of range");
}

FrequencyTable TermValues::table() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd omega(n, n);
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index k = 0; k < n; ++k) omega(m, k) = terms_[m] - terms_[k];
    return FrequencyTable(std::move(omega));
}

TermValues TermValues::gauge_fixed() const {
    std::vector<double> shifted = terms_;
    const double pin = terms_[gauge_];
    for (double& c : shifted) c -= pin;
    return TermValues(std::move(shifted), gauge_);
}

RitzCheck check_ritz(const FrequencyTable& table, double tol) {
    if (!(tol >= 0.0)) throw InvalidArgumentError("check_ritz: tol must be >= 0");
    const Eigen::Index n = table.size();
    RitzCheck result;
    // Strict '>' keeps the first (lexicographically smallest) maximizer.
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index p = 0; p < n; ++p) {
                const double v = std::abs(table(m, k) + table(k, p) - table(m, p));
                if (v > result.worst_violation) {
                    result.worst_violation = v;
                    result.worst_triple = {m, k, p};
                }
            }
    result.ok = result.worst_violation <= tol;
    return result;
}

double default_ritz_tolerance(const FrequencyTable& table) { return 1e-9 * table.max_abs(); }

PairMask full_mask(Eigen::Index n) {
    PairMask mask;
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index k = 0; k < n; ++k)
            if (m != k) mask.emplace(m, k);
    return mask;
}

namespace {

Eigen::Index find_root(std::vector<Eigen::Index>& parent, Eigen::Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

}  // namespace

TermFit fit_term_values(const FrequencyTable& table, const PairMask& mask) {
    const Eigen::Index n = table.size();
    if (mask.empty()) throw InvalidArgumentError("fit_term_values: mask is empty");

    std::vector<Eigen::Index> parent(n);
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    for (const auto& [m, k] : mask) {
        if (m < 0 || k < 0 || m >= n || k >= n)
            throw InvalidArgumentError("fit_term_values: masked pair outside the table");
        parent[find_root(parent, m)] = find_root(parent, k);
    }
    for (Eigen::Index v = 1; v < n; ++v) {
        if (find_root(parent, v) != find_root(parent, 0))
            throw DisconnectedGraphError("level " + std::to_string(v) +
                                         " is not connected to level 0 by observed lines");
    }

    std::vector<double> terms(n, 0.0);
    if (n > 1) {
        // Unknowns C_1..C_{N-1}; the gauge column C_0 is dropped.
        const auto rows = static_cast<Eigen::Index>(mask.size());
        Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, n - 1);
        Eigen::VectorXd rhs(rows);
        Eigen::Index r = 0;
        for (const auto& [m, k] : mask) {
            if (m != k) {
                if (m > 0) design(r, m - 1) += 1.0;
                if (k > 0) design(r, k - 1) -= 1.0;
            }
            rhs(r++) = table(m, k);
        }
        const Eigen::VectorXd solution = design.colPivHouseholderQr().solve(rhs);
        for (Eigen::Index v = 1; v < n; ++v) terms[v] = solution(v - 1);
    }

    double sq = 0.0;
    for (const auto& [m, k] : mask) {
        const double d = table(m, k) - (terms[m] - terms[k]);
        sq += d * d;
    }
    return TermFit{TermValues(std::move(terms), 0), std::sqrt(sq)};
}

void RydbergModel::validate() const {
    if (!(rydberg > 0.0 && std::isfinite(rydberg)))
        throw InvalidArgumentError("Rydberg constant must be > 0");
    if (!(light_speed > 0.0 && std::isfinite(light_speed)))
        throw InvalidArgumentError("speed of light must be > 0");
}

double RydbergModel::term(long level) const {
    if (level < 1) throw LevelError("level must be >= 1, got " + std::to_string(level));
    const double l = static_cast<double>(level);
    return 2.0 * std::numbers::pi * rydberg * light_speed / (l * l);
}

double balmer_frequency(const RydbergModel& model, long m, long n) {
    model.validate();
    return model.term(m) - model.term(n);
}

FrequencyTable balmer_table(const RydbergModel& model, Eigen::Index n) {
    model.validate();
    if (n < 1) throw SizeError("balmer_table: N must be >= 1");
    std::vector<double> terms(n);
    for (Eigen::Index i = 0; i < n; ++i) terms[i] = model.term(static_cast<long>(i) + 1);
    return TermValues(std::move(terms)).table();
}

double fundamental_frequency(const RydbergModel& model, long m) {
    model.validate();
    if (m < 1) throw LevelError("level must be >= 1, got " + std::to_string(m));
    const double l = static_cast<double>(m);
    return 4.0 * std::numbers::pi * model.rydberg * model.light_speed / (l * l * l);
}

double overtone_ratio(const RydbergModel& model, long m, long k) {
    model.validate();
    if (m < 1) throw LevelError("level must be >= 1, got " + std::to_string(m));
    if (k == 0 || std::abs(k) >= m)
        throw JumpRangeError("need 1 <= |k| < m, got m=" + std::to_string(m) +
                             " k=" + std::to_string(k));
    // Emission m -> m-k: the lower level has the larger term value.
    const double emitted = model.term(m - k) - model.term(m);
    return emitted / (static_cast<double>(k) * fundamental_frequency(model, m));
}

std::string term_values_to_json(const TermFit& fit) {
    std::ostringstream out;
    out << "{\"gauge_index\": " << fit.terms.gauge() << ", \"terms\": [";
    const auto& terms = fit.terms.terms();
    for (std::size_t i = 0; i < terms.size(); ++i)
        out << (i ? ", " : "") << format_double(terms[i]);
    out << "], \"residual\": " << format_double(fit.residual) << "}\n";
    return out.str();
}

LineList parse_line_list_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("line list: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "m,n,omega") throw FormatError("line list: header must be 'm,n,omega'");

    struct Row { long m, n; double omega; };
    std::vector<Row> rows;
    long max_index = -1;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a, b, c;
        if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') ||
            !std::getline(fields, c) || c.find(',') != std::string::npos)
            throw FormatError("line list: line " + std::to_string(lineno) + " needs 3 fields");
        Row row{};
        try {
            std::size_t used = 0;
            row.m = std::stol(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            row.n = std::stol(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
            row.omega = std::stod(c, &used);
            if (used != c.size()) throw std::invalid_argument(c);
        } catch (const std::logic_error&) {
            throw FormatError("line list: unparsable line " + std::to_string(lineno));
        }
        if (row.m < 0 || row.n < 0)
            throw FormatError("line list: negative index on line " + std::to_string(lineno));
        max_index = std::max({max_index, row.m, row.n});
        rows.push_back(row);
    }
    if (rows.empty()) throw FormatError("line list: no transitions");

    LineList list;
    list.levels = max_index + 1;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(list.levels, list.levels);
    for (const auto& row : rows) {
        if (!list.mask.emplace(row.m, row.n).second)
            throw FormatError("line list: duplicate pair (" + std::to_string(row.m) + "," +
                              std::to_string(row.n) + ")");
        omega(row.m, row.n) = row.omega;
    }
    list.table = FrequencyTable(std::move(omega));
    return list;
}

std::string line_list_to_csv(const FrequencyTable& table, const PairMask& mask) {
    std::string out = "m,n,omega\n";
    for (const auto& [m, k] : mask)
        out += std::to_string(m) + "," + std::to_string(k) + "," + format_double(table(m, k)) + "\n";
    return out;
}

std::string balmer_table_to_json(const RydbergModel& model, const FrequencyTable& table) {
    std::ostringstream out;
    out << "{\"index_to_level\": \"level = index + 1\", \"level_offset\": 1, \"N\": "
        << table.size() << ", \"R\": " << format_double(model.rydberg)
        << ", \"c\": " << format_double(model.light_speed) << ", \"omega\": [";
    for (Eigen::Index m = 0; m < table.size(); ++m) {
        out << (m ? ", " : "") << '[';
        for (Eigen::Index k = 0; k < table.size(); ++k)
            out << (k ? ", " : "") << format_double(table(m, k));
        out << ']';
    }
    out << "]}\n";
    return out.str();
}

}  // namespace matmech
