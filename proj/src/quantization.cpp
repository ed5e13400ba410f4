#include "matmech/quantization.hpp"

#include "matmech/errors.hpp"
#include "matmech/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace matmech {

namespace {

constexpr complex kI{0.0, 1.0};

}  // namespace

std::string to_string(Convention c) {
    switch (c) {
        case Convention::upper: return "upper";
        case Convention::row: return "row";
        case Convention::midpoint: return "midpoint";
    }
    return "?";
}

Convention parse_convention(std::string_view name) {
    if (name == "upper") return Convention::upper;
    if (name == "row") return Convention::row;
    if (name == "midpoint") return Convention::midpoint;
    throw InvalidArgumentError("unknown convention '" + std::string(name) +
                               "' (expected upper, row or midpoint)");
}

// ---------------------------------------------------------------------------
// ActionGrid

ActionGrid::ActionGrid(double hbar, std::vector<double> energies,
                       std::shared_ptr<const std::vector<Orbit>> orbits, OrbitOptions opts)
    : hbar_(hbar), energies_(std::move(energies)), orbits_(std::move(orbits)), opts_(opts) {
    if (!(hbar_ > 0.0 && std::isfinite(hbar_))) throw InvalidArgumentError("hbar must be > 0");
    if (energies_.empty()) throw SizeError("action grid needs at least one level");
}

ActionGrid ActionGrid::build(const HamiltonianSystem& sys, double hbar, int levels,
                             const OrbitOptions& opts) {
    if (!(hbar > 0.0 && std::isfinite(hbar))) throw InvalidArgumentError("hbar must be > 0");
    if (levels < 1) throw SizeError("action grid needs N >= 1");
    std::vector<double> energies;
    auto orbits = std::make_shared<std::vector<Orbit>>();
    energies.reserve(levels);
    orbits->reserve(levels);
    for (int m = 0; m < levels; ++m) {
        std::optional<double> guess;
        if (m >= 2) guess = energies.back() + orbits->back().omega() * hbar;
        ActionSolution sol = solve_action(sys, m * hbar, opts, guess);
        energies.push_back(sol.energy);
        orbits->push_back(std::move(sol.orbit));
    }
    return ActionGrid(hbar, std::move(energies), std::move(orbits), opts);
}

ActionGrid ActionGrid::from_energies(double hbar, std::vector<double> energies) {
    return ActionGrid(hbar, std::move(energies), nullptr, OrbitOptions{});
}

double ActionGrid::restricted_action(int m) const noexcept {
    return 2.0 * std::numbers::pi * action(m);
}

const Orbit& ActionGrid::orbit(int m) const {
    if (!orbits_) throw InvalidArgumentError("this action grid carries no orbits");
    if (m < 0 || m >= size()) throw SizeError("level " + std::to_string(m) + " outside the grid");
    return (*orbits_)[static_cast<std::size_t>(m)];
}

TermValues ActionGrid::term_values() const {
    std::vector<double> terms(energies_.size());
    for (std::size_t m = 0; m < terms.size(); ++m) terms[m] = energies_[m] / hbar_;
    return TermValues(std::move(terms));
}

FrequencyTable ActionGrid::frequencies() const { return term_values().table(); }

bool ActionGrid::same_grid(const ActionGrid& other) const noexcept {
    return hbar_ == other.hbar_ && energies_ == other.energies_;
}

// ---------------------------------------------------------------------------
// HeisenbergMatrix

namespace {

FrequencyTable table_from_energies(double hbar, const std::vector<double>& energies) {
    if (!(hbar > 0.0)) throw InvalidArgumentError("hbar must be > 0");
    std::vector<double> terms(energies.size());
    for (std::size_t m = 0; m < terms.size(); ++m) terms[m] = energies[m] / hbar;
    return TermValues(std::move(terms)).table();
}

}  // namespace

HeisenbergMatrix::HeisenbergMatrix(Eigen::MatrixXcd amp, double hbar, std::vector<double> energies,
                                   std::string label, Convention convention, int band)
    : amp_(std::move(amp)),
      hbar_(hbar),
      energies_(std::move(energies)),
      freqs_(table_from_energies(hbar_, energies_)),
      label_(std::move(label)),
      convention_(convention),
      band_(band) {
    if (amp_.rows() != amp_.cols() || amp_.rows() != static_cast<Eigen::Index>(energies_.size()))
        throw SizeError("amplitude matrix must be N x N with N energies");
}

bool HeisenbergMatrix::is_hermitian(double tol) const {
    return (amp_ - amp_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

HeisenbergMatrix HeisenbergMatrix::with_amp(Eigen::MatrixXcd amp, std::string label) const {
    return HeisenbergMatrix(std::move(amp), hbar_, energies_, std::move(label), convention_, band_);
}

bool HeisenbergMatrix::same_grid(const HeisenbergMatrix& other) const noexcept {
    return size() == other.size() && hbar_ == other.hbar_ && energies_ == other.energies_;
}

// ---------------------------------------------------------------------------
// quantize

namespace {

// Coefficients a_l for |l| <= band at action key * hbar / 2.
std::vector<complex> coefficients_at(const HamiltonianSystem& sys, const ActionGrid& grid,
                                     const Observable& observable, int key, int band) {
    std::vector<complex> out(2 * band + 1);
    if (key == 0) {
        out[band] = observable({sys.minimum_position(), 0.0});
        return out;
    }
    const auto fill = [&](const Orbit& orbit) {
        const FourierSeries series = orbit_fourier_coefficients(orbit, observable, -band, band);
        for (int l = -band; l <= band; ++l) out[l + band] = series.coefficient(l);
    };
    if (key % 2 == 0 && key / 2 < grid.size()) {
        fill(grid.orbit(key / 2));
    } else {
        fill(solve_action(sys, 0.5 * key * grid.hbar(), grid.orbit_options()).orbit);
    }
    return out;
}

int action_key(Convention convention, int m, int n) {
    switch (convention) {
        case Convention::upper: return 2 * std::max(m, n);
        case Convention::row: return 2 * m;
        case Convention::midpoint: return m + n;
    }
    return 0;
}

}  // namespace

HeisenbergMatrix quantize(const HamiltonianSystem& sys, const ActionGrid& grid,
                          const Observable& observable, Convention convention, int band) {
    const int n = grid.size();
    if (band < 0 || band >= n)
        throw BandError("band " + std::to_string(band) + " must satisfy 0 <= W < N = " +
                        std::to_string(n));
    if (!grid.has_orbits()) throw InvalidArgumentError("quantize needs a grid built from orbits");

    std::map<int, std::vector<complex>> cache;  // keyed by 2 I* / hbar
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        for (int k = std::max(0, m - band); k <= std::min(n - 1, m + band); ++k) {
            const int key = action_key(convention, m, k);
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache.emplace(key, coefficients_at(sys, grid, observable, key, band)).first;
            amp(m, k) = it->second[m - k + band];
        }
    }
    return HeisenbergMatrix(std::move(amp), grid.hbar(), grid.energies(), observable.name(),
                            convention, band);
}

HeisenbergMatrix quantize(const HamiltonianSystem& sys, const ActionGrid& grid,
                          std::string_view observable, Convention convention, int band) {
    return quantize(sys, grid, make_observable(observable, &sys), convention, band);
}

Eigen::MatrixXcd evaluate_at_time(const HeisenbergMatrix& mx, double t) {
    const int n = mx.size();
    Eigen::MatrixXcd out(n, n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) out(m, k) = mx(m, k) * std::polar(1.0, mx.freqs()(m, k) * t);
    return out;
}

MaskedMatrix matrix_difference(const Eigen::MatrixXcd& amp, int k) {
    const auto n = amp.rows();
    MaskedMatrix out{Eigen::MatrixXcd::Zero(n, amp.cols()),
                     Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, amp.cols(), false)};
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index c = 0; c < amp.cols(); ++c) {
            const Eigen::Index ms = m - k, cs = c - k;
            if (ms < 0 || cs < 0 || ms >= n || cs >= amp.cols()) continue;
            out.values(m, c) = amp(m, c) - amp(ms, cs);
            out.valid(m, c) = true;
        }
    }
    return out;
}

MaskedMatrix matrix_difference(const HeisenbergMatrix& mx, int k) {
    return matrix_difference(mx.amp(), k);
}

Eigen::MatrixXcd commutator(const HeisenbergMatrix& a, const HeisenbergMatrix& b) {
    if (!a.same_grid(b))
        throw GridMismatchError("matrices '" + a.label() + "' and '" + b.label() +
                                "' live on different action grids");
    return a.amp() * b.amp() - b.amp() * a.amp();
}

// ---------------------------------------------------------------------------
// CCR

CcrReport ccr_residual(const HeisenbergMatrix& p, const HeisenbergMatrix& q) {
    const int n = p.size();
    const int band = std::max(p.band(), q.band());
    if (n < band + 3 || n < 2 * band + 1)
        throw SizeError("need N >= W + 3 and N >= 2W + 1 for a nonempty interior (N = " +
                        std::to_string(n) + ", W = " + std::to_string(band) + ")");
    CcrReport report;
    report.commutator = commutator(p, q);
    report.interior_begin = band;
    report.interior_end = n - band;
    const complex target = -kI * p.hbar();  // hbar / i
    for (int m = report.interior_begin; m < report.interior_end; ++m) {
        const complex dev = report.commutator(m, m) - target;
        double off = 0.0;
        for (int c = 0; c < n; ++c)
            if (c != m) off = std::max(off, std::abs(report.commutator(m, c)));
        report.rows.push_back({m, dev.real(), dev.imag(), off});
        report.max_diag_dev = std::max(report.max_diag_dev, std::abs(dev));
        report.max_offdiag = std::max(report.max_offdiag, off);
    }
    return report;
}

CcrReport ccr_residual(const HamiltonianSystem& sys, const ActionGrid& grid, int band,
                       Convention convention) {
    const int n = grid.size();
    if (band < 0 || n < band + 3 || n < 2 * band + 1)
        throw SizeError("need N >= W + 3 and N >= 2W + 1 for a nonempty interior (N = " +
                        std::to_string(n) + ", W = " + std::to_string(band) + ")");
    const HeisenbergMatrix p = quantize(sys, grid, "p", convention, band);
    const HeisenbergMatrix q = quantize(sys, grid, "q", convention, band);
    return ccr_residual(p, q);
}

std::string ccr_report_to_csv(const CcrReport& report) {
    std::string out = "m,re_dev,im_dev,max_offdiag_row\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.m) + "," + format_double(row.re_dev) + "," +
               format_double(row.im_dev) + "," + format_double(row.max_offdiag_row) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// correspondence

CorrespondenceReport correspondence_check(const HamiltonianSystem& sys, const ActionGrid& grid,
                                          const Observable& a, const Observable& b, int ell, int m,
                                          int band, const CorrespondenceOptions& opts) {
    const int n = grid.size();
    if (band < std::abs(ell) + 2)
        throw BandError("correspondence needs W >= |l| + 2 (W = " + std::to_string(band) +
                        ", l = " + std::to_string(ell) + ")");
    if (band >= n) throw BandError("band must be < N");
    if (m < band || m > n - 1 - band)
        throw SizeError("row m = " + std::to_string(m) + " is outside the interior [" +
                        std::to_string(band) + ", " + std::to_string(n - 1 - band) + "]");
    if (opts.harmonics < std::abs(ell)) throw InvalidArgumentError("harmonic cutoff below |l|");

    const double hbar = grid.hbar();
    const complex over_i = -kI * hbar;  // hbar / i

    CorrespondenceReport report;
    const HeisenbergMatrix am = quantize(sys, grid, a, opts.convention, band);
    const HeisenbergMatrix bm = quantize(sys, grid, b, opts.convention, band);
    report.matrix_value = commutator(am, bm)(m, m - ell);

    // Phase-space route.
    const Orbit& orbit = grid.orbit(m);
    const FourierSeries bracket =
        orbit_fourier_coefficients(orbit, bracket_observable(a, b), ell, ell);
    report.bracket_value = over_i * bracket.coefficient(ell);

    // Convolution route.
    const int cut = opts.harmonics;
    const auto coeffs = [&](const Observable& f, int level) {
        std::vector<complex> out(2 * cut + 1);
        if (level == 0) {
            out[cut] = f({sys.minimum_position(), 0.0});
            return out;
        }
        const FourierSeries s = orbit_fourier_coefficients(grid.orbit(level), f, -cut, cut);
        for (int j = -cut; j <= cut; ++j) out[j + cut] = s.coefficient(j);
        return out;
    };
    const auto derivative = [&](const Observable& f) {
        const auto up1 = coeffs(f, m + 1), dn1 = coeffs(f, m - 1);
        const auto up2 = coeffs(f, m + 2), dn2 = coeffs(f, m - 2);
        std::vector<complex> out(2 * cut + 1);
        for (std::size_t j = 0; j < out.size(); ++j) {
            const complex d1 = (up1[j] - dn1[j]) / (2.0 * hbar);
            const complex d2 = (up2[j] - dn2[j]) / (4.0 * hbar);
            out[j] = (4.0 * d1 - d2) / 3.0;
        }
        return out;
    };
    const auto a0 = coeffs(a, m), b0 = coeffs(b, m);
    const auto da = derivative(a), db = derivative(b);

    complex sum{};
    double magnitude = 0.0;
    for (int j = -cut; j <= cut; ++j) {
        const int k = ell - j;
        if (k < -cut || k > cut) continue;
        const complex first = da[j + cut] * (kI * static_cast<double>(k)) * b0[k + cut];
        const complex second = (kI * static_cast<double>(j)) * a0[j + cut] * db[k + cut];
        sum += first - second;
        magnitude += std::abs(first) + std::abs(second);
    }
    report.bracket_convolution = over_i * sum;
    report.scale = hbar * magnitude;

    const double denom = std::max(std::abs(report.bracket_value), report.scale);
    const auto relative = [&](double diff) { return denom > 0.0 ? diff / denom : diff; };
    report.rel_error = relative(std::abs(report.matrix_value - report.bracket_value));
    report.route_discrepancy = relative(std::abs(report.bracket_value - report.bracket_convolution));
    return report;
}

// ---------------------------------------------------------------------------
// JSON

std::string matrix_to_json(const HeisenbergMatrix& mx) {
    std::ostringstream out;
    const int n = mx.size();
    out << "{\"N\": " << n << ", \"hbar\": " << format_double(mx.hbar()) << ", \"label\": "
        << nlohmann::json(mx.label()).dump() << ", \"convention\": \"" << to_string(mx.convention())
        << "\", \"band\": " << mx.band() << ", \"energies\": [";
    for (int m = 0; m < n; ++m) out << (m ? ", " : "") << format_double(mx.energies()[m]);
    out << "], \"amp\": [";
    for (int m = 0; m < n; ++m) {
        out << (m ? ", " : "") << '[';
        for (int k = 0; k < n; ++k) {
            out << (k ? ", " : "") << '[' << format_double(mx(m, k).real()) << ", "
                << format_double(mx(m, k).imag()) << ']';
        }
        out << ']';
    }
    out << "]}\n";
    return out.str();
}

HeisenbergMatrix matrix_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        const int n = doc.at("N").get<int>();
        const auto energies = doc.at("energies").get<std::vector<double>>();
        const auto& rows = doc.at("amp");
        if (n < 1 || static_cast<int>(energies.size()) != n || static_cast<int>(rows.size()) != n)
            throw FormatError("matrix JSON: N, energies and amp disagree");
        Eigen::MatrixXcd amp(n, n);
        for (int m = 0; m < n; ++m) {
            if (static_cast<int>(rows[m].size()) != n) throw FormatError("matrix JSON: ragged amp row");
            for (int k = 0; k < n; ++k) {
                const auto& cell = rows[m][k];
                if (cell.size() != 2) throw FormatError("matrix JSON: amp cell must be [re, im]");
                amp(m, k) = complex(cell[0].get<double>(), cell[1].get<double>());
            }
        }
        return HeisenbergMatrix(std::move(amp), doc.at("hbar").get<double>(), energies,
                                doc.at("label").get<std::string>(),
                                parse_convention(doc.at("convention").get<std::string>()),
                                doc.at("band").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("matrix JSON: ") + e.what());
    }
}

}  // namespace matmech
