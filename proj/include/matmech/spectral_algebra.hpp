// Ritz-consistent frequency tables and term values.
//
// A FrequencyTable holds doubly indexed angular frequencies omega(m,n). The
// Ritz combination rule omega(m,n) + omega(n,p) = omega(m,p) forces the form
// omega(m,n) = C_m - C_n; TermValues holds such a generator, pinned by a gauge.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace matmech {

class TermValues;

class FrequencyTable {
public:
    /// Requires a square, nonempty matrix of finite values.
    explicit FrequencyTable(Eigen::MatrixXd omega);

    Eigen::Index size() const noexcept { return omega_.rows(); }
    double operator()(Eigen::Index m, Eigen::Index n) const { return omega_(m, n); }
    const Eigen::MatrixXd& matrix() const noexcept { return omega_; }

    /// max |omega(m,n)|, zero for the 1x1 table.
    double max_abs() const noexcept { return omega_.cwiseAbs().maxCoeff(); }

private:
    Eigen::MatrixXd omega_;
};

class TermValues {
public:
    /// terms[gauge] is the pinned entry; it is not forced to zero here.
    TermValues(std::vector<double> terms, Eigen::Index gauge = 0);

    const std::vector<double>& terms() const noexcept { return terms_; }
    Eigen::Index gauge() const noexcept { return gauge_; }
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(terms_.size()); }

    /// omega(m,n) = C_m - C_n
    FrequencyTable table() const;

    /// Shift so that terms[gauge] == 0.
    TermValues gauge_fixed() const;

private:
    std::vector<double> terms_;
    Eigen::Index gauge_;
};

struct RitzCheck {
    bool ok = true;
    double worst_violation = 0.0;
    std::array<Eigen::Index, 3> worst_triple{0, 0, 0};
};

/// Exhaustive scan of |omega(m,n) + omega(n,p) - omega(m,p)|. The reported
/// triple is the lexicographically smallest maximizer.
RitzCheck check_ritz(const FrequencyTable& table, double tol);

/// 1e-9 * max|omega| (relative default tolerance).
double default_ritz_tolerance(const FrequencyTable& table);

using PairMask = std::set<std::pair<Eigen::Index, Eigen::Index>>;

/// Every off-diagonal pair of an N x N table.
PairMask full_mask(Eigen::Index n);

struct TermFit {
    TermValues terms;
    double residual;  ///< Euclidean norm of (omega(m,n) - (C_m - C_n)) over the mask
};

/// Unit-weight least squares of omega(m,n) ~ C_m - C_n over masked pairs with
/// gauge C_0 = 0. Throws DisconnectedGraphError unless the mask connects all levels.
TermFit fit_term_values(const FrequencyTable& table, const PairMask& mask);

struct RydbergModel {
    double rydberg = 1.0973731568e7;  ///< R, 1/m
    double light_speed = 2.99792458e8;  ///< c, m/s

    /// Throws InvalidArgumentError unless R > 0 and c > 0.
    void validate() const;
    /// Term value 2 pi R c / level^2.
    double term(long level) const;
};

/// 2 pi R c / m^2 - 2 pi R c / n^2; levels start at 1.
double balmer_frequency(const RydbergModel& model, long m, long n);

/// Table over levels 1..N; matrix index i is principal level i + 1.
FrequencyTable balmer_table(const RydbergModel& model, Eigen::Index n);

/// Classical orbital frequency of level m, the magnitude of dC/dm: 4 pi R c / m^3.
double fundamental_frequency(const RydbergModel& model, long m);

/// Emitted frequency of the jump m -> m - k divided by k * fundamental_frequency(m).
/// Requires 1 <= |k| < m; tends to 1 as m grows at fixed k.
double overtone_ratio(const RydbergModel& model, long m, long k);

std::string term_values_to_json(const TermFit& fit);

/// Observed transitions as parsed from the line-list CSV (header `m,n,omega`).
struct LineList {
    Eigen::Index levels = 0;  ///< max index + 1
    FrequencyTable table{Eigen::MatrixXd::Zero(1, 1)};
    PairMask mask;
};

LineList parse_line_list_csv(const std::string& text);
std::string line_list_to_csv(const FrequencyTable& table, const PairMask& mask);

std::string balmer_table_to_json(const RydbergModel& model, const FrequencyTable& table);

}  // namespace matmech
