// Ritz matrices built from classical Fourier data.
//
// The action is discretized as I_m = m hbar. An observable a with classical
// coefficients a_l(I) becomes the matrix A(m, n) = a_{m-n}(I*), where the
// evaluation action I* is chosen by a Convention. Matrices carry the
// frequency table omega(m, n) = (E_m - E_n) / hbar and evolve entrywise as
// A(m, n) exp(i omega(m, n) t).

#pragma once

#include "matmech/classical_dynamics.hpp"
#include "matmech/spectral_algebra.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace matmech {

/// Where A(m, n) samples a_{m-n}(I): upper -> max(m, n) hbar, row -> m hbar,
/// midpoint -> (m + n) hbar / 2.
enum class Convention { upper, row, midpoint };

std::string to_string(Convention c);
/// Throws InvalidArgumentError for names other than upper, row, midpoint.
Convention parse_convention(std::string_view name);

class ActionGrid {
public:
    /// E_m = E(m hbar) for m = 0..N-1 by inverting the numerical action map;
    /// E_0 is the potential minimum. Throws NonOscillatoryError past a separatrix.
    static ActionGrid build(const HamiltonianSystem& sys, double hbar, int levels,
                            const OrbitOptions& opts = {});

    /// A grid carrying injected energies and no orbits (e.g. hydrogen term values times hbar).
    static ActionGrid from_energies(double hbar, std::vector<double> energies);

    double hbar() const noexcept { return hbar_; }
    int size() const noexcept { return static_cast<int>(energies_.size()); }
    double action(int m) const noexcept { return m * hbar_; }
    /// J_m = 2 pi I_m = m h
    double restricted_action(int m) const noexcept;
    const std::vector<double>& energies() const noexcept { return energies_; }
    const OrbitOptions& orbit_options() const noexcept { return opts_; }

    bool has_orbits() const noexcept { return orbits_ != nullptr; }
    /// Orbit of level m (degenerate for m = 0). Requires has_orbits().
    const Orbit& orbit(int m) const;

    /// Term values E_m / hbar.
    TermValues term_values() const;
    /// omega(m, n) = (E_m - E_n) / hbar
    FrequencyTable frequencies() const;

    bool same_grid(const ActionGrid& other) const noexcept;

private:
    ActionGrid(double hbar, std::vector<double> energies,
               std::shared_ptr<const std::vector<Orbit>> orbits, OrbitOptions opts);

    double hbar_;
    std::vector<double> energies_;
    std::shared_ptr<const std::vector<Orbit>> orbits_;
    OrbitOptions opts_;
};

class HeisenbergMatrix {
public:
    HeisenbergMatrix(Eigen::MatrixXcd amp, double hbar, std::vector<double> energies,
                     std::string label, Convention convention, int band);

    int size() const noexcept { return static_cast<int>(amp_.rows()); }
    const Eigen::MatrixXcd& amp() const noexcept { return amp_; }
    std::complex<double> operator()(int m, int n) const { return amp_(m, n); }
    const FrequencyTable& freqs() const noexcept { return freqs_; }
    double hbar() const noexcept { return hbar_; }
    const std::vector<double>& energies() const noexcept { return energies_; }
    const std::string& label() const noexcept { return label_; }
    Convention convention() const noexcept { return convention_; }
    int band() const noexcept { return band_; }

    /// amp(n, m) == conj(amp(m, n)) within tol.
    bool is_hermitian(double tol = 1e-10) const;

    /// A matrix with the same grid and bookkeeping but new amplitudes.
    HeisenbergMatrix with_amp(Eigen::MatrixXcd amp, std::string label) const;

    bool same_grid(const HeisenbergMatrix& other) const noexcept;

private:
    Eigen::MatrixXcd amp_;
    double hbar_;
    std::vector<double> energies_;
    FrequencyTable freqs_;
    std::string label_;
    Convention convention_;
    int band_;
};

/// Entries with |m - n| <= band get a_{m-n}(I*); the rest are zero.
/// Throws BandError unless 0 <= band < N; the grid must carry orbits.
HeisenbergMatrix quantize(const HamiltonianSystem& sys, const ActionGrid& grid,
                          const Observable& observable, Convention convention, int band);
HeisenbergMatrix quantize(const HamiltonianSystem& sys, const ActionGrid& grid,
                          std::string_view observable, Convention convention, int band);

/// amp(m, n) exp(i omega(m, n) t)
Eigen::MatrixXcd evaluate_at_time(const HeisenbergMatrix& mx, double t);

struct MaskedMatrix {
    Eigen::MatrixXcd values;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
};

/// (Delta_k A)(m, n) = A(m, n) - A(m - k, n - k); entries whose shifted
/// index leaves [0, N) are invalid and hold zero.
MaskedMatrix matrix_difference(const Eigen::MatrixXcd& amp, int k);
MaskedMatrix matrix_difference(const HeisenbergMatrix& mx, int k);

/// AB - BA on amplitudes. Throws GridMismatchError unless A and B share a grid.
Eigen::MatrixXcd commutator(const HeisenbergMatrix& a, const HeisenbergMatrix& b);

struct CcrRow {
    int m;
    double re_dev;  ///< Re(C(m, m) - hbar / i)
    double im_dev;  ///< Im(C(m, m) - hbar / i)
    double max_offdiag_row;
};

struct CcrReport {
    double max_diag_dev = 0.0;
    double max_offdiag = 0.0;
    int interior_begin = 0;  ///< first interior row, W
    int interior_end = 0;    ///< one past the last interior row, N - W
    std::vector<CcrRow> rows;
    Eigen::MatrixXcd commutator;
};

/// C = [P, Q] restricted to rows W <= m <= N-1-W. Off-diagonal magnitudes are
/// taken over every column of an interior row.
CcrReport ccr_residual(const HeisenbergMatrix& p, const HeisenbergMatrix& q);
/// Quantizes p and q on the grid first. Throws SizeError unless N >= W + 3 and N >= 2W + 1.
CcrReport ccr_residual(const HamiltonianSystem& sys, const ActionGrid& grid, int band,
                       Convention convention = Convention::upper);

std::string ccr_report_to_csv(const CcrReport& report);

struct CorrespondenceOptions {
    Convention convention = Convention::upper;
    int harmonics = 24;  ///< |j| cutoff for the convolution route
};

struct CorrespondenceReport {
    std::complex<double> matrix_value;        ///< (AB - BA)(m, m - l)
    std::complex<double> bracket_value;       ///< (hbar/i) {a,b}(l), phase-space route
    std::complex<double> bracket_convolution; ///< (hbar/i) {a,b}(l), convolution route
    double scale = 0.0;      ///< hbar * sum of |terms| in the convolution route
    double rel_error = 0.0;  ///< |matrix - bracket| / max(|bracket|, scale)
    double route_discrepancy = 0.0;  ///< |bracket - convolution| / max(|bracket|, scale)
};

/// Compares the commutator entry (AB - BA)(m, m - l) with (hbar/i) times the
/// l-th Fourier coefficient of {a, b} on the orbit I = m hbar. The bracket is
/// evaluated twice: central differences in (q, p) pushed through the orbit
/// Fourier transform, and the convolution sum over j + k = l of
/// a_j'(I) (i k b_k) - (i j a_j) b_k'(I), with I-derivatives from
/// Richardson-combined central difference quotients over levels m +- 1, m +- 2.
/// Requires band >= |l| + 2 and band <= m <= N-1-band.
CorrespondenceReport correspondence_check(const HamiltonianSystem& sys, const ActionGrid& grid,
                                          const Observable& a, const Observable& b, int ell, int m,
                                          int band, const CorrespondenceOptions& opts = {});

std::string matrix_to_json(const HeisenbergMatrix& mx);
HeisenbergMatrix matrix_from_json(const std::string& text);

}  // namespace matmech
