// The *-algebra of finitely supported Fourier series.
//
// A FourierSeries is f(t) = sum_n c_n exp(i n omega t) with finitely many
// nonzero c_n. Series sharing the same fundamental frequency form a
// commutative *-algebra under pointwise product (coefficient convolution)
// and conjugation (c*_n = conj(c_{-n})).

#pragma once

#include <complex>
#include <map>
#include <string>

namespace matmech {

using complex = std::complex<double>;

class FourierSeries {
public:
    using Coefficients = std::map<int, complex>;

    /// Absolute tolerance used by the `real` flag test.
    static constexpr double kRealTolerance = 1e-14;

    /// omega must be finite and strictly positive. Exact zero coefficients are dropped.
    FourierSeries(double omega, Coefficients coeffs);

    double omega() const noexcept { return omega_; }
    const Coefficients& coeffs() const noexcept { return coeffs_; }

    /// c_n, or zero outside the support.
    complex coefficient(int n) const;

    /// True iff c_{-n} == conj(c_n) for every n (within kRealTolerance).
    bool is_real() const noexcept { return real_; }

    bool empty() const noexcept { return coeffs_.empty(); }

private:
    double omega_;
    Coefficients coeffs_;
    bool real_;
};

/// sum_n c_n exp(i n omega t)
complex evaluate(const FourierSeries& f, double t);

/// Convolution product. Throws FrequencyMismatchError unless f.omega() == g.omega() bitwise.
FourierSeries multiply(const FourierSeries& f, const FourierSeries& g);

FourierSeries involution(const FourierSeries& f);

/// Coefficientwise sum; same frequency rule as multiply.
FourierSeries add(const FourierSeries& f, const FourierSeries& g);

/// max_n |c_n(f) - c_n(g)| over the union of supports (frequencies are not compared).
double max_coefficient_distance(const FourierSeries& f, const FourierSeries& g);

std::string to_json(const FourierSeries& f);
FourierSeries fourier_series_from_json(const std::string& text);

}  // namespace matmech
