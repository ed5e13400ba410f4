#include "matmech/fourier_algebra.hpp"

#include "matmech/errors.hpp"
#include "matmech/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace matmech {

namespace {

bool coefficients_are_real(const FourierSeries::Coefficients& coeffs) {
    for (const auto& [n, c] : coeffs) {
        const auto it = coeffs.find(-n);
        const complex mirror = it == coeffs.end() ? complex{} : it->second;
        if (std::abs(mirror - std::conj(c)) > FourierSeries::kRealTolerance) return false;
    }
    return true;
}

void require_same_algebra(const FourierSeries& f, const FourierSeries& g, const char* op) {
    // Bitwise: series from one orbit share a single stored omega.
    if (f.omega() != g.omega()) {
        throw FrequencyMismatchError(std::string(op) + ": omega " + format_double(f.omega()) +
                                     " != " + format_double(g.omega()));
    }
}

// z^n by squaring. Every term shares the single rounding of omega t, so
// e^{i(j+k)wt} = e^{ijwt} e^{ikwt} holds to a few ulps however large |n w t| is.
complex unit_power(complex z, long long n) {
    complex acc{1.0, 0.0};
    const bool inverse = n < 0;
    unsigned long long e = inverse ? -static_cast<unsigned long long>(n) : n;
    while (e) {
        if (e & 1ULL) acc *= z;
        z *= z;
        e >>= 1;
    }
    return inverse ? std::conj(acc) : acc;
}

}  // namespace

FourierSeries::FourierSeries(double omega, Coefficients coeffs) : omega_(omega) {
    if (!(std::isfinite(omega) && omega > 0.0)) {
        throw InvalidArgumentError("FourierSeries: omega must be finite and > 0, got " +
                                   format_double(omega));
    }
    std::erase_if(coeffs, [](const auto& kv) { return kv.second == complex{}; });
    coeffs_ = std::move(coeffs);
    real_ = coefficients_are_real(coeffs_);
}

complex FourierSeries::coefficient(int n) const {
    const auto it = coeffs_.find(n);
    return it == coeffs_.end() ? complex{} : it->second;
}

complex evaluate(const FourierSeries& f, double t) {
    const complex z = std::polar(1.0, f.omega() * t);
    complex sum{};
    for (const auto& [n, c] : f.coeffs()) sum += c * unit_power(z, n);
    return sum;
}

FourierSeries multiply(const FourierSeries& f, const FourierSeries& g) {
    require_same_algebra(f, g, "multiply");
    FourierSeries::Coefficients out;
    for (const auto& [j, c] : f.coeffs())
        for (const auto& [k, d] : g.coeffs()) out[j + k] += c * d;
    return FourierSeries(f.omega(), std::move(out));
}

FourierSeries involution(const FourierSeries& f) {
    FourierSeries::Coefficients out;
    for (const auto& [n, c] : f.coeffs()) out[-n] = std::conj(c);
    return FourierSeries(f.omega(), std::move(out));
}

FourierSeries add(const FourierSeries& f, const FourierSeries& g) {
    require_same_algebra(f, g, "add");
    FourierSeries::Coefficients out = f.coeffs();
    for (const auto& [n, d] : g.coeffs()) out[n] += d;
    return FourierSeries(f.omega(), std::move(out));
}

double max_coefficient_distance(const FourierSeries& f, const FourierSeries& g) {
    double worst = 0.0;
    for (const auto& [n, c] : f.coeffs()) worst = std::max(worst, std::abs(c - g.coefficient(n)));
    for (const auto& [n, d] : g.coeffs()) worst = std::max(worst, std::abs(f.coefficient(n) - d));
    return worst;
}

std::string to_json(const FourierSeries& f) {
    std::ostringstream out;
    out << "{\"omega\": " << format_double(f.omega()) << ", \"coeffs\": [";
    bool first = true;
    for (const auto& [n, c] : f.coeffs()) {  // std::map keeps n ascending
        out << (first ? "" : ", ") << '[' << n << ", " << format_double(c.real()) << ", "
            << format_double(c.imag()) << ']';
        first = false;
    }
    out << "]}\n";
    return out.str();
}

FourierSeries fourier_series_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        FourierSeries::Coefficients coeffs;
        for (const auto& row : doc.at("coeffs")) {
            if (!row.is_array() || row.size() != 3) throw FormatError("coeff row must be [n, re, im]");
            const int n = row[0].get<int>();
            if (coeffs.count(n)) throw FormatError("duplicate harmonic index " + std::to_string(n));
            coeffs[n] = complex(row[1].get<double>(), row[2].get<double>());
        }
        return FourierSeries(doc.at("omega").get<double>(), std::move(coeffs));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("fourier series JSON: ") + e.what());
    }
}

}  // namespace matmech
