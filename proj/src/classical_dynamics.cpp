#include "matmech/classical_dynamics.hpp"

#include "matmech/errors.hpp"
#include "matmech/format.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace matmech {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr long long kMaxStepsPerOrbit = 400'000'000;

const std::vector<std::string>& canonical_keys(PotentialFamily family) {
    static const std::vector<std::string> harmonic{"M", "omega0"};
    static const std::vector<std::string> quartic{"lambda", "M"};
    static const std::vector<std::string> pendulum{"g", "L", "M"};
    static const std::vector<std::string> none{};
    switch (family) {
        case PotentialFamily::harmonic: return harmonic;
        case PotentialFamily::quartic: return quartic;
        case PotentialFamily::pendulum: return pendulum;
        case PotentialFamily::polynomial: return none;
    }
    return none;
}

std::string family_name(PotentialFamily family) {
    switch (family) {
        case PotentialFamily::harmonic: return "harmonic";
        case PotentialFamily::quartic: return "quartic";
        case PotentialFamily::pendulum: return "pendulum";
        case PotentialFamily::polynomial: return "polynomial";
    }
    return "?";
}

double parse_number(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::logic_error&) {
        throw PotentialSpecError(context + ": '" + text + "' is not a number");
    }
    if (used != text.size() || !std::isfinite(value))
        throw PotentialSpecError(context + ": '" + text + "' is not a finite number");
    return value;
}

// Polynomial coefficient keys are c0, c1, ... c16.
std::optional<int> coefficient_index(std::string_view key) {
    if (key.size() < 2 || key.size() > 3 || key[0] != 'c') return std::nullopt;
    int k = 0;
    for (char ch : key.substr(1)) {
        if (ch < '0' || ch > '9') return std::nullopt;
        k = 10 * k + (ch - '0');
    }
    if (key.size() == 3 && key[1] == '0') return std::nullopt;
    if (k > 16) return std::nullopt;
    return k;
}

void require_positive(const std::map<std::string, double>& params, const std::string& key) {
    const auto it = params.find(key);
    if (it != params.end() && !(it->second > 0.0))
        throw PotentialSpecError("parameter " + key + " must be > 0");
}

}  // namespace

HamiltonianSystem::HamiltonianSystem(PotentialFamily family, std::map<std::string, double> params,
                                     double mass)
    : family_(family), params_(std::move(params)), mass_(mass) {
    if (!(mass_ > 0.0 && std::isfinite(mass_))) throw PotentialSpecError("mass M must be > 0");
    params_["M"] = mass_;
    for (const auto& key : canonical_keys(family_)) require_positive(params_, key);
    if (family_ == PotentialFamily::polynomial) {
        int degree = -1;
        for (const auto& [key, value] : params_)
            if (auto k = coefficient_index(key); k && value != 0.0) degree = std::max(degree, *k);
        poly_.assign(static_cast<std::size_t>(std::max(degree + 1, 0)), 0.0);
        for (const auto& [key, value] : params_)
            if (auto k = coefficient_index(key); k && *k <= degree) poly_[*k] = value;
        // Drop explicit zero coefficients beyond the degree so spec() is canonical.
        std::erase_if(params_, [&](const auto& kv) {
            const auto k = coefficient_index(kv.first);
            return k && *k > degree;
        });
    }
    locate_extrema();
}

HamiltonianSystem HamiltonianSystem::harmonic(double mass, double omega0) {
    return HamiltonianSystem(PotentialFamily::harmonic, {{"omega0", omega0}}, mass);
}

HamiltonianSystem HamiltonianSystem::quartic(double lambda, double mass) {
    return HamiltonianSystem(PotentialFamily::quartic, {{"lambda", lambda}}, mass);
}

HamiltonianSystem HamiltonianSystem::pendulum(double g, double length, double mass) {
    return HamiltonianSystem(PotentialFamily::pendulum, {{"g", g}, {"L", length}}, mass);
}

HamiltonianSystem HamiltonianSystem::polynomial(std::vector<double> coeffs, double mass) {
    if (coeffs.size() > 17) throw PotentialSpecError("polynomial degree must be <= 16");
    std::map<std::string, double> params;
    for (std::size_t k = 0; k < coeffs.size(); ++k) params["c" + std::to_string(k)] = coeffs[k];
    return HamiltonianSystem(PotentialFamily::polynomial, std::move(params), mass);
}

HamiltonianSystem HamiltonianSystem::parse(std::string_view spec) {
    const std::string text(spec);
    const auto colon = text.find(':');
    const std::string family = text.substr(0, colon);

    std::map<std::string, double> params;
    if (colon != std::string::npos) {
        const std::string body = text.substr(colon + 1);
        if (body.empty()) throw PotentialSpecError("empty parameter list after ':' in '" + text + "'");
        std::size_t start = 0;
        while (start <= body.size()) {
            const auto comma = body.find(',', start);
            const std::string item =
                body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw PotentialSpecError("expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            if (params.count(key)) throw PotentialSpecError("duplicate key '" + key + "'");
            params[key] = parse_number(item.substr(eq + 1), key);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }

    const auto take = [&](const std::string& key, double fallback) {
        const auto it = params.find(key);
        if (it == params.end()) return fallback;
        const double v = it->second;
        params.erase(it);
        return v;
    };
    const auto reject_leftovers = [&] {
        if (!params.empty())
            throw PotentialSpecError("unknown key '" + params.begin()->first + "' for family '" +
                                     family + "'");
    };

    if (family == "harmonic") {
        const double mass = take("M", 1.0);
        const double omega0 = take("omega0", 1.0);
        reject_leftovers();
        return harmonic(mass, omega0);
    }
    if (family == "quartic") {
        const double lambda = take("lambda", 1.0);
        const double mass = take("M", 1.0);
        reject_leftovers();
        return quartic(lambda, mass);
    }
    if (family == "pendulum") {
        const double g = take("g", 1.0);
        const double length = take("L", 1.0);
        const double mass = take("M", 1.0);
        reject_leftovers();
        return pendulum(g, length, mass);
    }
    if (family == "polynomial") {
        const double mass = take("M", 1.0);
        std::vector<double> coeffs;
        for (const auto& [key, value] : params) {
            const auto k = coefficient_index(key);
            if (!k) throw PotentialSpecError("unknown key '" + key + "' for family 'polynomial'");
            if (coeffs.size() <= static_cast<std::size_t>(*k)) coeffs.resize(*k + 1, 0.0);
            coeffs[*k] = value;
        }
        return polynomial(std::move(coeffs), mass);
    }
    throw PotentialSpecError("unknown potential family '" + family + "'");
}

std::string HamiltonianSystem::spec() const {
    std::string out = family_name(family_) + ":";
    bool first = true;
    const auto emit = [&](const std::string& key, double value) {
        out += (first ? "" : ",") + key + "=" + format_double(value);
        first = false;
    };
    if (family_ == PotentialFamily::polynomial) {
        for (std::size_t k = 0; k < poly_.size(); ++k) emit("c" + std::to_string(k), poly_[k]);
        emit("M", mass_);
    } else {
        for (const auto& key : canonical_keys(family_)) emit(key, params_.at(key));
    }
    return out;
}

double HamiltonianSystem::parameter(std::string_view key) const {
    const auto it = params_.find(std::string(key));
    if (it == params_.end())
        throw InvalidArgumentError("no parameter '" + std::string(key) + "' in " + spec());
    return it->second;
}

double HamiltonianSystem::polynomial_derivative(double q, int order) const {
    // Horner on the order-th derivative coefficients.
    double acc = 0.0;
    for (int k = static_cast<int>(poly_.size()) - 1; k >= order; --k) {
        double factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= k - j;
        acc = acc * q + factor * poly_[k];
    }
    return acc;
}

double HamiltonianSystem::potential(double q) const {
    switch (family_) {
        case PotentialFamily::harmonic: {
            const double w = params_.at("omega0");
            return 0.5 * mass_ * w * w * q * q;
        }
        case PotentialFamily::quartic: return 0.25 * params_.at("lambda") * q * q * q * q;
        case PotentialFamily::pendulum:
            return params_.at("g") / params_.at("L") * (1.0 - std::cos(q));
        case PotentialFamily::polynomial: return polynomial_derivative(q, 0);
    }
    return 0.0;
}

double HamiltonianSystem::force(double q) const {
    switch (family_) {
        case PotentialFamily::harmonic: {
            const double w = params_.at("omega0");
            return -mass_ * w * w * q;
        }
        case PotentialFamily::quartic: return -params_.at("lambda") * q * q * q;
        case PotentialFamily::pendulum: return -params_.at("g") / params_.at("L") * std::sin(q);
        case PotentialFamily::polynomial: return -polynomial_derivative(q, 1);
    }
    return 0.0;
}

double HamiltonianSystem::curvature(double q) const {
    switch (family_) {
        case PotentialFamily::harmonic: {
            const double w = params_.at("omega0");
            return mass_ * w * w;
        }
        case PotentialFamily::quartic: return 3.0 * params_.at("lambda") * q * q;
        case PotentialFamily::pendulum: return params_.at("g") / params_.at("L") * std::cos(q);
        case PotentialFamily::polynomial: return polynomial_derivative(q, 2);
    }
    return 0.0;
}

double HamiltonianSystem::hamiltonian(PhasePoint x) const {
    return 0.5 * x.p * x.p / mass_ + potential(x.q);
}

void HamiltonianSystem::locate_extrema() {
    switch (family_) {
        case PotentialFamily::harmonic:
        case PotentialFamily::quartic: q_min_ = 0.0; return;
        case PotentialFamily::pendulum:
            q_min_ = 0.0;
            barrier_left_ = -std::numbers::pi;
            barrier_right_ = std::numbers::pi;
            separatrix_ = 2.0 * params_.at("g") / params_.at("L");
            return;
        case PotentialFamily::polynomial: break;
    }

    // Critical points are the real roots of V'; classify them by the sign of
    // V' on the intervals between consecutive roots.
    const int degree = static_cast<int>(poly_.size()) - 2;  // degree of V'
    if (degree < 1) throw PotentialSpecError("polynomial potential has no local minimum");
    std::vector<double> deriv(degree + 1);
    for (int k = 0; k <= degree; ++k) deriv[k] = (k + 1) * poly_[k + 1];

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -deriv[i] / deriv[degree];
    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();

    std::vector<double> crit;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        const auto r = roots(i);
        if (std::abs(r.imag()) > 1e-4 * (1.0 + std::abs(r.real()))) continue;
        double x = r.real();
        for (int it = 0; it < 8; ++it) {  // polish simple roots
            const double d2 = polynomial_derivative(x, 2);
            if (d2 == 0.0) break;
            const double step = polynomial_derivative(x, 1) / d2;
            if (!std::isfinite(step) || std::abs(step) > 1e-3 * (1.0 + std::abs(x))) break;
            x -= step;
        }
        crit.push_back(x);
    }
    std::sort(crit.begin(), crit.end());
    std::vector<double> distinct;
    for (double x : crit)
        if (distinct.empty() || x - distinct.back() > 1e-6 * (1.0 + std::abs(x))) distinct.push_back(x);
    if (distinct.empty()) throw PotentialSpecError("polynomial potential has no local minimum");

    const std::size_t count = distinct.size();
    // sign[i] is the sign of V' on the interval left of distinct[i]; sign[count] is right of the last.
    std::vector<int> sign(count + 1);
    for (std::size_t i = 0; i <= count; ++i) {
        const double probe = i == 0       ? distinct.front() - 1.0
                             : i == count ? distinct.back() + 1.0
                                          : 0.5 * (distinct[i - 1] + distinct[i]);
        const double d = polynomial_derivative(probe, 1);
        sign[i] = d > 0 ? 1 : (d < 0 ? -1 : 0);
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < count; ++i) {
        if (sign[i] < 0 && sign[i + 1] > 0 &&
            (!best || std::abs(distinct[i]) < std::abs(distinct[*best])))
            best = i;
    }
    if (!best) throw PotentialSpecError("polynomial potential has no local minimum");
    q_min_ = distinct[*best];

    for (std::size_t j = *best + 1; j < count; ++j)
        if (sign[j + 1] < 0) { barrier_right_ = distinct[j]; break; }
    for (std::size_t j = *best; j-- > 0;)
        if (sign[j] > 0) { barrier_left_ = distinct[j]; break; }

    if (barrier_left_) separatrix_ = std::min(separatrix_, potential(*barrier_left_));
    if (barrier_right_) separatrix_ = std::min(separatrix_, potential(*barrier_right_));
}

PhasePoint hamiltonian_flow_step(const HamiltonianSystem& sys, PhasePoint x, double dt) {
    if (!(dt > 0.0)) throw InvalidStepError("flow step requires dt > 0");
    const double half = 0.5 * dt;
    const double p_half = x.p + half * sys.force(x.q);
    const double q = x.q + dt * p_half / sys.mass();
    return {q, p_half + half * sys.force(q)};
}

// ---------------------------------------------------------------------------
// Orbits

Orbit Orbit::degenerate(const HamiltonianSystem& sys) {
    return Orbit({PhasePoint{sys.minimum_position(), 0.0}}, 0.0, sys.minimum_energy(), sys.mass());
}

Orbit::Orbit(std::vector<PhasePoint> samples, double period, double energy, double mass)
    : samples_(std::move(samples)), period_(period), energy_(energy), mass_(mass) {
    if (samples_.empty()) throw InvalidArgumentError("orbit needs at least one sample");
    if (!(mass_ > 0.0)) throw InvalidArgumentError("orbit mass must be > 0");
    if (samples_.size() > 1 && !(period_ > 0.0))
        throw InvalidArgumentError("nondegenerate orbit needs a positive period");
    omega_ = samples_.size() > 1 ? kTwoPi / period_ : 0.0;
    action_ = matmech::action(*this);
}

double Orbit::restricted_action() const noexcept { return kTwoPi * action_; }

double Orbit::time_step() const noexcept {
    return samples_.size() > 1 ? period_ / static_cast<double>(samples_.size() - 1) : 0.0;
}

double Orbit::energy_drift(const HamiltonianSystem& sys) const {
    const double scale = std::max(energy_ - sys.minimum_energy(), 1e-300);
    double worst = 0.0;
    for (const auto& x : samples_) worst = std::max(worst, std::abs(sys.hamiltonian(x) - energy_));
    return worst / scale;
}

double Orbit::closure_error() const {
    const auto& a = samples_.front();
    const auto& b = samples_.back();
    return std::hypot(a.q - b.q, a.p - b.p);
}

double action(const Orbit& orbit) {
    const auto& s = orbit.samples();
    if (s.size() <= 1) return 0.0;
    const std::size_t nodes = s.size() - 1;
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) sum += s[k].p * s[k].p;
    return sum / orbit.mass() * (orbit.period() / static_cast<double>(nodes)) / kTwoPi;
}

namespace {

double right_turning_point(const HamiltonianSystem& sys, double energy) {
    const double q0 = sys.minimum_position();
    double hi;
    if (const auto barrier = sys.barrier_right()) {
        hi = *barrier;
    } else {
        double reach = 1e-3 * (1.0 + std::abs(q0));
        hi = q0 + reach;
        for (int i = 0; sys.potential(hi) <= energy; ++i) {
            if (i > 2000) throw NonOscillatoryError("no right turning point below the energy");
            reach *= 2.0;
            hi = q0 + reach;
        }
    }
    const auto f = [&](double q) { return sys.potential(q) - energy; };
    std::uintmax_t iters = 300;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, q0, hi, f(q0), f(hi), boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (a + b);
}

// Cubic Hermite root of p on one step: p0 > 0 >= p1, slopes are dp/dt = F(q).
double refine_crossing(double p0, double p1, double d0, double d1, double h) {
    const auto hermite = [&](double u) {
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * p1 +
               (u3 - u2) * h * d1;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hermite(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) * h;
}

double detect_period(const HamiltonianSystem& sys, PhasePoint start, double dt) {
    PhasePoint x = start;
    bool seen_positive = false;
    for (long long n = 0; n < kMaxStepsPerOrbit; ++n) {
        const PhasePoint next = hamiltonian_flow_step(sys, x, dt);
        if (next.p > 0.0) seen_positive = true;
        if (seen_positive && x.p > 0.0 && next.p <= 0.0) {
            return static_cast<double>(n) * dt +
                   refine_crossing(x.p, next.p, sys.force(x.q), sys.force(next.q), dt);
        }
        x = next;
    }
    throw NonOscillatoryError("orbit did not close within the step budget");
}

Orbit sample_orbit(const HamiltonianSystem& sys, PhasePoint start, double period, double energy,
                   double dt, int samples) {
    const auto sub = static_cast<long long>(
        std::max(1.0, std::ceil(period / (static_cast<double>(samples) * dt))));
    const double h = period / static_cast<double>(samples * sub);
    std::vector<PhasePoint> out;
    out.reserve(static_cast<std::size_t>(samples) + 1);
    PhasePoint x = start;
    out.push_back(x);
    for (int k = 0; k < samples; ++k) {
        for (long long s = 0; s < sub; ++s) x = hamiltonian_flow_step(sys, x, h);
        out.push_back(x);
    }
    return Orbit(std::move(out), period, energy, sys.mass());
}

}  // namespace

Orbit find_orbit(const HamiltonianSystem& sys, double energy, double dt_hint, int samples) {
    OrbitOptions opts;
    opts.dt = dt_hint;
    opts.samples = samples;
    return find_orbit(sys, energy, opts);
}

Orbit find_orbit(const HamiltonianSystem& sys, double energy, const OrbitOptions& opts) {
    if (!(opts.dt > 0.0)) throw InvalidStepError("dt_hint must be > 0");
    if (opts.samples < 4) throw InvalidArgumentError("need at least 4 samples per period");
    if (!std::isfinite(energy)) throw InvalidArgumentError("energy must be finite");
    if (!(energy > sys.minimum_energy()))
        throw NonOscillatoryError("energy " + format_double(energy) +
                                  " is not above the potential minimum " +
                                  format_double(sys.minimum_energy()));
    if (!(energy < sys.separatrix_energy()))
        throw NonOscillatoryError("energy " + format_double(energy) +
                                  " is at or above the separatrix energy " +
                                  format_double(sys.separatrix_energy()));

    const PhasePoint start{right_turning_point(sys, energy), 0.0};
    double dt = opts.dt;
    for (int attempt = 0;; ++attempt) {
        const double period = detect_period(sys, start, dt);
        Orbit orbit = sample_orbit(sys, start, period, energy, dt, opts.samples);
        const double drift = orbit.energy_drift(sys);
        const bool good = drift <= 1e-8 && orbit.closure_error() <= 1e-6;
        if (!good && attempt < opts.max_refinements) {
            dt *= 0.25;
            continue;
        }
        // The leapfrog bias in I tracks the drift (both are O(dt^2)), so one
        // rescaled pass brings it under the absolute target.
        const double bias = 1.5 * drift * orbit.action();
        if (opts.action_tolerance > 0.0 && bias > opts.action_tolerance) {
            const double shrink = 0.9 * std::sqrt(opts.action_tolerance / bias);
            const double fine = std::max(dt * shrink, period / 4e7);
            if (fine < dt) {
                const double fine_period = detect_period(sys, start, fine);
                return sample_orbit(sys, start, fine_period, energy, fine, opts.samples);
            }
        }
        return orbit;
    }
}

ActionSolution solve_action(const HamiltonianSystem& sys, double target, const OrbitOptions& opts,
                            std::optional<double> energy_guess) {
    if (!(std::isfinite(target) && target >= 0.0))
        throw InvalidArgumentError("action must be finite and >= 0");
    const double e_min = sys.minimum_energy();
    if (target == 0.0) return {e_min, Orbit::degenerate(sys)};

    const double sep = sys.separatrix_energy();
    const double e_cap = std::isfinite(sep) ? e_min + (sep - e_min) * (1.0 - 1e-9) : sep;

    const double curv = sys.curvature(sys.minimum_position());
    const double w0 = curv > 0.0 ? std::sqrt(curv / sys.mass()) : 1.0;
    double energy = e_min + w0 * target;
    if (energy_guess && *energy_guess > e_min && std::isfinite(*energy_guess)) energy = *energy_guess;
    if (energy >= e_cap) energy = e_min + 0.5 * (e_cap - e_min);

    double lo = e_min;
    double hi = e_cap;
    bool have_hi = false;
    std::optional<ActionSolution> best;
    double best_err = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < 200; ++iter) {
        Orbit orbit = find_orbit(sys, energy, opts);
        const double value = orbit.action();
        const double err = value - target;
        const double period = orbit.period();
        if (std::abs(err) < best_err) {
            best_err = std::abs(err);
            best.emplace(ActionSolution{energy, std::move(orbit)});
        }
        if (best_err <= 1e-13 * target) break;

        if (err < 0.0) {
            lo = energy;
        } else {
            hi = energy;
            have_hi = true;
        }
        if (have_hi && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) break;

        double next = energy - err * kTwoPi / period;
        if (!have_hi) {
            if (!(next > energy)) next = e_min + 2.0 * (energy - e_min);
            if (std::isfinite(e_cap) && next >= e_cap) {
                if (energy >= e_cap)
                    throw NonOscillatoryError("action " + format_double(target) +
                                              " lies beyond the separatrix");
                next = e_cap - energy < 1e-6 * (e_cap - e_min) ? e_cap
                                                                : energy + 0.5 * (e_cap - energy);
            }
        } else if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        energy = next;
    }
    return std::move(*best);
}

double energy_at_action(const HamiltonianSystem& sys, double action, const OrbitOptions& opts) {
    return solve_action(sys, action, opts).energy;
}

double frequency_from_action(const HamiltonianSystem& sys, double action, double d_action,
                             const OrbitOptions& opts) {
    if (d_action == 0.0 || !std::isfinite(d_action))
        throw InvalidStepError("dI must be nonzero and finite");
    const double d = std::abs(d_action);
    if (action - d < 0.0) throw InvalidStepError("I - dI must be >= 0");
    const double up = energy_at_action(sys, action + d, opts);
    const double down = energy_at_action(sys, action - d, opts);
    return (up - down) / (2.0 * d);
}

// ---------------------------------------------------------------------------
// Observables and Fourier data

Observable polynomial_observable(std::map<std::pair<int, int>, double> coeffs) {
    std::string name = "poly:";
    bool first = true;
    for (const auto& [powers, c] : coeffs) {
        name += (first ? "" : ",") + std::string("q") + std::to_string(powers.first) + "p" +
                std::to_string(powers.second) + "=" + format_double(c);
        first = false;
    }
    return Observable(std::move(name), [coeffs = std::move(coeffs)](PhasePoint x) {
        double sum = 0.0;
        for (const auto& [powers, c] : coeffs)
            sum += c * std::pow(x.q, powers.first) * std::pow(x.p, powers.second);
        return sum;
    });
}

namespace {

std::optional<std::pair<int, int>> parse_monomial(std::string_view key) {
    int qpow = 0, ppow = 0;
    std::size_t i = 0;
    bool any = false;
    for (const char var : {'q', 'p'}) {
        if (i < key.size() && key[i] == var) {
            ++i;
            std::size_t start = i;
            int value = 0;
            while (i < key.size() && key[i] >= '0' && key[i] <= '9' && i - start < 2)
                value = 10 * value + (key[i++] - '0');
            if (i == start) value = 1;
            (var == 'q' ? qpow : ppow) = value;
            any = true;
        }
    }
    if (!any || i != key.size()) return std::nullopt;
    return std::make_pair(qpow, ppow);
}

}  // namespace

Observable make_observable(std::string_view name, const HamiltonianSystem* sys) {
    if (name == "q") return Observable("q", [](PhasePoint x) { return x.q; });
    if (name == "p") return Observable("p", [](PhasePoint x) { return x.p; });
    if (name == "q2" || name == "q^2") return Observable("q2", [](PhasePoint x) { return x.q * x.q; });
    if (name == "p2" || name == "p^2") return Observable("p2", [](PhasePoint x) { return x.p * x.p; });
    if (name == "H") {
        if (!sys) throw UnknownObservableError("observable H needs a Hamiltonian system");
        const HamiltonianSystem copy = *sys;
        return Observable("H", [copy](PhasePoint x) { return copy.hamiltonian(x); });
    }
    if (name.substr(0, 5) == "poly:") {
        std::map<std::pair<int, int>, double> coeffs;
        const std::string body(name.substr(5));
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            const std::string item =
                body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            const auto eq = item.find('=');
            const auto powers = eq == std::string::npos ? std::nullopt : parse_monomial(item.substr(0, eq));
            if (!powers) throw UnknownObservableError("bad polynomial term '" + item + "'");
            std::size_t used = 0;
            double c = 0.0;
            const std::string value = item.substr(eq + 1);
            try {
                c = std::stod(value, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used == 0 || used != value.size() || !std::isfinite(c))
                throw UnknownObservableError("bad coefficient in '" + item + "'");
            coeffs[*powers] += c;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return polynomial_observable(std::move(coeffs));
    }
    throw UnknownObservableError("unknown observable '" + std::string(name) + "'");
}

FourierSeries orbit_fourier_coefficients(const Orbit& orbit, const Observable& observable,
                                         int n_min, int n_max) {
    if (orbit.is_degenerate())
        throw InvalidArgumentError("Fourier coefficients need a nondegenerate orbit");
    if (n_min > n_max) throw InvalidArgumentError("empty harmonic range");

    const auto nodes = static_cast<long long>(orbit.nodes());
    // Twiddles built conjugate-symmetric so real observables give exactly
    // conjugate coefficient pairs.
    std::vector<complex> twiddle(static_cast<std::size_t>(nodes));
    for (long long j = 0; j <= nodes / 2; ++j) {
        twiddle[j] = std::polar(1.0, -kTwoPi * static_cast<double>(j) / static_cast<double>(nodes));
        if (j > 0) twiddle[nodes - j] = std::conj(twiddle[j]);
    }
    std::vector<double> values(static_cast<std::size_t>(nodes));
    for (long long k = 0; k < nodes; ++k) values[k] = observable(orbit.samples()[k]);

    FourierSeries::Coefficients coeffs;
    for (int n = n_min; n <= n_max; ++n) {
        const long long step = ((n % nodes) + nodes) % nodes;
        complex sum{};
        long long idx = 0;
        for (long long k = 0; k < nodes; ++k) {
            sum += values[k] * twiddle[idx];
            idx += step;
            if (idx >= nodes) idx -= nodes;
        }
        coeffs[n] = sum / static_cast<double>(nodes);
    }
    return FourierSeries(orbit.omega(), std::move(coeffs));
}

// ---------------------------------------------------------------------------
// Brackets and Jacobians

namespace {

double bracket_with_steps(const Observable& a, const Observable& b, PhasePoint x, double hq,
                          double hp) {
    const auto dq = [&](const Observable& f) {
        return (f({x.q + hq, x.p}) - f({x.q - hq, x.p})) / (2.0 * hq);
    };
    const auto dp = [&](const Observable& f) {
        return (f({x.q, x.p + hp}) - f({x.q, x.p - hp})) / (2.0 * hp);
    };
    return dp(a) * dq(b) - dq(a) * dp(b);
}

double jacobian_with_steps(const PhaseMap& map, PhasePoint x, double hq, double hp) {
    const PhasePoint qp = map({x.q + hq, x.p}), qm = map({x.q - hq, x.p});
    const PhasePoint pp = map({x.q, x.p + hp}), pm = map({x.q, x.p - hp});
    const double dQdq = (qp.q - qm.q) / (2.0 * hq), dPdq = (qp.p - qm.p) / (2.0 * hq);
    const double dQdp = (pp.q - pm.q) / (2.0 * hp), dPdp = (pp.p - pm.p) / (2.0 * hp);
    return dQdq * dPdp - dQdp * dPdq;
}

}  // namespace

double poisson_bracket(const Observable& a, const Observable& b, PhasePoint x) {
    return bracket_with_steps(a, b, x, 1e-5 * (1.0 + std::abs(x.q)), 1e-5 * (1.0 + std::abs(x.p)));
}

double poisson_bracket(const Observable& a, const Observable& b, PhasePoint x, double h) {
    if (!(h > 0.0)) throw InvalidStepError("bracket step h must be > 0");
    return bracket_with_steps(a, b, x, h, h);
}

Observable bracket_observable(const Observable& a, const Observable& b) {
    return Observable("{" + a.name() + "," + b.name() + "}",
                      [a, b](PhasePoint x) { return poisson_bracket(a, b, x); });
}

PhaseMap identity_map() {
    return PhaseMap("identity", [](PhasePoint x) { return x; });
}

PhaseMap scaling_map(double sq, double sp) {
    return PhaseMap("scale", [sq, sp](PhasePoint x) { return PhasePoint{sq * x.q, sp * x.p}; });
}

PhaseMap harmonic_action_angle_map(double mass, double omega0) {
    if (!(mass > 0.0 && omega0 > 0.0)) throw InvalidArgumentError("need M > 0 and omega0 > 0");
    return PhaseMap("harmonic-action-angle", [mass, omega0](PhasePoint x) {
        const double theta = x.q, action = x.p;
        return PhasePoint{std::sqrt(2.0 * action / (mass * omega0)) * std::cos(theta),
                          -std::sqrt(2.0 * action * mass * omega0) * std::sin(theta)};
    });
}

PhaseMap flow_map(const HamiltonianSystem& sys, double dt) {
    if (!(dt > 0.0)) throw InvalidStepError("flow map requires dt > 0");
    return PhaseMap("flow-step", [sys, dt](PhasePoint x) { return hamiltonian_flow_step(sys, x, dt); });
}

PhaseMap make_phase_map(std::string_view name, const HamiltonianSystem& sys, double dt) {
    if (name == "identity") return identity_map();
    if (name == "scale-q") return scaling_map(2.0, 1.0);
    if (name == "flow-step") return flow_map(sys, dt);
    if (name == "harmonic-action-angle") {
        if (sys.family() != PotentialFamily::harmonic)
            throw InvalidArgumentError("harmonic-action-angle needs a harmonic system");
        return harmonic_action_angle_map(sys.mass(), sys.parameter("omega0"));
    }
    throw UnknownMapError("unknown phase map '" + std::string(name) + "'");
}

double jacobian_check(const PhaseMap& map, PhasePoint x) {
    return jacobian_with_steps(map, x, 1e-5 * (1.0 + std::abs(x.q)), 1e-5 * (1.0 + std::abs(x.p)));
}

double jacobian_check(const PhaseMap& map, PhasePoint x, double h) {
    if (!(h > 0.0)) throw InvalidStepError("jacobian step h must be > 0");
    return jacobian_with_steps(map, x, h, h);
}

std::string orbit_to_csv(const Orbit& orbit) {
    std::string out = "t,q,p\n";
    const double h = orbit.time_step();
    const auto& s = orbit.samples();
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += format_double(static_cast<double>(k) * h) + "," + format_double(s[k].q) + "," +
               format_double(s[k].p) + "\n";
    }
    return out;
}

std::string orbit_sidecar_json(const Orbit& orbit) {
    std::ostringstream out;
    out << "{\"T\": " << format_double(orbit.period()) << ", \"E\": " << format_double(orbit.energy())
        << ", \"I\": " << format_double(orbit.action()) << ", \"omega\": " << format_double(orbit.omega())
        << ", \"samples\": " << orbit.nodes() << "}\n";
    return out.str();
}

}  // namespace matmech
