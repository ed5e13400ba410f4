// One-degree-of-freedom Hamiltonian systems.
//
// H(q, p) = p^2 / (2M) + V(q). Orbits are launched from the right turning
// point with p = 0, so the angle variable is theta = omega t with theta(0) = 0
// on every orbit. The Poisson bracket uses the sign convention
// {a, b} = a_p b_q - a_q b_p, for which {p, q} = +1.

#pragma once

#include "matmech/fourier_algebra.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace matmech {

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

enum class PotentialFamily { harmonic, quartic, pendulum, polynomial };

class HamiltonianSystem {
public:
    /// V = M omega0^2 q^2 / 2
    static HamiltonianSystem harmonic(double mass = 1.0, double omega0 = 1.0);
    /// V = lambda q^4 / 4
    static HamiltonianSystem quartic(double lambda, double mass = 1.0);
    /// V = (g / L)(1 - cos q); only librating orbits are supported.
    static HamiltonianSystem pendulum(double g, double length, double mass = 1.0);
    /// V = sum_k coeffs[k] q^k; must have a local minimum.
    static HamiltonianSystem polynomial(std::vector<double> coeffs, double mass = 1.0);

    /// Parses `family:key=value[,key=value]*`. Throws PotentialSpecError.
    static HamiltonianSystem parse(std::string_view spec);
    /// Normalized spec: every key of the family, in canonical order, values at %.17g.
    std::string spec() const;

    PotentialFamily family() const noexcept { return family_; }
    double mass() const noexcept { return mass_; }
    /// Family parameter by key (e.g. "omega0", "lambda"); throws for unknown keys.
    double parameter(std::string_view key) const;

    double potential(double q) const;
    /// F = -V'(q)
    double force(double q) const;
    double curvature(double q) const;  ///< V''(q)
    double hamiltonian(PhasePoint x) const;

    double minimum_position() const noexcept { return q_min_; }
    double minimum_energy() const { return potential(q_min_); }
    /// Lowest energy at which orbits stop being closed; +inf if every energy is bound.
    double separatrix_energy() const noexcept { return separatrix_; }
    std::optional<double> barrier_left() const noexcept { return barrier_left_; }
    std::optional<double> barrier_right() const noexcept { return barrier_right_; }

private:
    HamiltonianSystem(PotentialFamily family, std::map<std::string, double> params, double mass);

    double polynomial_derivative(double q, int order) const;
    void locate_extrema();

    PotentialFamily family_;
    std::map<std::string, double> params_;
    std::vector<double> poly_;  // polynomial family only
    double mass_;
    double q_min_ = 0.0;
    std::optional<double> barrier_left_;
    std::optional<double> barrier_right_;
    double separatrix_ = std::numeric_limits<double>::infinity();
};

/// One kick-drift-kick (velocity Verlet) step. The map is a composition of
/// two shears in phase space, so it preserves area exactly (unit Jacobian).
/// Throws InvalidStepError unless dt > 0.
PhasePoint hamiltonian_flow_step(const HamiltonianSystem& sys, PhasePoint x, double dt);

struct OrbitOptions {
    double dt = 1e-4;       ///< integration step bound
    int samples = 4096;     ///< uniform samples per period used for quadrature
    int max_refinements = 3;  ///< dt is quartered while drift/closure invariants fail
    /// Absolute bound on the O(dt^2) action bias, estimated as 1.5 * drift * I; when
    /// exceeded the orbit is redone once with dt shrunk to match. Zero disables.
    double action_tolerance = 5e-9;
};

class Orbit {
public:
    /// The zero-area orbit sitting at the potential minimum.
    static Orbit degenerate(const HamiltonianSystem& sys);

    /// samples[0..K] spaced period/K apart, samples[K] closing the loop.
    Orbit(std::vector<PhasePoint> samples, double period, double energy, double mass);

    const std::vector<PhasePoint>& samples() const noexcept { return samples_; }
    /// Number of quadrature nodes K (the closing sample is excluded).
    std::size_t nodes() const noexcept { return samples_.size() > 1 ? samples_.size() - 1 : 1; }
    double period() const noexcept { return period_; }
    double energy() const noexcept { return energy_; }
    double mass() const noexcept { return mass_; }
    double action() const noexcept { return action_; }
    double restricted_action() const noexcept;  ///< J = 2 pi I
    /// 2 pi / T; zero for the degenerate orbit.
    double omega() const noexcept { return omega_; }
    double time_step() const noexcept;
    bool is_degenerate() const noexcept { return samples_.size() <= 1; }

    /// max |H - E| / (E - V_min) along the samples.
    double energy_drift(const HamiltonianSystem& sys) const;
    /// Phase-space distance between first and last sample.
    double closure_error() const;

private:
    std::vector<PhasePoint> samples_;
    double period_;
    double energy_;
    double mass_;
    double action_;
    double omega_;
};

/// Integrates the closed orbit of energy E launched from the right turning
/// point. Throws NonOscillatoryError when E is not strictly between the
/// potential minimum and the separatrix energy.
Orbit find_orbit(const HamiltonianSystem& sys, double energy, double dt_hint,
                 int samples = OrbitOptions{}.samples);
Orbit find_orbit(const HamiltonianSystem& sys, double energy, const OrbitOptions& opts);

/// (1/2pi) closed integral of p dq, evaluated as the time-grid trapezoid of p qdot = p^2/M.
double action(const Orbit& orbit);

struct ActionSolution {
    double energy;
    Orbit orbit;
};

/// Inverts the numerical action map I(E) by safeguarded Newton iteration (dI/dE = T / 2pi).
/// I = 0 returns the degenerate orbit. Throws NonOscillatoryError beyond the separatrix.
/// energy_guess, when given, seeds the iteration (e.g. extrapolated from a neighbouring level).
ActionSolution solve_action(const HamiltonianSystem& sys, double action, const OrbitOptions& opts = {},
                            std::optional<double> energy_guess = std::nullopt);

double energy_at_action(const HamiltonianSystem& sys, double action, const OrbitOptions& opts = {});

/// Central difference (E(I + dI) - E(I - dI)) / (2 dI). Throws InvalidStepError for dI == 0
/// or I - |dI| < 0.
double frequency_from_action(const HamiltonianSystem& sys, double action, double d_action,
                             const OrbitOptions& opts = {});

/// A named real function on phase space.
class Observable {
public:
    Observable(std::string name, std::function<double(PhasePoint)> fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}

    const std::string& name() const noexcept { return name_; }
    double operator()(PhasePoint x) const { return fn_(x); }

private:
    std::string name_;
    std::function<double(PhasePoint)> fn_;
};

/// Registered observables: q, p, q2 (q^2), p2 (p^2), H (needs a system), and
/// polynomials `poly:q<i>p<j>=c[,q<i>p<j>=c]*` meaning sum c q^i p^j.
/// Throws UnknownObservableError.
Observable make_observable(std::string_view name, const HamiltonianSystem* sys = nullptr);

/// Polynomial observable sum coeffs[(i, j)] q^i p^j.
Observable polynomial_observable(std::map<std::pair<int, int>, double> coeffs);

/// a(n) = (1/T) int_0^T a(q(t), p(t)) exp(-i n omega t) dt on the uniform sample grid,
/// for n_min <= n <= n_max. Requires a nondegenerate orbit.
FourierSeries orbit_fourier_coefficients(const Orbit& orbit, const Observable& observable,
                                         int n_min, int n_max);

/// Central-difference {a, b} = a_p b_q - a_q b_p with steps 1e-5 (1 + |q|), 1e-5 (1 + |p|).
double poisson_bracket(const Observable& a, const Observable& b, PhasePoint x);
/// Same with an explicit absolute step h > 0 on both coordinates.
double poisson_bracket(const Observable& a, const Observable& b, PhasePoint x, double h);

/// The observable x -> {a, b}(x), by the default-step central differences.
Observable bracket_observable(const Observable& a, const Observable& b);

/// A named map of the plane, (q, p) -> (Q, P).
class PhaseMap {
public:
    PhaseMap(std::string name, std::function<PhasePoint(PhasePoint)> fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}

    const std::string& name() const noexcept { return name_; }
    PhasePoint operator()(PhasePoint x) const { return fn_(x); }

private:
    std::string name_;
    std::function<PhasePoint(PhasePoint)> fn_;
};

PhaseMap identity_map();
/// (q, p) -> (sq q, sp p); canonical only when sq sp == 1.
PhaseMap scaling_map(double sq, double sp);
/// (theta, I) -> (sqrt(2I/(M w)) cos theta, -sqrt(2 I M w) sin theta).
PhaseMap harmonic_action_angle_map(double mass, double omega0);
/// One hamiltonian_flow_step of length dt.
PhaseMap flow_map(const HamiltonianSystem& sys, double dt);

/// Registered names: identity, scale-q (factor 2), harmonic-action-angle (uses the
/// harmonic parameters of sys), flow-step (step dt). Throws UnknownMapError.
PhaseMap make_phase_map(std::string_view name, const HamiltonianSystem& sys, double dt = 1e-2);

/// Finite-difference determinant d(Q,P)/d(q,p) at x with steps 1e-5 (1 + |coordinate|).
double jacobian_check(const PhaseMap& map, PhasePoint x);
/// Same with an explicit absolute step h > 0.
double jacobian_check(const PhaseMap& map, PhasePoint x, double h);

/// Orbit export: CSV `t,q,p` over all K + 1 samples (closing point included) and the JSON
/// sidecar {T, E, I, omega, samples = K}.
std::string orbit_to_csv(const Orbit& orbit);
std::string orbit_sidecar_json(const Orbit& orbit);

}  // namespace matmech
