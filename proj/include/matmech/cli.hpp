// Command-line front end wiring the core modules into experiments.

#pragma once

#include "matmech/quantization.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace matmech::cli {

/// Parsed invocation. Fields irrelevant to `command` keep their defaults.
struct ExperimentConfig {
    std::string command;
    std::string potential = "harmonic:M=1,omega0=1";
    double hbar = 1.0;
    int levels = 16;
    int band = 2;
    Convention convention = Convention::upper;
    std::string observable = "q";
    std::string a = "p";
    std::string b = "q";
    int ell = 0;
    long m = 10;
    long k = 1;
    std::optional<double> energy;
    std::optional<double> action;
    int n_min = -8;
    int n_max = 8;
    double rydberg = RydbergModel{}.rydberg;
    double light_speed = RydbergModel{}.light_speed;
    int harmonics = 24;
    double dt = OrbitOptions{}.dt;
    int samples = OrbitOptions{}.samples;
    std::string input;
    std::string out;
    std::string meta;

    bool operator==(const ExperimentConfig&) const = default;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses the arguments after the program name. Throws UsageError on a bad
/// command line and PotentialSpecError on a malformed potential. Help requests
/// are not handled here; see run().
ExperimentConfig parse(const std::vector<std::string>& args);

/// Canonical command line for cfg: the command followed by every flag that
/// command reads, in a fixed order, numbers at %.17g and the potential spec
/// normalized. render(parse(render(c))) == render(c).
std::string render(const ExperimentConfig& cfg);

/// Executes one experiment. Returns 0 on success, 1 on domain errors (error
/// name on err) and 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace matmech::cli
