// errors.hpp: exception types shared by the simulator modules

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace catres {

// Photon-number cutoff too small for the requested state or trajectory.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Step-halving check of a fixed-step integrator did not settle.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dispersive phase requested with a zero detuning.
class ZeroDetuning : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A density matrix left the Hermitian / unit-trace / PSD set.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario file or flag could not be interpreted.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by run_trajectory; carries the index of the sample that failed.
class TrajectoryError : public std::runtime_error {
public:
    TrajectoryError(std::size_t sample, const std::string& what)
        : std::runtime_error("sample " + std::to_string(sample) + ": " + what), sample_(sample) {}
    std::size_t sample() const noexcept { return sample_; }

private:
    std::size_t sample_;
};

}  // namespace catres
