#pragma once

#include <stdexcept>
#include <string>

namespace diffpos {

// Argument outside an operation's domain (floor index, degenerate edge, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The law-of-diffraction point falls beyond the edge extremities.
class NoEdgeDiffraction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Neither quadratic root satisfies the law of diffraction.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Jacobian requested where the discriminant vanishes.
class NearSingularDerivative : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Too many NoEdgeDiffraction discards while sampling biases.
class GeometryWarning : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MeasurementUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace diffpos
