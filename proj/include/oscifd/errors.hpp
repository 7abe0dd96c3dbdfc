#pragma once

#include <stdexcept>
#include <string>

namespace oscifd {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// tanc evaluated too close to an odd multiple of pi/2.
class PoleError : public Error {
public:
    explicit PoleError(const std::string& what) : Error(what) {}
};

/// A root bracket contained no sign change.
class NoRootInBracket : public Error {
public:
    explicit NoRootInBracket(const std::string& what) : Error(what) {}
};

/// |cos(alpha)| too small at a planned root; Crank-Nicolson divides by cos(alpha).
class CosineTooSmall : public Error {
public:
    explicit CosineTooSmall(const std::string& what) : Error(what) {}
};

/// Iterative solver exceeded its iteration budget.
class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what) : Error(what) {}
};

/// |psi(beta)| below the division guard during root solving.
class PsiTooSmall : public Error {
public:
    explicit PsiTooSmall(const std::string& what) : Error(what) {}
};

/// Leapfrog stability bound exceeded theta_max.
class StabilityViolation : public Error {
public:
    explicit StabilityViolation(const std::string& what) : Error(what) {}
};

/// Crank-Nicolson fixed-point iteration failed to contract below tolerance.
class FixedPointDivergence : public Error {
public:
    explicit FixedPointDivergence(const std::string& what) : Error(what) {}
};

/// A time step produced NaN/Inf values (blow-up).
class NonFiniteState : public Error {
public:
    explicit NonFiniteState(const std::string& what) : Error(what) {}
};

/// Error measurement requested between misaligned grids.
class GridMisaligned : public Error {
public:
    explicit GridMisaligned(const std::string& what) : Error(what) {}
};

/// Order fit attempted on degenerate abscissae.
class DegenerateFit : public Error {
public:
    explicit DegenerateFit(const std::string& what) : Error(what) {}
};

/// DFT requested for a size the implementation cannot handle.
class UnsupportedGridSize : public Error {
public:
    explicit UnsupportedGridSize(const std::string& what) : Error(what) {}
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace oscifd
