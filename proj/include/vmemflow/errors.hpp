#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vmemflow {

/// Linear or nonlinear solver failed to reach its residual target.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

/// Nonlinear iteration diverged or hit the iteration cap; carries the history.
class IterationFailure : public std::runtime_error {
public:
    IterationFailure(const std::string& what, std::vector<double> residual_history)
        : std::runtime_error(what), history_(std::move(residual_history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Newton's inner linear (Jacobian) solve failed; reported distinctly from
/// outer-iteration divergence.
class JacobianSolveError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Sum-of-exponentials construction could not meet the requested tolerance
/// within the mode budget.
class SoeFitError : public std::runtime_error {
public:
    SoeFitError(const std::string& what, double achieved_rel_error, int modes)
        : std::runtime_error(what), achieved_(achieved_rel_error), modes_(modes) {}
    double achieved_rel_error() const { return achieved_; }
    int modes() const { return modes_; }

private:
    double achieved_;
    int modes_;
};

/// Decay fit rejected its input (nonpositive samples in the window).
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, std::vector<std::size_t> offending)
        : std::runtime_error(what), offending_(std::move(offending)) {}
    const std::vector<std::size_t>& offending_indices() const { return offending_; }

private:
    std::vector<std::size_t> offending_;
};

/// Eigenvalue iteration hit its cap; carries the last estimate.
class EigenIterationError : public std::runtime_error {
public:
    EigenIterationError(const std::string& what, double last_estimate)
        : std::runtime_error(what), last_(last_estimate) {}
    double last_estimate() const { return last_; }

private:
    double last_;
};

/// NaN or blow-up detected during time stepping; aborts with the step index.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, long step)
        : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

/// Config parsing/validation problem; carries the line (0 if n/a) and key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, std::string key = {})
        : std::runtime_error(what), line_(line), key_(std::move(key)) {}
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

} // namespace vmemflow
