#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace rbo {

/// Thrown when an operation is asked to act outside its hypotheses.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class CheckStatus { passed, violated, precondition_unmet };

inline const char* to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::passed: return "passed";
    case CheckStatus::violated: return "violated";
    case CheckStatus::precondition_unmet: return "precondition_unmet";
    }
    return "?";
}

/// Outcome of an inequality or identity check over one or more instances.
///
/// Each instance contributes a margin (bound minus observed; an identity
/// contributes minus its residual). An instance is a violation when its
/// margin is below -tolerance. Reports merge associatively.
struct CheckReport {
    std::string name;
    std::size_t instances = 0;
    std::size_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    bool precondition_failed = false;
    std::string diagnostic;
    std::map<std::string, std::string> parameters;
    std::map<std::string, double> values;

    CheckReport() = default;
    explicit CheckReport(std::string n, double tol = 0.0) : name(std::move(n)), tolerance(tol) {}

    static CheckReport unmet(std::string n, std::string why) {
        CheckReport r(std::move(n));
        r.precondition_failed = true;
        r.diagnostic = std::move(why);
        return r;
    }

    void record(double margin) {
        ++instances;
        worst_margin = std::min(worst_margin, margin);
        if (!(margin >= -tolerance)) ++violations; // NaN counts as a violation
    }

    /// Strict inequality: a zero margin is a violation.
    void record_strict(double margin) {
        ++instances;
        worst_margin = std::min(worst_margin, margin);
        if (!(margin > 0.0)) ++violations;
    }

    void merge(const CheckReport& other) {
        instances += other.instances;
        violations += other.violations;
        worst_margin = std::min(worst_margin, other.worst_margin);
        tolerance = std::max(tolerance, other.tolerance);
        if (other.precondition_failed) {
            precondition_failed = true;
            if (diagnostic.empty()) diagnostic = other.diagnostic;
        }
        for (const auto& [k, v] : other.parameters) parameters.emplace(k, v);
        for (const auto& [k, v] : other.values) values.emplace(k, v);
    }

    CheckStatus status() const {
        if (precondition_failed) return CheckStatus::precondition_unmet;
        return violations == 0 ? CheckStatus::passed : CheckStatus::violated;
    }
    bool ok() const { return status() == CheckStatus::passed; }

    void set(const std::string& key, double value) { values[key] = value; }
    void set(const std::string& key, std::string value) { parameters[key] = std::move(value); }
    double value(const std::string& key) const {
        auto it = values.find(key);
        return it == values.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }
};

} // namespace rbo
