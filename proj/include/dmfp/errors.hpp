#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dmfp {

/// Prior violates a structural invariant (non-positive alpha, bad discount, ...).
class invalid_prior_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Root bracket endpoints do not straddle a sign change.
class bracketing_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Panel-doubling quadrature failed to meet tolerance within its budget.
class quadrature_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Data has no usable variation (e.g. zero sample variance where one is required).
class degenerate_data_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Moment recursion parameters outside the stable region.
class instability_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// File I/O failure, message carries the offending path.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config rejection; carries one message per offending field.
class config_error : public std::runtime_error {
public:
    explicit config_error(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

    const std::vector<std::string>& field_errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string out = "config error";
        for (const auto& e : errors) {
            out += "\n  - ";
            out += e;
        }
        return out;
    }

    std::vector<std::string> errors_;
};

}  // namespace dmfp
