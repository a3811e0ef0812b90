#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gridpt {

// Library error carrying a stable machine-readable code ("singular_matrix",
// "invalid_network", ...) next to the human-readable message. The CLI turns
// these into JSON on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace gridpt
