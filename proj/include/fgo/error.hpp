#pragma once

#include <stdexcept>
#include <string>

namespace fgo {

/// Exception carrying a stable machine-parsable error class alongside the
/// human-readable detail. The class slug is what the CLI prints on failure.
class Error : public std::runtime_error {
  public:
    Error(std::string cls, const std::string& detail)
        : std::runtime_error(cls + ": " + detail), cls_(std::move(cls)) {}

    const std::string& error_class() const { return cls_; }

  private:
    std::string cls_;
};

}  // namespace fgo
