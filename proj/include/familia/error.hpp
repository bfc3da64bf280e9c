#pragma once

#include <stdexcept>
#include <string>

namespace familia {

// All data/model failures surface as this type; the CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace familia
