#pragma once

#include <stdexcept>
#include <string>

namespace eids {

// Error taxonomy shared by library and CLI. The CLI maps these to exit
// codes: io_error -> 2, contract_error -> 3, config_error -> 4.

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct contract_error : std::runtime_error {
  explicit contract_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace eids
