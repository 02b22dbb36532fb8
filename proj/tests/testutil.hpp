#pragma once

#include <string>

#include "etsx/common.hpp"
#include "etsx/ir_parse.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& rel) {
  return std::string(ETSX_FIXTURE_DIR) + "/" + rel;
}

inline std::string fixture_text(const std::string& rel) {
  return etsx::read_file(fixture_path(rel));
}

inline etsx::ir::Program fixture_program(const std::string& rel) {
  return etsx::ir::parse_program(fixture_text(rel));
}

}  // namespace testutil
