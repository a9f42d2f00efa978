#pragma once

#include <string>

#include "cdc/knowledge_base.hpp"

namespace cdc::testing {

inline std::string fixture(const std::string& name) { return std::string(CDC_FIXTURE_DIR) + "/" + name; }

inline KnowledgeBase load_fixture(const std::string& name, const LoadOptions& opt = {}) {
  return load_kb_files({fixture(name)}, opt);
}

}  // namespace cdc::testing
