#include "shufreg/parallel.hpp"

#include <cstdlib>
#include <string>

namespace shufreg {

unsigned default_workers() {
  if (const char* env = std::getenv("SHUFREG_WORKERS"); env != nullptr && *env != '\0') {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<unsigned>(value);
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace shufreg
