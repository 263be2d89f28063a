#include "lebesgue/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lebesgue {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LEBESGUE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace lebesgue
