#include "neurocoarse/parallel.hpp"

#include <cstdlib>
#include <string>

namespace neurocoarse {

int default_thread_count() {
  if (const char* env = std::getenv("NEUROCOARSE_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

int resolve_threads(int requested) {
  return requested > 0 ? requested : default_thread_count();
}

}  // namespace neurocoarse
