#include "scfg/parallel.hpp"

#include <cstdlib>
#include <string>

namespace scfg {

std::size_t resolve_threads(std::optional<std::size_t> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("SCFG_FORGE_THREADS")) {
    try {
      auto v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace scfg
