#include "specdegen/parallel.hpp"

#include <cstdlib>
#include <string>

namespace specdegen {

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPECDEGEN_THREADS")) {
        try {
            long v = std::stol(env);
            if (v >= 1) return (unsigned)std::min<long>(v, 256);
        } catch (...) {
        }
    }
    return hw;
}

}  // namespace specdegen
