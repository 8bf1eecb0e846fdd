#include "dmfp/parallel.hpp"

#include <cstdlib>
#include <string>

namespace dmfp {

int worker_count() {
    if (const char* env = std::getenv("DMFP_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return std::min(n, 256);
        } catch (...) {
            // fall through to the hardware default on unparsable values
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace dmfp
