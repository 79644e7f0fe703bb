#include "lsv/parallel.hpp"

#include <cstdlib>
#include <string>

#include "lsv/error.hpp"

namespace lsv {

int worker_count() {
    if (const char* env = std::getenv("LSV_THREADS"); env && *env) {
        int n = 0;
        try {
            n = std::stoi(env);
        } catch (const std::exception&) {
            throw InvalidArgument("LSV_THREADS must be a positive integer");
        }
        if (n < 1) throw InvalidArgument("LSV_THREADS must be a positive integer");
        return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace lsv
