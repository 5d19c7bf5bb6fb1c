#include "dynlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dynlab {

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() {
    if (const int t = g_threads.load(); t > 0) return t;
    if (const char* env = std::getenv("DYNLAB_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t > 0) return t;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_thread_count(int threads) { g_threads.store(threads > 0 ? threads : 0); }

}  // namespace dynlab
