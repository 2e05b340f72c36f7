#include "qc3d/util.hpp"

#include <charconv>
#include <cstring>
#include <thread>

namespace qc3d {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t nthreads = threads > 1 ? static_cast<std::size_t>(threads) : 1;
    nthreads = std::min(nthreads, count);
    if (nthreads <= 1) {
        fn(0, count);
        return;
    }
    const std::size_t chunk = (count + nthreads - 1) / nthreads;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(begin + chunk, count);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qc3d
