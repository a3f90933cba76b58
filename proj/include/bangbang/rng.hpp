#pragma once

// Reproducible random streams and running statistics.
//
// Every replication r of a run with seed s draws from its own engine, seeded
// from (s, domain, r) through std::seed_seq. Both std::mt19937_64 and
// std::seed_seq are fully specified by the standard, and uniforms/normals are
// derived from raw bits here rather than through <random> distributions, so
// streams are identical across platforms and independent of thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

namespace bangbang {

inline constexpr const char* kRngName = "mt19937_64+seed_seq/v1";

/// Stream domains keep different consumers of one seed apart.
enum class StreamDomain : std::uint32_t {
    coupling = 1,
    mc_rule = 2,
    time_reversal_p = 3,
    time_reversal_q = 4,
    bm_sampler = 5,
    bm_paths = 6,
};

class StreamRng {
public:
    StreamRng(std::uint64_t seed, StreamDomain domain, std::uint64_t stream, std::uint32_t substream = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32), substream};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1), safe for log().
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal (Box-Muller, second variate cached).
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Welford accumulator; merge() combines chunks (Chan et al.).
struct RunningStats {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x)
    {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStats& o)
    {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_of_mean() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t replications = 0;
};

inline constexpr std::uint64_t kChunkSize = 4096;

/// Runs fn(first, last) -> Result over fixed replication chunks on a pool of
/// threads and returns the per-chunk results in chunk order. The partition
/// depends only on `replications`, never on the thread count.
template <class Result, class Fn>
std::vector<Result> map_chunks(std::uint64_t replications, Fn&& fn)
{
    const std::uint64_t n_chunks = (replications + kChunkSize - 1) / kChunkSize;
    std::vector<Result> out(n_chunks);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(1U, std::thread::hardware_concurrency()), n_chunks));
    auto work = [&](unsigned id) {
        for (std::uint64_t c = id; c < n_chunks; c += workers)
            out[c] = fn(c * kChunkSize, std::min(replications, (c + 1) * kChunkSize));
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
    }
    return out;
}

} // namespace bangbang
