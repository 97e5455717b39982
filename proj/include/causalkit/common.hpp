#pragma once

// Shared plumbing: error types, deterministic RNG streams, normal-distribution
// helpers and a tiny env-configurable parallel loop. Everything downstream
// assumes the RNG here is stable across platforms and runs.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalkit {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Estimation/data errors. CLI maps these to exit code 1.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad invocation or configuration. CLI maps these to exit code 2.
class UsageError : public std::runtime_error {
  public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// splitmix64 streams. std:: distributions are implementation-defined, so all
// sampling (uniform, normal, shuffles) is spelled out here; identical seeds
// give identical output everywhere.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x5deece66dULL) {
        // burn one step so seed=0 does not start at a fixed point
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, bound)
    std::uint64_t uniform_int(std::uint64_t bound) {
        // multiply-shift; bias is negligible for bound << 2^64
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // standard normal via Box-Muller (one value per pair of uniforms)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent substream tagged by an integer (fold index, tree index, ...).
    Rng fork(std::uint64_t tag) const { return Rng(mix_u64(state_, tag)); }

  private:
    std::uint64_t state_;
};

// Counter-based stream for the simulator: the draw for (node, row, slot) is a
// pure function of the seed, so block-parallel generation and do-intervention
// pairing both see the same noise.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t node_index)
        : key_(mix_u64(seed, 0xABCDEF1234567890ULL + node_index)) {}

    double uniform(std::uint64_t row, std::uint64_t slot = 0) const {
        std::uint64_t s = mix_u64(key_, mix_u64(row, slot));
        return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    }

    double normal(std::uint64_t row, std::uint64_t slot = 0) const {
        double u1 = uniform(row, 2 * slot);
        double u2 = uniform(row, 2 * slot + 1);
        while (u1 <= 0.0) u1 = 0.5 * (u1 + 1e-300);  // cannot occur in practice
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    bool bernoulli(double p, std::uint64_t row, std::uint64_t slot = 0) const {
        return uniform(row, slot) < p;
    }

  private:
    std::uint64_t key_;
};

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// two-sided p-value of a z statistic
inline double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

// Inverse normal CDF, Wichura's AS241 (double precision).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw Error("mean: empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// sample variance (ddof = 1); 0 for a single element
inline double sample_variance(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0) throw Error("sample_variance: empty vector");
    if (n == 1) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
}

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// printf-style formatting (no std::format on this toolchain)
inline std::string strfmt(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return std::string(buf);
}

// float formatting used by every CSV/report writer: 17 significant digits
// round-trips doubles exactly
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// Worker pool
//
// CAUSALKIT_THREADS selects the worker count; unset or 1 means sequential.
// Results must be written into index-addressed slots so scheduling cannot
// change output.
// ---------------------------------------------------------------------------

inline int worker_threads() {
    const char* env = std::getenv("CAUSALKIT_THREADS");
    if (env == nullptr) return 1;
    const int n = std::atoi(env);
    return n > 1 ? n : 1;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int threads = worker_threads();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futs;
    futs.reserve(n);
    std::size_t launched = 0;
    while (launched < n) {
        const std::size_t batch =
            std::min<std::size_t>(static_cast<std::size_t>(threads), n - launched);
        futs.clear();
        for (std::size_t b = 0; b < batch; ++b) {
            futs.push_back(std::async(std::launch::async, fn, launched + b));
        }
        for (auto& f : futs) f.get();
        launched += batch;
    }
}

}  // namespace causalkit
