#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

namespace rbo {

/// Evaluates fn(0), ..., fn(count-1) on up to `workers` threads. Results are
/// stored by index, so any reduction over the returned vector is independent
/// of the worker count and of scheduling.
template <class Fn>
auto map_realizations(std::size_t count, unsigned workers, Fn&& fn) {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<std::optional<Result>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (n == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<Result> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

/// Neumaier-compensated sum, accumulated in index order.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
    double variance = 0.0; // unbiased sample variance
    std::size_t count = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr r;
    r.count = xs.size();
    if (xs.empty()) return r;
    r.mean = compensated_sum(xs) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        CompensatedSum sq;
        for (double x : xs) sq.add((x - r.mean) * (x - r.mean));
        r.variance = sq.value() / static_cast<double>(xs.size() - 1);
        r.std_error = std::sqrt(r.variance / static_cast<double>(xs.size()));
    }
    return r;
}

/// Wilson score interval for a binomial proportion at z standard deviations.
struct Proportion {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    std::size_t successes = 0;
    std::size_t trials = 0;
};

inline Proportion wilson(std::size_t successes, std::size_t trials, double z = 3.0) {
    Proportion p{0.0, 0.0, 1.0, successes, trials};
    if (trials == 0) return p;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (ph + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
    p.estimate = ph;
    p.lower = std::max(0.0, centre - half);
    p.upper = std::min(1.0, centre + half);
    return p;
}

} // namespace rbo
