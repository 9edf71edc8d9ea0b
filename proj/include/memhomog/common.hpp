#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace memhomog {

// Invalid configuration or input; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (divergence, degeneracy, non-finite data); exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double two_pi = 6.283185307179586476925286766559;

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// Symmetric 2x2 matrix stored as (a11, a12, a22).
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    Mat2() = default;
    Mat2(double m11, double m12, double m22) : a11(m11), a12(m12), a22(m22) {}

    static Mat2 identity() { return {1.0, 0.0, 1.0}; }

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
    double quad(Vec2 v) const { return v.dot(apply(v)); }
    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }

    Mat2 operator+(Mat2 o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
    Mat2 operator-(Mat2 o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
    Mat2& operator+=(Mat2 o) { a11 += o.a11; a12 += o.a12; a22 += o.a22; return *this; }

    // Eigenvalues sorted ascending.
    std::array<double, 2> eigenvalues() const {
        const double m = 0.5 * trace();
        const double d = std::sqrt(std::max(0.0, m * m - det()));
        return {m - d, m + d};
    }
};

inline Mat2 operator*(double s, Mat2 m) { return m * s; }

// Worker cap: MEMHOMOG_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("MEMHOMOG_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Static-chunked parallel loop over [0, n). Results must be written to
// disjoint slots so the reduction order stays deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace memhomog
