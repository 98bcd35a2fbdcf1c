#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace fusesim {

// Kahan-Babuska compensated summation for deterministic, accurate
// accumulation of long power/energy series.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0;
    double c_ = 0;
};

// Shortest round-trip decimal representation; stable across runs, used for
// every number written to CSV/JSON artifacts.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = 0;
    std::sscanf(buf, "%lf", &back);
    for (int prec = 1; prec < 17; ++prec) {
        char s[32];
        std::snprintf(s, sizeof s, "%.*g", prec, v);
        std::sscanf(s, "%lf", &back);
        if (back == v) return s;
    }
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace fusesim
