#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdmix {

// exit-code aligned error kinds
enum class ErrorKind { invalid_argument = 2, validity = 3, nonconvergence = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(ErrorKind::invalid_argument, msg); }
[[noreturn]] inline void fail_convergence(const std::string& msg) { throw Error(ErrorKind::nonconvergence, msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

// Neumaier compensated accumulator
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    KahanSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double ksum(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value();
}

inline double sqr(double x) { return x * x; }

// log(exp(a) + exp(b)) without overflow
inline double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

}  // namespace bdmix
