#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssesam {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

// Precondition guard; violations are programming/config errors, not numerics.
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// SplitMix64 output function. Used both as the core PRNG step and to fan a
// master seed out into independent sub-streams (dataset, init, shuffle, ...),
// so one config seed pins every random draw in a run.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Self-contained PRNG: identical streams on every platform/toolchain, unlike
// std::normal_distribution whose output is implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }
    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double normal();                       // N(0, 1), Box-Muller
    int uniform_int(int n);                // {0, ..., n-1}, unbiased

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
            std::swap(v[i], v[static_cast<size_t>(uniform_int(i + 1))]);
    }

    Vector normal_vector(int dim);

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Shortest decimal form that round-trips a double (17 significant digits).
// All machine-readable artifacts go through this.
std::string format_full(double x);

}  // namespace ssesam
