#pragma once

// Time partitions, interpretation tags, and discretely sampled Brownian
// paths with reproducible bridge refinement. A path owns its seed; values at
// off-grid lambda-points are bridge samples drawn from per-interval
// substreams, so every quantity is a pure function of (seed, partition).

#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kinetic/errors.hpp"
#include "kinetic/linalg.hpp"
#include "kinetic/rng.hpp"

namespace kinetic {

class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<double> times) : times_(std::move(times)) {
        if (times_.size() < 2) throw ParamViolation("partition needs at least two points");
        for (std::size_t j = 1; j < times_.size(); ++j)
            if (!(times_[j] > times_[j - 1]))
                throw ParamViolation("partition times must be strictly increasing");
    }

    static Partition uniform(double a, double b, int n) {
        if (n < 1 || !(b > a)) throw ParamViolation("bad uniform partition");
        std::vector<double> t(n + 1);
        for (int j = 0; j <= n; ++j) t[j] = a + (b - a) * (static_cast<double>(j) / n);
        t[n] = b;
        return Partition(std::move(t));
    }

    const std::vector<double>& times() const { return times_; }
    int intervals() const { return static_cast<int>(times_.size()) - 1; }
    double a() const { return times_.front(); }
    double b() const { return times_.back(); }
    double t(int j) const { return times_[j]; }
    double dt(int j) const { return times_[j] - times_[j - 1]; } // j in 1..n

    double diameter() const {
        double d = 0;
        for (std::size_t j = 1; j < times_.size(); ++j)
            d = std::max(d, times_[j] - times_[j - 1]);
        return d;
    }

    /// lambda-evaluation point t*_j = lambda t_j + (1 - lambda) t_{j-1}, j in 1..n.
    double lambda_point(int j, double lambda) const {
        return lambda * times_[j] + (1.0 - lambda) * times_[j - 1];
    }

private:
    std::vector<double> times_;
};

/// Evaluation-point parameter of the Riemann-sum stochastic integral.
struct InterpretationTag {
    double lambda = 0.0;

    explicit InterpretationTag(double l) : lambda(l) {
        if (!(l >= 0.0 && l <= 1.0)) throw ParamViolation("lambda must lie in [0,1]");
    }
    static InterpretationTag ito() { return InterpretationTag(0.0); }
    static InterpretationTag stratonovich() { return InterpretationTag(0.5); }
    static InterpretationTag fehlberg() { return InterpretationTag(255.0 / 512.0); }
    static InterpretationTag hk() { return InterpretationTag(1.0); }
};

inline constexpr double fehlberg_lambda = 255.0 / 512.0;

/// Discretely sampled m-dimensional Brownian motion on a partition.
///
/// Invariants: values are the running sums of the stored increments
/// (bit-exact at generation); midpoint refinement keeps every existing
/// grid value bit-identical and inserts bridge samples in between.
class BrownianPath {
public:
    BrownianPath() = default;

    static BrownianPath generate(Partition part, int dim, std::uint64_t seed) {
        BrownianPath w;
        w.part_ = std::move(part);
        w.dim_ = dim;
        w.seed_ = seed;
        const int n = w.part_.intervals();
        w.values_.assign(static_cast<std::size_t>(n + 1) * dim, 0.0);
        w.increments_.assign(static_cast<std::size_t>(n) * dim, 0.0);
        RngStream s(seed, {rng_tag::path_init});
        if (w.part_.a() > 0.0) {
            double sd = std::sqrt(w.part_.a());
            for (int k = 0; k < dim; ++k) w.values_[k] = sd * s.next_normal();
        }
        for (int j = 1; j <= n; ++j) {
            double sd = std::sqrt(w.part_.dt(j));
            for (int k = 0; k < dim; ++k) {
                double inc = sd * s.next_normal();
                w.increments_[static_cast<std::size_t>(j - 1) * dim + k] = inc;
                w.values_[static_cast<std::size_t>(j) * dim + k] =
                    w.values_[static_cast<std::size_t>(j - 1) * dim + k] + inc;
            }
        }
        return w;
    }

    const Partition& partition() const { return part_; }
    int dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }
    int level() const { return level_; }

    /// W at grid point j (component k).
    double value(int j, int k = 0) const {
        return values_[static_cast<std::size_t>(j) * dim_ + k];
    }

    Vec value_vec(int j) const {
        Vec v(dim_);
        for (int k = 0; k < dim_; ++k) v[k] = value(j, k);
        return v;
    }

    /// Increment over interval j (1..n), component k.
    double increment(int j, int k = 0) const {
        return increments_[static_cast<std::size_t>(j - 1) * dim_ + k];
    }

    /// W at the lambda-point of interval j, sampled by a Brownian bridge
    /// conditioned on the interval endpoints. Pure in (seed, level, j, lambda):
    /// repeated calls return the same value.
    double lambda_value(int j, double lambda, int k = 0) const {
        if (lambda == 0.0) return value(j - 1, k);
        if (lambda == 1.0) return value(j, k);
        const double wl = value(j - 1, k), wr = value(j, k);
        const double mean = (1.0 - lambda) * wl + lambda * wr;
        const double sd = std::sqrt(lambda * (1.0 - lambda) * part_.dt(j));
        RngStream s(seed_, {rng_tag::lambda_point, static_cast<std::uint64_t>(level_),
                            std::bit_cast<std::uint64_t>(lambda),
                            static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k)});
        return mean + sd * s.next_normal();
    }

    /// Insert a bridge-sampled midpoint into every interval. Existing grid
    /// values are copied untouched; increments become the new value diffs.
    void refine_midpoints() {
        const int n = part_.intervals();
        std::vector<double> nt(2 * n + 1);
        std::vector<double> nv(static_cast<std::size_t>(2 * n + 1) * dim_);
        for (int j = 0; j <= n; ++j) {
            nt[2 * j] = part_.t(j);
            for (int k = 0; k < dim_; ++k)
                nv[static_cast<std::size_t>(2 * j) * dim_ + k] = value(j, k);
        }
        for (int j = 1; j <= n; ++j) {
            nt[2 * j - 1] = 0.5 * (part_.t(j - 1) + part_.t(j));
            const double sd = 0.5 * std::sqrt(part_.dt(j));
            RngStream s(seed_, {rng_tag::bridge_refine, static_cast<std::uint64_t>(level_),
                                static_cast<std::uint64_t>(j)});
            for (int k = 0; k < dim_; ++k) {
                double mid = 0.5 * (value(j - 1, k) + value(j, k)) + sd * s.next_normal();
                nv[static_cast<std::size_t>(2 * j - 1) * dim_ + k] = mid;
            }
        }
        part_ = Partition(std::move(nt));
        values_ = std::move(nv);
        const int nn = part_.intervals();
        increments_.assign(static_cast<std::size_t>(nn) * dim_, 0.0);
        for (int j = 1; j <= nn; ++j)
            for (int k = 0; k < dim_; ++k)
                increments_[static_cast<std::size_t>(j - 1) * dim_ + k] =
                    value(j, k) - value(j - 1, k);
        ++level_;
    }

    /// Bit-exact view of the same realization on every stride-th grid point.
    static BrownianPath restriction(const BrownianPath& w, int stride) {
        const int n = w.part_.intervals();
        if (stride < 1 || n % stride != 0)
            throw ParamViolation("restriction stride must divide the interval count");
        BrownianPath c;
        std::vector<double> t;
        for (int j = 0; j <= n; j += stride) t.push_back(w.part_.t(j));
        c.part_ = Partition(std::move(t));
        c.dim_ = w.dim_;
        c.seed_ = w.seed_;
        c.level_ = w.level_;
        const int nn = c.part_.intervals();
        c.values_.resize(static_cast<std::size_t>(nn + 1) * c.dim_);
        for (int j = 0; j <= nn; ++j)
            for (int k = 0; k < c.dim_; ++k)
                c.values_[static_cast<std::size_t>(j) * c.dim_ + k] = w.value(j * stride, k);
        c.increments_.resize(static_cast<std::size_t>(nn) * c.dim_);
        for (int j = 1; j <= nn; ++j)
            for (int k = 0; k < c.dim_; ++k)
                c.increments_[static_cast<std::size_t>(j - 1) * c.dim_ + k] =
                    c.values_[static_cast<std::size_t>(j) * c.dim_ + k] -
                    c.values_[static_cast<std::size_t>(j - 1) * c.dim_ + k];
        return c;
    }

private:
    Partition part_;
    int dim_ = 1;
    std::uint64_t seed_ = 0;
    int level_ = 0;
    std::vector<double> values_;     // (n+1) x dim
    std::vector<double> increments_; // n x dim
};

enum class PathStatus { alive, blown_up, absorbed };

inline std::string to_string(PathStatus s) {
    switch (s) {
        case PathStatus::alive: return "alive";
        case PathStatus::blown_up: return "blown_up";
        case PathStatus::absorbed: return "absorbed";
    }
    return "?";
}

/// A discretely sampled d-dimensional trajectory. After a guard trip the
/// status is permanent and no further states are produced; `stop_index`
/// is the last populated grid index.
struct SamplePath {
    Partition part;
    int dim = 1;
    std::vector<double> states; // (stop_index + 1) x dim
    PathStatus status = PathStatus::alive;
    double stop_time = 0.0;
    int stop_index = 0;

    double state(int j, int k = 0) const {
        return states[static_cast<std::size_t>(j) * dim + k];
    }
    Vec state_vec(int j) const {
        Vec v(dim);
        for (int k = 0; k < dim; ++k) v[k] = state(j, k);
        return v;
    }
    int last_index() const { return stop_index; }
};

} // namespace kinetic
